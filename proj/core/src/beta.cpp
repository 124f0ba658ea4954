#include "msgeo/beta.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "msgeo/content.hpp"
#include "msgeo/optimize.hpp"
#include "msgeo/parallel.hpp"
#include "msgeo/rng.hpp"

namespace msgeo {

namespace {

constexpr std::uint64_t kBetaSeed = 0x6265746153656564ull;
constexpr int kQuantileCap = 512;
constexpr int kPcaIters = 160;
constexpr int kRestarts = 50;
constexpr int kRestartIters = 40;
constexpr int kPolishIters = 120;
constexpr int kOptimizeSampleCap = 320;  // plane search subsample; values are full-set
// normalized distances at roundoff scale are treated as on-plane
constexpr double kZeroDist = 1e-9;

Mat gather(const PointCloud& cloud, const std::vector<int>& idx) {
  Mat out(static_cast<Eigen::Index>(idx.size()), cloud.n());
  for (std::size_t i = 0; i < idx.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = cloud.points().row(idx[i]);
  return out;
}

Plane plane_from_theta(const Vec& theta, const Vec& centroid, double r, int d, int n) {
  Plane p;
  p.base = centroid + r * theta.head(n);
  Mat raw(d, n);
  for (int i = 0; i < d; ++i)
    for (int c = 0; c < n; ++c) raw(i, c) = theta[n + i * n + c];
  p.frame = orthonormal_rows(raw);
  return p;
}

// PCA initialization + Nelder-Mead refinement + seeded random restarts.
// Always returns a concrete plane, so downstream values are upper bounds of
// the true infimum.
Plane optimize_plane(const Mat& bpts, int d, double r, std::uint64_t seed,
                     const std::function<double(const Plane&)>& objective,
                     double good_enough = 0.0) {
  const int n = static_cast<int>(bpts.cols());
  const Vec centroid = bpts.colwise().mean().transpose();
  auto f = [&](const Vec& theta) { return objective(plane_from_theta(theta, centroid, r, d, n)); };

  const Plane pca = fit_plane(bpts, Vec(), d);
  Vec theta0 = Vec::Zero(n + d * n);
  theta0.head(n) = (pca.base - centroid) / r;
  for (int i = 0; i < d; ++i)
    for (int c = 0; c < n; ++c) theta0[n + i * n + c] = pca.frame(i, c);

  NelderMeadOptions main_opts;
  main_opts.max_iter = kPcaIters;
  auto best = nelder_mead(f, theta0, main_opts);

  // restarts cannot improve below the sampling floor; skip them there
  if (best.value > good_enough) {
    Rng rng(seed);
    NelderMeadOptions probe_opts;
    probe_opts.max_iter = 12;
    NelderMeadOptions restart_opts;
    restart_opts.max_iter = kRestartIters;
    for (int t = 0; t < kRestarts; ++t) {
      Vec theta(n + d * n);
      for (int i = 0; i < n; ++i) theta[i] = 0.3 * rng.gaussian();
      for (int i = n; i < theta.size(); ++i) theta[i] = rng.gaussian();
      // short probe first; only promising starts get the full descent
      auto res = nelder_mead(f, theta, probe_opts);
      if (res.value <= 3.0 * best.value || res.value <= good_enough)
        res = nelder_mead(f, res.x, restart_opts);
      if (res.value < best.value) best = res;
    }
    NelderMeadOptions polish_opts;
    polish_opts.max_iter = kPolishIters;
    const auto polished = nelder_mead(f, best.x, polish_opts);
    if (polished.value < best.value) best = polished;
  }
  return plane_from_theta(best.x, centroid, r, d, n);
}

// Exact/bracketed evaluation of int_0^1 H(t) t^(p-1) dt for the step function
// H(t) = dyadic content of the points at normalized plane distance > t. All
// superlevel contents share the lattice of the full in-ball set.
struct IntegralBracket {
  double lower = 0.0;
  double upper = 0.0;
  double mid() const { return 0.5 * (lower + upper); }
};

IntegralBracket content_integral(const Mat& bpts, const Vec& ndist, ContentAccumulator& acc,
                                 double p, int d) {
  (void)d;
  acc.reset();
  static thread_local std::vector<int> order;
  static thread_local std::vector<double> distinct, cuts, h_gt, h_ge;
  order.clear();
  for (int i = 0; i < ndist.size(); ++i)
    if (ndist[i] > kZeroDist) order.push_back(i);
  if (order.empty()) return {};
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return ndist[a] > ndist[b] || (ndist[a] == ndist[b] && a < b);
  });

  // ascending distinct values and quantile cuts (always keeping the maximum)
  distinct.clear();
  for (int i = static_cast<int>(order.size()) - 1; i >= 0; --i) {
    const double v = ndist[order[static_cast<std::size_t>(i)]];
    if (distinct.empty() || v > distinct.back()) distinct.push_back(v);
  }
  cuts.clear();
  if (static_cast<int>(distinct.size()) <= kQuantileCap) {
    cuts = distinct;
  } else {
    const double stride = static_cast<double>(distinct.size()) / kQuantileCap;
    for (int k = 1; k <= kQuantileCap; ++k) {
      const auto at = static_cast<std::size_t>(std::min<double>(
          std::ceil(k * stride) - 1, static_cast<double>(distinct.size() - 1)));
      if (cuts.empty() || distinct[at] > cuts.back()) cuts.push_back(distinct[at]);
    }
  }
  const int K = static_cast<int>(cuts.size());

  h_gt.assign(static_cast<std::size_t>(K + 1), 0.0);  // content({v > c_k})
  h_ge.assign(static_cast<std::size_t>(K + 1), 0.0);  // content({v >= c_k})
  std::size_t gi = 0;
  for (int k = K; k >= 1; --k) {
    const double c = cuts[static_cast<std::size_t>(k - 1)];
    while (gi < order.size() && ndist[order[gi]] > c) acc.insert(bpts.row(order[gi++]).transpose());
    h_gt[static_cast<std::size_t>(k)] = acc.value();
    while (gi < order.size() && ndist[order[gi]] == c) acc.insert(bpts.row(order[gi++]).transpose());
    h_ge[static_cast<std::size_t>(k)] = acc.value();
  }
  while (gi < order.size()) acc.insert(bpts.row(order[gi++]).transpose());
  h_gt[0] = acc.value();  // content({v > 0})

  IntegralBracket out;
  auto tpow = [&](double t) {
    t = std::min(t, 1.0);
    if (p == 2.0) return 0.5 * t * t;
    if (p == 1.0) return t;
    return std::pow(t, p) / p;
  };
  for (int k = 0; k < K; ++k) {
    const double lo_b = k == 0 ? 0.0 : cuts[static_cast<std::size_t>(k - 1)];
    if (lo_b >= 1.0) break;
    const double hi_b = cuts[static_cast<std::size_t>(k)];
    const double w = tpow(hi_b) - tpow(lo_b);
    out.upper += h_gt[static_cast<std::size_t>(k)] * w;
    out.lower += h_ge[static_cast<std::size_t>(k + 1)] * w;
  }
  return out;
}

BetaValue content_beta_for_plane(const Mat& bpts, const Ball& ball, const BetaParams& params,
                                 ContentAccumulator& acc, const Plane& plane) {
  const double r = ball.radius;
  Vec ndist(bpts.rows());
  for (int i = 0; i < bpts.rows(); ++i) ndist[i] = plane.dist(bpts.row(i).transpose()) / r;
  const auto bracket = content_integral(bpts, ndist, acc, params.p, params.d);
  const double scale = std::pow(r, params.d);
  BetaValue v;
  v.lower = std::pow(std::max(0.0, bracket.lower) / scale, 1.0 / params.p);
  v.upper = std::pow(std::max(0.0, bracket.upper) / scale, 1.0 / params.p);
  v.value = std::pow(std::max(0.0, bracket.mid()) / scale, 1.0 / params.p);
  v.plane = plane;
  return v;
}

}  // namespace

BetaValue beta_inf_full(const PointCloud& cloud, const Ball& ball, int d) {
  const auto idx = cloud.indices_in(ball);
  if (idx.empty()) throw Error("beta_inf: empty intersection with the ball");
  const Mat bpts = gather(cloud, idx);
  auto objective = [&](const Plane& pl) {
    double sup = 0.0;
    for (int i = 0; i < bpts.rows(); ++i) sup = std::max(sup, pl.dist(bpts.row(i).transpose()));
    return (2.0 / ball.diam()) * sup;
  };
  const double floor_gap = 2.0 * cloud.resolution() / ball.radius;
  const Plane best =
      optimize_plane(bpts, d, ball.radius, mix_seed(kBetaSeed, 1), objective, floor_gap);
  BetaValue v;
  v.value = v.lower = v.upper = objective(best);
  v.plane = best;
  return v;
}

double beta_inf(const PointCloud& cloud, const Ball& ball, int d) {
  return beta_inf_full(cloud, ball, d).value;
}

BetaValue beta_content_full(const PointCloud& cloud, const Ball& ball, const BetaParams& params,
                            const std::optional<Plane>& plane) {
  params.validate();
  const auto idx = cloud.indices_in(ball);
  if (idx.empty()) throw Error("beta_content: empty intersection with the ball");
  const Mat bpts = gather(cloud, idx);
  const double min_cell = content_min_cell(cloud.resolution(), ball.diam());
  auto acc = ContentAccumulator::for_points(bpts, params.d, min_cell);
  if (plane) return content_beta_for_plane(bpts, ball, params, acc, *plane);

  // the plane search integrates against a coarser content floor (the final
  // value is re-evaluated exactly at min_cell with the chosen plane)
  const double opt_min_cell = std::max(min_cell, pow2_at_least(ball.radius / 64.0));
  auto opt_acc = ContentAccumulator::for_points(bpts, params.d, opt_min_cell);

  // the plane search runs on a strided subsample of large balls; the reported
  // value is always the full-set evaluation of the chosen plane
  Mat opt_pts = bpts;
  if (bpts.rows() > kOptimizeSampleCap) {
    const auto stride = static_cast<Eigen::Index>((bpts.rows() + kOptimizeSampleCap - 1) / kOptimizeSampleCap);
    const auto m = (bpts.rows() + stride - 1) / stride;
    opt_pts.resize(m, bpts.cols());
    for (Eigen::Index i = 0, r = 0; i < bpts.rows(); i += stride, ++r) opt_pts.row(r) = bpts.row(i);
  }
  auto objective = [&](const Plane& pl) {
    Vec ndist(opt_pts.rows());
    for (int i = 0; i < opt_pts.rows(); ++i)
      ndist[i] = pl.dist(opt_pts.row(i).transpose()) / ball.radius;
    return content_integral(opt_pts, ndist, opt_acc, params.p, params.d).mid();
  };
  // integral value of a plane fitting to within the sampling resolution
  const double beta_floor = 2.0 * cloud.resolution() / ball.radius;
  const double integral_floor =
      std::pow(beta_floor, params.p) * std::pow(ball.radius, params.d);
  const Plane best = optimize_plane(opt_pts, params.d, ball.radius, mix_seed(kBetaSeed, 2),
                                    objective, integral_floor);
  return content_beta_for_plane(bpts, ball, params, acc, best);
}

double beta_content(const PointCloud& cloud, const Ball& ball, const BetaParams& params,
                    const std::optional<Plane>& plane) {
  return beta_content_full(cloud, ball, params, plane).value;
}

double BetaProfile::per_level_sum(int level) const {
  double s = 0.0;
  for (const auto& r : records)
    if (r.level == level) s += r.contribution;
  return s;
}

std::string BetaProfile::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "cube_id,level,size,beta,contribution\n";
  for (const auto& r : records)
    out << r.cube_id << ',' << r.level << ',' << r.size << ',' << r.beta << ','
        << r.contribution << '\n';
  return out.str();
}

std::string BetaProfile::summary_json() const {
  nlohmann::ordered_json j;
  j["total"] = total;
  j["A"] = params.A;
  j["p"] = params.p;
  j["d"] = params.d;
  return j.dump(2);
}

BetaProfile beta_sum(const CubeForest& forest, const PointCloud& cloud, int root_id,
                     const BetaParams& params) {
  params.validate();
  const auto ids = forest.descendants(root_id);
  BetaProfile prof;
  prof.params = params;
  prof.root = root_id;
  prof.root_size = forest.size_of(root_id);
  prof.records.resize(ids.size());

  parallel_for(ids.size(), [&](std::size_t i) {
    const int id = ids[i];
    const auto& q = forest.cube(id);
    BetaRecord rec;
    rec.cube_id = id;
    rec.level = q.level;
    rec.size = q.size;
    const Ball ball = forest.cube_ball(id, params.A);
    rec.ball_radius = ball.radius;
    const auto idx = cloud.indices_in(ball);
    if (static_cast<int>(idx.size()) < params.d + 1) {
      rec.beta = 0.0;  // a d-plane interpolates d or fewer sample points
    } else {
      rec.beta = beta_content(cloud, ball, params);
    }
    rec.contribution = rec.beta * rec.beta * std::pow(q.size, params.d);
    prof.records[i] = rec;
  });

  double total = std::pow(prof.root_size, params.d);
  for (const auto& r : prof.records) total += r.contribution;
  prof.total = total;
  return prof;
}

}  // namespace msgeo
