#include "msgeo/criteria.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "msgeo/beta.hpp"
#include "msgeo/content.hpp"
#include "msgeo/optimize.hpp"
#include "msgeo/parallel.hpp"
#include "msgeo/rng.hpp"

namespace msgeo {

namespace {

constexpr std::uint64_t kCriteriaSeed = 0x6372697453656564ull;
constexpr int kPairCap = 2000;
constexpr int kGapDivisor = 64;        // plane sampled at step r/64 for verdicts
constexpr int kRefineDivisor = 16;     // coarser sampling inside refinement loops
constexpr int kBpRandomPlanes = 20;

Mat gather(const PointCloud& cloud, const std::vector<int>& idx) {
  Mat out(static_cast<Eigen::Index>(idx.size()), cloud.n());
  for (std::size_t i = 0; i < idx.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = cloud.points().row(idx[i]);
  return out;
}

// bilateral normalized gap d_B(cloud, union of planes) with each plane
// sampled on a grid of step r/divisor inside the closed ball
double bilateral_gap(const PointCloud& cloud, const Mat& bpts, const Ball& ball,
                     const std::vector<Plane>& planes, int divisor) {
  double sup = 0.0;
  for (Eigen::Index i = 0; i < bpts.rows(); ++i) {
    double dmin = std::numeric_limits<double>::infinity();
    for (const auto& pl : planes) dmin = std::min(dmin, pl.dist(bpts.row(i).transpose()));
    sup = std::max(sup, dmin);
  }
  const double r = ball.radius;
  const double step = r / divisor;
  for (const auto& pl : planes) {
    const Vec center = pl.project(ball.center);
    const double off2 = (center - ball.center).squaredNorm();
    if (off2 > r * r) continue;  // plane misses the ball; its sup is empty
    const int d = pl.dim();
    std::vector<int> grid(static_cast<std::size_t>(d), 0);
    const int per_axis = 2 * divisor + 1;
    for (;;) {
      Vec q = center;
      double t2 = 0.0;
      for (int a = 0; a < d; ++a) {
        const double t = (grid[static_cast<std::size_t>(a)] - divisor) * step;
        t2 += t * t;
        q += t * pl.frame.row(a).transpose();
      }
      if (off2 + t2 <= r * r) sup = std::max(sup, cloud.dist_to(q));
      int a = 0;
      for (; a < d; ++a) {
        if (++grid[static_cast<std::size_t>(a)] < per_axis) break;
        grid[static_cast<std::size_t>(a)] = 0;
      }
      if (a == d) break;
    }
  }
  return (2.0 / ball.diam()) * sup;
}

// Nelder-Mead refinement of the bilateral gap over single planes
Plane refine_bilateral(const PointCloud& cloud, const Mat& bpts, const Ball& ball, int d,
                       const Plane& start, std::uint64_t seed) {
  const int n = cloud.n();
  const Vec centroid = bpts.colwise().mean().transpose();
  auto from_theta = [&](const Vec& theta) {
    Plane p;
    p.base = centroid + ball.radius * theta.head(n);
    Mat raw(d, n);
    for (int i = 0; i < d; ++i)
      for (int c = 0; c < n; ++c) raw(i, c) = theta[n + i * n + c];
    p.frame = orthonormal_rows(raw);
    return p;
  };
  auto f = [&](const Vec& theta) {
    return bilateral_gap(cloud, bpts, ball, {from_theta(theta)}, kRefineDivisor);
  };
  Vec theta0 = Vec::Zero(n + d * n);
  theta0.head(n) = (start.base - centroid) / ball.radius;
  for (int i = 0; i < d; ++i)
    for (int c = 0; c < n; ++c) theta0[n + i * n + c] = start.frame(i, c);
  NelderMeadOptions opts;
  opts.max_iter = 120;
  auto best = nelder_mead(f, theta0, opts);
  Rng rng(seed);
  NelderMeadOptions ropts;
  ropts.max_iter = 40;
  for (int t = 0; t < 8; ++t) {
    Vec theta(n + d * n);
    for (int i = 0; i < n; ++i) theta[i] = 0.3 * rng.gaussian();
    for (int i = n; i < theta.size(); ++i) theta[i] = rng.gaussian();
    const auto res = nelder_mead(f, theta, ropts);
    if (res.value < best.value) best = res;
  }
  return from_theta(best.x);
}

BallVerdict eval_bwgl(const PointCloud& cloud, const Ball& ball, const CriterionParams& p,
                      std::uint64_t seed) {
  BallVerdict v;
  const auto idx = cloud.indices_in(ball);
  if (idx.empty()) {
    v.good = true;
    v.vacuous = true;
    v.certified = true;
    v.note = "vacuous: empty ball";
    return v;
  }
  const Mat bpts = gather(cloud, idx);
  const int d = cloud.d();

  // cheap certified candidates first: PCA and the one-sided optimum; a PCA
  // gap far above threshold settles a best-effort bad verdict immediately
  const Plane pca = fit_plane(bpts, Vec(), d);
  Plane best_plane = pca;
  double best = bilateral_gap(cloud, bpts, ball, {pca}, kGapDivisor);
  if (best < 8.0 * p.epsilon) {
    const auto inf = beta_inf_full(cloud, ball, d);
    const double g = bilateral_gap(cloud, bpts, ball, {inf.plane}, kGapDivisor);
    if (g < best) {
      best = g;
      best_plane = inf.plane;
    }
  }
  // borderline verdicts get a bilateral refinement pass
  if (best >= p.epsilon && best < 4.0 * p.epsilon) {
    const Plane refined = refine_bilateral(cloud, bpts, ball, d, best_plane, seed);
    const double g = bilateral_gap(cloud, bpts, ball, {refined}, kGapDivisor);
    if (g < best) {
      best = g;
      best_plane = refined;
    }
  }
  v.measure = best;
  v.good = best < p.epsilon;
  v.certified = v.good;  // bad verdicts are best-effort upper bounds
  v.planes = {best_plane};
  v.note = v.good ? "plane witness" : "best gap found";
  return v;
}

BallVerdict eval_pairs(const PointCloud& cloud, const Ball& ball, const CriterionParams& p,
                       std::uint64_t seed, bool exhaustive, bool symmetry) {
  BallVerdict v;
  auto idx = cloud.indices_in(ball);
  if (idx.size() < 2) {
    v.good = true;
    v.certified = true;
    v.measure = 0.0;
    v.note = idx.empty() ? "vacuous: empty ball" : "single point";
    v.vacuous = idx.empty();
    return v;
  }
  bool subsampled = false;
  if (static_cast<int>(idx.size()) > kPairCap) {
    Rng rng(mix_seed(seed, 0x9a11));
    for (std::size_t i = 0; i < static_cast<std::size_t>(kPairCap); ++i)
      std::swap(idx[i], idx[i + rng.index(idx.size() - i)]);
    idx.resize(kPairCap);
    std::sort(idx.begin(), idx.end());
    subsampled = true;
  }
  const double r = ball.radius;
  const double cut = p.epsilon * r;
  double worst = 0.0;
  std::array<int, 2> worst_pair{-1, -1};
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const Vec y = cloud.point(idx[i]);
    for (std::size_t j = symmetry ? 0 : i + 1; j < idx.size(); ++j) {
      if (symmetry && j == i) continue;
      const Vec z = cloud.point(idx[j]);
      const Vec probe = symmetry ? Vec(2.0 * y - z) : Vec(0.5 * (y + z));
      if (!exhaustive) {
        if (!cloud.tree().any_within(probe, cut)) {
          v.good = false;
          v.pair = {idx[i], idx[j]};
          v.measure = cloud.dist_to(probe) / r;
          v.certified = true;  // the stored pair re-verifies exactly
          v.note = "violating pair";
          return v;
        }
      } else {
        const double m = cloud.dist_to(probe) / r;
        if (m > worst) {
          worst = m;
          worst_pair = {idx[i], idx[j]};
        }
      }
    }
  }
  if (exhaustive) {
    v.measure = worst;
    v.pair = worst_pair;
    v.good = worst < p.epsilon;
    v.certified = v.good ? !subsampled : true;
    v.note = v.good ? "no violating pair" : "violating pair";
    return v;
  }
  v.good = true;
  v.measure = 0.0;
  v.certified = !subsampled;
  v.note = subsampled ? "no violating pair (subsampled)" : "no violating pair";
  return v;
}

// k-flats alternation: assign points to the nearest plane, refit each by PCA
std::vector<Plane> k_flats(const Mat& bpts, int d, int K, std::uint64_t seed) {
  const auto npts = bpts.rows();
  Rng rng(seed);
  std::vector<Plane> planes;
  std::vector<Eigen::Index> seeds;
  while (static_cast<int>(seeds.size()) < std::min<Eigen::Index>(K, npts)) {
    const auto cand = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(npts)));
    if (std::find(seeds.begin(), seeds.end(), cand) == seeds.end()) seeds.push_back(cand);
  }
  std::vector<int> assign(static_cast<std::size_t>(npts), 0);
  for (Eigen::Index i = 0; i < npts; ++i) {
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const double dd = (bpts.row(i) - bpts.row(seeds[s])).norm();
      if (dd < bd) {
        bd = dd;
        assign[static_cast<std::size_t>(i)] = static_cast<int>(s);
      }
    }
  }
  const int keff = static_cast<int>(seeds.size());
  planes.assign(static_cast<std::size_t>(keff), Plane{});
  for (int iter = 0; iter < 10; ++iter) {
    // refit
    for (int k = 0; k < keff; ++k) {
      std::vector<int> mine;
      for (Eigen::Index i = 0; i < npts; ++i)
        if (assign[static_cast<std::size_t>(i)] == k) mine.push_back(static_cast<int>(i));
      if (mine.empty()) {
        // reseed on the farthest point from the other planes
        double bd = -1.0;
        Eigen::Index arg = 0;
        for (Eigen::Index i = 0; i < npts; ++i) {
          double dmin = std::numeric_limits<double>::infinity();
          for (int o = 0; o < keff; ++o)
            if (o != k && planes[static_cast<std::size_t>(o)].frame.size() > 0)
              dmin = std::min(dmin, planes[static_cast<std::size_t>(o)].dist(bpts.row(i).transpose()));
          if (dmin > bd) {
            bd = dmin;
            arg = i;
          }
        }
        Mat one = bpts.row(arg);
        planes[static_cast<std::size_t>(k)] = fit_plane(one, Vec(), d);
        continue;
      }
      Mat sub(static_cast<Eigen::Index>(mine.size()), bpts.cols());
      for (std::size_t i = 0; i < mine.size(); ++i) sub.row(static_cast<Eigen::Index>(i)) = bpts.row(mine[i]);
      planes[static_cast<std::size_t>(k)] = fit_plane(sub, Vec(), d);
    }
    // reassign
    for (Eigen::Index i = 0; i < npts; ++i) {
      double bd = std::numeric_limits<double>::infinity();
      for (int k = 0; k < keff; ++k) {
        const double dd = planes[static_cast<std::size_t>(k)].dist(bpts.row(i).transpose());
        if (dd < bd) {
          bd = dd;
          assign[static_cast<std::size_t>(i)] = k;
        }
      }
    }
  }
  return planes;
}

BallVerdict eval_baup(const PointCloud& cloud, const Ball& ball, const CriterionParams& p,
                      std::uint64_t seed) {
  // K = 1 is exactly the BWGL plane search (same seed stream)
  BallVerdict v = eval_bwgl(cloud, ball, p, seed);
  if (v.vacuous || v.good) return v;
  const auto idx = cloud.indices_in(ball);
  const Mat bpts = gather(cloud, idx);
  const int d = cloud.d();
  for (int K = 2; K <= p.max_planes; ++K) {
    for (int restart = 0; restart < 5; ++restart) {
      const auto planes = k_flats(bpts, d, K, mix_seed(seed, 0xba00 + 16u * K + restart));
      const double g = bilateral_gap(cloud, bpts, ball, planes, kGapDivisor);
      if (g < v.measure) {
        v.measure = g;
        v.planes = planes;
      }
    }
    if (v.measure < p.epsilon) break;
  }
  v.good = v.measure < p.epsilon;
  v.certified = v.good;
  v.note = v.good ? "union-of-planes witness" : "best union gap found";
  return v;
}

BallVerdict eval_bp(const PointCloud& cloud, const Ball& ball, const CriterionParams& p,
                    std::uint64_t seed, bool exhaustive) {
  BallVerdict v;
  const auto idx = cloud.indices_in(ball);
  if (idx.empty()) {
    v.good = true;
    v.vacuous = true;
    v.note = "vacuous: empty ball";
    return v;
  }
  const Mat bpts = gather(cloud, idx);
  const int d = cloud.d();
  const double r = ball.radius;
  const double min_cell = pow2_at_least(std::max(cloud.resolution(), r / 256.0));
  const double need = p.theta * std::pow(r, d);

  std::vector<Plane> candidates{fit_plane(bpts, Vec(), d)};
  Rng rng(mix_seed(seed, 0xb9));
  const Vec centroid = bpts.colwise().mean().transpose();
  for (int t = 0; t < kBpRandomPlanes; ++t) candidates.push_back(random_plane(centroid, d, rng));

  double best = 0.0;
  Plane best_plane = candidates.front();
  for (const auto& pl : candidates) {
    Mat proj(bpts.rows(), d);
    for (Eigen::Index i = 0; i < bpts.rows(); ++i)
      proj.row(i) = pl.coords(bpts.row(i).transpose()).transpose();
    const double content = dyadic_content_points(proj, d, min_cell);
    if (content > best) {
      best = content;
      best_plane = pl;
    }
    if (!exhaustive && best >= need) break;
  }
  v.measure = best / std::pow(r, d);
  v.good = best >= need;
  v.certified = v.good;  // the witness plane achieves the stated content
  v.planes = {best_plane};
  v.note = v.good ? "projection witness" : "best projection found";
  return v;
}

}  // namespace

Criterion criterion_from_string(const std::string& name) {
  std::string s;
  for (char c : name) s.push_back(static_cast<char>(std::tolower(c)));
  if (s == "bwgl") return Criterion::BWGL;
  if (s == "ls") return Criterion::LS;
  if (s == "lcv") return Criterion::LCV;
  if (s == "baup") return Criterion::BAUP;
  if (s == "bp") return Criterion::BP;
  throw Error("unknown criterion '" + name + "'");
}

std::string criterion_name(Criterion kind) {
  switch (kind) {
    case Criterion::BWGL: return "bwgl";
    case Criterion::LS: return "ls";
    case Criterion::LCV: return "lcv";
    case Criterion::BAUP: return "baup";
    case Criterion::BP: return "bp";
  }
  return "?";
}

void CriterionParams::validate() const {
  if (!(epsilon > 0.0)) throw Error("CriterionParams: epsilon must be positive");
  if (!(C0 >= 1.0)) throw Error("CriterionParams: C0 must be >= 1");
  if (kind == Criterion::BP && !(theta > 0.0 && theta <= 1.0))
    throw Error("CriterionParams: theta must lie in (0, 1]");
  if (kind == Criterion::BAUP && max_planes < 1)
    throw Error("CriterionParams: max_planes must be >= 1");
}

BallVerdict evaluate_ball(const PointCloud& cloud, const Ball& ball, const CriterionParams& params,
                          std::uint64_t seed, bool exhaustive) {
  params.validate();
  switch (params.kind) {
    case Criterion::BWGL: return eval_bwgl(cloud, ball, params, seed);
    case Criterion::BAUP: return eval_baup(cloud, ball, params, seed);
    case Criterion::LS: return eval_pairs(cloud, ball, params, seed, exhaustive, true);
    case Criterion::LCV: return eval_pairs(cloud, ball, params, seed, exhaustive, false);
    case Criterion::BP: return eval_bp(cloud, ball, params, seed, exhaustive);
  }
  throw Error("evaluate_ball: unreachable");
}

QPLabeling classify(const CubeForest& forest, const PointCloud& cloud,
                    const CriterionParams& params) {
  params.validate();
  QPLabeling out;
  out.params = params;
  out.verdicts.resize(forest.cube_count());
  out.bad_mask.assign(forest.cube_count(), 0);

  const bool inflated = params.kind == Criterion::BWGL || params.kind == Criterion::BAUP;
  parallel_for(forest.cube_count(), [&](std::size_t i) {
    const auto& q = forest.cube(static_cast<int>(i));
    const Ball ball = forest.cube_ball(q.id, inflated ? params.C0 : 1.0);
    CubeVerdict cv;
    cv.cube_id = q.id;
    cv.level = q.level;
    // the plane-search seed depends only on the cube so that the BAUP K=1
    // search is the BWGL search
    cv.verdict = evaluate_ball(cloud, ball, params, mix_seed(kCriteriaSeed, static_cast<std::uint64_t>(q.id)));
    out.verdicts[i] = std::move(cv);
  });
  for (std::size_t i = 0; i < out.verdicts.size(); ++i)
    out.bad_mask[i] = out.verdicts[i].verdict.good ? 0 : 1;
  return out;
}

namespace {
QPLabeling classify_kind(const CubeForest& f, const PointCloud& c, CriterionParams p,
                         Criterion kind) {
  if (p.kind != kind) throw Error("classifier called with mismatched kind");
  return classify(f, c, p);
}
}  // namespace

QPLabeling classify_bwgl(const CubeForest& f, const PointCloud& c, const CriterionParams& p) {
  return classify_kind(f, c, p, Criterion::BWGL);
}
QPLabeling classify_ls(const CubeForest& f, const PointCloud& c, const CriterionParams& p) {
  return classify_kind(f, c, p, Criterion::LS);
}
QPLabeling classify_lcv(const CubeForest& f, const PointCloud& c, const CriterionParams& p) {
  return classify_kind(f, c, p, Criterion::LCV);
}
QPLabeling classify_baup(const CubeForest& f, const PointCloud& c, const CriterionParams& p) {
  return classify_kind(f, c, p, Criterion::BAUP);
}
QPLabeling classify_bp(const CubeForest& f, const PointCloud& c, const CriterionParams& p) {
  return classify_kind(f, c, p, Criterion::BP);
}

std::string QPLabeling::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "cube_id,level,verdict,gap_or_value,witness_summary\n";
  for (const auto& cv : verdicts)
    out << cv.cube_id << ',' << cv.level << ',' << (cv.verdict.good ? "good" : "bad") << ','
        << cv.verdict.measure << ',' << cv.verdict.note << '\n';
  return out.str();
}

CarlesonSum carleson_sum(const QPLabeling& labels, const CubeForest& forest, int root_id) {
  // accumulate per level, then add level sums in order: the total equals the
  // per-level decomposition bit for bit
  const auto by_level = carleson_by_level(labels, forest, root_id);
  CarlesonSum out;
  for (const auto& [lvl, val] : by_level) out.sum += val;
  out.normalized = out.sum / std::pow(forest.size_of(root_id), forest.cloud().d());
  return out;
}

std::map<int, double> carleson_by_level(const QPLabeling& labels, const CubeForest& forest,
                                        int root_id) {
  if (labels.bad_mask.size() != forest.cube_count())
    throw Error("carleson_sum: labels do not cover the forest");
  std::map<int, double> by_level;
  const int d = forest.cloud().d();
  for (int id : forest.descendants(root_id)) {
    const auto& q = forest.cube(id);
    by_level.try_emplace(q.level, 0.0);
    if (labels.bad_mask[static_cast<std::size_t>(id)])
      by_level[q.level] += std::pow(q.size, d);
  }
  return by_level;
}

std::string carleson_json(const QPLabeling& labels, const CarlesonSum& sum) {
  nlohmann::ordered_json j;
  j["criterion"] = criterion_name(labels.params.kind);
  j["params"] = {{"epsilon", labels.params.epsilon},
                 {"C0", labels.params.C0},
                 {"theta", labels.params.theta},
                 {"max_planes", labels.params.max_planes}};
  j["sum"] = sum.sum;
  j["normalized"] = sum.normalized;
  return j.dump(2);
}

double ContinuityProbe::max_relaxation() const {
  double m = 0.0;
  for (const auto& o : outcomes) m = std::max(m, o.relaxation);
  return m;
}

ContinuityProbe continuity_probe(Criterion kind, const PointCloud& e1, const PointCloud& e2,
                                 double epsilon1, double C1, double C2, int trials,
                                 std::uint64_t seed) {
  if (!(C1 >= 1.0 && C2 >= 1.0)) throw Error("continuity_probe: C1, C2 must be >= 1");
  if (!(C1 > C2)) throw Error("continuity_probe: need C1 > C2 for nonempty sub-ball ranges");
  ContinuityProbe probe;
  probe.kind = kind;
  probe.epsilon1 = epsilon1;
  probe.C1 = C1;
  probe.C2 = C2;
  probe.trials = trials;

  CriterionParams base;
  base.kind = kind;
  base.epsilon = epsilon1;

  Rng rng(seed);
  const double r_lo = 8.0 * std::max(e1.resolution(), e2.resolution());
  const double r_hi = e1.diameter() / (2.0 * C2);
  if (!(r_lo < r_hi)) throw Error("continuity_probe: no admissible ball radii");

  for (int t = 0; t < trials; ++t) {
    const auto ci = static_cast<int>(rng.index(e1.size()));
    const double r = rng.log_uniform(r_lo, r_hi);
    const Ball b(e1.point(ci), r);
    const auto v1 = evaluate_ball(e1, b, base, mix_seed(seed, 2 * t), false);
    if (!v1.good || v1.vacuous) continue;
    if (hausdorff_gap(e1, e2, b.scaled(C2)) >= epsilon1) continue;

    // admissible sub-ball centers on E2: C2 B' ⊆ B and r' >= r/C1
    const double max_off = r * (1.0 - C2 / C1);
    const auto cands = e2.indices_in(Ball(b.center, std::max(max_off, 1e-300)));
    if (cands.empty()) continue;
    const int xi = cands[rng.index(cands.size())];
    const double off = (e2.point(xi) - b.center).norm();
    const double rp_hi = (r - off) / C2;
    const double rp_lo = r / C1;
    if (!(rp_lo <= rp_hi)) continue;
    const Ball bp(e2.point(xi), rng.uniform(rp_lo, rp_hi));

    const auto v2 = evaluate_ball(e2, bp, base, mix_seed(seed, 2 * t + 1), true);
    ProbeOutcome oc;
    oc.ball = b;
    oc.sub_ball = bp;
    oc.good_at_base = v2.good;
    if (kind == Criterion::BP) {
      oc.relaxation = v2.measure > 0.0 ? std::max(1.0, base.theta / v2.measure)
                                       : std::numeric_limits<double>::infinity();
    } else {
      oc.relaxation = std::max(1.0, v2.measure / epsilon1);
    }
    probe.outcomes.push_back(std::move(oc));
  }
  return probe;
}

}  // namespace msgeo
