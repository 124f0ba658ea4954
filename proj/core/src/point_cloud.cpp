#include "msgeo/point_cloud.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace msgeo {

namespace {

constexpr double kDedupTol = 1e-12;
constexpr std::size_t kExactDiameterCap = 8192;

Mat dedup_rows(const Mat& pts, Vec* weights) {
  const auto nrows = static_cast<std::size_t>(pts.rows());
  std::vector<int> order(nrows);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    for (int c = 0; c < pts.cols(); ++c) {
      if (pts(a, c) < pts(b, c)) return true;
      if (pts(a, c) > pts(b, c)) return false;
    }
    return a < b;
  });
  auto same = [&](int a, int b) {
    for (int c = 0; c < pts.cols(); ++c)
      if (std::abs(pts(a, c) - pts(b, c)) > kDedupTol) return false;
    return true;
  };
  // group lexicographically adjacent duplicates; keep the earliest row of each
  // group and pool its weight
  std::vector<int> keep_of(nrows);
  std::vector<int> keepers;
  std::size_t i = 0;
  while (i < nrows) {
    std::size_t j = i;
    int rep = order[i];
    while (j + 1 < nrows && same(order[j], order[j + 1])) {
      ++j;
      rep = std::min(rep, order[j]);
    }
    for (std::size_t k = i; k <= j; ++k) keep_of[static_cast<std::size_t>(order[k])] = rep;
    keepers.push_back(rep);
    i = j + 1;
  }
  std::sort(keepers.begin(), keepers.end());
  Mat out(static_cast<Eigen::Index>(keepers.size()), pts.cols());
  std::vector<int> row_of(nrows, -1);
  for (std::size_t k = 0; k < keepers.size(); ++k) {
    out.row(static_cast<Eigen::Index>(k)) = pts.row(keepers[k]);
    row_of[static_cast<std::size_t>(keepers[k])] = static_cast<int>(k);
  }
  if (weights->size() > 0) {
    Vec w = Vec::Zero(static_cast<Eigen::Index>(keepers.size()));
    for (std::size_t r = 0; r < nrows; ++r)
      w[row_of[static_cast<std::size_t>(keep_of[r])]] += (*weights)[static_cast<Eigen::Index>(r)];
    *weights = std::move(w);
  }
  return out;
}

}  // namespace

PointCloud::PointCloud(Mat points, int n, int d, double resolution, Vec weights)
    : n_(n), d_(d), resolution_(resolution) {
  if (n < 1) throw Error("PointCloud: ambient dimension must be positive");
  if (d < 1 || d >= n) throw Error("PointCloud: target dimension must satisfy 1 <= d < n");
  if (!(resolution > 0.0)) throw Error("PointCloud: resolution must be positive");
  if (points.rows() == 0) throw Error("PointCloud: point list is empty");
  if (points.cols() != n) throw Error("PointCloud: points have wrong arity");
  if (!points.allFinite()) throw Error("PointCloud: non-finite coordinate");
  if (weights.size() > 0 && weights.size() != points.rows())
    throw Error("PointCloud: weight channel size mismatch");

  weights_ = std::move(weights);
  points_ = std::make_shared<const Mat>(dedup_rows(points, &weights_));

  bbox_min_ = points_->colwise().minCoeff().transpose();
  bbox_max_ = points_->colwise().maxCoeff().transpose();
  tree_ = std::make_shared<KdTree>(*points_);

  const auto m = size();
  if (m <= kExactDiameterCap) {
    double best = 0.0;
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a + 1; b < m; ++b)
        best = std::max(best, (points_->row(static_cast<int>(a)) - points_->row(static_cast<int>(b))).norm());
    diameter_ = best;
  } else {
    // two farthest-point sweeps from the lowest index
    auto farthest = [&](int from) {
      int arg = from;
      double best = -1.0;
      for (std::size_t b = 0; b < m; ++b) {
        const double dd = (points_->row(static_cast<int>(b)) - points_->row(from)).norm();
        if (dd > best) {
          best = dd;
          arg = static_cast<int>(b);
        }
      }
      return std::pair<int, double>(arg, best);
    };
    auto [p1, d1] = farthest(0);
    auto [p2, d2] = farthest(p1);
    (void)p2;
    diameter_ = std::max(d1, d2);
  }
}

double PointCloud::total_weight() const {
  return weighted() ? weights_.sum() : static_cast<double>(size());
}

PointCloud PointCloud::restrict_to(const Ball& ball) const {
  return subset(indices_in(ball));
}

PointCloud PointCloud::subset(const std::vector<int>& indices) const {
  if (indices.empty()) throw Error("PointCloud::subset: empty selection");
  Mat pts(static_cast<Eigen::Index>(indices.size()), n_);
  Vec w;
  if (weighted()) w.resize(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t k = 0; k < indices.size(); ++k) {
    pts.row(static_cast<Eigen::Index>(k)) = points_->row(indices[k]);
    if (weighted()) w[static_cast<Eigen::Index>(k)] = weights_[indices[k]];
  }
  return PointCloud(std::move(pts), n_, d_, resolution_, std::move(w));
}

PointCloud load_cloud(const std::string& path, int n, int d, double resolution) {
  std::ifstream in(path);
  if (!in) throw Error("load_cloud: cannot open '" + path + "'");
  std::vector<double> values;
  std::string line;
  std::size_t lineno = 0;
  std::size_t npoints = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string body = line;
    if (auto hash = body.find('#'); hash != std::string::npos) body.erase(hash);
    std::replace(body.begin(), body.end(), ',', ' ');
    std::istringstream fields(body);
    std::vector<double> row;
    std::string tok;
    while (fields >> tok) {
      try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        row.push_back(v);
      } catch (const std::exception&) {
        throw Error("load_cloud: parse error at line " + std::to_string(lineno) +
                    ": non-numeric field '" + tok + "'");
      }
    }
    if (row.empty()) continue;  // blank or comment line
    if (static_cast<int>(row.size()) != n)
      throw Error("load_cloud: parse error at line " + std::to_string(lineno) + ": expected " +
                  std::to_string(n) + " fields, got " + std::to_string(row.size()));
    values.insert(values.end(), row.begin(), row.end());
    ++npoints;
  }
  if (npoints == 0) throw Error("load_cloud: no data lines in '" + path + "'");
  Mat pts(static_cast<Eigen::Index>(npoints), n);
  for (std::size_t i = 0; i < npoints; ++i)
    for (int c = 0; c < n; ++c) pts(static_cast<Eigen::Index>(i), c) = values[i * static_cast<std::size_t>(n) + static_cast<std::size_t>(c)];
  return PointCloud(std::move(pts), n, d, resolution);
}

void save_cloud(const PointCloud& cloud, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("save_cloud: cannot open '" + path + "' for writing");
  out.precision(17);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (int c = 0; c < cloud.n(); ++c) {
      if (c) out << ' ';
      out << cloud.points()(static_cast<int>(i), c);
    }
    if (cloud.weighted()) out << ' ' << cloud.weights()[static_cast<int>(i)];
    out << '\n';
  }
}

double hausdorff_gap(const PointCloud& a, const PointCloud& b, const Ball& ball) {
  const auto ia = a.indices_in(ball);
  const auto ib = b.indices_in(ball);
  if (ia.empty() && ib.empty()) throw Error("hausdorff_gap: gap undefined on this ball");
  double sup = 0.0;
  for (int i : ia) sup = std::max(sup, b.dist_to(a.point(i)));
  for (int i : ib) sup = std::max(sup, a.dist_to(b.point(i)));
  return (2.0 / ball.diam()) * sup;
}

}  // namespace msgeo
