#pragma once

#include <memory>
#include <string>
#include <vector>

#include "msgeo/kd_tree.hpp"
#include "msgeo/types.hpp"

namespace msgeo {

// Finite sample of a set E at a declared resolution: every point of the
// ideal set lies within `resolution` of some sample. Immutable after
// construction; safe to share across threads.
class PointCloud {
 public:
  PointCloud() = default;

  // Deduplicates rows (coordinatewise within 1e-12, first occurrence kept),
  // validates invariants, and builds the spatial index.
  PointCloud(Mat points, int n, int d, double resolution, Vec weights = Vec());

  int n() const { return n_; }
  int d() const { return d_; }
  double resolution() const { return resolution_; }
  std::size_t size() const { return static_cast<std::size_t>(points_->rows()); }

  const Mat& points() const { return *points_; }
  Eigen::Ref<const Vec> point(int i) const { return points_->row(i).transpose(); }

  bool weighted() const { return weights_.size() > 0; }
  const Vec& weights() const { return weights_; }
  double weight(int i) const { return weighted() ? weights_[i] : 1.0; }
  double total_weight() const;

  const KdTree& tree() const { return *tree_; }
  double dist_to(const Eigen::Ref<const Vec>& x) const { return tree_->min_dist(x); }

  // Exact for clouds up to 8192 points, two-sweep farthest-point estimate
  // beyond that (deterministic either way).
  double diameter() const { return diameter_; }

  Vec bbox_min() const { return bbox_min_; }
  Vec bbox_max() const { return bbox_max_; }

  // Indices of points in the closed ball, ascending.
  std::vector<int> indices_in(const Ball& ball) const { return tree_->within(ball.center, ball.radius); }

  // Sub-cloud of the points in the closed ball (order and weights kept).
  PointCloud restrict_to(const Ball& ball) const;
  PointCloud subset(const std::vector<int>& indices) const;

 private:
  // points are shared so that copies and moves keep the spatial index's
  // internal references valid
  std::shared_ptr<const Mat> points_;
  int n_ = 0;
  int d_ = 1;
  double resolution_ = 0.0;
  Vec weights_;
  Vec bbox_min_, bbox_max_;
  double diameter_ = 0.0;
  std::shared_ptr<const KdTree> tree_;
};

// Plain-text cloud file: one point per line, n fields separated by commas or
// whitespace, '#' lines ignored. Errors carry the 1-based line number.
PointCloud load_cloud(const std::string& path, int n, int d, double resolution);

// Writes the standard format; a weight column is appended when present.
void save_cloud(const PointCloud& cloud, const std::string& path);

// Normalized bilateral Hausdorff gap restricted to a ball:
//   (2/diam B) * max( sup_{a in A∩B} dist(a, B_full), sup_{b in B∩B} dist(b, A_full) )
// A sup over an empty intersection contributes 0; both empty is an error.
double hausdorff_gap(const PointCloud& a, const PointCloud& b, const Ball& ball);

}  // namespace msgeo
