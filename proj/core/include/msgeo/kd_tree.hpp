#pragma once

#include <utility>
#include <vector>

#include "msgeo/types.hpp"

namespace msgeo {

// Static k-d tree over the rows of a point matrix. All queries break ties
// toward the lowest row index, so results are reproducible regardless of
// build details or traversal order.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(const Mat& pts);
  KdTree(const Mat& pts, std::vector<int> subset);

  bool empty() const { return idx_.empty(); }
  std::size_t size() const { return idx_.size(); }

  // Nearest row index and its distance. Throws on an empty tree.
  std::pair<int, double> nearest(const Eigen::Ref<const Vec>& q) const;
  double min_dist(const Eigen::Ref<const Vec>& q) const { return nearest(q).second; }

  // True if some indexed point lies within the closed ball B(q, r).
  bool any_within(const Eigen::Ref<const Vec>& q, double r) const;

  // Indices (ascending) of points within the closed ball B(q, r).
  std::vector<int> within(const Eigen::Ref<const Vec>& q, double r) const;

  // Distance from the closed axis box [lo, hi] to the nearest indexed point.
  double min_dist_to_box(const Eigen::Ref<const Vec>& lo,
                         const Eigen::Ref<const Vec>& hi) const;

 private:
  struct Node {
    int begin = 0, end = 0;    // span in idx_
    int left = -1, right = -1; // children, -1 for leaf
    Vec bb_lo, bb_hi;
  };

  const Mat* pts_ = nullptr;
  std::vector<int> idx_;
  std::vector<Node> nodes_;

  int build(int begin, int end);
  void nearest_rec(int node, const Eigen::Ref<const Vec>& q, double& best_d2, int& best_i) const;
  void within_rec(int node, const Eigen::Ref<const Vec>& q, double r2, std::vector<int>& out) const;
  bool any_rec(int node, const Eigen::Ref<const Vec>& q, double r2) const;
  void box_rec(int node, const Eigen::Ref<const Vec>& lo, const Eigen::Ref<const Vec>& hi,
               double& best_d2) const;
  double box_dist2(const Node& nd, const Eigen::Ref<const Vec>& q) const;
  static double box_box_dist2(const Vec& alo, const Vec& ahi,
                              const Eigen::Ref<const Vec>& blo,
                              const Eigen::Ref<const Vec>& bhi);
};

}  // namespace msgeo
