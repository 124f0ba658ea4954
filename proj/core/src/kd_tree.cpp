#include "msgeo/kd_tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace msgeo {

namespace {
constexpr int kLeafSize = 8;
}

KdTree::KdTree(const Mat& pts) : pts_(&pts) {
  idx_.resize(static_cast<std::size_t>(pts.rows()));
  std::iota(idx_.begin(), idx_.end(), 0);
  if (!idx_.empty()) build(0, static_cast<int>(idx_.size()));
}

KdTree::KdTree(const Mat& pts, std::vector<int> subset) : pts_(&pts), idx_(std::move(subset)) {
  std::sort(idx_.begin(), idx_.end());
  if (!idx_.empty()) build(0, static_cast<int>(idx_.size()));
}

int KdTree::build(int begin, int end) {
  Node nd;
  nd.begin = begin;
  nd.end = end;
  const int n = static_cast<int>(pts_->cols());
  nd.bb_lo = Vec::Constant(n, std::numeric_limits<double>::infinity());
  nd.bb_hi = Vec::Constant(n, -std::numeric_limits<double>::infinity());
  for (int i = begin; i < end; ++i) {
    const auto row = pts_->row(idx_[static_cast<std::size_t>(i)]);
    for (int c = 0; c < n; ++c) {
      nd.bb_lo[c] = std::min(nd.bb_lo[c], row[c]);
      nd.bb_hi[c] = std::max(nd.bb_hi[c], row[c]);
    }
  }
  const int me = static_cast<int>(nodes_.size());
  nodes_.push_back(nd);
  if (end - begin > kLeafSize) {
    int axis = 0;
    double ext = -1.0;
    for (int c = 0; c < n; ++c) {
      const double e = nd.bb_hi[c] - nd.bb_lo[c];
      if (e > ext) {
        ext = e;
        axis = c;
      }
    }
    if (ext > 0.0) {
      const int mid = begin + (end - begin) / 2;
      std::nth_element(idx_.begin() + begin, idx_.begin() + mid, idx_.begin() + end,
                       [&](int a, int b) {
                         const double xa = (*pts_)(a, axis), xb = (*pts_)(b, axis);
                         return xa < xb || (xa == xb && a < b);
                       });
      const int l = build(begin, mid);
      const int r = build(mid, end);
      nodes_[static_cast<std::size_t>(me)].left = l;
      nodes_[static_cast<std::size_t>(me)].right = r;
    }
  }
  return me;
}

double KdTree::box_dist2(const Node& nd, const Eigen::Ref<const Vec>& q) const {
  double d2 = 0.0;
  for (int c = 0; c < q.size(); ++c) {
    double d = 0.0;
    if (q[c] < nd.bb_lo[c]) d = nd.bb_lo[c] - q[c];
    else if (q[c] > nd.bb_hi[c]) d = q[c] - nd.bb_hi[c];
    d2 += d * d;
  }
  return d2;
}

double KdTree::box_box_dist2(const Vec& alo, const Vec& ahi, const Eigen::Ref<const Vec>& blo,
                             const Eigen::Ref<const Vec>& bhi) {
  double d2 = 0.0;
  for (int c = 0; c < alo.size(); ++c) {
    double d = 0.0;
    if (ahi[c] < blo[c]) d = blo[c] - ahi[c];
    else if (bhi[c] < alo[c]) d = alo[c] - bhi[c];
    d2 += d * d;
  }
  return d2;
}

void KdTree::nearest_rec(int node, const Eigen::Ref<const Vec>& q, double& best_d2,
                         int& best_i) const {
  const Node& nd = nodes_[static_cast<std::size_t>(node)];
  if (box_dist2(nd, q) > best_d2) return;
  if (nd.left < 0) {
    for (int i = nd.begin; i < nd.end; ++i) {
      const int pi = idx_[static_cast<std::size_t>(i)];
      const double d2 = (pts_->row(pi).transpose() - q).squaredNorm();
      if (d2 < best_d2 || (d2 == best_d2 && pi < best_i)) {
        best_d2 = d2;
        best_i = pi;
      }
    }
    return;
  }
  const double dl = box_dist2(nodes_[static_cast<std::size_t>(nd.left)], q);
  const double dr = box_dist2(nodes_[static_cast<std::size_t>(nd.right)], q);
  // visit the closer child first; ties go left so lower indices are seen first
  if (dl <= dr) {
    nearest_rec(nd.left, q, best_d2, best_i);
    nearest_rec(nd.right, q, best_d2, best_i);
  } else {
    nearest_rec(nd.right, q, best_d2, best_i);
    nearest_rec(nd.left, q, best_d2, best_i);
  }
}

std::pair<int, double> KdTree::nearest(const Eigen::Ref<const Vec>& q) const {
  if (empty()) throw Error("KdTree::nearest: empty tree");
  double best_d2 = std::numeric_limits<double>::infinity();
  int best_i = std::numeric_limits<int>::max();
  nearest_rec(0, q, best_d2, best_i);
  return {best_i, std::sqrt(best_d2)};
}

bool KdTree::any_rec(int node, const Eigen::Ref<const Vec>& q, double r2) const {
  const Node& nd = nodes_[static_cast<std::size_t>(node)];
  if (box_dist2(nd, q) > r2) return false;
  if (nd.left < 0) {
    for (int i = nd.begin; i < nd.end; ++i) {
      if ((pts_->row(idx_[static_cast<std::size_t>(i)]).transpose() - q).squaredNorm() <= r2)
        return true;
    }
    return false;
  }
  return any_rec(nd.left, q, r2) || any_rec(nd.right, q, r2);
}

bool KdTree::any_within(const Eigen::Ref<const Vec>& q, double r) const {
  if (empty() || r < 0.0) return false;
  return any_rec(0, q, r * r);
}

void KdTree::within_rec(int node, const Eigen::Ref<const Vec>& q, double r2,
                        std::vector<int>& out) const {
  const Node& nd = nodes_[static_cast<std::size_t>(node)];
  if (box_dist2(nd, q) > r2) return;
  if (nd.left < 0) {
    for (int i = nd.begin; i < nd.end; ++i) {
      const int pi = idx_[static_cast<std::size_t>(i)];
      if ((pts_->row(pi).transpose() - q).squaredNorm() <= r2) out.push_back(pi);
    }
    return;
  }
  within_rec(nd.left, q, r2, out);
  within_rec(nd.right, q, r2, out);
}

std::vector<int> KdTree::within(const Eigen::Ref<const Vec>& q, double r) const {
  std::vector<int> out;
  if (empty() || r < 0.0) return out;
  within_rec(0, q, r * r, out);
  std::sort(out.begin(), out.end());
  return out;
}

void KdTree::box_rec(int node, const Eigen::Ref<const Vec>& lo, const Eigen::Ref<const Vec>& hi,
                     double& best_d2) const {
  const Node& nd = nodes_[static_cast<std::size_t>(node)];
  if (box_box_dist2(nd.bb_lo, nd.bb_hi, lo, hi) >= best_d2) return;
  if (nd.left < 0) {
    for (int i = nd.begin; i < nd.end; ++i) {
      const auto row = pts_->row(idx_[static_cast<std::size_t>(i)]);
      double d2 = 0.0;
      for (int c = 0; c < lo.size(); ++c) {
        double d = 0.0;
        if (row[c] < lo[c]) d = lo[c] - row[c];
        else if (row[c] > hi[c]) d = row[c] - hi[c];
        d2 += d * d;
      }
      best_d2 = std::min(best_d2, d2);
    }
    return;
  }
  box_rec(nd.left, lo, hi, best_d2);
  box_rec(nd.right, lo, hi, best_d2);
}

double KdTree::min_dist_to_box(const Eigen::Ref<const Vec>& lo,
                               const Eigen::Ref<const Vec>& hi) const {
  if (empty()) throw Error("KdTree::min_dist_to_box: empty tree");
  double best_d2 = std::numeric_limits<double>::infinity();
  box_rec(0, lo, hi, best_d2);
  return std::sqrt(best_d2);
}

}  // namespace msgeo
