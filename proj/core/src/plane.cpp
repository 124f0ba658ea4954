#include "msgeo/plane.hpp"

#include <Eigen/Eigenvalues>

namespace msgeo {

Mat orthonormal_rows(const Mat& raw) {
  const auto d = raw.rows();
  const auto n = raw.cols();
  Mat out(d, n);
  int placed = 0;
  auto try_add = [&](Vec v) {
    for (int j = 0; j < placed; ++j) v -= out.row(j).dot(v) * out.row(j).transpose();
    const double norm = v.norm();
    if (norm < 1e-10) return false;
    out.row(placed++) = v.transpose() / norm;
    return true;
  };
  for (int i = 0; i < d && placed < d; ++i) try_add(raw.row(i).transpose());
  for (int a = 0; a < n && placed < d; ++a) try_add(Vec::Unit(n, a));
  if (placed < d) throw Error("orthonormal_rows: cannot complete frame");
  return out;
}

void canonical_sign(Mat& frame) {
  for (int i = 0; i < frame.rows(); ++i) {
    for (int c = 0; c < frame.cols(); ++c) {
      if (std::abs(frame(i, c)) > 1e-12) {
        if (frame(i, c) < 0.0) frame.row(i) = -frame.row(i);
        break;
      }
    }
  }
}

Plane fit_plane(const Mat& pts, const Vec& weights, int d) {
  if (pts.rows() < 1) throw Error("fit_plane: need at least one point");
  const auto n = pts.cols();
  if (d < 1 || d > n) throw Error("fit_plane: need 1 <= d <= n");

  Vec w = weights;
  if (w.size() == 0) w = Vec::Ones(pts.rows());
  const double wsum = w.sum();
  if (!(wsum > 0.0)) throw Error("fit_plane: weights sum to zero");

  Vec centroid = (pts.transpose() * w) / wsum;
  Mat second = Mat::Zero(n, n);
  for (int i = 0; i < pts.rows(); ++i) {
    const Vec r = pts.row(i).transpose() - centroid;
    second += w[i] * r * r.transpose();
  }

  Eigen::SelfAdjointEigenSolver<Mat> eig(second);
  Mat frame(d, n);
  for (int i = 0; i < d; ++i) frame.row(i) = eig.eigenvectors().col(n - 1 - i).transpose();
  frame = orthonormal_rows(frame);
  canonical_sign(frame);

  Plane p;
  p.base = std::move(centroid);
  p.frame = std::move(frame);
  return p;
}

Plane random_plane(const Vec& base, int d, Rng& rng) {
  const auto n = base.size();
  Mat raw(d, n);
  for (int i = 0; i < d; ++i)
    for (int c = 0; c < n; ++c) raw(i, c) = rng.gaussian();
  Plane p;
  p.base = base;
  p.frame = orthonormal_rows(raw);
  canonical_sign(p.frame);
  return p;
}

}  // namespace msgeo
