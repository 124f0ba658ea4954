#pragma once

#include <cmath>
#include "msgeo/rng.hpp"
#include "msgeo/types.hpp"

namespace msgeo {

// Affine d-plane in R^n: a base point and d orthonormal spanning rows.
struct Plane {
  Vec base;
  Mat frame;  // d x n, orthonormal rows

  int dim() const { return static_cast<int>(frame.rows()); }
  int ambient() const { return static_cast<int>(frame.cols()); }

  // |x - base| with the frame component removed; for an orthonormal frame
  // dist^2 = |r|^2 - sum_i (f_i . r)^2, which needs no temporaries
  double dist(const Eigen::Ref<const Vec>& x) const {
    const auto n = base.size();
    double rr = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double ri = x[i] - base[i];
      rr += ri * ri;
    }
    double proj2 = 0.0;
    for (Eigen::Index row = 0; row < frame.rows(); ++row) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) s += frame(row, i) * (x[i] - base[i]);
      proj2 += s * s;
    }
    return std::sqrt(std::max(0.0, rr - proj2));
  }

  Vec project(const Eigen::Ref<const Vec>& x) const {
    const Vec r = x - base;
    return base + frame.transpose() * (frame * r);
  }

  // in-plane coordinates of the orthogonal projection
  Vec coords(const Eigen::Ref<const Vec>& x) const { return frame * (x - base); }
};

// Orthonormalizes the rows of `raw` by Gram-Schmidt; near-dependent rows are
// replaced by the first canonical axes outside the current span, so the
// result is always a full d-frame and deterministic.
Mat orthonormal_rows(const Mat& raw);

// Fixes each row's sign so its first component of magnitude > 1e-12 is
// positive.
void canonical_sign(Mat& frame);

// Weighted PCA plane: weighted centroid base, frame = top-d principal rows of
// the weighted second-moment matrix (descending), canonical signs. An empty
// weight vector means uniform weights.
Plane fit_plane(const Mat& pts, const Vec& weights, int d);

// Random d-plane through `base` (seeded gaussian frame, orthonormalized).
Plane random_plane(const Vec& base, int d, Rng& rng);

}  // namespace msgeo
