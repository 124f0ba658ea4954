#pragma once

#include <vector>

#include "msgeo/types.hpp"

namespace msgeo {

// Weighted grid sample of the d-dimensional skeleton (union of d-faces) of an
// axis cube. Faces are sampled at cell midpoints with step <= spacing; each
// sample carries weight face_volume / samples_on_face, so the total weight is
// exactly C(n,d) * 2^(n-d) * side^d.
struct SkeletonSample {
  Mat points;
  Vec weights;
};

SkeletonSample sample_skeleton(const Vec& corner, double side, int d, double spacing);

}  // namespace msgeo
