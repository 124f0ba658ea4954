#pragma once

#include <functional>

#include "msgeo/types.hpp"

namespace msgeo {

struct NelderMeadOptions {
  int max_iter = 200;
  double tol = 1e-11;       // simplex value spread
  double init_step = 0.25;  // initial simplex edge per coordinate
};

struct NelderMeadResult {
  Vec x;
  double value = 0.0;
  int iterations = 0;
};

// Deterministic Nelder-Mead simplex descent (stable ordering, no randomness).
NelderMeadResult nelder_mead(const std::function<double(const Vec&)>& f, const Vec& x0,
                             const NelderMeadOptions& opts);

}  // namespace msgeo
