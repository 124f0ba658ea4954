#include "msgeo/optimize.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace msgeo {

NelderMeadResult nelder_mead(const std::function<double(const Vec&)>& f, const Vec& x0,
                             const NelderMeadOptions& opts) {
  const auto n = static_cast<int>(x0.size());
  const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

  std::vector<Vec> xs(static_cast<std::size_t>(n + 1), x0);
  std::vector<double> fs(static_cast<std::size_t>(n + 1));
  for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i + 1)][i] += opts.init_step;
  for (int i = 0; i <= n; ++i) fs[static_cast<std::size_t>(i)] = f(xs[static_cast<std::size_t>(i)]);

  std::vector<int> ord(static_cast<std::size_t>(n + 1));
  int iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    std::iota(ord.begin(), ord.end(), 0);
    std::stable_sort(ord.begin(), ord.end(), [&](int a, int b) {
      return fs[static_cast<std::size_t>(a)] < fs[static_cast<std::size_t>(b)];
    });
    const int best = ord.front(), worst = ord.back(), second = ord[ord.size() - 2];
    if (fs[static_cast<std::size_t>(worst)] - fs[static_cast<std::size_t>(best)] < opts.tol) break;

    Vec centroid = Vec::Zero(n);
    for (int i = 0; i <= n; ++i)
      if (i != worst) centroid += xs[static_cast<std::size_t>(i)];
    centroid /= static_cast<double>(n);

    const Vec xr = centroid + alpha * (centroid - xs[static_cast<std::size_t>(worst)]);
    const double fr = f(xr);
    if (fr < fs[static_cast<std::size_t>(best)]) {
      const Vec xe = centroid + gamma * (centroid - xs[static_cast<std::size_t>(worst)]);
      const double fe = f(xe);
      if (fe < fr) {
        xs[static_cast<std::size_t>(worst)] = xe;
        fs[static_cast<std::size_t>(worst)] = fe;
      } else {
        xs[static_cast<std::size_t>(worst)] = xr;
        fs[static_cast<std::size_t>(worst)] = fr;
      }
      continue;
    }
    if (fr < fs[static_cast<std::size_t>(second)]) {
      xs[static_cast<std::size_t>(worst)] = xr;
      fs[static_cast<std::size_t>(worst)] = fr;
      continue;
    }
    const Vec xc = centroid + rho * (xs[static_cast<std::size_t>(worst)] - centroid);
    const double fc = f(xc);
    if (fc < fs[static_cast<std::size_t>(worst)]) {
      xs[static_cast<std::size_t>(worst)] = xc;
      fs[static_cast<std::size_t>(worst)] = fc;
      continue;
    }
    for (int i = 0; i <= n; ++i) {
      if (i == best) continue;
      xs[static_cast<std::size_t>(i)] =
          xs[static_cast<std::size_t>(best)] +
          sigma * (xs[static_cast<std::size_t>(i)] - xs[static_cast<std::size_t>(best)]);
      fs[static_cast<std::size_t>(i)] = f(xs[static_cast<std::size_t>(i)]);
    }
  }

  const auto best_it = std::min_element(fs.begin(), fs.end());
  NelderMeadResult res;
  res.x = xs[static_cast<std::size_t>(best_it - fs.begin())];
  res.value = *best_it;
  res.iterations = iter;
  return res;
}

}  // namespace msgeo
