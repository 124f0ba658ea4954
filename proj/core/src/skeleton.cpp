#include "msgeo/skeleton.hpp"

#include <cmath>
#include <vector>

namespace msgeo {

SkeletonSample sample_skeleton(const Vec& corner, double side, int d, double spacing) {
  const int n = static_cast<int>(corner.size());
  if (d < 0 || d > n) throw Error("sample_skeleton: need 0 <= d <= n");
  if (!(side > 0.0)) throw Error("sample_skeleton: side must be positive");
  if (d > 0 && !(spacing > 0.0 && spacing <= side / 2.0 + 1e-15))
    throw Error("sample_skeleton: need 0 < spacing <= side/2");

  const int steps = d == 0 ? 1 : std::max(1, static_cast<int>(std::ceil(side / spacing - 1e-12)));
  const double step = side / steps;
  const double w = std::pow(side, d) / std::pow(static_cast<double>(steps), d);

  // choose the d free axes
  std::vector<std::vector<int>> axis_sets;
  std::vector<int> pick;
  auto choose = [&](auto&& self, int from) -> void {
    if (static_cast<int>(pick.size()) == d) {
      axis_sets.push_back(pick);
      return;
    }
    for (int a = from; a < n; ++a) {
      pick.push_back(a);
      self(self, a + 1);
      pick.pop_back();
    }
  };
  choose(choose, 0);

  std::vector<Vec> rows;
  std::vector<double> weights;
  for (const auto& axes : axis_sets) {
    std::vector<int> fixed;
    for (int a = 0; a < n; ++a)
      if (std::find(axes.begin(), axes.end(), a) == axes.end()) fixed.push_back(a);
    const auto nfixed = static_cast<unsigned>(fixed.size());
    for (unsigned corner_mask = 0; corner_mask < (1u << nfixed); ++corner_mask) {
      // one face: fixed axes pinned at 0 or side, free axes gridded
      std::vector<int> grid(static_cast<std::size_t>(d), 0);
      while (true) {
        Vec p = corner;
        for (unsigned fi = 0; fi < nfixed; ++fi)
          if ((corner_mask >> fi) & 1u) p[fixed[fi]] += side;
        for (int gi = 0; gi < d; ++gi)
          p[axes[static_cast<std::size_t>(gi)]] += (grid[static_cast<std::size_t>(gi)] + 0.5) * step;
        rows.push_back(p);
        weights.push_back(w);
        int gi = 0;
        for (; gi < d; ++gi) {
          if (++grid[static_cast<std::size_t>(gi)] < steps) break;
          grid[static_cast<std::size_t>(gi)] = 0;
        }
        if (gi == d) break;
      }
    }
  }

  SkeletonSample out;
  out.points.resize(static_cast<Eigen::Index>(rows.size()), n);
  out.weights.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.points.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    out.weights[static_cast<Eigen::Index>(i)] = weights[i];
  }
  return out;
}

}  // namespace msgeo
