#include "msgeo/shapes.hpp"

#include <cmath>

#include "msgeo/rng.hpp"

namespace msgeo {

namespace {

constexpr double kPi = 3.14159265358979323846;

PointCloud line_like(const ShapeSpec& spec) {
  const int npts = static_cast<int>(spec.get("n_points", 1025));
  const double jitter = spec.get("jitter", 0.0);
  if (npts < 2) throw Error("generate: line/segment needs n_points >= 2");
  Mat pts(npts, 2);
  Rng rng(mix_seed(spec.seed, 0x11f1));
  for (int i = 0; i < npts; ++i) {
    pts(i, 0) = static_cast<double>(i) / (npts - 1);
    pts(i, 1) = jitter == 0.0 ? 0.0 : jitter * (2.0 * rng.uniform01() - 1.0);
  }
  const double h = 1.0 / (npts - 1) + std::abs(jitter);
  return PointCloud(std::move(pts), 2, 1, h);
}

PointCloud circle(const ShapeSpec& spec) {
  const int npts = static_cast<int>(spec.get("n_points", 360));
  if (npts < 3) throw Error("generate: circle needs n_points >= 3");
  Mat pts(npts, 2);
  for (int i = 0; i < npts; ++i) {
    const double t = 2.0 * kPi * i / npts;
    pts(i, 0) = std::cos(t);
    pts(i, 1) = std::sin(t);
  }
  return PointCloud(std::move(pts), 2, 1, 2.0 * kPi / npts);
}

PointCloud lipschitz_graph(const ShapeSpec& spec) {
  const int npts = static_cast<int>(spec.get("n_points", 1025));
  const double lambda = spec.get("lambda", 0.1);
  if (npts < 2) throw Error("generate: lipschitz_graph needs n_points >= 2");
  Mat pts(npts, 2);
  for (int i = 0; i < npts; ++i) {
    const double t = static_cast<double>(i) / (npts - 1);
    pts(i, 0) = t;
    pts(i, 1) = lambda * std::sin(2.0 * kPi * t);
  }
  const double h = std::sqrt(1.0 + std::pow(2.0 * kPi * lambda, 2)) / (npts - 1);
  return PointCloud(std::move(pts), 2, 1, h);
}

PointCloud cantor4(const ShapeSpec& spec) {
  const int depth = static_cast<int>(spec.get("depth", 4));
  if (depth < 1 || depth > 10) throw Error("generate: cantor4 depth must be in [1, 10]");
  const double offs[4][2] = {{0.0, 0.0}, {0.75, 0.0}, {0.0, 0.75}, {0.75, 0.75}};
  std::size_t count = 1;
  for (int g = 0; g < depth; ++g) count *= 4;
  Mat pts(static_cast<Eigen::Index>(count), 2);
  for (std::size_t w = 0; w < count; ++w) {
    double x = 0.0, y = 0.0, scale = 1.0;
    std::size_t code = w;
    for (int g = 0; g < depth; ++g) {
      const std::size_t c = code % 4;
      code /= 4;
      x += scale * offs[c][0];
      y += scale * offs[c][1];
      scale *= 0.25;
    }
    pts(static_cast<Eigen::Index>(w), 0) = x;
    pts(static_cast<Eigen::Index>(w), 1) = y;
  }
  return PointCloud(std::move(pts), 2, 1, std::pow(0.25, depth));
}

PointCloud koch(const ShapeSpec& spec) {
  const int depth = static_cast<int>(spec.get("depth", 4));
  if (depth < 0 || depth > 8) throw Error("generate: koch depth must be in [0, 8]");
  std::vector<std::pair<double, double>> v{{0.0, 0.0}, {1.0, 0.0}};
  for (int g = 0; g < depth; ++g) {
    std::vector<std::pair<double, double>> next;
    next.reserve(v.size() * 4);
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      const auto [ax, ay] = v[i];
      const auto [bx, by] = v[i + 1];
      const double dx = (bx - ax) / 3.0, dy = (by - ay) / 3.0;
      const double px = ax + dx, py = ay + dy;
      const double qx = ax + 2 * dx, qy = ay + 2 * dy;
      // apex of the equilateral bump
      const double mx = px + dx / 2.0 - dy * std::sqrt(3.0) / 2.0;
      const double my = py + dy / 2.0 + dx * std::sqrt(3.0) / 2.0;
      next.push_back({ax, ay});
      next.push_back({px, py});
      next.push_back({mx, my});
      next.push_back({qx, qy});
    }
    next.push_back(v.back());
    v = std::move(next);
  }
  Mat pts(static_cast<Eigen::Index>(v.size()), 2);
  for (std::size_t i = 0; i < v.size(); ++i) {
    pts(static_cast<Eigen::Index>(i), 0) = v[i].first;
    pts(static_cast<Eigen::Index>(i), 1) = v[i].second;
  }
  return PointCloud(std::move(pts), 2, 1, std::pow(1.0 / 3.0, depth));
}

PointCloud cross(const ShapeSpec& spec) {
  const int per_arm = static_cast<int>(spec.get("n_points", 513));
  if (per_arm < 3) throw Error("generate: cross needs n_points >= 3");
  Mat pts(2 * per_arm, 2);
  for (int i = 0; i < per_arm; ++i) {
    const double t = -0.5 + static_cast<double>(i) / (per_arm - 1);
    pts(i, 0) = t;
    pts(i, 1) = 0.0;
    pts(per_arm + i, 0) = 0.0;
    pts(per_arm + i, 1) = t;
  }
  return PointCloud(std::move(pts), 2, 1, 1.0 / (per_arm - 1));
}

PointCloud plane_patch(const ShapeSpec& spec, bool noisy) {
  const int side = static_cast<int>(spec.get("n_points", 33));
  const double noise = noisy ? spec.get("noise", 0.01) : 0.0;
  if (side < 2) throw Error("generate: plane_patch needs n_points >= 2");
  Mat pts(static_cast<Eigen::Index>(side) * side, 3);
  Rng rng(mix_seed(spec.seed, 0x91a7e));
  int r = 0;
  for (int i = 0; i < side; ++i)
    for (int j = 0; j < side; ++j, ++r) {
      pts(r, 0) = static_cast<double>(i) / (side - 1);
      pts(r, 1) = static_cast<double>(j) / (side - 1);
      pts(r, 2) = noise == 0.0 ? 0.0 : noise * rng.gaussian();
    }
  const double grid = std::sqrt(2.0) / (2.0 * (side - 1));
  return PointCloud(std::move(pts), 3, 2, std::max(grid, 2.0 * noise));
}

}  // namespace

PointCloud generate(const ShapeSpec& spec) {
  if (spec.shape == "line" || spec.shape == "segment") return line_like(spec);
  if (spec.shape == "circle") return circle(spec);
  if (spec.shape == "lipschitz_graph") return lipschitz_graph(spec);
  if (spec.shape == "cantor4") return cantor4(spec);
  if (spec.shape == "koch") return koch(spec);
  if (spec.shape == "cross") return cross(spec);
  if (spec.shape == "plane_patch") return plane_patch(spec, false);
  if (spec.shape == "noisy_plane") return plane_patch(spec, true);
  throw Error("generate: unknown shape '" + spec.shape + "'");
}

}  // namespace msgeo
