#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "msgeo/point_cloud.hpp"

namespace msgeo {

// Deterministic test-set generator. Parameters are shape specific:
//   line / segment : n_points (default 1025), jitter (perpendicular, default 0)
//   circle         : n_points (default 360)
//   lipschitz_graph: n_points (default 1025), lambda (amplitude, default 0.1)
//   cantor4        : depth (default 4); 4^depth corner representatives,
//                    contraction 1/4, resolution 4^-depth
//   koch           : depth (default 4); polyline vertices
//   cross          : n_points per arm (default 513); two unit segments
//                    crossing at the origin (origin deduplicated)
//   plane_patch    : n_points per side (default 33); d=2 patch in R^3
//   noisy_plane    : plane_patch plus gaussian z-noise of amplitude `noise`
struct ShapeSpec {
  std::string shape;
  std::map<std::string, double> params;
  std::uint64_t seed = 0;

  double get(const std::string& key, double fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  }
};

PointCloud generate(const ShapeSpec& spec);

}  // namespace msgeo
