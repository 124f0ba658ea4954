#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msgeo/point_cloud.hpp"
#include "msgeo/types.hpp"

namespace msgeo {

// Cube in the Christ-David hierarchy built from nested maximal nets. The
// center is a net point of the cloud; size(Q) = rho^k * diam/(1-rho), which
// keeps the 5*rho^k shape with the top cube within a factor 1/(1-rho) of the
// cloud diameter while containing its members exactly.
struct ChristCube {
  int id = -1;
  int level = 0;
  int net_point = -1;  // index of the center in the cloud
  double size = 0.0;
  int parent = -1;
  std::vector<int> children;
  std::vector<int> members;  // point indices, ascending
};

class CubeForest {
 public:
  double rho = 0.5;
  int depth = 0;  // effective depth (may be truncated when nets saturate)
  double c0_observed = 0.0;
  double diam_scale = 0.0;  // ell(Q) = rho^level * diam_scale
  std::vector<std::string> warnings;

  const PointCloud& cloud() const { return *cloud_; }
  const std::vector<std::vector<int>>& nets() const { return nets_; }
  const std::vector<ChristCube>& cubes() const { return cubes_; }
  const ChristCube& cube(int id) const { return cubes_.at(static_cast<std::size_t>(id)); }
  const std::vector<int>& level_ids(int level) const { return by_level_.at(static_cast<std::size_t>(level)); }
  int root_id() const { return 0; }
  std::size_t cube_count() const { return cubes_.size(); }

  Vec center(int id) const { return cloud_->point(cube(id).net_point); }
  double size_of(int id) const { return cube(id).size; }

  // B(zeta_Q, scale * ell(Q))
  Ball cube_ball(int id, double scale = 1.0) const;

  // id of the level-(k+1) ... walks down via children; -1 when not found
  int cube_of_point(int level, int point) const { return cube_of_.at(static_cast<std::size_t>(level)).at(static_cast<std::size_t>(point)); }

  // all descendants of `id` (inclusive), ascending by (level, id)
  std::vector<int> descendants(int id) const;

  std::string to_json(bool include_members = false) const;

  friend CubeForest build_christ_cubes(const PointCloud& cloud, double rho, int depth,
                                       std::uint64_t seed);

 private:
  const PointCloud* cloud_ = nullptr;
  std::vector<std::vector<int>> nets_;      // X_k, ascending point indices
  std::vector<ChristCube> cubes_;           // level-major ids
  std::vector<std::vector<int>> by_level_;  // ids per level
  std::vector<std::vector<int>> cube_of_;   // [level][point] -> cube id
};

// Greedy nested nets (farthest-point order, lowest-index ties), one cube per
// net point per level, members assigned through nearest-net-point chains.
// Deterministic; the seed is kept for interface stability but the greedy
// construction does not consume randomness.
CubeForest build_christ_cubes(const PointCloud& cloud, double rho, int depth, std::uint64_t seed);

}  // namespace msgeo
