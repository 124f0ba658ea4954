#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "msgeo/point_cloud.hpp"
#include "msgeo/types.hpp"

namespace msgeo {

using Coords = std::vector<std::int64_t>;

// Dyadic lattice anchored at the componentwise floor of a cloud's bounding
// box, with root side the smallest power of two covering the box. Level k
// cells have side root_side * 2^-k and half-open geometry, except that points
// exactly on the far root boundary are clamped into the last cell. Negative
// levels and out-of-root coords address the same lattice extended to all of
// R^n (used by the Whitney machinery).
struct DyadicLattice {
  Vec corner;        // integer coordinates
  double root_side = 1.0;
  int n = 0;

  double side(int level) const { return root_side * std::exp2(static_cast<double>(-level)); }

  // cell containing x at `level`, clamped into the root
  Coords cell_of_clamped(const Eigen::Ref<const Vec>& x, int level) const;

  // unclamped cell (coords may be negative or beyond the root)
  Coords cell_of(const Eigen::Ref<const Vec>& x, int level) const;

  Vec cell_corner(int level, const Coords& c) const;

  static Coords parent_of(const Coords& c);
  static Coords child_of(const Coords& c, unsigned mask);

  // distance from x to the closed cell box
  double dist_to_cell(const Eigen::Ref<const Vec>& x, int level, const Coords& c) const;
  bool cell_contains(const Eigen::Ref<const Vec>& x, int level, const Coords& c, double tol = 0.0) const;
};

// Lattice for a cloud: corner = floor of bbox min, root side = smallest power
// of two >= the largest extent (and >= min_side when given).
DyadicLattice make_lattice(const PointCloud& cloud, double min_side = 0.0);

struct DyadicCubeRec {
  int id = -1;
  int level = 0;
  Coords coords;
  int parent = -1;            // cube id, -1 for the root
  std::vector<int> children;  // cube ids
  std::vector<int> members;   // point indices, ascending
};

// Occupancy index of a cloud over its dyadic lattice, levels 0..max_level.
// Cube ids are level-major with coords in lexicographic order.
class DyadicIndex {
 public:
  DyadicIndex(const PointCloud& cloud, int max_level);

  const DyadicLattice& lattice() const { return lattice_; }
  int max_level() const { return max_level_; }
  const PointCloud& cloud() const { return *cloud_; }

  const std::vector<DyadicCubeRec>& cubes() const { return cubes_; }
  const DyadicCubeRec& cube(int id) const { return cubes_.at(static_cast<std::size_t>(id)); }
  int root_id() const { return 0; }
  std::size_t cube_count() const { return cubes_.size(); }

  // ids of occupied cubes at a level, ascending
  const std::vector<int>& level_ids(int level) const { return by_level_.at(static_cast<std::size_t>(level)); }

  // id of the occupied cube at (level, coords), or -1
  int find(int level, const Coords& c) const;

  double side(int level) const { return lattice_.side(level); }
  Vec cube_corner(int id) const { return lattice_.cell_corner(cube(id).level, cube(id).coords); }

  // occupied-cell counts per level (for tests)
  std::vector<std::size_t> occupancy_counts() const;

 private:
  const PointCloud* cloud_ = nullptr;
  DyadicLattice lattice_;
  int max_level_ = 0;
  std::vector<DyadicCubeRec> cubes_;
  std::vector<std::vector<int>> by_level_;
  std::vector<std::map<Coords, int>> lookup_;
};

DyadicIndex build_dyadic_index(const PointCloud& cloud, int max_level);

}  // namespace msgeo
