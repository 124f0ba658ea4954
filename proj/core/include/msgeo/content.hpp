#pragma once

#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

#include "msgeo/dyadic.hpp"
#include "msgeo/point_cloud.hpp"
#include "msgeo/types.hpp"

namespace msgeo {

// smallest power of two >= x
double pow2_at_least(double x);

// Dyadic Hausdorff-content proxy: exact dynamic program over the dyadic tree
// rooted at the points' bounding dyadic cube,
//   cost(I) = min( side(I)^d, sum over occupied children ),
// with leaf cost side^d at side = min_cell. Deterministic.
double dyadic_content_points(const Mat& pts, int d, double min_cell);

// Checked wrapper for clouds: min_cell must be a power of two and no finer
// than the cloud resolution. (A degenerate bounding box is allowed: a single
// point costs one leaf, min_cell^d.)
double dyadic_content(const PointCloud& cloud, int d, double min_cell);

// min_cell used for ball-restricted superlevel contents: the larger of the
// resolution and 2^-20 * diam, snapped up to a power of two.
double content_min_cell(double resolution, double diam);

// Incremental version of the same dynamic program over a fixed lattice:
// points are inserted one at a time and value() is maintained. Inserting a
// point whose leaf cell is already occupied is a no-op. Used to evaluate the
// contents of a nested family of superlevel sets in one descending sweep.
class ContentAccumulator {
 public:
  // leaf cells have side lattice.side(leaf_level)
  ContentAccumulator(DyadicLattice lattice, int leaf_level, int d);

  // Lattice sized for `pts` with leaf cells of side min_cell.
  static ContentAccumulator for_points(const Mat& pts, int d, double min_cell);

  void insert(const Eigen::Ref<const Vec>& x);
  double value() const;
  // empties the occupancy but keeps the allocated buckets (cheap re-use
  // across sweeps over the same lattice)
  void reset();
  const DyadicLattice& lattice() const { return lattice_; }

 private:
  struct Node {
    double child_sum = 0.0;
    double cost = 0.0;
  };

  DyadicLattice lattice_;
  int leaf_level_ = 0;
  int d_ = 0;
  std::vector<double> cell_cost_;  // side(k)^d per level
  // cells keyed by packed coordinates when they fit in 64 bits, otherwise by
  // the coordinate vector
  bool packed_ = false;
  int width_ = 1;
  std::vector<std::unordered_map<std::uint64_t, Node>> fast_;
  std::vector<std::map<Coords, Node>> slow_;
};

}  // namespace msgeo
