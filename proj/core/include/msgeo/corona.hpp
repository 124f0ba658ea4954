#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "msgeo/christ.hpp"
#include "msgeo/frostmann.hpp"
#include "msgeo/point_cloud.hpp"

namespace msgeo {

// Q ~ I: the inflated ball M*B_Q meets the dyadic cube I (exact box-ball
// test) and rho*side(I) <= ell(Q) < side(I).
bool relate_q_i(const CubeForest& forest, int christ_id, const DyadicIndex& index, int dyadic_id,
                double M);

// Stopping-time partition of the forest down to level k0, driven by the Bad
// dyadic cubes: Stop(R) holds the maximal cubes that are bottom-level or have
// a child related to some Bad cube; the next generation's tops are the
// children of stopped cubes.
struct CoronaRegion {
  int top = -1;
  int generation = 0;
  std::vector<int> tree;   // ascending christ cube ids
  std::vector<int> stops;  // ascending; subset of tree
  std::vector<int> next;   // ascending; children of stops (next tops)
};

struct Coronization {
  const CubeForest* forest = nullptr;
  double M = 8.0;
  int k0 = 0;
  std::vector<CoronaRegion> regions;  // generation-major, top-id order inside
  std::vector<int> region_of;         // per christ cube id (level <= k0)
  double packing_sum = 0.0;           // sum over tops of ell(R)^d

  const CoronaRegion& region_of_cube(int cube_id) const {
    return regions.at(static_cast<std::size_t>(region_of.at(static_cast<std::size_t>(cube_id))));
  }
};

Coronization build_coronization(const CubeForest& forest, const FrostmannResult& fr, double M,
                                int k0);

// d_F(x) = min over Q in F of (ell(Q) + dist(x, Q)); distances to a Christ
// cube use its member points, distances from a dyadic box are exact.
class SmoothingDistance {
 public:
  SmoothingDistance(const CubeForest& forest, std::vector<int> minimal_cubes);
  double at_point(const Eigen::Ref<const Vec>& x) const;
  double at_box(const Vec& corner, double side) const;
  const std::vector<int>& minimal_cubes() const { return cubes_; }

 private:
  const CubeForest* forest_;
  std::vector<int> cubes_;  // sorted by size ascending for early exit
};

double smoothing_distance(const CubeForest& forest, const std::vector<int>& minimal_cubes,
                          const Eigen::Ref<const Vec>& x);

// Whitney family of a stopping-time region: maximal cubes of the extended
// dyadic lattice with ell(I) < tau * d_F(I) that meet the sample points of
// T-hat (the same-level cubes meeting C0*B_T), dilated by the resolution.
struct WhitneyCube {
  int level = 0;  // lattice level (may be negative)
  Coords coords;
  Vec corner;
  double side = 0.0;
  double dist_f = 0.0;  // d_F of the cube box
};

struct WhitneyFamily {
  double tau = 0.05;
  double C0 = 5.0;
  double eta = 0.25;
  int top = -1;                // christ cube id T
  std::vector<int> minimal;    // F
  std::vector<WhitneyCube> cubes;
  std::size_t prop2_violations = 0;  // cubes breaking the pinned size bounds

  double max_side() const;
};

// eta <= 0 selects max(0.25, 2.5*sqrt(n)*tau); tau too large for the
// neighbor-comparability hypothesis tau^-1 > 2 sqrt(n)/eta is an error named
// "tau_too_large".
WhitneyFamily whitney_family(const CubeForest& forest, const DyadicIndex& index, int top,
                             const std::vector<int>& minimal_cubes, double tau, double C0,
                             double eta = 0.0);

// Weighted samples of union over the family of the d-skeletons, duplicates
// merged by weight pooling; total weight = sum C(n,d) 2^(n-d) ell(I)^d.
struct SkeletonSet {
  PointCloud cloud;
  double spacing = 0.0;  // coarsest sample step
  double total_weight = 0.0;
};

SkeletonSet skeleton_set(const WhitneyFamily& fam, int d, int spacing_divisor);

// Per-top verification of the corona guarantees.
struct TopReport {
  int top = -1;
  bool containment_ok = false;  // in-ball cloud covered & family inside 2*C0*B_T
  double closeness_max = 0.0;   // max over cloud points of dist(x, E-hat)/(tau d_F(x))
  bool whitney_ok = false;      // pinned size bounds hold for every cube
  double ar_ratio_min = 0.0;    // weight(B(x,r))/r^d over seeded samples
  double ar_ratio_max = 0.0;
  int ar_samples = 0;
  std::vector<double> ar_ratios;  // raw sampled ratios (histogram data)
};

struct MainLemmaReport {
  double packing_ratio = 0.0;  // packing_sum / content
  std::vector<TopReport> tops;
  std::string to_json() const;

  double ar_min() const;
  double ar_max() const;
};

MainLemmaReport verify_main_lemma(const Coronization& corona, const PointCloud& cloud,
                                  const DyadicIndex& index, double tau, double C0, int samples,
                                  std::uint64_t seed, int spacing_divisor = 8);

// Pruned coronization (good/bad labels supplied by a criterion): inside each
// corona tree the stopping rule also cuts at cubes with a bad-labeled child;
// generations continue with the children of cut cubes until exhaustion.
struct PrunedRegion {
  int root_top = -1;  // corona top R this region descends from
  int top = -1;       // Q_i^j
  int generation = 0;
  std::vector<int> tree;
  std::vector<int> minimal;
  std::optional<SkeletonSet> skeleton;
};

struct PrunedCoronization {
  std::vector<PrunedRegion> regions;
  int max_generation = 0;

  std::size_t regions_under(int top) const;
  int generations_under(int top) const;
};

PrunedCoronization prune_by_qp(const Coronization& corona, const DyadicIndex& index,
                               const std::vector<char>& cube_is_bad, double tau, double C0,
                               bool build_skeletons, int spacing_divisor = 8);

}  // namespace msgeo
