#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "msgeo/dyadic.hpp"
#include "msgeo/types.hpp"

namespace msgeo {

// Level-by-level renormalization over a dyadic index. Leaves at level m get
// mass side(m)^d; sweeping k = m-1..0, a cube whose accumulated mass exceeds
// 2*side(k)^d is renormalized to side(k)^d (factor = side^d/mass < 1/2) and
// joins Bad; leaves and the root are Bad by fiat. Measures are reconstructed
// lazily from the leaf bases and the per-cube factor products.
struct FrostmannResult {
  const DyadicIndex* index = nullptr;
  int d = 1;
  int m = 0;
  double leaf_base = 0.0;  // side(m)^d

  std::vector<char> bad;          // by cube id
  std::vector<char> triggered;    // cubes whose renormalization fired
  std::vector<double> factor;     // side^d / mass for triggered cubes, else 1
  std::vector<double> stage_mass; // mu_m^{n(I)}(I)
  std::vector<double> anc_prod;   // prod of factors of triggered strict ancestors
  std::vector<double> subtree;    // stage_mass * anc_prod (all factors applied)
  std::vector<std::string> warnings;

  std::size_t bad_count() const;
  std::vector<int> bad_ids() const;  // ascending
  double cube_side_pow(int id) const;

  // mu^{I_top}(region) for a dyadic cube id or a ball (leaf membership in a
  // ball is decided by the leaf center)
  double measure_of(int top_id, int region_cube) const;
  double measure_of(int top_id, const Ball& region) const;

  std::string to_json(double content) const;
};

FrostmannResult run_frostmann(const DyadicIndex& index, int d, int m);

struct PackingReport {
  double sum = 0.0;    // sum over Bad of side^d
  double ratio = 0.0;  // sum / content
};
PackingReport bad_packing(const FrostmannResult& res, double content);

// Tree(I): cubes whose smallest properly-containing Bad cube is I, plus I
// itself; Stop(I): the Bad cubes properly inside.
struct DyadicTree {
  int top = -1;
  std::vector<int> members;  // ascending cube ids
  std::vector<int> stops;    // ascending
};
std::vector<DyadicTree> bad_trees(const FrostmannResult& res);

// Exact invariant checks (violation counts; zero means the bound holds).
// upper regularity: mu^I(J) <= 2*side(J)^d for every Bad top I and every J
std::size_t upper_regularity_violations(const FrostmannResult& res, double rel_tol = 1e-12);
// stop bounds: 2^(d-n-1)*side(J)^d <= mu^I(J) <= 2*side(J)^d for J in Stop(I)
std::size_t stop_bound_violations(const FrostmannResult& res, double rel_tol = 1e-12);
// mass decay along chains: mu^I(J_leaf) <= 2^-t * side(J)^d with t the number
// of triggered cubes strictly between the leaf and I (inclusive of I)
std::size_t chain_decay_violations(const FrostmannResult& res, int samples, std::uint64_t seed,
                                   double rel_tol = 1e-12);

}  // namespace msgeo
