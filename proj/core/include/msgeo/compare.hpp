#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "msgeo/beta.hpp"
#include "msgeo/criteria.hpp"
#include "msgeo/point_cloud.hpp"

namespace msgeo {

// One row of the comparability experiment: both sides of
//   H^d(R) + P(R) ~ beta_{E,A,p}(R)
// for the root cube and every level-1 cube. content_hd stands in for H^d(R)
// (dyadic content of the cube members at sample scale).
struct CubeComparison {
  int cube_id = -1;
  int level = 0;
  double content_hd = 0.0;
  double beta_total = 0.0;
  std::map<std::string, double> criterion_sums;
  std::map<std::string, double> ratios;  // beta_total / (content_hd + sum)
};

struct ComparisonReport {
  double rho = 0.5;
  int depth = 0;
  BetaParams beta_params;
  std::uint64_t seed = 0;
  std::vector<CriterionParams> criteria;
  std::vector<CubeComparison> cubes;
  std::map<std::string, std::map<int, double>> criterion_levels;  // root-cube per-level sums
  std::map<int, double> beta_levels;

  const CubeComparison& root() const { return cubes.front(); }
  std::string to_json(const std::string& timestamp = "") const;
};

// builds the forest and runs the full comparison
ComparisonReport compare_tst(const PointCloud& cloud, double rho, int depth,
                             const BetaParams& beta_params,
                             const std::vector<CriterionParams>& criteria, std::uint64_t seed);

// same, over an existing forest
ComparisonReport compare_over_forest(const PointCloud& cloud, const CubeForest& forest,
                                     const BetaParams& beta_params,
                                     const std::vector<CriterionParams>& criteria,
                                     std::uint64_t seed);

}  // namespace msgeo
