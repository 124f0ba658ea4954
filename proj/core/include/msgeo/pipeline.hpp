#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "msgeo/criteria.hpp"
#include "msgeo/shapes.hpp"

namespace msgeo {

// Configuration of the end-to-end run: generate (or load) a cloud, build the
// Christ forest and dyadic index, run the Frostmann construction and the
// coronization, verify the corona guarantees, classify against the requested
// criteria, and emit the comparison report plus plot data. JSON config keys
// mirror the CLI flags ("generate" and "analyze" sections plus "out").
struct PipelineConfig {
  std::optional<ShapeSpec> shape;  // generate section
  std::string cloud;               // or a point-cloud file
  int n = 2;
  int d = 1;
  double resolution = 0.0;  // <= 0: inferred as the max nearest-neighbor gap

  double rho = 0.5;
  int depth = 6;  // forest depth, the truncation scale k0
  int m = -1;     // dyadic depth; -1 selects the smallest compatible one

  double tau = 0.05;
  double c0 = 5.0;  // corona inflation C0 (> 4)
  double M = 8.0;
  int samples = 200;
  int divisor = 8;

  std::vector<std::string> criteria{"bwgl", "ls"};
  double epsilon = 0.05;
  double bwgl_c0 = 2.0;
  double theta = 0.5;
  int max_planes = 2;

  double beta_A = 3.0;
  double beta_p = 2.0;

  std::uint64_t seed = 0;
  std::string out;

  static PipelineConfig from_json_file(const std::string& path);
  std::vector<CriterionParams> criterion_params() const;
};

struct PipelineResult {
  int exit_code = 0;
  std::string failed_check;  // empty on success
  std::vector<std::string> artifacts;
};

// Returns instead of throwing: configuration and hard-invariant failures are
// named in failed_check and reflected in exit_code.
PipelineResult run_pipeline(const PipelineConfig& cfg);

}  // namespace msgeo
