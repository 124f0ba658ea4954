#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msgeo/point_cloud.hpp"
#include "msgeo/types.hpp"

namespace msgeo {

struct RegularityWitness {
  Vec center;
  double radius = 0.0;
  double ratio = 0.0;
};

// Worst observed lower-content-regularity constant over sampled balls.
struct RegularityReport {
  double c_observed = 0.0;  // min of witness ratios
  std::vector<RegularityWitness> witnesses;
  int samples_checked = 0;

  std::string to_json() const;
};

// Samples `trials` pairs (x, r) with x a cloud point and r log-uniform in
// [8*resolution, diam/2], and reports min over samples of
// dyadic_content(cloud ∩ B(x,r), d) / r^d. Reproducible given the seed.
RegularityReport lower_regularity_scan(const PointCloud& cloud, int d, int trials,
                                       std::uint64_t seed);

}  // namespace msgeo
