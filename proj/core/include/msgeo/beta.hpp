#pragma once

#include <optional>
#include <string>
#include <vector>

#include "msgeo/christ.hpp"
#include "msgeo/plane.hpp"
#include "msgeo/point_cloud.hpp"

namespace msgeo {

// Parameters of the content beta numbers: ball inflation A, integral exponent
// p with 1 <= p < p(d), p(d) = 2d/(d-2) for d > 2 and infinity otherwise.
struct BetaParams {
  double A = 3.0;
  double p = 2.0;
  int d = 1;

  double p_ceiling() const { return d > 2 ? 2.0 * d / (d - 2.0) : std::numeric_limits<double>::infinity(); }
  void validate() const {
    if (!(A >= 1.0)) throw Error("BetaParams: A must be >= 1");
    if (!(p >= 1.0 && p < p_ceiling())) throw Error("BetaParams: p out of [1, p(d))");
    if (d < 1) throw Error("BetaParams: d must be >= 1");
  }
};

struct BetaValue {
  double value = 0.0;
  double lower = 0.0;   // bracket from the quantile cap (equal when exact)
  double upper = 0.0;
  Plane plane;          // plane achieving the reported value
};

// beta_inf: (2/diam B) * inf over d-planes of the sup distance of the in-ball
// points to the plane. The infimum is approximated by PCA initialization,
// Nelder-Mead refinement and seeded random restarts; the result is an upper
// bound on the true infimum and deterministic.
BetaValue beta_inf_full(const PointCloud& cloud, const Ball& ball, int d);
double beta_inf(const PointCloud& cloud, const Ball& ball, int d);

// Content beta over a ball:
//   beta^p = (1/r^d) * \int_0^1 H(t) t^(p-1) dt,
// H(t) the dyadic content of the in-ball points at distance > t*r from the
// plane. H is a step function of the sorted normalized distances, so the
// integral is evaluated exactly; above 512 points the thresholds are capped
// at 512 quantiles and the bracket midpoint is returned. A missing plane is
// optimized as in beta_inf.
BetaValue beta_content_full(const PointCloud& cloud, const Ball& ball, const BetaParams& params,
                            const std::optional<Plane>& plane = std::nullopt);
double beta_content(const PointCloud& cloud, const Ball& ball, const BetaParams& params,
                    const std::optional<Plane>& plane = std::nullopt);

struct BetaRecord {
  int cube_id = -1;
  int level = 0;
  double size = 0.0;
  double ball_radius = 0.0;
  double beta = 0.0;
  double contribution = 0.0;  // beta^2 * ell(Q)^d
};

// Multiscale square sum over a root cube R:
//   total = ell(R)^d + sum_{Q ⊆ R} beta(A B_Q)^2 ell(Q)^d.
struct BetaProfile {
  BetaParams params;
  int root = -1;
  double root_size = 0.0;
  double total = 0.0;
  std::vector<BetaRecord> records;  // cube-id order

  double per_level_sum(int level) const;
  std::string to_csv() const;
  std::string summary_json() const;
};

BetaProfile beta_sum(const CubeForest& forest, const PointCloud& cloud, int root_id,
                     const BetaParams& params);

}  // namespace msgeo
