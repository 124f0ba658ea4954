#include "msgeo/regularity.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "msgeo/content.hpp"
#include "msgeo/rng.hpp"

namespace msgeo {

RegularityReport lower_regularity_scan(const PointCloud& cloud, int d, int trials,
                                       std::uint64_t seed) {
  if (trials < 1) throw Error("lower_regularity_scan: trials must be >= 1");
  if (cloud.size() < 2) throw Error("lower_regularity_scan: no scales to scan");
  const double diam = cloud.diameter();
  const double r_lo = 8.0 * cloud.resolution();
  const double r_hi = diam / 2.0;
  if (!(r_lo < r_hi)) throw Error("lower_regularity_scan: no scales to scan");

  const double min_cell = content_min_cell(cloud.resolution(), diam);

  Rng rng(seed);
  RegularityReport rep;
  rep.samples_checked = trials;
  rep.c_observed = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    const auto ci = static_cast<int>(rng.index(cloud.size()));
    const double r = rng.log_uniform(r_lo, r_hi);
    const Ball ball(cloud.point(ci), r);
    const auto in = cloud.indices_in(ball);
    Mat sub(static_cast<Eigen::Index>(in.size()), cloud.n());
    for (std::size_t k = 0; k < in.size(); ++k) sub.row(static_cast<Eigen::Index>(k)) = cloud.points().row(in[k]);
    const double content = dyadic_content_points(sub, d, min_cell);
    const double ratio = content / std::pow(r, d);
    rep.witnesses.push_back({ball.center, r, ratio});
    rep.c_observed = std::min(rep.c_observed, ratio);
  }
  return rep;
}

std::string RegularityReport::to_json() const {
  nlohmann::ordered_json j;
  j["c_observed"] = c_observed;
  j["witnesses"] = nlohmann::ordered_json::array();
  for (const auto& w : witnesses) {
    nlohmann::ordered_json jw;
    jw["center"] = std::vector<double>(w.center.data(), w.center.data() + w.center.size());
    jw["radius"] = w.radius;
    jw["ratio"] = w.ratio;
    j["witnesses"].push_back(jw);
  }
  j["samples_checked"] = samples_checked;
  return j.dump(2);
}

}  // namespace msgeo
