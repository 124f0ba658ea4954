#include "msgeo/compare.hpp"

#include <cmath>

#include <json.hpp>

#include "msgeo/content.hpp"

namespace msgeo {

namespace {

double cube_content(const PointCloud& cloud, const CubeForest& forest, int cube_id) {
  const auto& members = forest.cube(cube_id).members;
  Mat pts(static_cast<Eigen::Index>(members.size()), cloud.n());
  for (std::size_t i = 0; i < members.size(); ++i)
    pts.row(static_cast<Eigen::Index>(i)) = cloud.points().row(members[i]);
  const double min_cell = content_min_cell(cloud.resolution(), cloud.diameter());
  return dyadic_content_points(pts, cloud.d(), min_cell);
}

}  // namespace

ComparisonReport compare_tst(const PointCloud& cloud, double rho, int depth,
                             const BetaParams& beta_params,
                             const std::vector<CriterionParams>& criteria, std::uint64_t seed) {
  const auto forest = build_christ_cubes(cloud, rho, depth, seed);
  return compare_over_forest(cloud, forest, beta_params, criteria, seed);
}

ComparisonReport compare_over_forest(const PointCloud& cloud, const CubeForest& forest,
                                     const BetaParams& beta_params,
                                     const std::vector<CriterionParams>& criteria,
                                     std::uint64_t seed) {
  beta_params.validate();
  ComparisonReport rep;
  rep.rho = forest.rho;
  rep.depth = forest.depth;
  rep.beta_params = beta_params;
  rep.seed = seed;
  rep.criteria = criteria;

  std::vector<QPLabeling> labelings;
  labelings.reserve(criteria.size());
  for (const auto& p : criteria) labelings.push_back(classify(forest, cloud, p));

  std::vector<int> roots{forest.root_id()};
  for (int id : forest.level_ids(std::min(1, forest.depth)))
    if (id != forest.root_id()) roots.push_back(id);

  for (int rid : roots) {
    CubeComparison row;
    row.cube_id = rid;
    row.level = forest.cube(rid).level;
    row.content_hd = cube_content(cloud, forest, rid);
    const auto prof = beta_sum(forest, cloud, rid, beta_params);
    row.beta_total = prof.total;
    for (std::size_t c = 0; c < criteria.size(); ++c) {
      const auto name = criterion_name(criteria[c].kind);
      const auto cs = carleson_sum(labelings[c], forest, rid);
      row.criterion_sums[name] = cs.sum;
      row.ratios[name] = row.beta_total / (row.content_hd + cs.sum);
    }
    if (rid == forest.root_id()) {
      for (const auto& r : prof.records) rep.beta_levels[r.level] += r.contribution;
      for (std::size_t c = 0; c < criteria.size(); ++c)
        rep.criterion_levels[criterion_name(criteria[c].kind)] =
            carleson_by_level(labelings[c], forest, rid);
    }
    rep.cubes.push_back(std::move(row));
  }
  return rep;
}

std::string ComparisonReport::to_json(const std::string& timestamp) const {
  nlohmann::ordered_json j;
  nlohmann::ordered_json meta;
  meta["rho"] = rho;
  meta["depth"] = depth;
  meta["beta"] = {{"A", beta_params.A}, {"p", beta_params.p}, {"d", beta_params.d}};
  meta["seed"] = seed;
  nlohmann::ordered_json jcrit = nlohmann::ordered_json::array();
  for (const auto& p : criteria)
    jcrit.push_back({{"kind", criterion_name(p.kind)},
                     {"epsilon", p.epsilon},
                     {"C0", p.C0},
                     {"theta", p.theta},
                     {"max_planes", p.max_planes}});
  meta["criteria"] = jcrit;
  if (!timestamp.empty()) meta["timestamp"] = timestamp;
  j["metadata"] = meta;

  j["cubes"] = nlohmann::ordered_json::array();
  for (const auto& c : cubes) {
    nlohmann::ordered_json jc;
    jc["cube_id"] = c.cube_id;
    jc["level"] = c.level;
    jc["content_hd"] = c.content_hd;
    jc["beta_total"] = c.beta_total;
    jc["criterion_sums"] = c.criterion_sums;
    jc["ratios"] = c.ratios;
    j["cubes"].push_back(jc);
  }
  return j.dump(2);
}

}  // namespace msgeo
