#include "msgeo/frostmann.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "msgeo/rng.hpp"

namespace msgeo {

namespace {

bool is_ancestor(const DyadicIndex& ix, int anc, int id) {
  const int target_level = ix.cube(anc).level;
  int cur = id;
  while (cur >= 0 && ix.cube(cur).level > target_level) cur = ix.cube(cur).parent;
  return cur == anc;
}

}  // namespace

std::size_t FrostmannResult::bad_count() const {
  return static_cast<std::size_t>(std::count(bad.begin(), bad.end(), char(1)));
}

std::vector<int> FrostmannResult::bad_ids() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < bad.size(); ++i)
    if (bad[i]) out.push_back(static_cast<int>(i));
  return out;
}

double FrostmannResult::cube_side_pow(int id) const {
  return std::pow(index->side(index->cube(id).level), d);
}

FrostmannResult run_frostmann(const DyadicIndex& index, int d, int m) {
  if (m < 0 || m > index.max_level())
    throw Error("run_frostmann: m exceeds the index depth");
  FrostmannResult res;
  res.index = &index;
  res.d = d;
  res.m = m;
  res.leaf_base = std::pow(index.side(m), d);

  const auto ncubes = index.cube_count();
  res.bad.assign(ncubes, 0);
  res.triggered.assign(ncubes, 0);
  res.factor.assign(ncubes, 1.0);
  res.stage_mass.assign(ncubes, 0.0);
  res.anc_prod.assign(ncubes, 1.0);
  res.subtree.assign(ncubes, 0.0);

  for (int id : index.level_ids(m)) {
    res.stage_mass[static_cast<std::size_t>(id)] = res.leaf_base;
    res.bad[static_cast<std::size_t>(id)] = 1;
  }
  for (int k = m - 1; k >= 0; --k) {
    const double cap = 2.0 * std::pow(index.side(k), d);
    for (int id : index.level_ids(k)) {
      double mass = 0.0;
      for (int c : index.cube(id).children)
        if (index.cube(c).level <= m) mass += res.stage_mass[static_cast<std::size_t>(c)];
      if (mass > cap) {
        res.bad[static_cast<std::size_t>(id)] = 1;
        res.triggered[static_cast<std::size_t>(id)] = 1;
        res.factor[static_cast<std::size_t>(id)] = (cap / 2.0) / mass;
        res.stage_mass[static_cast<std::size_t>(id)] = cap / 2.0;  // renormalized exactly
      } else {
        res.stage_mass[static_cast<std::size_t>(id)] = mass;
      }
    }
  }
  res.bad[static_cast<std::size_t>(index.root_id())] = 1;

  // factor products of triggered strict ancestors, root-down (ids are
  // level-major, so parents precede children)
  for (const auto& rec : index.cubes()) {
    if (rec.level > m) continue;
    const auto id = static_cast<std::size_t>(rec.id);
    if (rec.parent >= 0) {
      const auto p = static_cast<std::size_t>(rec.parent);
      res.anc_prod[id] = res.anc_prod[p] * res.factor[p];
    }
    res.subtree[id] = res.stage_mass[id] * res.anc_prod[id];
  }
  return res;
}

double FrostmannResult::measure_of(int top_id, int region_cube) const {
  const auto& ix = *index;
  if (top_id < 0 || top_id >= static_cast<int>(bad.size()) || !bad[static_cast<std::size_t>(top_id)])
    throw Error("measure_of: unknown or non-Bad top cube id");
  if (region_cube < 0 || region_cube >= static_cast<int>(ix.cube_count()))
    throw Error("measure_of: unknown region cube id");
  if (ix.cube(region_cube).level > m) throw Error("measure_of: region below level m");
  if (is_ancestor(ix, top_id, region_cube))
    return subtree[static_cast<std::size_t>(region_cube)] / anc_prod[static_cast<std::size_t>(top_id)];
  if (is_ancestor(ix, region_cube, top_id))
    return subtree[static_cast<std::size_t>(top_id)] / anc_prod[static_cast<std::size_t>(top_id)];
  return 0.0;
}

double FrostmannResult::measure_of(int top_id, const Ball& region) const {
  const auto& ix = *index;
  if (top_id < 0 || top_id >= static_cast<int>(bad.size()) || !bad[static_cast<std::size_t>(top_id)])
    throw Error("measure_of: unknown or non-Bad top cube id");
  const double scale = anc_prod[static_cast<std::size_t>(top_id)];
  double sum = 0.0;
  std::vector<int> stack{top_id};
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    const auto& rec = ix.cube(id);
    const double box_dist =
        ix.lattice().dist_to_cell(region.center, rec.level, rec.coords);
    if (box_dist > region.radius) continue;
    if (rec.level == m) {
      const Vec c = (ix.cube_corner(id).array() + ix.side(m) / 2.0).matrix();
      if ((c - region.center).norm() <= region.radius)
        sum += leaf_base * anc_prod[static_cast<std::size_t>(id)] * factor[static_cast<std::size_t>(id)] / scale;
      continue;
    }
    for (int ch : rec.children)
      if (ix.cube(ch).level <= m) stack.push_back(ch);
  }
  return sum;
}

std::string FrostmannResult::to_json(double content) const {
  const auto pk = bad_packing(*this, content);
  nlohmann::ordered_json j;
  j["m"] = m;
  j["bad_count"] = bad_count();
  j["packing_sum"] = pk.sum;
  j["packing_ratio"] = pk.ratio;
  return j.dump(2);
}

PackingReport bad_packing(const FrostmannResult& res, double content) {
  if (!(content > 0.0)) throw Error("bad_packing: content must be positive");
  PackingReport rep;
  for (int id : res.bad_ids()) rep.sum += res.cube_side_pow(id);
  rep.ratio = rep.sum / content;
  return rep;
}

std::vector<DyadicTree> bad_trees(const FrostmannResult& res) {
  const auto& ix = *res.index;
  std::vector<DyadicTree> out;
  for (int top : res.bad_ids()) {
    DyadicTree tree;
    tree.top = top;
    std::vector<int> stack{top};
    while (!stack.empty()) {
      const int id = stack.back();
      stack.pop_back();
      tree.members.push_back(id);
      if (id != top && res.bad[static_cast<std::size_t>(id)]) {
        tree.stops.push_back(id);
        continue;  // trees meet only at tops and stops
      }
      for (int c : ix.cube(id).children)
        if (ix.cube(c).level <= res.m) stack.push_back(c);
    }
    std::sort(tree.members.begin(), tree.members.end());
    std::sort(tree.stops.begin(), tree.stops.end());
    out.push_back(std::move(tree));
  }
  return out;
}

std::size_t upper_regularity_violations(const FrostmannResult& res, double rel_tol) {
  const auto& ix = *res.index;
  std::size_t violations = 0;
  // J ⊆ I: compare subtree(J) against 2*side(J)^d scaled by the tightest
  // (deepest) Bad ancestor's factor product
  std::vector<double> tightest(ix.cube_count(), std::numeric_limits<double>::infinity());
  for (const auto& rec : ix.cubes()) {
    if (rec.level > res.m) continue;
    const auto id = static_cast<std::size_t>(rec.id);
    double cur = rec.parent >= 0 ? tightest[static_cast<std::size_t>(rec.parent)]
                                 : std::numeric_limits<double>::infinity();
    if (res.bad[id]) cur = std::min(cur, res.anc_prod[id]);
    tightest[id] = cur;
    if (!std::isfinite(cur)) continue;
    const double bound = 2.0 * std::pow(ix.side(rec.level), res.d) * cur;
    if (res.subtree[id] > bound * (1.0 + rel_tol)) ++violations;
  }
  // J ⊇ I reduces to mu^I(I) = stage_mass(I) <= 2*side(I)^d
  for (int id : res.bad_ids()) {
    const double bound = 2.0 * res.cube_side_pow(id);
    if (res.stage_mass[static_cast<std::size_t>(id)] > bound * (1.0 + rel_tol)) ++violations;
  }
  return violations;
}

std::size_t stop_bound_violations(const FrostmannResult& res, double rel_tol) {
  const int n = res.index->lattice().n;
  std::size_t violations = 0;
  for (const auto& tree : bad_trees(res)) {
    for (int j : tree.stops) {
      const double mu = res.measure_of(tree.top, j);
      const double side_pow = res.cube_side_pow(j);
      const double lo = std::exp2(static_cast<double>(res.d - n - 1)) * side_pow;
      const double hi = 2.0 * side_pow;
      if (mu < lo * (1.0 - rel_tol) || mu > hi * (1.0 + rel_tol)) ++violations;
    }
  }
  return violations;
}

std::size_t chain_decay_violations(const FrostmannResult& res, int samples, std::uint64_t seed,
                                   double rel_tol) {
  const auto& ix = *res.index;
  const auto bad_list = res.bad_ids();
  const auto& leaves = ix.level_ids(res.m);
  Rng rng(seed);
  std::size_t violations = 0;
  for (int s = 0; s < samples; ++s) {
    const int leaf = leaves[rng.index(leaves.size())];
    const int top = bad_list[rng.index(bad_list.size())];
    if (!is_ancestor(ix, top, leaf) || top == leaf) continue;
    int t = 0;
    for (int cur = leaf; cur != top; cur = ix.cube(cur).parent)
      if (cur != leaf && res.triggered[static_cast<std::size_t>(cur)]) ++t;
    if (res.triggered[static_cast<std::size_t>(top)]) ++t;
    const double mu = res.measure_of(top, leaf);
    const double bound = std::exp2(static_cast<double>(-t)) * res.leaf_base;
    if (mu > bound * (1.0 + rel_tol)) ++violations;
  }
  return violations;
}

}  // namespace msgeo
