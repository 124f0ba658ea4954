#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "msgeo/content.hpp"
#include "msgeo/corona.hpp"
#include "msgeo/rng.hpp"
#include "msgeo/shapes.hpp"

using namespace msgeo;

namespace {

PointCloud shape(const std::string& name, std::initializer_list<std::pair<std::string, double>> ps = {}) {
  ShapeSpec s;
  s.shape = name;
  for (auto& [k, v] : ps) s.params[k] = v;
  return generate(s);
}

struct Setup {
  PointCloud cloud;
  CubeForest forest;
  DyadicIndex index;
  FrostmannResult fr;
  Coronization corona;

  Setup(PointCloud c, int k0, int m, double M = 8.0)
      : cloud(std::move(c)),
        forest(build_christ_cubes(cloud, 0.5, k0, 0)),
        index(cloud, m),
        fr(run_frostmann(index, cloud.d(), m)),
        corona(build_coronization(forest, fr, M, k0)) {}
};

}  // namespace

TEST_CASE("relate_q_i boundary cases") {
  auto c = shape("segment", {{"n_points", 257.0}});
  auto forest = build_christ_cubes(c, 0.5, 4, 0);
  DyadicIndex ix(c, 6);

  // find a christ cube and dyadic cube of equal size: ell(Q) = ell(I) fails
  // the strict upper bound
  for (const auto& q : forest.cubes()) {
    for (int j = 0; j <= ix.max_level(); ++j) {
      if (std::abs(forest.size_of(q.id) - ix.side(j)) < 1e-15)
        for (int id : ix.level_ids(j)) CHECK_FALSE(relate_q_i(forest, q.id, ix, id, 100.0));
    }
  }

  // a cube whose size sits in [rho*side, side) relates when the ball meets it
  bool found_true = false, found_far_false = false;
  for (const auto& q : forest.cubes()) {
    for (const auto& rec : ix.cubes()) {
      const double ellQ = forest.size_of(q.id), ellI = ix.side(rec.level);
      if (!(0.5 * ellI <= ellQ && ellQ < ellI)) continue;
      const double dist = ix.lattice().dist_to_cell(forest.center(q.id), rec.level, rec.coords);
      if (dist <= 8.0 * ellQ) {
        CHECK(relate_q_i(forest, q.id, ix, rec.id, 8.0));
        found_true = true;
      }
      if (dist > 2.0 * ellQ) {
        CHECK_FALSE(relate_q_i(forest, q.id, ix, rec.id, 2.0));
        found_far_false = true;
      }
    }
  }
  CHECK(found_true);
  CHECK(found_far_false);
}

TEST_CASE("coronization: trees partition D(k0), tops pack like the content") {
  Setup s(shape("segment", {{"n_points", 1025.0}}), 6, 9);

  // exact partition of all cubes with level <= k0
  std::vector<int> count(s.forest.cube_count(), 0);
  for (const auto& region : s.corona.regions)
    for (int id : region.tree) count[static_cast<std::size_t>(id)]++;
  for (const auto& q : s.forest.cubes())
    if (q.level <= s.corona.k0) CHECK(count[static_cast<std::size_t>(q.id)] == 1);

  // stops inside trees; next = children of stops
  for (const auto& region : s.corona.regions) {
    for (int st : region.stops)
      CHECK(std::binary_search(region.tree.begin(), region.tree.end(), st));
    for (int nx : region.next) {
      const int parent = s.forest.cube(nx).parent;
      CHECK(std::binary_search(region.stops.begin(), region.stops.end(), parent));
    }
  }

  // generation structure: every non-root top is a child of the previous
  // generation's stops
  for (const auto& region : s.corona.regions) {
    if (region.generation == 0) {
      CHECK(region.top == s.forest.root_id());
    } else {
      const int parent = s.forest.cube(region.top).parent;
      const auto& parent_region = s.corona.region_of_cube(parent);
      CHECK(parent_region.generation == region.generation - 1);
      CHECK(std::binary_search(parent_region.stops.begin(), parent_region.stops.end(), parent));
    }
  }

  const double content = dyadic_content(s.cloud, 1, std::exp2(-9));
  CHECK(s.corona.packing_sum / content > 0.5);
  CHECK(s.corona.packing_sum / content < 12.0);
}

TEST_CASE("coronization rejects incompatible dyadic depth") {
  auto c = shape("segment", {{"n_points", 1025.0}});
  auto forest = build_christ_cubes(c, 0.5, 8, 0);
  DyadicIndex ix(c, 4);
  auto fr = run_frostmann(ix, 1, 4);
  CHECK_THROWS_WITH_AS(build_coronization(forest, fr, 8.0, 8), doctest::Contains("too shallow"),
                       Error);
}

TEST_CASE("smoothing distance: definition, attained minima, Lipschitz, chain rule") {
  Setup s(shape("segment", {{"n_points", 257.0}}), 4, 7);
  const auto& region = s.corona.regions.front();
  SmoothingDistance sd(s.forest, region.stops);

  // x inside a unique minimal cube: d_F(x) <= ell(Q) + 0
  {
    const int q0 = region.stops.front();
    const Vec z = s.forest.center(q0);
    double direct = std::numeric_limits<double>::infinity();
    for (int qid : region.stops) {
      double dmin = std::numeric_limits<double>::infinity();
      for (int m : s.forest.cube(qid).members)
        dmin = std::min(dmin, (s.cloud.point(m) - z).norm());
      direct = std::min(direct, s.forest.size_of(qid) + dmin);
    }
    CHECK(sd.at_point(z) == doctest::Approx(direct).epsilon(1e-12));
  }

  // two-term evaluation: near-small vs far-big by hand
  {
    Mat pts(3, 2);
    pts << 0.0, 0.0, 0.05, 0.0, 1.0, 0.0;
    PointCloud tiny(pts, 2, 1, 0.01);
    auto f = build_christ_cubes(tiny, 0.5, 2, 0);
    std::vector<int> leaves = f.level_ids(f.depth);
    SmoothingDistance sd2(f, leaves);
    Vec x(2);
    x << 0.5, 0.0;
    double expect = std::numeric_limits<double>::infinity();
    for (int qid : leaves) {
      double dmin = std::numeric_limits<double>::infinity();
      for (int m : f.cube(qid).members) dmin = std::min(dmin, (tiny.point(m) - x).norm());
      expect = std::min(expect, f.size_of(qid) + dmin);
    }
    CHECK(sd2.at_point(x) == doctest::Approx(expect).epsilon(1e-12));
    CHECK_THROWS(SmoothingDistance(f, {}));
  }

  // 1-Lipschitz on sampled pairs, and the box value is inf over the box
  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    Vec x(2), y(2);
    for (int a = 0; a < 2; ++a) {
      x[a] = rng.uniform(-0.2, 1.2);
      y[a] = rng.uniform(-0.2, 1.2);
    }
    CHECK(std::abs(sd.at_point(x) - sd.at_point(y)) <= (x - y).norm() + 1e-12);
  }
  for (int t = 0; t < 50; ++t) {
    Vec corner(2);
    corner << rng.uniform(-0.2, 1.0), rng.uniform(-0.2, 1.0);
    const double side = rng.uniform(0.01, 0.3);
    const double boxval = sd.at_box(corner, side);
    for (int probe = 0; probe < 20; ++probe) {
      Vec x = corner;
      for (int a = 0; a < 2; ++a) x[a] += side * rng.uniform01();
      CHECK(sd.at_point(x) >= boxval - 1e-12);
    }
  }

  // d_F(I) <= 2 ell(I) + dist(I,I') + 2 ell(I') + d_F(I') over sampled boxes
  for (int t = 0; t < 50; ++t) {
    Vec c1(2), c2(2);
    c1 << rng.uniform(-0.2, 1.0), rng.uniform(-0.2, 1.0);
    c2 << rng.uniform(-0.2, 1.0), rng.uniform(-0.2, 1.0);
    const double s1 = rng.uniform(0.01, 0.2), s2 = rng.uniform(0.01, 0.2);
    double gap2 = 0.0;
    for (int a = 0; a < 2; ++a) {
      const double lo = std::max(c1[a], c2[a]);
      const double hi = std::min(c1[a] + s1, c2[a] + s2);
      if (lo > hi) gap2 += (lo - hi) * (lo - hi);
    }
    const double boxdist = std::sqrt(gap2);
    CHECK(sd.at_box(c1, s1) <=
          2.0 * s1 + boxdist + 2.0 * s2 + sd.at_box(c2, s2) + 1e-9);
  }
}

TEST_CASE("whitney family: single minimal cube grades around the top") {
  Setup s(shape("segment", {{"n_points", 257.0}}), 3, 6);
  const int top = s.forest.root_id();
  auto fam = whitney_family(s.forest, s.index, top, {top}, 0.05, 5.0);
  REQUIRE(!fam.cubes.empty());
  CHECK(fam.prop2_violations == 0);
  const double ellT = s.forest.size_of(top);
  for (const auto& wc : fam.cubes) {
    CHECK(wc.side < 0.05 * wc.dist_f);
    // F = {T}: d_F is at least ell(T), so sizes concentrate near tau*ell(T)
    CHECK(wc.side >= 0.05 * ellT / 4.0);
  }
  // disjointness: no emitted cube is an ancestor of another
  std::set<std::pair<int, Coords>> cells;
  for (const auto& wc : fam.cubes) cells.insert({wc.level, wc.coords});
  for (const auto& wc : fam.cubes) {
    Coords cur = wc.coords;
    for (int lvl = wc.level - 1; lvl >= wc.level - 8; --lvl) {
      cur = DyadicLattice::parent_of(cur);
      CHECK(cells.count({lvl, cur}) == 0);
    }
  }
  // the family hugs T-hat, so the count scales like tau^-d along it
  const auto count = static_cast<double>(fam.cubes.size());
  CHECK(count > 0.3 / 0.05);
  CHECK(count < 100.0 / 0.05);
}

TEST_CASE("whitney family: leaf-scale minimal cubes track the local scale") {
  Setup s(shape("segment", {{"n_points", 513.0}}), 5, 8);
  const auto& region = s.corona.regions.front();
  auto fam = whitney_family(s.forest, s.index, region.top, region.stops, 0.1, 5.0);
  CHECK(fam.prop2_violations == 0);
  const SmoothingDistance sd(s.forest, region.stops);
  for (const auto& wc : fam.cubes) {
    const double df = sd.at_box(wc.corner, wc.side);
    CHECK(wc.side < 0.1 * df);
    CHECK(2.0 * wc.side * (1.0 + 0.1 * std::sqrt(2.0)) >= 0.1 * df * (1 - 1e-12));
  }
}

TEST_CASE("whitney family rejects tau violating neighbor comparability") {
  Setup s(shape("segment", {{"n_points", 129.0}}), 3, 6);
  CHECK_THROWS_WITH_AS(
      whitney_family(s.forest, s.index, s.forest.root_id(), {s.forest.root_id()}, 0.45, 5.0),
      doctest::Contains("tau_too_large"), Error);
  CHECK_THROWS(whitney_family(s.forest, s.index, s.forest.root_id(), {s.forest.root_id()}, 0.05,
                              3.0));  // C0 must exceed 4
}

TEST_CASE("skeleton sets pool duplicate samples and keep exact totals") {
  Setup s(shape("segment", {{"n_points", 257.0}}), 4, 7);
  const auto& region = s.corona.regions.front();
  auto fam = whitney_family(s.forest, s.index, region.top, region.stops, 0.05, 5.0);
  auto skel = skeleton_set(fam, 1, 4);
  double expect = 0.0;
  for (const auto& wc : fam.cubes) expect += 4.0 * wc.side;  // C(2,1)*2^(2-1)*side
  CHECK(skel.total_weight == doctest::Approx(expect).epsilon(1e-9));
  CHECK_THROWS(skeleton_set(fam, 1, 1));
}

TEST_CASE("verify_main_lemma on the segment: exact checks pass, ratios stay tight") {
  // resolution well below tau * stop scale, so the skeleton has a single
  // contact layer and the Ahlfors band stays tight
  Setup s(shape("segment", {{"n_points", 1025.0}}), 4, 8);
  auto report = verify_main_lemma(s.corona, s.cloud, s.index, 0.05, 5.0, 64, 11);
  REQUIRE(!report.tops.empty());
  for (const auto& t : report.tops) {
    CHECK(t.containment_ok);
    CHECK(t.whitney_ok);
    CHECK(t.closeness_max <= 3.0 * std::sqrt(2.0));
  }
  CHECK(report.ar_min() > 1.0 / 20.0);
  CHECK(report.ar_max() < 20.0);
  CHECK(report.packing_ratio > 0.0);

  // deterministic re-run
  auto report2 = verify_main_lemma(s.corona, s.cloud, s.index, 0.05, 5.0, 64, 11);
  CHECK(report.to_json() == report2.to_json());
}

TEST_CASE("prune_by_qp: all-good labels reproduce the coronization") {
  Setup s(shape("segment", {{"n_points", 257.0}}), 4, 7);
  std::vector<char> all_good(s.forest.cube_count(), 0);
  auto pruned = prune_by_qp(s.corona, s.index, all_good, 0.05, 5.0, false);
  REQUIRE(pruned.regions.size() == s.corona.regions.size());
  for (std::size_t i = 0; i < pruned.regions.size(); ++i) {
    CHECK(pruned.regions[i].generation == 0);
    CHECK(pruned.regions[i].tree == s.corona.regions[i].tree);
    CHECK(pruned.regions[i].minimal == s.corona.regions[i].stops);
  }
}

TEST_CASE("prune_by_qp: all-bad labels cut every cube") {
  Setup s(shape("segment", {{"n_points", 257.0}}), 4, 7);
  std::vector<char> all_bad(s.forest.cube_count(), 1);
  auto pruned = prune_by_qp(s.corona, s.index, all_bad, 0.05, 5.0, false);
  for (const auto& r : pruned.regions) CHECK(r.tree.size() == 1);
  // the deepest chain runs through every level of the deepest corona tree
  int deepest_corona = 0;
  for (const auto& region : s.corona.regions) {
    int top_level = s.forest.cube(region.top).level;
    int max_level = 0;
    for (int id : region.tree) max_level = std::max(max_level, s.forest.cube(id).level);
    deepest_corona = std::max(deepest_corona, max_level - top_level);
  }
  CHECK(pruned.max_generation == deepest_corona);
  CHECK_THROWS(prune_by_qp(s.corona, s.index, std::vector<char>(3, 0), 0.05, 5.0, false));
}
