#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "msgeo/christ.hpp"
#include "msgeo/dyadic.hpp"
#include "msgeo/rng.hpp"
#include "msgeo/shapes.hpp"
#include "msgeo/skeleton.hpp"

using namespace msgeo;

namespace {

PointCloud shape(const std::string& name, std::initializer_list<std::pair<std::string, double>> ps = {}) {
  ShapeSpec s;
  s.shape = name;
  for (auto& [k, v] : ps) s.params[k] = v;
  return generate(s);
}

}  // namespace

TEST_CASE("dyadic index: root placement and occupancy") {
  Mat two(2, 2);
  two << 0, 0, 1, 0;
  PointCloud c(two, 2, 1, 0.01);
  DyadicIndex ix(c, 1);
  CHECK(ix.lattice().root_side == 1.0);  // exactly fitting with far-boundary clamping
  CHECK(ix.level_ids(0).size() == 1);
  CHECK(ix.level_ids(1).size() == 2);

  Mat one(1, 2);
  one << 0.3, 0.7;
  PointCloud single(one.replicate(1, 1), 2, 1, 0.001);
  DyadicIndex ix1(single, 5);
  for (int k = 0; k <= 5; ++k) CHECK(ix1.level_ids(k).size() == 1);
}

TEST_CASE("dyadic index: cantor occupancy pattern 1,4,4,16") {
  auto c = shape("cantor4", {{"depth", 3.0}});
  CHECK(c.size() == 64);
  DyadicIndex ix(c, 4);
  auto counts = ix.occupancy_counts();
  CHECK(counts[0] == 1);
  CHECK(counts[1] == 4);
  CHECK(counts[2] == 4);
  CHECK(counts[3] == 16);
  CHECK(counts[4] == 16);
}

TEST_CASE("dyadic index: per-level partition and refinement") {
  auto c = shape("lipschitz_graph", {{"n_points", 257.0}});
  DyadicIndex ix(c, 6);
  for (int k = 0; k <= 6; ++k) {
    std::size_t total = 0;
    for (int id : ix.level_ids(k)) total += ix.cube(id).members.size();
    CHECK(total == c.size());
  }
  for (const auto& rec : ix.cubes()) {
    if (rec.parent < 0) continue;
    const auto& par = ix.cube(rec.parent);
    for (int m : rec.members)
      CHECK(std::binary_search(par.members.begin(), par.members.end(), m));
  }
  CHECK_THROWS(DyadicIndex(c, 40));  // finer than resolution/4
}

TEST_CASE("christ cubes: single point gives a chain with c0 = 1") {
  Mat one(1, 2);
  one << 0.25, 0.25;
  PointCloud c(one, 2, 1, 0.01);
  auto f = build_christ_cubes(c, 0.5, 4, 0);
  CHECK(f.c0_observed == 1.0);
  for (int k = 0; k <= f.depth; ++k) CHECK(f.level_ids(k).size() == 1);
}

TEST_CASE("christ cubes: net sizes on the segment stay within the packing band") {
  auto c = shape("segment", {{"n_points", 1025.0}});
  auto f = build_christ_cubes(c, 0.5, 6, 0);
  REQUIRE(f.depth == 6);
  for (int k = 1; k <= 6; ++k) {
    const auto sz = static_cast<double>(f.nets()[static_cast<std::size_t>(k)].size());
    CHECK(sz >= std::exp2(k - 1));
    CHECK(sz <= std::exp2(k + 1));
  }
}

TEST_CASE("christ cubes: partition, nesting, containment, net maximality") {
  for (const char* name : {"segment", "cantor4", "circle"}) {
    auto c = shape(name);
    auto f = build_christ_cubes(c, 0.5, 5, 0);
    const double diam = c.diameter();

    // per-level exact partition of point indices
    for (int k = 0; k <= f.depth; ++k) {
      std::size_t total = 0;
      for (int id : f.level_ids(k)) total += f.cube(id).members.size();
      CHECK(total == c.size());
    }

    // members nest into parents; any two cubes nested or disjoint
    for (const auto& q : f.cubes()) {
      if (q.parent >= 0) {
        const auto& par = f.cube(q.parent);
        for (int m : q.members)
          CHECK(std::binary_search(par.members.begin(), par.members.end(), m));
      }
      // containment: members within ell(Q) of the center
      const Vec z = f.center(q.id);
      for (int m : q.members) CHECK((c.point(m) - z).norm() <= q.size * (1 + 1e-12));
    }
    CHECK(f.c0_observed > 0.0);

    // net maximality: every point within rho^k * diam of X_k
    for (int k = 0; k <= f.depth; ++k) {
      KdTree net(c.points(), f.nets()[static_cast<std::size_t>(k)]);
      double worst = 0.0;
      for (std::size_t p = 0; p < c.size(); ++p)
        worst = std::max(worst, net.nearest(c.point(static_cast<int>(p))).second);
      CHECK(worst <= std::pow(0.5, k) * diam * (1 + 1e-12));
    }
  }
}

TEST_CASE("christ cubes: two clusters separate at level 1") {
  Mat pts(20, 2);
  for (int i = 0; i < 10; ++i) {
    pts(i, 0) = 0.001 * i;
    pts(i, 1) = 0.0;
    pts(10 + i, 0) = 1.0 + 0.001 * i;
    pts(10 + i, 1) = 0.0;
  }
  PointCloud c(pts, 2, 1, 0.002);
  auto f = build_christ_cubes(c, 0.5, 3, 0);
  const auto& lvl1 = f.level_ids(1);
  REQUIRE(lvl1.size() >= 2);
  for (int id : lvl1) {
    const auto& q = f.cube(id);
    const bool left = c.point(q.members.front())[0] < 0.5;
    for (int m : q.members) CHECK((c.point(m)[0] < 0.5) == left);
  }
}

TEST_CASE("christ cubes: deterministic rebuild") {
  auto c = shape("cantor4", {{"depth", 3.0}});
  auto a = build_christ_cubes(c, 0.5, 4, 9);
  auto b = build_christ_cubes(c, 0.5, 4, 9);
  CHECK(a.to_json(true) == b.to_json(true));
}

TEST_CASE("cube_ball scales") {
  auto c = shape("segment", {{"n_points", 65.0}});
  auto f = build_christ_cubes(c, 0.5, 3, 0);
  const auto b1 = f.cube_ball(f.root_id());
  CHECK(b1.radius == doctest::Approx(f.size_of(f.root_id())));
  CHECK(f.cube_ball(f.root_id(), 3.0).radius == doctest::Approx(3.0 * b1.radius));
  CHECK_THROWS(f.cube_ball(f.root_id(), 0.0));
}

TEST_CASE("skeleton samples carry exact face weights") {
  Vec corner = Vec::Zero(2);
  auto square_edges = sample_skeleton(corner, 1.0, 1, 0.25);
  CHECK(square_edges.weights.sum() == doctest::Approx(4.0).epsilon(1e-12));

  auto square_corners = sample_skeleton(corner, 1.0, 0, 0.25);
  CHECK(square_corners.points.rows() == 4);
  CHECK(square_corners.weights.sum() == doctest::Approx(4.0).epsilon(1e-12));

  Vec c3 = Vec::Zero(3);
  auto cube_edges = sample_skeleton(c3, 1.0, 1, 0.5);
  CHECK(cube_edges.weights.sum() == doctest::Approx(12.0).epsilon(1e-12));
  auto cube_faces = sample_skeleton(c3, 1.0, 2, 0.5);
  CHECK(cube_faces.weights.sum() == doctest::Approx(6.0).epsilon(1e-12));

  CHECK_THROWS(sample_skeleton(c3, 1.0, 4, 0.25));
  // scaled cube: total weight tracks side^d
  auto small = sample_skeleton(corner, 0.25, 1, 0.05);
  CHECK(small.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
}
