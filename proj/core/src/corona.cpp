#include "msgeo/corona.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <json.hpp>

#include "msgeo/content.hpp"
#include "msgeo/kd_tree.hpp"
#include "msgeo/parallel.hpp"
#include "msgeo/rng.hpp"
#include "msgeo/skeleton.hpp"

namespace msgeo {

namespace {

// candidate dyadic levels for Q ~ I: rho*side(j) <= ell(Q) < side(j)
std::vector<int> related_levels(const DyadicIndex& index, double rho, double ellQ) {
  std::vector<int> out;
  for (int j = 0; j <= index.max_level(); ++j) {
    const double s = index.side(j);
    if (rho * s <= ellQ && ellQ < s) out.push_back(j);
  }
  return out;
}

bool box_meets_ball(const DyadicLattice& lat, int level, const Coords& c, const Vec& center,
                    double radius) {
  return lat.dist_to_cell(center, level, c) <= radius;
}

bool any_bad_relation(const CubeForest& forest, int christ_id, const DyadicIndex& index,
                      const std::vector<char>& bad, double M) {
  const double ellQ = forest.size_of(christ_id);
  const Vec zQ = forest.center(christ_id);
  const double r = M * ellQ;
  for (int j : related_levels(index, forest.rho, ellQ)) {
    const double s = index.side(j);
    const auto& lat = index.lattice();
    const std::int64_t cells = std::int64_t{1} << j;
    Coords lo(static_cast<std::size_t>(lat.n)), hi(static_cast<std::size_t>(lat.n));
    for (int a = 0; a < lat.n; ++a) {
      lo[static_cast<std::size_t>(a)] = std::clamp<std::int64_t>(
          static_cast<std::int64_t>(std::floor((zQ[a] - r - lat.corner[a]) / s)), 0, cells - 1);
      hi[static_cast<std::size_t>(a)] = std::clamp<std::int64_t>(
          static_cast<std::int64_t>(std::floor((zQ[a] + r - lat.corner[a]) / s)), 0, cells - 1);
    }
    Coords cur = lo;
    for (;;) {
      const int id = index.find(j, cur);
      if (id >= 0 && bad[static_cast<std::size_t>(id)] &&
          box_meets_ball(lat, j, cur, zQ, r))
        return true;
      int a = 0;
      for (; a < lat.n; ++a) {
        if (++cur[static_cast<std::size_t>(a)] <= hi[static_cast<std::size_t>(a)]) break;
        cur[static_cast<std::size_t>(a)] = lo[static_cast<std::size_t>(a)];
      }
      if (a == lat.n) break;
    }
  }
  return false;
}

}  // namespace

bool relate_q_i(const CubeForest& forest, int christ_id, const DyadicIndex& index, int dyadic_id,
                double M) {
  const auto& rec = index.cube(dyadic_id);
  const double ellQ = forest.size_of(christ_id);
  const double ellI = index.side(rec.level);
  if (!(forest.rho * ellI <= ellQ && ellQ < ellI)) return false;
  return box_meets_ball(index.lattice(), rec.level, rec.coords, forest.center(christ_id),
                        M * ellQ);
}

Coronization build_coronization(const CubeForest& forest, const FrostmannResult& fr, double M,
                                int k0) {
  if (!(M >= 1.0)) throw Error("build_coronization: M must be >= 1");
  if (k0 < 0 || k0 > forest.depth) throw Error("build_coronization: k0 exceeds the forest depth");
  // all cubes that can relate to a Bad dyadic cube must live above level m:
  // rho * ell(Q_k0) must exceed the finest dyadic side
  const double finest_needed = forest.rho * std::pow(forest.rho, k0) * forest.diam_scale;
  if (!(finest_needed > fr.index->side(fr.m)))
    throw Error(
        "build_coronization: dyadic depth m too shallow for k0 "
        "(need rho^(k0+1)*diam > root_side*2^-m)");

  Coronization corona;
  corona.forest = &forest;
  corona.M = M;
  corona.k0 = k0;
  corona.region_of.assign(forest.cube_count(), -1);

  const DyadicIndex& index = *fr.index;

  // cache per christ cube: does it relate to some Bad cube
  std::vector<signed char> related(forest.cube_count(), -1);
  auto is_related = [&](int q) {
    auto& r = related[static_cast<std::size_t>(q)];
    if (r < 0) r = any_bad_relation(forest, q, index, fr.bad, M) ? 1 : 0;
    return r == 1;
  };

  std::vector<std::pair<int, int>> queue{{forest.root_id(), 0}};  // (top, generation)
  std::size_t head = 0;
  while (head < queue.size()) {
    const auto [top, gen] = queue[head++];
    CoronaRegion region;
    region.top = top;
    region.generation = gen;

    std::vector<int> stack{top};
    while (!stack.empty()) {
      const int id = stack.back();
      stack.pop_back();
      region.tree.push_back(id);
      corona.region_of[static_cast<std::size_t>(id)] = static_cast<int>(corona.regions.size());
      const auto& q = forest.cube(id);
      bool stop = q.level == k0;
      if (!stop)
        for (int ch : q.children)
          if (is_related(ch)) {
            stop = true;
            break;
          }
      if (stop) {
        region.stops.push_back(id);
        if (q.level < k0) region.next.insert(region.next.end(), q.children.begin(), q.children.end());
      } else {
        stack.insert(stack.end(), q.children.begin(), q.children.end());
      }
    }
    std::sort(region.tree.begin(), region.tree.end());
    std::sort(region.stops.begin(), region.stops.end());
    std::sort(region.next.begin(), region.next.end());
    for (int nx : region.next) queue.push_back({nx, gen + 1});
    corona.packing_sum += std::pow(forest.size_of(top), forest.cloud().d());
    corona.regions.push_back(std::move(region));
  }
  return corona;
}

SmoothingDistance::SmoothingDistance(const CubeForest& forest, std::vector<int> minimal_cubes)
    : forest_(&forest), cubes_(std::move(minimal_cubes)) {
  if (cubes_.empty()) throw Error("SmoothingDistance: empty minimal family");
  std::sort(cubes_.begin(), cubes_.end(), [&](int a, int b) {
    const double sa = forest.size_of(a), sb = forest.size_of(b);
    return sa < sb || (sa == sb && a < b);
  });
}

double SmoothingDistance::at_point(const Eigen::Ref<const Vec>& x) const {
  double best = std::numeric_limits<double>::infinity();
  for (int id : cubes_) {
    const auto& q = forest_->cube(id);
    if (q.size >= best) break;  // sorted by size; ell alone already loses
    double dmin = std::numeric_limits<double>::infinity();
    for (int m : q.members) {
      dmin = std::min(dmin, (forest_->cloud().point(m) - x).norm());
      if (q.size + dmin >= best && dmin == 0.0) break;
    }
    best = std::min(best, q.size + dmin);
  }
  return best;
}

double SmoothingDistance::at_box(const Vec& corner, double side) const {
  const int n = static_cast<int>(corner.size());
  double best = std::numeric_limits<double>::infinity();
  for (int id : cubes_) {
    const auto& q = forest_->cube(id);
    if (q.size >= best) break;
    double dmin = std::numeric_limits<double>::infinity();
    for (int m : q.members) {
      const Vec p = forest_->cloud().point(m);
      double d2 = 0.0;
      for (int a = 0; a < n; ++a) {
        double d = 0.0;
        if (p[a] < corner[a]) d = corner[a] - p[a];
        else if (p[a] > corner[a] + side) d = p[a] - corner[a] - side;
        d2 += d * d;
      }
      dmin = std::min(dmin, std::sqrt(d2));
    }
    best = std::min(best, q.size + dmin);
  }
  return best;
}

double smoothing_distance(const CubeForest& forest, const std::vector<int>& minimal_cubes,
                          const Eigen::Ref<const Vec>& x) {
  return SmoothingDistance(forest, minimal_cubes).at_point(x);
}

double WhitneyFamily::max_side() const {
  double s = 0.0;
  for (const auto& c : cubes) s = std::max(s, c.side);
  return s;
}

WhitneyFamily whitney_family(const CubeForest& forest, const DyadicIndex& index, int top,
                             const std::vector<int>& minimal_cubes, double tau, double C0,
                             double eta) {
  const auto& cloud = forest.cloud();
  const int n = cloud.n();
  if (!(C0 > 4.0)) throw Error("whitney_family: C0 must exceed 4");
  if (!(tau > 0.0 && tau < 1.0)) throw Error("whitney_family: tau must lie in (0,1)");
  if (eta <= 0.0) eta = std::max(0.25, 2.5 * std::sqrt(static_cast<double>(n)) * tau);
  if (!(eta < 1.0) || !(1.0 / tau > 2.0 * std::sqrt(static_cast<double>(n)) / eta))
    throw Error("tau_too_large: neighbor comparability needs tau^-1 > 2 sqrt(n)/eta");

  WhitneyFamily fam;
  fam.tau = tau;
  fam.C0 = C0;
  fam.eta = eta;
  fam.top = top;
  fam.minimal = minimal_cubes;

  const double ellT = forest.size_of(top);
  const Vec zT = forest.center(top);

  // T-hat: members of the same-level cubes meeting C0*B_T
  std::vector<int> hat_pts;
  for (int id : forest.level_ids(forest.cube(top).level)) {
    const auto& q = forest.cube(id);
    bool meets = false;
    for (int m : q.members)
      if ((cloud.point(m) - zT).norm() <= C0 * ellT) {
        meets = true;
        break;
      }
    if (meets) hat_pts.insert(hat_pts.end(), q.members.begin(), q.members.end());
  }
  if (hat_pts.empty()) throw Error("whitney_family: T-hat is empty");
  Mat hat(static_cast<Eigen::Index>(hat_pts.size()), n);
  for (std::size_t i = 0; i < hat_pts.size(); ++i)
    hat.row(static_cast<Eigen::Index>(i)) = cloud.points().row(hat_pts[i]);
  const KdTree hat_tree(hat);
  double reach = 0.0;
  for (Eigen::Index i = 0; i < hat.rows(); ++i)
    reach = std::max(reach, (hat.row(i).transpose() - zT).norm());

  const SmoothingDistance sd(forest, minimal_cubes);
  const DyadicLattice& lat = index.lattice();
  const double tol = cloud.resolution();

  // start cells: coarse enough that a satisfying start ascends to its maximal
  // ancestor within a few doublings
  const double start_target = std::max(2.0 * tau * (reach + 2.0 * ellT) + tol, 4.0 * tol);
  const int j0 = static_cast<int>(std::floor(std::log2(lat.root_side / start_target)));
  const double cover = reach + tol + lat.side(j0) + std::sqrt(static_cast<double>(n)) * tau * (C0 + 6.0) * ellT;

  auto satisfies = [&](int level, const Coords& c, double* dval) {
    const Vec corner = lat.cell_corner(level, c);
    const double df = sd.at_box(corner, lat.side(level));
    if (dval) *dval = df;
    return lat.side(level) < tau * df;
  };
  auto meets_hat = [&](int level, const Coords& c) {
    const Vec corner = lat.cell_corner(level, c);
    const Vec hi = (corner.array() + lat.side(level)).matrix();
    return hat_tree.min_dist_to_box(corner, hi) <= tol;
  };

  std::set<std::pair<int, Coords>> emitted;
  std::set<std::pair<int, Coords>> seen;
  auto emit_maximal = [&](int level, Coords c) {
    // ascend to the largest satisfying ancestor
    for (;;) {
      const Coords par = DyadicLattice::parent_of(c);
      if (!satisfies(level - 1, par, nullptr)) break;
      c = par;
      --level;
    }
    emitted.insert({level, c});
  };

  std::vector<std::pair<int, Coords>> stack;
  {
    Coords lo(static_cast<std::size_t>(n)), hi(static_cast<std::size_t>(n));
    const double s0 = lat.side(j0);
    for (int a = 0; a < n; ++a) {
      lo[static_cast<std::size_t>(a)] = static_cast<std::int64_t>(std::floor((zT[a] - cover - lat.corner[a]) / s0));
      hi[static_cast<std::size_t>(a)] = static_cast<std::int64_t>(std::floor((zT[a] + cover - lat.corner[a]) / s0));
    }
    Coords cur = lo;
    for (;;) {
      stack.push_back({j0, cur});
      int a = 0;
      for (; a < n; ++a) {
        if (++cur[static_cast<std::size_t>(a)] <= hi[static_cast<std::size_t>(a)]) break;
        cur[static_cast<std::size_t>(a)] = lo[static_cast<std::size_t>(a)];
      }
      if (a == n) break;
    }
  }
  while (!stack.empty()) {
    auto [level, c] = stack.back();
    stack.pop_back();
    if (!seen.insert({level, c}).second) continue;
    if (!meets_hat(level, c)) continue;
    if (satisfies(level, c, nullptr)) {
      emit_maximal(level, c);
      continue;
    }
    for (unsigned mask = 0; mask < (1u << n); ++mask)
      stack.push_back({level + 1, DyadicLattice::child_of(c, mask)});
  }

  const double sqn = std::sqrt(static_cast<double>(n));
  for (const auto& [level, c] : emitted) {
    WhitneyCube wc;
    wc.level = level;
    wc.coords = c;
    wc.corner = lat.cell_corner(level, c);
    wc.side = lat.side(level);
    wc.dist_f = sd.at_box(wc.corner, wc.side);
    // pinned size bounds: ell < tau d_F by construction; the lower side
    // carries the parent-diameter Lipschitz slack (1 + tau sqrt(n))
    if (!(wc.side < tau * wc.dist_f) ||
        !(wc.side * 2.0 * (1.0 + tau * sqn) >= tau * wc.dist_f * (1.0 - 1e-12)))
      ++fam.prop2_violations;
    fam.cubes.push_back(std::move(wc));
  }
  return fam;
}

SkeletonSet skeleton_set(const WhitneyFamily& fam, int d, int spacing_divisor) {
  if (spacing_divisor < 2) throw Error("skeleton_set: spacing divisor must be >= 2");
  if (fam.cubes.empty()) throw Error("skeleton_set: empty family");
  std::vector<Mat> blocks;
  std::vector<Vec> wblocks;
  double spacing = 0.0;
  Eigen::Index total = 0;
  for (const auto& wc : fam.cubes) {
    auto s = sample_skeleton(wc.corner, wc.side, d, wc.side / spacing_divisor);
    spacing = std::max(spacing, wc.side / spacing_divisor);
    total += s.points.rows();
    blocks.push_back(std::move(s.points));
    wblocks.push_back(std::move(s.weights));
  }
  const int n = static_cast<int>(blocks.front().cols());
  Mat pts(total, n);
  Vec w(total);
  Eigen::Index at = 0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    pts.middleRows(at, blocks[b].rows()) = blocks[b];
    w.segment(at, wblocks[b].size()) = wblocks[b];
    at += blocks[b].rows();
  }
  SkeletonSet out{PointCloud(std::move(pts), n, d, std::max(spacing, 1e-300), std::move(w)),
                  spacing, 0.0};
  out.total_weight = out.cloud.weights().sum();
  return out;
}

double MainLemmaReport::ar_min() const {
  double v = std::numeric_limits<double>::infinity();
  for (const auto& t : tops)
    if (t.ar_samples > 0) v = std::min(v, t.ar_ratio_min);
  return v;
}

double MainLemmaReport::ar_max() const {
  double v = 0.0;
  for (const auto& t : tops)
    if (t.ar_samples > 0) v = std::max(v, t.ar_ratio_max);
  return v;
}

std::string MainLemmaReport::to_json() const {
  nlohmann::ordered_json j;
  j["packing_ratio"] = packing_ratio;
  j["tops"] = nlohmann::ordered_json::array();
  for (const auto& t : tops) {
    nlohmann::ordered_json jt;
    jt["top"] = t.top;
    jt["containment_ok"] = t.containment_ok;
    jt["closeness_max"] = t.closeness_max;
    jt["whitney_ok"] = t.whitney_ok;
    jt["ar_ratio_min"] = t.ar_ratio_min;
    jt["ar_ratio_max"] = t.ar_ratio_max;
    j["tops"].push_back(jt);
  }
  return j.dump(2);
}

MainLemmaReport verify_main_lemma(const Coronization& corona, const PointCloud& cloud,
                                  const DyadicIndex& index, double tau, double C0, int samples,
                                  std::uint64_t seed, int spacing_divisor) {
  const CubeForest& forest = *corona.forest;
  const int d = cloud.d();
  MainLemmaReport report;
  const double content =
      dyadic_content(cloud, d, content_min_cell(cloud.resolution(), cloud.diameter()));
  report.packing_ratio = corona.packing_sum / content;
  report.tops.resize(corona.regions.size());

  parallel_for(corona.regions.size(), [&](std::size_t ri) {
    const auto& region = corona.regions[ri];
    TopReport tr;
    tr.top = region.top;
    const auto fam = whitney_family(forest, index, region.top, region.stops, tau, C0);
    const auto skel = skeleton_set(fam, d, spacing_divisor);
    const SmoothingDistance sd(forest, region.stops);
    const Vec zT = forest.center(region.top);
    const double ellT = forest.size_of(region.top);
    const DyadicLattice& lat = index.lattice();

    // (b) every in-ball cloud point is covered; the family stays in 2C0*B_T
    std::set<std::pair<int, Coords>> boxes;
    std::set<int> levels;
    for (const auto& wc : fam.cubes) {
      boxes.insert({wc.level, wc.coords});
      levels.insert(wc.level);
    }
    bool containment = true;
    for (int pi : cloud.indices_in(Ball(zT, C0 * ellT))) {
      const Vec x = cloud.point(pi);
      bool covered = false;
      for (int lvl : levels) {
        if (boxes.count({lvl, lat.cell_of(x, lvl)})) {
          covered = true;
          break;
        }
      }
      if (!covered) {
        // boundary fallback: closed-box membership with tolerance
        for (const auto& wc : fam.cubes)
          if (lat.cell_contains(x, wc.level, wc.coords, 1e-9 * wc.side)) {
            covered = true;
            break;
          }
      }
      if (!covered) containment = false;
    }
    for (const auto& wc : fam.cubes) {
      double far2 = 0.0;
      for (int a = 0; a < cloud.n(); ++a) {
        const double lo = wc.corner[a], hi = wc.corner[a] + wc.side;
        far2 += std::pow(std::max(std::abs(lo - zT[a]), std::abs(hi - zT[a])), 2);
      }
      if (std::sqrt(far2) > 2.0 * C0 * ellT) containment = false;
    }
    tr.containment_ok = containment;

    // (c) closeness to the skeleton in units of tau*d_F
    const KdTree skel_tree(skel.cloud.points());
    double worst = 0.0;
    for (int pi : cloud.indices_in(Ball(zT, C0 * ellT))) {
      const Vec x = cloud.point(pi);
      const double dist = skel_tree.nearest(x).second;
      worst = std::max(worst, dist / (tau * sd.at_point(x)));
    }
    tr.closeness_max = worst;

    // (d) pinned Whitney size bounds
    tr.whitney_ok = fam.prop2_violations == 0;

    // (a) sampled Ahlfors ratios of the weighted skeleton
    const double diam_skel = skel.cloud.diameter();
    if (diam_skel >= 8.0 * skel.spacing) {
      Rng rng(mix_seed(seed, static_cast<std::uint64_t>(region.top)));
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      tr.ar_ratios.reserve(static_cast<std::size_t>(samples));
      for (int s = 0; s < samples; ++s) {
        const auto xi = static_cast<int>(rng.index(skel.cloud.size()));
        const double r = rng.log_uniform(4.0 * skel.spacing, diam_skel / 2.0);
        double wsum = 0.0;
        for (int i : skel.cloud.tree().within(skel.cloud.point(xi), r))
          wsum += skel.cloud.weights()[i];
        const double ratio = wsum / std::pow(r, d);
        tr.ar_ratios.push_back(ratio);
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
      }
      tr.ar_ratio_min = lo;
      tr.ar_ratio_max = hi;
      tr.ar_samples = samples;
    }
    report.tops[ri] = std::move(tr);
  });
  return report;
}

std::size_t PrunedCoronization::regions_under(int top) const {
  std::size_t c = 0;
  for (const auto& r : regions)
    if (r.root_top == top) ++c;
  return c;
}

int PrunedCoronization::generations_under(int top) const {
  int g = 0;
  for (const auto& r : regions)
    if (r.root_top == top) g = std::max(g, r.generation);
  return g;
}

PrunedCoronization prune_by_qp(const Coronization& corona, const DyadicIndex& index,
                               const std::vector<char>& cube_is_bad, double tau, double C0,
                               bool build_skeletons, int spacing_divisor) {
  const CubeForest& forest = *corona.forest;
  if (cube_is_bad.size() != forest.cube_count())
    throw Error("prune_by_qp: labels must cover all forest cubes");
  PrunedCoronization out;

  for (const auto& region : corona.regions) {
    std::set<int> corona_stops(region.stops.begin(), region.stops.end());
    std::set<int> in_tree(region.tree.begin(), region.tree.end());

    std::vector<std::pair<int, int>> queue{{region.top, 0}};
    std::size_t head = 0;
    while (head < queue.size()) {
      const auto [top, gen] = queue[head++];
      PrunedRegion pr;
      pr.root_top = region.top;
      pr.top = top;
      pr.generation = gen;

      std::vector<int> stack{top};
      while (!stack.empty()) {
        const int id = stack.back();
        stack.pop_back();
        pr.tree.push_back(id);
        const bool corona_stop = corona_stops.count(id) > 0;
        bool cut = corona_stop;
        if (!cut)
          for (int ch : forest.cube(id).children)
            if (cube_is_bad[static_cast<std::size_t>(ch)]) {
              cut = true;
              break;
            }
        if (cut) {
          pr.minimal.push_back(id);
          if (!corona_stop)
            for (int ch : forest.cube(id).children)
              if (in_tree.count(ch)) queue.push_back({ch, gen + 1});
        } else {
          for (int ch : forest.cube(id).children)
            if (in_tree.count(ch)) stack.push_back(ch);
          if (forest.cube(id).children.empty()) pr.minimal.push_back(id);
        }
      }
      std::sort(pr.tree.begin(), pr.tree.end());
      std::sort(pr.minimal.begin(), pr.minimal.end());
      if (build_skeletons) {
        const auto fam = whitney_family(forest, index, pr.top, pr.minimal, tau, C0);
        pr.skeleton = skeleton_set(fam, forest.cloud().d(), spacing_divisor);
      }
      out.max_generation = std::max(out.max_generation, gen);
      out.regions.push_back(std::move(pr));
    }
  }
  return out;
}

}  // namespace msgeo
