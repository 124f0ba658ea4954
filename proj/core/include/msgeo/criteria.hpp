#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "msgeo/christ.hpp"
#include "msgeo/plane.hpp"
#include "msgeo/point_cloud.hpp"

namespace msgeo {

enum class Criterion { BWGL, LS, LCV, BAUP, BP };

Criterion criterion_from_string(const std::string& name);
std::string criterion_name(Criterion kind);

struct CriterionParams {
  Criterion kind = Criterion::BWGL;
  double epsilon = 0.05;
  double C0 = 2.0;     // ball inflation for BWGL/BAUP
  double theta = 0.5;  // BP projection threshold
  int max_planes = 2;  // BAUP union size

  void validate() const;
};

// Verdict of one criterion on one ball. `measure` is the dimensionless
// quantity compared against the threshold: the best bilateral gap (BWGL,
// BAUP), the worst violation dist/r (LS, LCV), or the best projection content
// over r^d (BP). Plane-search criteria certify good verdicts (a concrete
// witness achieves the bound) and report bad ones best-effort; pair-search
// criteria certify bad verdicts and, under subsampling, report good ones
// best-effort.
struct BallVerdict {
  bool good = true;
  bool certified = true;
  bool vacuous = false;  // empty ball
  double measure = 0.0;
  std::vector<Plane> planes;           // witness plane(s)
  std::array<int, 2> pair{-1, -1};     // witness pair (ball-point indices into the cloud)
  std::string note;
};

// `exhaustive` scans all pairs/planes to make `measure` the full extremum
// (needed by the continuity probe); classifiers use early exit.
BallVerdict evaluate_ball(const PointCloud& cloud, const Ball& ball, const CriterionParams& params,
                          std::uint64_t seed, bool exhaustive = false);

struct CubeVerdict {
  int cube_id = -1;
  int level = 0;
  BallVerdict verdict;
};

struct QPLabeling {
  CriterionParams params;
  std::vector<CubeVerdict> verdicts;  // cube-id order, covering the forest
  std::vector<char> bad_mask;         // by cube id

  std::string to_csv() const;
};

QPLabeling classify(const CubeForest& forest, const PointCloud& cloud,
                    const CriterionParams& params);

// named classifiers (thin wrappers validating the kind)
QPLabeling classify_bwgl(const CubeForest& f, const PointCloud& c, const CriterionParams& p);
QPLabeling classify_ls(const CubeForest& f, const PointCloud& c, const CriterionParams& p);
QPLabeling classify_lcv(const CubeForest& f, const PointCloud& c, const CriterionParams& p);
QPLabeling classify_baup(const CubeForest& f, const PointCloud& c, const CriterionParams& p);
QPLabeling classify_bp(const CubeForest& f, const PointCloud& c, const CriterionParams& p);

struct CarlesonSum {
  double sum = 0.0;
  double normalized = 0.0;  // sum / ell(R)^d
};

CarlesonSum carleson_sum(const QPLabeling& labels, const CubeForest& forest, int root_id);
// per-level partial sums; adding them in level order reproduces sum exactly
std::map<int, double> carleson_by_level(const QPLabeling& labels, const CubeForest& forest,
                                        int root_id);
std::string carleson_json(const QPLabeling& labels, const CarlesonSum& sum);

// Empirical continuity probe: samples criterion-good balls B on E1 with
// d_{C2 B}(E1, E2) < epsilon1, then sub-balls B' on E2 with C2 B' ⊆ B and
// r_B' >= r_B / C1, and reports the smallest multiplicative relaxation of the
// parameters making B' good on E2.
struct ProbeOutcome {
  Ball ball;        // B on E1
  Ball sub_ball;    // B' on E2
  bool good_at_base = false;
  double relaxation = 1.0;
};

struct ContinuityProbe {
  Criterion kind = Criterion::BWGL;
  double epsilon1 = 0.01;
  double C1 = 4.0;
  double C2 = 2.0;
  int trials = 0;
  std::vector<ProbeOutcome> outcomes;

  std::size_t qualifying() const { return outcomes.size(); }
  double max_relaxation() const;
};

ContinuityProbe continuity_probe(Criterion kind, const PointCloud& e1, const PointCloud& e2,
                                 double epsilon1, double C1, double C2, int trials,
                                 std::uint64_t seed);

}  // namespace msgeo
