#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "msgeo/compare.hpp"
#include "msgeo/pipeline.hpp"
#include "msgeo/shapes.hpp"

using namespace msgeo;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  out << body;
}

// report text with the metadata timestamp field removed
std::string strip_timestamp(const std::string& body) {
  auto j = nlohmann::ordered_json::parse(body);
  if (j.contains("metadata") && j["metadata"].contains("timestamp"))
    j["metadata"].erase("timestamp");
  return j.dump(2);
}

}  // namespace

TEST_CASE("compare_tst on the segment: both sides near ell(R)") {
  ShapeSpec s;
  s.shape = "segment";
  s.params["n_points"] = 513;
  auto cloud = generate(s);
  BetaParams bp;
  CriterionParams ls;
  ls.kind = Criterion::LS;
  ls.epsilon = 0.1;
  auto rep = compare_tst(cloud, 0.5, 5, bp, {ls}, 3);

  REQUIRE(!rep.cubes.empty());
  const auto& root = rep.root();
  CHECK(root.content_hd == doctest::Approx(1.0).epsilon(0.01));
  CHECK(root.beta_total == doctest::Approx(2.0).epsilon(0.1));  // ell(R) = diam/(1-rho)
  CHECK(root.beta_total / root.content_hd > 0.2);
  CHECK(root.beta_total / root.content_hd < 5.0);
  const double ratio = root.ratios.at("ls");
  CHECK(ratio == root.beta_total / (root.content_hd + root.criterion_sums.at("ls")));
  CHECK(ratio > 0.0);

  // level-1 rows exist and recompute exactly
  int level1 = 0;
  for (const auto& row : rep.cubes)
    if (row.level == 1) {
      ++level1;
      for (const auto& [name, sum] : row.criterion_sums)
        CHECK(row.ratios.at(name) == row.beta_total / (row.content_hd + sum));
    }
  CHECK(level1 >= 1);

  // per-level criterion sums: non-negative, add up to the root sum exactly
  double acc = 0.0;
  for (const auto& [lvl, val] : rep.criterion_levels.at("ls")) {
    CHECK(val >= 0.0);
    acc += val;
  }
  CHECK(acc == root.criterion_sums.at("ls"));
}

TEST_CASE("pipeline: segment demo emits six artifacts and exit 0") {
  PipelineConfig cfg;
  ShapeSpec spec;
  spec.shape = "segment";
  spec.params["n_points"] = 513;
  cfg.shape = spec;
  cfg.depth = 4;
  cfg.samples = 32;
  cfg.criteria = {"bwgl", "ls"};
  cfg.out = "msgeo_pipe_out";
  const auto res = run_pipeline(cfg);
  CHECK(res.exit_code == 0);
  CHECK(res.failed_check.empty());
  CHECK(res.artifacts.size() == 6);
  for (const auto& name : {"report.json", "corona.json", "ar_ratios.csv", "beta_levels.csv",
                           "bwgl_levels.csv", "ls_levels.csv"})
    CHECK(fs::exists(fs::path("msgeo_pipe_out") / name));
  fs::remove_all("msgeo_pipe_out");
}

TEST_CASE("pipeline: byte-identical reruns modulo the timestamp") {
  PipelineConfig cfg;
  ShapeSpec spec;
  spec.shape = "lipschitz_graph";
  spec.params["n_points"] = 257;
  cfg.shape = spec;
  cfg.depth = 4;
  cfg.samples = 16;
  cfg.criteria = {"ls"};
  cfg.seed = 42;

  cfg.out = "msgeo_rep_a";
  REQUIRE(run_pipeline(cfg).exit_code == 0);
  cfg.out = "msgeo_rep_b";
  REQUIRE(run_pipeline(cfg).exit_code == 0);

  CHECK(strip_timestamp(slurp("msgeo_rep_a/report.json")) ==
        strip_timestamp(slurp("msgeo_rep_b/report.json")));
  CHECK(slurp("msgeo_rep_a/corona.json") == slurp("msgeo_rep_b/corona.json"));
  CHECK(slurp("msgeo_rep_a/ls_levels.csv") == slurp("msgeo_rep_b/ls_levels.csv"));
  fs::remove_all("msgeo_rep_a");
  fs::remove_all("msgeo_rep_b");
}

TEST_CASE("pipeline: named failures") {
  PipelineConfig cfg;
  ShapeSpec spec;
  spec.shape = "segment";
  spec.params["n_points"] = 257;
  cfg.shape = spec;
  cfg.depth = 4;
  cfg.samples = 8;
  cfg.out = "msgeo_pipe_fail";

  SUBCASE("tau violating the comparability hypothesis") {
    cfg.tau = 0.45;
    const auto res = run_pipeline(cfg);
    CHECK(res.exit_code != 0);
    CHECK(res.failed_check == "tau_too_large");
  }
  SUBCASE("missing cloud file") {
    cfg.shape.reset();
    cfg.cloud = "definitely_missing_cloud.txt";
    const auto res = run_pipeline(cfg);
    CHECK(res.exit_code != 0);
    CHECK(res.failed_check.find("cannot open") != std::string::npos);
  }
  fs::remove_all("msgeo_pipe_fail");
}

TEST_CASE("pipeline config parses the documented json layout") {
  write("msgeo_cfg.json", R"({
    "generate": {"shape": "segment", "n_points": 257, "seed": 7},
    "analyze": {"d": 1, "rho": 0.5, "depth": 4, "tau": 0.05, "c0": 5.0,
                "criteria": "ls", "epsilon": 0.1, "samples": 8, "seed": 7},
    "out": "msgeo_cfg_out"
  })");
  auto cfg = PipelineConfig::from_json_file("msgeo_cfg.json");
  CHECK(cfg.shape.has_value());
  CHECK(cfg.shape->shape == "segment");
  CHECK(cfg.criteria == std::vector<std::string>{"ls"});
  CHECK(cfg.depth == 4);
  const auto res = run_pipeline(cfg);
  CHECK(res.exit_code == 0);
  std::remove("msgeo_cfg.json");
  fs::remove_all("msgeo_cfg_out");

  CHECK_THROWS(PipelineConfig::from_json_file("no_such_config.json"));
}
