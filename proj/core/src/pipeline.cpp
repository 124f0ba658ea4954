#include "msgeo/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "msgeo/compare.hpp"
#include "msgeo/content.hpp"
#include "msgeo/corona.hpp"
#include "msgeo/frostmann.hpp"

namespace msgeo {

namespace {

namespace fs = std::filesystem;

std::string now_string() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::ostringstream out;
  out << t;
  return out.str();
}

void write_file(const std::string& path, const std::string& body,
                std::vector<std::string>* artifacts) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << body;
  artifacts->push_back(path);
}

std::string levels_csv(const std::map<int, double>& by_level) {
  std::ostringstream out;
  out.precision(17);
  out << "level,value\n";
  for (const auto& [lvl, val] : by_level) out << lvl << ',' << val << '\n';
  return out.str();
}

std::string ar_histogram_csv(const MainLemmaReport& rep) {
  // log2-spaced bins over the sampled ratios
  std::vector<double> all;
  for (const auto& t : rep.tops) all.insert(all.end(), t.ar_ratios.begin(), t.ar_ratios.end());
  std::ostringstream out;
  out.precision(17);
  out << "bin_lo,bin_hi,count\n";
  if (all.empty()) return out.str();
  double lo = *std::min_element(all.begin(), all.end());
  lo = std::max(lo, 1e-12);
  const double hi = std::max(*std::max_element(all.begin(), all.end()), lo * 2.0);
  const int bins = 24;
  const double step = std::log2(hi / lo) / bins;
  std::vector<std::size_t> count(static_cast<std::size_t>(bins), 0);
  for (double v : all) {
    int b = static_cast<int>(std::floor(std::log2(std::max(v, lo) / lo) / step));
    b = std::clamp(b, 0, bins - 1);
    count[static_cast<std::size_t>(b)]++;
  }
  for (int b = 0; b < bins; ++b)
    out << lo * std::exp2(b * step) << ',' << lo * std::exp2((b + 1) * step) << ','
        << count[static_cast<std::size_t>(b)] << '\n';
  return out.str();
}

// max over points of the nearest-other-point distance (a covering radius for
// the sample of itself)
double infer_resolution(const PointCloud& cloud) {
  if (cloud.size() < 2) return 1e-3;
  double worst = 0.0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec x = cloud.point(static_cast<int>(i));
    double r = std::max(cloud.diameter() / static_cast<double>(cloud.size()), 1e-9);
    double best = std::numeric_limits<double>::infinity();
    for (; !std::isfinite(best); r *= 2.0) {
      for (int j : cloud.tree().within(x, r))
        if (j != static_cast<int>(i)) best = std::min(best, (cloud.point(j) - x).norm());
    }
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

PipelineConfig PipelineConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw Error(std::string("config: parse error: ") + e.what());
  }
  PipelineConfig cfg;
  if (j.contains("generate")) {
    const auto& g = j["generate"];
    ShapeSpec spec;
    spec.shape = g.at("shape").get<std::string>();
    for (auto it = g.begin(); it != g.end(); ++it) {
      if (it.key() == "shape") continue;
      if (it.key() == "seed") {
        spec.seed = it.value().get<std::uint64_t>();
        continue;
      }
      spec.params[it.key()] = it.value().get<double>();
    }
    cfg.shape = spec;
  }
  if (j.contains("analyze")) {
    const auto& a = j["analyze"];
    auto get = [&](const char* key, auto& slot) {
      if (a.contains(key)) slot = a.at(key).get<std::decay_t<decltype(slot)>>();
    };
    get("cloud", cfg.cloud);
    get("n", cfg.n);
    get("d", cfg.d);
    get("resolution", cfg.resolution);
    get("rho", cfg.rho);
    get("depth", cfg.depth);
    get("m", cfg.m);
    get("tau", cfg.tau);
    get("c0", cfg.c0);
    get("M", cfg.M);
    get("samples", cfg.samples);
    get("divisor", cfg.divisor);
    get("epsilon", cfg.epsilon);
    get("bwgl_c0", cfg.bwgl_c0);
    get("theta", cfg.theta);
    get("max_planes", cfg.max_planes);
    get("beta_A", cfg.beta_A);
    get("beta_p", cfg.beta_p);
    get("seed", cfg.seed);
    if (a.contains("criteria")) {
      cfg.criteria.clear();
      if (a["criteria"].is_string()) {
        std::istringstream list(a["criteria"].get<std::string>());
        std::string tok;
        while (std::getline(list, tok, ',')) cfg.criteria.push_back(tok);
      } else {
        for (const auto& c : a["criteria"]) cfg.criteria.push_back(c.get<std::string>());
      }
    }
  }
  if (j.contains("out")) cfg.out = j["out"].get<std::string>();
  return cfg;
}

std::vector<CriterionParams> PipelineConfig::criterion_params() const {
  std::vector<CriterionParams> out;
  for (const auto& name : criteria) {
    CriterionParams p;
    p.kind = criterion_from_string(name);
    p.epsilon = epsilon;
    p.C0 = bwgl_c0;
    p.theta = theta;
    p.max_planes = max_planes;
    out.push_back(p);
  }
  return out;
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  PipelineResult res;
  auto fail = [&](const std::string& name) {
    res.exit_code = 1;
    res.failed_check = name;
    return res;
  };

  try {
    if (cfg.out.empty()) return fail("config: missing output directory");
    fs::create_directories(cfg.out);

    // ---- cloud ----
    PointCloud cloud = [&] {
      if (cfg.shape) return generate(*cfg.shape);
      if (cfg.cloud.empty()) throw Error("config: need a shape or a cloud file");
      if (cfg.resolution > 0.0) return load_cloud(cfg.cloud, cfg.n, cfg.d, cfg.resolution);
      auto first = load_cloud(cfg.cloud, cfg.n, cfg.d, 1.0);
      return load_cloud(cfg.cloud, cfg.n, cfg.d, infer_resolution(first));
    }();

    // ---- forest / index / frostmann ----
    const auto forest = build_christ_cubes(cloud, cfg.rho, cfg.depth, cfg.seed);
    const int k0 = forest.depth;
    int m = cfg.m;
    const double root_hint = make_lattice(cloud).root_side;
    if (m < 0) {
      const double need = std::pow(cfg.rho, k0 + 1) * forest.diam_scale;
      m = static_cast<int>(std::floor(std::log2(root_hint / need))) + 1;
      m = std::max(m, 1);
    }
    DyadicIndex index(cloud, m);
    const auto fr = run_frostmann(index, cloud.d(), m);
    if (upper_regularity_violations(fr) != 0) return fail("frostmann_upper_regularity");
    if (stop_bound_violations(fr) != 0) return fail("frostmann_stop_bounds");

    const auto corona = build_coronization(forest, fr, cfg.M, k0);
    const auto verify =
        verify_main_lemma(corona, cloud, index, cfg.tau, cfg.c0, cfg.samples, cfg.seed, cfg.divisor);
    for (const auto& t : verify.tops) {
      if (!t.containment_ok) return fail("corona_containment");
      if (!t.whitney_ok) return fail("corona_whitney_bounds");
    }

    // ---- comparisons ----
    BetaParams bp;
    bp.A = cfg.beta_A;
    bp.p = cfg.beta_p;
    bp.d = cloud.d();
    const auto criteria = cfg.criterion_params();
    const auto comparison = compare_over_forest(cloud, forest, bp, criteria, cfg.seed);

    // ratios must recompute from stored components exactly
    for (const auto& row : comparison.cubes)
      for (const auto& [name, sum] : row.criterion_sums)
        if (row.ratios.at(name) != row.beta_total / (row.content_hd + sum))
          return fail("report_ratio_recompute");

    // ---- artifacts ----
    const double content =
        dyadic_content(cloud, cloud.d(), content_min_cell(cloud.resolution(), cloud.diameter()));

    nlohmann::ordered_json report = nlohmann::ordered_json::parse(comparison.to_json(now_string()));
    report["frostmann"] = nlohmann::ordered_json::parse(fr.to_json(content));
    report["corona"] = nlohmann::ordered_json::parse(verify.to_json());
    write_file(cfg.out + "/report.json", report.dump(2), &res.artifacts);
    write_file(cfg.out + "/corona.json", verify.to_json(), &res.artifacts);
    write_file(cfg.out + "/ar_ratios.csv", ar_histogram_csv(verify), &res.artifacts);
    write_file(cfg.out + "/beta_levels.csv", levels_csv(comparison.beta_levels), &res.artifacts);
    for (const auto& [name, by_level] : comparison.criterion_levels)
      write_file(cfg.out + "/" + name + "_levels.csv", levels_csv(by_level), &res.artifacts);
  } catch (const Error& e) {
    const std::string what = e.what();
    if (what.rfind("tau_too_large", 0) == 0) return fail("tau_too_large");
    return fail(what);
  } catch (const std::exception& e) {
    return fail(e.what());
  }
  return res;
}

}  // namespace msgeo
