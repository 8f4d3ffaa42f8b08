// Acceptance run: every criterion at its stated size and tolerance, one
// PASS/FAIL line each. Outputs of each experiment land in
// <out>/<experiment>/ (default ./acceptance_out) for inspection.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <map>

#include "heavytail/experiments.hpp"
#include "heavytail/rank_one.hpp"
#include "heavytail/stats.hpp"
#include "support/oracles.hpp"

using namespace heavytail;
using namespace heavytail::harness;

namespace {

constexpr std::uint64_t kMasterSeed = 20261019;

struct Outcome {
  bool pass;
  std::string detail;
};

std::filesystem::path g_out = "acceptance_out";

struct Timed {
  json summary;
  double seconds;
};

Timed run(const std::string& experiment, const json& overrides = json::object()) {
  ExperimentConfig cfg;
  cfg.experiment = experiment;
  cfg.params = overrides;
  cfg.seed = kMasterSeed;
  const auto t0 = std::chrono::steady_clock::now();
  const auto rec = run_experiment(cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_outputs(rec, g_out / experiment);
  return {rec.result.summary, secs};
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

Outcome tilted_sampler() {
  const auto r = run("tilted-oracle");
  const double tv = r.summary.at("max_pooled_tv").get<double>();
  return {tv < 0.02 && r.seconds < 300.0, "max TV " + fmt(tv) + ", " + fmt(r.seconds) + " s"};
}

Outcome ptree_law() {
  const std::vector<double> p{0.4, 0.3, 0.2, 0.1};
  std::map<std::vector<int>, double> exact;
  for (const auto& t : oracle::rooted_trees(4)) exact[t] = oracle::ptree_probability(t, p);
  Rng rng(derive_seed(kMasterSeed, 0));
  const ProbVector pv(p);
  std::map<std::vector<int>, long long> counts;
  for (int i = 0; i < 1000000; ++i) ++counts[sample_ptree(pv, rng).parent];
  const double tv = stats::tv_empirical(counts, exact);
  return {exact.size() == 64 && tv < 0.02, "TV " + fmt(tv) + " over " + std::to_string(exact.size()) + " trees"};
}

Outcome susceptibility() {
  const auto r = run("susceptibility-scaling");
  const auto& trend = r.summary.at("s2_ratio_by_n");
  const double last = r.summary.at("final_ratio").get<double>();
  const bool toward = r.summary.at("moves_toward_one").get<bool>();
  return {toward && last >= 0.8 && last <= 1.2 && r.seconds < 1800.0,
          "ratios " + trend.dump() + ", " + fmt(r.seconds) + " s"};
}

Outcome diameter() {
  const auto r = run("diameter-bound");
  const auto v = r.summary.at("violations").get<long long>();
  return {v == 0, std::to_string(v) + " violations in 100 runs"};
}

// one run yields both critical slopes
json g_critical;

Outcome component_slope() {
  if (g_critical.is_null()) g_critical = run("distance-scaling").summary;
  const double s = g_critical.at("c1_slope").at("slope").get<double>();
  return {std::abs(s - 0.6) <= 0.08, "slope " + fmt(s) + ", medians " + g_critical.at("median_c1").dump()};
}

Outcome distance_slope() {
  if (g_critical.is_null()) g_critical = run("distance-scaling").summary;
  const double s = g_critical.at("distance_slope").at("slope").get<double>();
  return {std::abs(s - 0.2) <= 0.1, "slope " + fmt(s) + ", medians " + g_critical.at("median_distance").dump()};
}

Outcome limit_bridge() {
  const auto r = run("limit-bridge");
  const auto& k = r.summary.at("by_truncation").at(0);
  const double D = k.at("ks_distance").get<double>(), crit = k.at("ks_critical_5").get<double>();
  const double rel = k.at("surplus_relative_error").get<double>();
  return {D < crit && rel < 0.2, "KS " + fmt(D) + " vs " + fmt(crit) + ", surplus error " + fmt(rel)};
}

Outcome rescaling() {
  const auto r = run("rescaling-identity");
  const double D = r.summary.at("ks_distance").get<double>(), crit = r.summary.at("ks_critical_1").get<double>();
  return {D < crit, "KS " + fmt(D) + " vs " + fmt(crit)};
}

Outcome coalescent() {
  const auto r = run("mc-vs-nr");
  const double tv = r.summary.at("tv_coalescent_exact").get<double>();
  return {tv < 0.02, "TV " + fmt(tv)};
}

Outcome trackers() {
  const auto r = run("dynamic-trackers");
  const double f = r.summary.at("fraction_within").get<double>();
  return {f >= 0.95, "within band on " + fmt(100.0 * f) + "% of runs"};
}

Outcome universality() {
  const auto r = run("universality-check");
  const auto& trend = r.summary.at("relative_difference_by_m");
  const double last = r.summary.at("final").get<double>();
  return {last < 0.10 && r.summary.at("decreasing").get<bool>(), "relative differences " + trend.dump()};
}

Outcome coupling() {
  const auto r = run("entrance-boundary");
  const double f = r.summary.at("coupling_fraction").get<double>();
  return {f == 1.0, "coupling held on " + fmt(100.0 * f) + "% of runs"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_out = argv[1];
  const std::vector<std::pair<std::string, Outcome (*)()>> criteria{
      {"tilted sampler exact law", tilted_sampler},
      {"p-tree law", ptree_law},
      {"susceptibility scaling", susceptibility},
      {"diameter bound", diameter},
      {"component size exponent", component_slope},
      {"distance exponent", distance_slope},
      {"limit bridge", limit_bridge},
      {"rescaling identity", rescaling},
      {"coalescent vs rank-one partition", coalescent},
      {"dynamic trackers", trackers},
      {"universality scaling", universality},
      {"coupling", coupling},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o{false, ""};
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " C" << i + 1 << " " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
