#pragma once

// The registered experiments, run configuration, manifests and verification.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "heavytail/degrees.hpp"
#include "heavytail/dynamic.hpp"
#include "heavytail/graph.hpp"
#include "heavytail/harness.hpp"
#include "heavytail/levy.hpp"
#include "heavytail/metric.hpp"
#include "heavytail/rank_one.hpp"
#include "heavytail/stats.hpp"

namespace heavytail::harness {

struct RunContext {
  std::uint64_t seed = 1;
  std::size_t workers = 1;
};

struct Experiment {
  std::string name;
  std::string description;
  json defaults;  // every accepted parameter with its default
  std::function<ExperimentResult(const json& params, const RunContext& ctx)> run;
};

namespace detail {

inline std::vector<std::size_t> size_list(const json& j) {
  std::vector<std::size_t> out;
  if (j.is_array()) {
    for (const auto& v : j) out.push_back(v.get<std::size_t>());
  } else {
    out.push_back(j.get<std::size_t>());
  }
  require(!out.empty(), "parameter list must not be empty");
  return out;
}

inline std::vector<double> double_list(const json& j) {
  std::vector<double> out;
  if (j.is_array()) {
    for (const auto& v : j) out.push_back(v.get<double>());
  } else {
    out.push_back(j.get<double>());
  }
  require(!out.empty(), "parameter list must not be empty");
  return out;
}

/// delta defaults to 0.6 eta when the parameter is null.
inline double resolve_delta(const json& params, const TauExponents& ex) {
  const double delta = params.at("delta").is_null() ? 0.6 * ex.eta : params.at("delta").get<double>();
  require(delta > 0.0 && delta < ex.eta, "delta must lie in (0, eta)");
  return delta;
}

inline json slope_json(const stats::Slope& s) {
  return {{"slope", s.slope}, {"stderr", s.stderr_}, {"intercept", s.intercept}};
}

inline double column_mean(const ExperimentResult& r, std::size_t cell, const std::string& key) {
  return stats::mean(column(r, cell, key));
}

inline double column_median(const ExperimentResult& r, std::size_t cell, const std::string& key) {
  return stats::median(column(r, cell, key));
}

/// Counts pooled across batches and normalized.
template <class Key>
std::map<Key, double> pooled_frequencies(const std::vector<std::map<Key, long long>>& batches) {
  std::map<Key, long long> counts;
  long long total = 0;
  for (const auto& b : batches)
    for (const auto& [k, c] : b) {
      counts[k] += c;
      total += c;
    }
  std::map<Key, double> freq;
  for (const auto& [k, c] : counts) freq[k] = double(c) / double(total);
  return freq;
}

// ---- shared graph setups ---------------------------------------------------------

struct BarelySubcriticalCell {
  std::size_t n;
  double delta;
  BarelySubcriticalSequence seq;
  double mu_d;
};

inline std::vector<BarelySubcriticalCell> barely_subcritical_cells(const json& params) {
  const double tau = params.at("tau").get<double>();
  const TauExponents ex = exponents(tau);
  const double delta = resolve_delta(params, ex);
  std::vector<BarelySubcriticalCell> cells;
  for (std::size_t n : size_list(params.at("n"))) {
    auto seq = barely_subcritical_degrees(n, tau, delta, params.at("lambda0").get<double>(),
                                          params.at("scale").get<double>());
    const double mu_d = seq.degrees.mean();
    cells.push_back({n, delta, std::move(seq), mu_d});
  }
  return cells;
}

inline json barely_subcritical_params(const BarelySubcriticalCell& c) {
  return {{"n", c.n},
          {"delta", c.delta},
          {"target_nu", c.seq.target_nu},
          {"achieved_nu", c.seq.achieved_nu},
          {"achieved_lambda0", c.seq.achieved_lambda0},
          {"mu_d", c.mu_d},
          {"max_degree", c.seq.degrees.d.front()}};
}

struct CriticalCell {
  std::size_t n;
  DegreeSequence seq;
  double mu, nu, p;
  bool clamped;
};

inline CriticalCell critical_cell(std::size_t n, double tau, double lambda, double scale) {
  const TauExponents ex = exponents(tau);
  DegreeSequence seq = quantile_degrees(n, ex.alpha, scale);
  seq.tau = tau;
  const double nu = criticality_parameter(seq);
  const auto pp = percolation_probability(nu, lambda, std::pow(double(n), -ex.eta));
  const double mu = seq.mean();
  return {n, std::move(seq), mu, nu, pp.p, pp.clamped};
}

inline json critical_params(const CriticalCell& c) {
  return {{"n", c.n}, {"mu", c.mu}, {"nu", c.nu}, {"p", c.p}, {"p_clamped", c.clamped}};
}

/// Largest component of critical percolation: size, surplus and, when pairs > 0,
/// sampled two-point distances inside it.
inline Values critical_replica(const CriticalCell& c, double rho, std::size_t pairs, Rng& rng) {
  const MultiGraph g = percolate(sample_cm(c.seq.d, rng), c.p, rng);
  ComponentOptions opt;
  opt.distances = false;
  opt.diameters = false;
  const ComponentReport rep = components_and_stats(g, nullptr, opt);
  const ComponentStats& c1 = rep.components.front();
  Values v{{"c1", double(c1.size)},
           {"c1_scaled", double(c1.size) * std::pow(double(c.n), -rho)},
           {"surplus1", double(c1.surplus)},
           {"c2", rep.components.size() > 1 ? double(rep.components[1].size) : 0.0}};
  if (pairs > 0) {
    const auto d = sample_two_point_distances(g, c1.vertices, pairs, rng);
    std::vector<double> dd(d.begin(), d.end());
    v.emplace_back("distance_mean", stats::mean(dd));
    v.emplace_back("distance_median", stats::median(dd));
  }
  return v;
}

// ---- experiments -----------------------------------------------------------------

inline ExperimentResult susceptibility_scaling(const json& params, const RunContext& ctx) {
  ExperimentResult res{"susceptibility-scaling", {}, {}, json::object()};
  const auto cells = barely_subcritical_cells(params);
  const std::size_t R = params.at("replicas").get<std::size_t>();
  const bool distances = params.at("distances").get<bool>();
  const double alpha = exponents(params.at("tau").get<double>()).alpha;
  for (const auto& c : cells) res.cells.push_back({"n=" + std::to_string(c.n), barely_subcritical_params(c)});

  auto values = run_replicas(0, cells.size(), R, ctx.seed, ctx.workers, [&](std::size_t ci, std::size_t, Rng& rng) {
    const auto& c = cells[ci];
    const MultiGraph g = sample_cm(c.seq.degrees.d, rng);
    ComponentOptions opt;
    opt.distances = distances;
    opt.diameters = false;
    opt.seed = rng();
    const auto rep = components_and_stats(g, nullptr, opt);
    const double nd = std::pow(double(c.n), -c.delta);
    const double lam = c.seq.achieved_lambda0;
    // with unit weights mu_{d,w} = mu_d
    const double target = c.mu_d / lam;
    const double theta1 = std::pow(double(c.n), -alpha) * double(c.seq.degrees.d.front());
    const double w1 = double(rep.components.front().size) * std::pow(double(c.n), -(alpha + c.delta));
    Values v{{"s2_scaled", nd * rep.susceptibility.s2},
             {"s2_target", target},
             {"s2_ratio", nd * rep.susceptibility.s2 / target},
             {"spr_ratio", nd * rep.susceptibility.spr / target},
             {"c1_ratio", w1 / (theta1 / lam)}};
    if (distances) {
      const double dtarget = c.mu_d / (lam * lam);
      v.emplace_back("dstar_ratio", nd * nd * rep.susceptibility.Dstar / dtarget);
    }
    return v;
  });
  append_rows(res.rows, 0, R, ctx.seed, std::move(values));

  json trend = json::array();
  for (std::size_t ci = 0; ci < cells.size(); ++ci) trend.push_back(column_mean(res, ci, "s2_ratio"));
  const double first = trend.front().get<double>(), last = trend.back().get<double>();
  res.summary = {{"s2_ratio_by_n", trend},
                 {"final_ratio", last},
                 {"moves_toward_one", std::abs(last - 1.0) <= std::abs(first - 1.0)}};
  return res;
}

inline ExperimentResult diameter_bound(const json& params, const RunContext& ctx) {
  ExperimentResult res{"diameter-bound", {}, {}, json::object()};
  const auto cells = barely_subcritical_cells(params);
  const std::size_t R = params.at("replicas").get<std::size_t>();
  for (const auto& c : cells) res.cells.push_back({"n=" + std::to_string(c.n), barely_subcritical_params(c)});

  auto values = run_replicas(0, cells.size(), R, ctx.seed, ctx.workers, [&](std::size_t ci, std::size_t, Rng& rng) {
    const auto& c = cells[ci];
    const MultiGraph g = sample_cm(c.seq.degrees.d, rng);
    ComponentOptions opt;
    opt.distances = false;
    const auto rep = components_and_stats(g, nullptr, opt);
    const double bound = 6.0 * std::pow(double(c.n), c.delta) * std::log(double(c.n));
    const double dmax = rep.susceptibility.max_diameter;
    return Values{{"max_diameter", dmax},
                  {"bound", bound},
                  {"diameter_over_bound", dmax / bound},
                  {"violation", dmax > bound ? 1.0 : 0.0}};
  });
  append_rows(res.rows, 0, R, ctx.seed, std::move(values));

  json per_cell = json::array();
  long long total = 0;
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    const auto v = column(res, ci, "violation");
    const long long k = std::llround(std::accumulate(v.begin(), v.end(), 0.0));
    total += k;
    per_cell.push_back({{"n", cells[ci].n}, {"violations", k}, {"runs", v.size()}});
  }
  res.summary = {{"violations_by_n", per_cell}, {"violations", total}};
  return res;
}

/// Shared by component-scaling and distance-scaling: one cell per n.
inline ExperimentResult critical_scaling(const std::string& name, const json& params, const RunContext& ctx) {
  ExperimentResult res{name, {}, {}, json::object()};
  const double tau = params.at("tau").get<double>();
  const TauExponents ex = exponents(tau);
  const double lambda = params.at("lambda").get<double>();
  const std::size_t R = params.at("replicas").get<std::size_t>();
  const std::size_t pairs = params.at("pairs").get<std::size_t>();
  std::vector<CriticalCell> cells;
  for (std::size_t n : size_list(params.at("n")))
    cells.push_back(critical_cell(n, tau, lambda, params.at("scale").get<double>()));
  for (const auto& c : cells) res.cells.push_back({"n=" + std::to_string(c.n), critical_params(c)});

  auto values = run_replicas(0, cells.size(), R, ctx.seed, ctx.workers, [&](std::size_t ci, std::size_t, Rng& rng) {
    return critical_replica(cells[ci], ex.rho, pairs, rng);
  });
  append_rows(res.rows, 0, R, ctx.seed, std::move(values));

  std::vector<double> ns, c1_median, dist_median;
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    ns.push_back(double(cells[ci].n));
    c1_median.push_back(column_median(res, ci, "c1"));
    if (pairs > 0) dist_median.push_back(column_median(res, ci, "distance_mean"));
  }
  res.summary = {{"median_c1", c1_median}, {"rho", ex.rho}, {"eta", ex.eta}};
  if (cells.size() >= 2) res.summary["c1_slope"] = slope_json(stats::log_log_slope(ns, c1_median));
  if (pairs > 0) {
    res.summary["median_distance"] = dist_median;
    if (cells.size() >= 2) res.summary["distance_slope"] = slope_json(stats::log_log_slope(ns, dist_median));
  }
  return res;
}

inline ExperimentResult component_scaling(const json& params, const RunContext& ctx) {
  return critical_scaling("component-scaling", params, ctx);
}

inline ExperimentResult distance_scaling(const json& params, const RunContext& ctx) {
  return critical_scaling("distance-scaling", params, ctx);
}

inline ExperimentResult limit_bridge(const json& params, const RunContext& ctx) {
  ExperimentResult res{"limit-bridge", {}, {}, json::object()};
  const double tau = params.at("tau").get<double>();
  const TauExponents ex = exponents(tau);
  const double lambda = params.at("lambda").get<double>();
  const std::size_t n = params.at("n").get<std::size_t>();
  const std::size_t R = params.at("replicas").get<std::size_t>();
  const std::size_t draws = params.at("limit_draws").get<std::size_t>();
  const std::size_t K = params.at("K").get<std::size_t>();
  const CriticalCell cell = critical_cell(n, tau, lambda, params.at("scale").get<double>());
  require(2 * K <= n, "limit-bridge: 2K must not exceed n");

  // finite-n hub weights theta_i = n^{-alpha} d_i, limit process with
  // theta/(mu nu) and lambda/mu
  auto theta_for = [&](std::size_t k) {
    std::vector<double> t;
    for (std::size_t i = 0; i < k; ++i) t.push_back(std::pow(double(n), -ex.alpha) * double(cell.seq.d[i]));
    return ThetaSeq(std::move(t)).scaled(1.0 / (cell.mu * cell.nu));
  };
  const std::vector<ThetaSeq> thetas{theta_for(K), theta_for(2 * K)};
  res.cells.push_back({"graph n=" + std::to_string(n), critical_params(cell)});
  for (const auto& th : thetas)
    res.cells.push_back({"limit K=" + std::to_string(th.K()),
                         {{"K", th.K()}, {"lambda", lambda / cell.mu}, {"sum_theta_sq", th.sum_squares()}}});

  auto graph = run_replicas(0, 1, R, ctx.seed, ctx.workers,
                            [&](std::size_t, std::size_t, Rng& rng) { return critical_replica(cell, ex.rho, 0, rng); });
  append_rows(res.rows, 0, R, ctx.seed, std::move(graph));
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    auto limit = run_replicas(1 + k, 1, draws, ctx.seed, ctx.workers, [&](std::size_t, std::size_t, Rng& rng) {
      const auto exc = excursions_and_marks(simulate_thinned_levy(thetas[k], lambda / cell.mu, kForever, rng), rng);
      const Excursion& top = exc.excursions.front();
      return Values{{"c1_scaled", top.length / cell.nu}, {"surplus1", double(top.marks)}};
    });
    append_rows(res.rows, 1 + k, draws, ctx.seed, std::move(limit));
  }

  const auto graph_sizes = column(res, 0, "c1_scaled");
  const double graph_surplus = column_mean(res, 0, "surplus1");
  json per_k = json::array();
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    const auto ks = stats::ks_two_sample(graph_sizes, column(res, 1 + k, "c1_scaled"));
    const double limit_surplus = column_mean(res, 1 + k, "surplus1");
    per_k.push_back({{"K", thetas[k].K()},
                     {"ks_distance", ks.D},
                     {"ks_critical_5", ks.critical_5},
                     {"graph_surplus_mean", graph_surplus},
                     {"limit_surplus_mean", limit_surplus},
                     {"surplus_relative_error", std::abs(graph_surplus - limit_surplus) / limit_surplus}});
  }
  res.summary = {{"by_truncation", per_k}};
  return res;
}

inline ExperimentResult rescaling_identity(const json& params, const RunContext& ctx) {
  ExperimentResult res{"rescaling-identity", {}, {}, json::object()};
  const std::size_t K = params.at("K").get<std::size_t>();
  const double exponent = params.at("theta_exponent").get<double>();
  const double lambda = params.at("lambda").get<double>();
  const double eta1 = params.at("eta1").get<double>(), eta2 = params.at("eta2").get<double>();
  const std::size_t draws = params.at("draws").get<std::size_t>();
  std::vector<double> t;
  for (std::size_t i = 1; i <= K; ++i) t.push_back(std::pow(double(i), -exponent));
  const ThetaSeq theta(std::move(t));
  res.cells.push_back({"paired", {{"K", K}, {"lambda", lambda}, {"eta1", eta1}, {"eta2", eta2}}});

  auto values = run_replicas(0, 1, draws, ctx.seed, ctx.workers, [&](std::size_t, std::size_t, Rng& rng) {
    const auto s = rescaled_excursion_law(theta, lambda, eta1, eta2, 1, rng);
    return Values{{"direct", s.direct.front()}, {"rescaled", s.rescaled.front()}};
  });
  append_rows(res.rows, 0, draws, ctx.seed, std::move(values));
  const auto ks = stats::ks_two_sample(column(res, 0, "direct"), column(res, 0, "rescaled"));
  res.summary = {{"ks_distance", ks.D}, {"ks_critical_5", ks.critical_5}, {"ks_critical_1", ks.critical_1}};
  return res;
}

inline ExperimentResult tilted_oracle(const json& params, const RunContext& ctx) {
  ExperimentResult res{"tilted-oracle", {}, {}, json::object()};
  const auto ms = size_list(params.at("m"));
  const auto as = double_list(params.at("a"));
  const std::size_t samples = params.at("samples").get<std::size_t>();
  const std::size_t batches = params.at("batches").get<std::size_t>();
  require(batches >= 1 && samples >= batches, "tilted-oracle: need samples >= batches >= 1");
  const SurplusRoute route =
      params.at("route").get<std::string>() == "geometric" ? SurplusRoute::geometric : SurplusRoute::poisson;
  struct Setup {
    ProbVector p;
    double a;
    std::map<std::uint64_t, double> law;
  };
  std::vector<Setup> setups;
  for (std::size_t m : ms)
    for (double a : as) {
      Setup s{ProbVector::uniform(m), a, {}};
      for (const auto& [mask, pr] : pcon_oracle(s.p, a).entries) s.law[mask] = pr;
      setups.push_back(std::move(s));
      res.cells.push_back({"m=" + std::to_string(m) + " a=" + format_double(a), {{"m", m}, {"a", a}}});
    }

  struct Batch {
    std::map<std::uint64_t, long long> counts;
    Values values;
  };
  auto out = run_replicas(0, setups.size(), batches, ctx.seed, ctx.workers, [&](std::size_t ci, std::size_t b, Rng& rng) {
    const Setup& s = setups[ci];
    TiltedSampler sampler(s.p, s.a, route);
    Batch batch;
    const std::size_t count = samples / batches + (b < samples % batches ? 1 : 0);
    double surplus = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
      const ConnectedSample cs = sampler.sample(rng);
      ++batch.counts[edge_mask(cs.graph)];
      surplus += double(cs.graph.edge_count()) - double(s.p.size()) + 1.0;
    }
    batch.values = {{"tv", stats::tv_empirical(batch.counts, s.law)},
                    {"acceptance_rate", sampler.acceptance_rate()},
                    {"mean_surplus", surplus / double(count)}};
    return batch;
  });
  json per_cell = json::array();
  for (std::size_t ci = 0; ci < setups.size(); ++ci) {
    std::vector<std::map<std::uint64_t, long long>> counts;
    std::vector<Values> values;
    for (std::size_t b = 0; b < batches; ++b) {
      counts.push_back(out[ci * batches + b].counts);
      values.push_back(out[ci * batches + b].values);
    }
    append_rows(res.rows, ci, batches, ctx.seed, std::move(values));
    per_cell.push_back({{"label", res.cells[ci].label},
                        {"samples", samples},
                        {"pooled_tv", stats::tv_distance(pooled_frequencies(counts), setups[ci].law)}});
  }
  double worst = 0.0;
  for (const auto& c : per_cell) worst = std::max(worst, c.at("pooled_tv").get<double>());
  res.summary = {{"pooled", per_cell}, {"max_pooled_tv", worst}};
  return res;
}

inline ExperimentResult mc_vs_nr(const json& params, const RunContext& ctx) {
  ExperimentResult res{"mc-vs-nr", {}, {}, json::object()};
  const auto x = double_list(params.at("x"));
  const double t = params.at("t").get<double>();
  const std::size_t runs = params.at("runs").get<std::size_t>();
  const std::size_t batches = params.at("batches").get<std::size_t>();
  require(batches >= 1 && runs >= batches, "mc-vs-nr: need runs >= batches >= 1");
  const auto law = nr_partition_law(x, t);
  res.cells.push_back({"coalescent", {{"x", x}, {"t", t}}});
  res.cells.push_back({"rank-one", {{"x", x}, {"t", t}}});

  using Key = std::vector<int>;
  struct Batch {
    std::map<Key, long long> counts;
    Values values;
  };
  auto out = run_replicas(0, 2, batches, ctx.seed, ctx.workers, [&](std::size_t ci, std::size_t b, Rng& rng) {
    Batch batch;
    const std::size_t count = runs / batches + (b < runs % batches ? 1 : 0);
    for (std::size_t k = 0; k < count; ++k) {
      Key key;
      if (ci == 0) {
        key = partition_labels(simulate_mc(x, t, rng).clusters, x.size());
      } else {
        std::vector<std::vector<std::size_t>> blocks;
        for (const auto& c : connected_components(Adjacency(sample_nr(x, t, rng)))) blocks.emplace_back(c.begin(), c.end());
        key = partition_labels(blocks, x.size());
      }
      ++batch.counts[key];
    }
    batch.values = {{"tv", stats::tv_empirical(batch.counts, law)}};
    return batch;
  });
  std::vector<std::map<Key, double>> pooled;
  for (std::size_t ci = 0; ci < 2; ++ci) {
    std::vector<std::map<Key, long long>> counts;
    std::vector<Values> values;
    for (std::size_t b = 0; b < batches; ++b) {
      counts.push_back(out[ci * batches + b].counts);
      values.push_back(out[ci * batches + b].values);
    }
    append_rows(res.rows, ci, batches, ctx.seed, std::move(values));
    pooled.push_back(pooled_frequencies(counts));
  }
  json exact = json::array();
  for (const auto& [k, v] : law) exact.push_back({{"partition", k}, {"probability", v}});
  res.summary = {{"tv_coalescent_exact", stats::tv_distance(pooled[0], law)},
                 {"tv_rank_one_exact", stats::tv_distance(pooled[1], law)},
                 {"tv_coalescent_rank_one", stats::tv_distance(pooled[0], pooled[1])},
                 {"exact_law", exact}};
  return res;
}

inline ExperimentResult dynamic_trackers(const json& params, const RunContext& ctx) {
  ExperimentResult res{"dynamic-trackers", {}, {}, json::object()};
  const std::size_t n = params.at("n").get<std::size_t>();
  const long long degree = params.at("degree").get<long long>();
  const double t_max = params.at("t_max").get<double>();
  const std::size_t grid_points = params.at("grid").get<std::size_t>();
  const std::size_t R = params.at("replicas").get<std::size_t>();
  const double tolerance = params.at("tolerance").get<double>();
  require(degree >= 2 && (n * std::size_t(degree)) % 2 == 0, "dynamic-trackers: need degree >= 2 and n * degree even");
  const std::vector<long long> d(n, degree);
  const double mu = double(degree), nu = double(degree - 1);
  const double threshold = tolerance * mu / std::sqrt(double(n));
  std::vector<double> grid;
  for (std::size_t k = 0; k <= grid_points; ++k) grid.push_back(t_max * double(k) / double(grid_points));
  res.cells.push_back({"n=" + std::to_string(n),
                       {{"n", n}, {"degree", degree}, {"t_max", t_max}, {"threshold", threshold}}});

  auto values = run_replicas(0, 1, R, ctx.seed, ctx.workers, [&](std::size_t, std::size_t, Rng& rng) {
    const DynamicState st = run_dynamic(d, t_max, rng);
    const auto path = tracker_path(st, grid);
    double e1 = 0.0, e2 = 0.0, e3 = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const auto pred = tracker_prediction(mu, nu, grid[k]);
      e1 = std::max(e1, std::abs(double(path[k].s1) / double(n) - pred.s1));
      e2 = std::max(e2, std::abs(double(path[k].s2) / double(n) - pred.s2));
      e3 = std::max(e3, std::abs(double(path[k].sdw) / double(n) - pred.sdw));
    }
    const bool within = e1 < threshold && e2 < threshold && e3 < threshold;
    return Values{{"dev_s1", e1}, {"dev_s2", e2}, {"dev_sdw", e3}, {"within", within ? 1.0 : 0.0}};
  });
  append_rows(res.rows, 0, R, ctx.seed, std::move(values));
  res.summary = {{"threshold", threshold}, {"fraction_within", column_mean(res, 0, "within")}};
  return res;
}

inline ExperimentResult entrance_boundary(const json& params, const RunContext& ctx) {
  ExperimentResult res{"entrance-boundary", {}, {}, json::object()};
  const double tau = params.at("tau").get<double>();
  const TauExponents ex = exponents(tau);
  const double delta = resolve_delta(params, ex);
  const double lambda = params.at("lambda").get<double>();
  const std::size_t R = params.at("replicas").get<std::size_t>();
  std::vector<CriticalCell> cells;
  for (std::size_t n : size_list(params.at("n")))
    cells.push_back(critical_cell(n, tau, lambda, params.at("scale").get<double>()));
  for (const auto& c : cells) {
    json p = critical_params(c);
    p["delta"] = delta;
    p["t_n"] = subcritical_time(c.nu, std::pow(double(c.n), -delta));
    p["t_c"] = critical_time(c.nu, lambda, std::pow(double(c.n), -ex.eta));
    res.cells.push_back({"n=" + std::to_string(c.n), p});
  }

  auto values = run_replicas(0, cells.size(), R, ctx.seed, ctx.workers, [&](std::size_t ci, std::size_t, Rng& rng) {
    const auto& c = cells[ci];
    const double dn = double(c.n);
    const double t_n = subcritical_time(c.nu, std::pow(dn, -delta));
    const double t_c = critical_time(c.nu, lambda, std::pow(dn, -ex.eta));
    const DynamicState st = run_dynamic(c.seq.d, t_c, rng);
    const Snapshot snap = snapshot(st, t_n);
    const auto& bs = snap.blobs;
    double s2w = 0.0, sprw = 0.0, f1 = 0.0;
    for (std::size_t b = 0; b < bs.blobs.size(); ++b) {
      const double f = double(bs.mass[b]);
      s2w += f * f / dn;
      sprw += f * double(bs.blobs[b].size()) / dn;
      f1 = std::max(f1, f);
    }
    const double nd = std::pow(dn, -delta);
    const double mu = c.mu, nu = c.nu;
    double theta3 = 0.0;
    for (long long di : c.seq.d) theta3 += std::pow(std::pow(dn, -ex.alpha) * double(di), 3.0);
    const double theta1 = std::pow(dn, -ex.alpha) * double(c.seq.d.front());
    std::vector<long long> f;
    for (long long m : bs.mass)
      if (m > 0) f.push_back(m);
    const auto mp = modified_parameters(f, c.n, ex.rho, lambda, mu, nu);
    double sig2 = 0.0, sig3 = 0.0, xmax = 0.0;
    for (double xi : mp.x) {
      sig2 += xi * xi;
      sig3 += xi * xi * xi;
      xmax = std::max(xmax, xi);
    }
    const CoupledGraphs cg = run_modified(bs, t_n, t_c, rng);
    const bool ok = coupling_holds(bs, cg);
    const double k = mu * (nu - 1.0);
    return Values{{"s2w_ratio", nd * s2w / (mu * (nu - 1.0) * (nu - 1.0) / (nu * nu))},
                  {"sprw_ratio", nd * sprw / (mu * (nu - 1.0) / (nu * nu))},
                  {"f1_ratio", std::pow(dn, -(ex.alpha + delta)) * f1 / ((nu - 1.0) / (nu * nu) * theta1)},
                  {"sigma2", sig2},
                  {"sigma3_ratio", sig3 / (sig2 * sig2 * sig2) / (theta3 / (k * k * k))},
                  {"x1_ratio", xmax / sig2 / (theta1 / k)},
                  {"q", mp.q},
                  {"modified_edges", double(cg.modified_edges.size())},
                  {"original_edges", double(cg.original_edges.size())},
                  {"coupling_ok", ok ? 1.0 : 0.0}};
  });
  append_rows(res.rows, 0, R, ctx.seed, std::move(values));

  json per_cell = json::array();
  double ok_all = 1.0;
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    const double ok = column_mean(res, ci, "coupling_ok");
    ok_all = std::min(ok_all, ok);
    per_cell.push_back({{"n", cells[ci].n},
                        {"s2w_ratio", column_mean(res, ci, "s2w_ratio")},
                        {"sprw_ratio", column_mean(res, ci, "sprw_ratio")},
                        {"f1_ratio", column_mean(res, ci, "f1_ratio")},
                        {"sigma3_ratio", column_mean(res, ci, "sigma3_ratio")},
                        {"x1_ratio", column_mean(res, ci, "x1_ratio")},
                        {"coupling_fraction", ok}});
  }
  res.summary = {{"by_n", per_cell}, {"coupling_fraction", ok_all}};
  return res;
}

inline ExperimentResult size_biased_check(const json& params, const RunContext& ctx) {
  ExperimentResult res{"size-biased-check", {}, {}, json::object()};
  const double tau = params.at("tau").get<double>();
  const TauExponents ex = exponents(tau);
  const double delta = resolve_delta(params, ex);
  const std::size_t R = params.at("replicas").get<std::size_t>();
  const double T = params.at("T").get<double>();
  std::vector<CriticalCell> cells;
  for (std::size_t n : size_list(params.at("n")))
    cells.push_back(critical_cell(n, tau, 0.0, params.at("scale").get<double>()));
  for (const auto& c : cells) res.cells.push_back({"n=" + std::to_string(c.n), critical_params(c)});

  auto values = run_replicas(0, cells.size(), R, ctx.seed, ctx.workers, [&](std::size_t ci, std::size_t, Rng& rng) {
    const auto& c = cells[ci];
    const double t_n = subcritical_time(c.nu, std::pow(double(c.n), -delta));
    const Snapshot snap = snapshot(run_dynamic(c.seq.d, t_n, rng), t_n);
    // x: open half-edges per blob, y: blob sizes, both scaled by n^{-rho};
    // blobs without open half-edges never enter the exploration
    const double scale = std::pow(double(c.n), -ex.rho);
    std::vector<double> x, y;
    for (std::size_t b = 0; b < snap.blobs.blobs.size(); ++b)
      if (snap.blobs.mass[b] > 0) {
        x.push_back(scale * double(snap.blobs.mass[b]));
        y.push_back(scale * double(snap.blobs.blobs[b].size()));
      }
    double m10 = 0.0, m20 = 0.0;
    for (double xi : x) {
      m10 += xi;
      m20 += xi * xi;
    }
    // exploration length 2T m10/m20 covers the critical window
    const std::size_t l = std::max<std::size_t>(1, std::size_t(std::ceil(2.0 * T * m10 / m20)));
    const auto chk = stats::size_biased_deviation(x, y, l, rng);
    return Values{{"sup_deviation", chk.sup_deviation},
                  {"l", double(l)},
                  {"condition_1", chk.condition_1},
                  {"condition_2", chk.condition_2},
                  {"condition_3", chk.condition_3}};
  });
  append_rows(res.rows, 0, R, ctx.seed, std::move(values));
  json trend = json::array();
  for (std::size_t ci = 0; ci < cells.size(); ++ci) trend.push_back(column_mean(res, ci, "sup_deviation"));
  res.summary = {{"sup_deviation_by_n", trend},
                 {"decreasing", trend.back().get<double>() < trend.front().get<double>()}};
  return res;
}

inline ExperimentResult universality_check(const json& params, const RunContext& ctx) {
  ExperimentResult res{"universality-check", {}, {}, json::object()};
  const auto ms = size_list(params.at("m"));
  const auto beta = double_list(params.at("beta"));
  const double gamma = params.at("gamma").get<double>();
  const std::size_t R = params.at("replicas").get<std::size_t>();
  const std::size_t cutoff = params.at("exact_cutoff").get<std::size_t>();
  const std::size_t samples = params.at("samples").get<std::size_t>();
  for (std::size_t m : ms) {
    const ProbVector p = calibrate_hub_weights(beta, m);
    res.cells.push_back({"m=" + std::to_string(m), {{"m", m}, {"sigma", p.sigma()}, {"a", gamma / p.sigma()}}});
  }
  // a blob is a single edge: two points at distance one, uniform measure
  const MeasuredMetricSpace two_path = graph_space(MultiGraph(2, {{0, 1}}));

  auto values = run_replicas(0, ms.size(), R, ctx.seed, ctx.workers, [&](std::size_t ci, std::size_t, Rng& rng) {
    const std::size_t m = ms[ci];
    const ApproxGInfinity G = approx_G_infinity(beta, gamma, m, rng);
    SuperGraphSpec spec;
    spec.blobs.assign(m, two_path);
    spec.p = G.p.p;
    spec.superstructure.assign(G.sample.graph.edges().begin(), G.sample.graph.edges().end());
    spec.junctions = sample_junctions(spec, rng);
    const BlobFunctionals bf = blob_functionals(spec.blobs, spec.p, rng);
    const MeasuredMetricSpace blob_space = assemble_supergraph(spec).rescaled(G.sigma / (bf.B + 1.0));
    const Estimate with_blobs = mean_pairwise_distance(blob_space, cutoff, samples, rng);
    const Estimate tree = mean_pairwise_distance(G.space, cutoff, samples, rng);
    return Values{{"blob_statistic", with_blobs.mean},
                  {"tree_statistic", tree.mean},
                  {"relative_difference", std::abs(with_blobs.mean - tree.mean) / tree.mean},
                  {"surplus", double(G.sample.graph.edge_count()) - double(m) + 1.0},
                  {"B", bf.B},
                  {"assumption_ratio", bf.assumption_ratio}};
  });
  append_rows(res.rows, 0, R, ctx.seed, std::move(values));

  json trend = json::array();
  for (std::size_t ci = 0; ci < ms.size(); ++ci) {
    const double b = column_mean(res, ci, "blob_statistic"), t = column_mean(res, ci, "tree_statistic");
    trend.push_back(std::abs(b - t) / t);
  }
  res.summary = {{"relative_difference_by_m", trend},
                 {"final", trend.back()},
                 {"decreasing", trend.back().get<double>() < trend.front().get<double>()}};
  return res;
}

}  // namespace detail

// ---- registry --------------------------------------------------------------------

inline const std::vector<Experiment>& registry() {
  static const std::vector<Experiment> experiments = [] {
    const json bs = {{"n", {100000}}, {"tau", 3.5}, {"delta", nullptr}, {"lambda0", 1.0}, {"scale", 1.0}};
    std::vector<Experiment> e;
    json sus = bs;
    sus["n"] = {100000, 400000};
    sus["replicas"] = 50;
    sus["distances"] = false;
    e.push_back({"susceptibility-scaling", "rescaled susceptibility of a barely subcritical configuration model",
                 sus, detail::susceptibility_scaling});
    json diam = bs;
    diam["replicas"] = 100;
    e.push_back({"diameter-bound", "largest component diameter against 6 n^delta log n", diam,
                 detail::diameter_bound});
    const json crit = {{"n", {10000, 100000, 1000000}}, {"tau", 3.5}, {"lambda", 0.0},
                       {"scale", 1.0}, {"replicas", 100}, {"pairs", 0}};
    e.push_back({"component-scaling", "largest critical component size exponent", crit, detail::component_scaling});
    json dist = crit;
    dist["pairs"] = 200;
    e.push_back({"distance-scaling", "typical distance exponent in the largest critical component", dist,
                 detail::distance_scaling});
    e.push_back({"entrance-boundary", "open half-edge masses at the subcritical time and the coupled modified process",
                 {{"n", {10000, 100000}}, {"tau", 3.5}, {"delta", nullptr}, {"lambda", 0.0}, {"scale", 1.0},
                  {"replicas", 20}},
                 detail::entrance_boundary});
    e.push_back({"universality-check", "blob super graph against the tilted p-tree graph as m grows",
                 {{"m", {500, 1000, 2000}}, {"beta", {0.5, 0.3, 0.2}}, {"gamma", 0.2}, {"replicas", 400},
                  {"exact_cutoff", 5000}, {"samples", 256}},
                 detail::universality_check});
    e.push_back({"tilted-oracle", "tilted p-tree connected-graph sampler against exact enumeration",
                 {{"m", {3, 4}}, {"a", {0.5, 1.0}}, {"samples", 100000}, {"batches", 10}, {"route", "poisson"}},
                 detail::tilted_oracle});
    e.push_back({"mc-vs-nr", "multiplicative coalescent partition against the rank-one graph law",
                 {{"x", {1.0, 2.0, 3.0}}, {"t", 0.1}, {"runs", 100000}, {"batches", 10}}, detail::mc_vs_nr});
    e.push_back({"dynamic-trackers", "open half-edge trackers of the dynamic construction against fluid limits",
                 {{"n", 100000}, {"degree", 3}, {"t_max", 1.0}, {"grid", 50}, {"replicas", 100}, {"tolerance", 5.0}},
                 detail::dynamic_trackers});
    e.push_back({"size-biased-check", "size-biased reordering of blobs by open half-edges",
                 {{"n", {10000, 100000}}, {"tau", 3.5}, {"delta", nullptr}, {"scale", 1.0}, {"replicas", 20},
                  {"T", 1.0}},
                 detail::size_biased_check});
    e.push_back({"rescaling-identity", "largest excursion law under the space-time rescaling",
                 {{"K", 100}, {"theta_exponent", 0.4}, {"lambda", 1.0}, {"eta1", 2.0}, {"eta2", 3.0}, {"draws", 10000}},
                 detail::rescaling_identity});
    e.push_back({"limit-bridge", "critical largest component against the thinned Levy excursion limit",
                 {{"n", 100000}, {"tau", 3.5}, {"lambda", 0.0}, {"scale", 1.0}, {"replicas", 400},
                  {"limit_draws", 10000}, {"K", 100}},
                 detail::limit_bridge});
    return e;
  }();
  return experiments;
}

inline std::string registered_names() {
  std::string s;
  for (const auto& e : registry()) s += (s.empty() ? "" : ", ") + e.name;
  return s;
}

inline const Experiment& find_experiment(const std::string& name) {
  for (const auto& e : registry())
    if (e.name == name) return e;
  throw domain_error("unknown experiment '" + name + "'; registered: " + registered_names());
}

/// Defaults overlaid with `overrides`; unknown keys are rejected.
inline json resolve_params(const Experiment& e, const json& overrides) {
  json params = e.defaults;
  if (overrides.is_null()) return params;
  require(overrides.is_object(), "params must be a JSON object");
  for (const auto& [k, v] : overrides.items()) {
    require(params.contains(k), "experiment '" + e.name + "' has no parameter '" + k + "'");
    params[k] = v;
  }
  return params;
}

// ---- configuration and runs ----------------------------------------------------------

struct ExperimentConfig {
  std::string experiment;
  json params = json::object();
  std::uint64_t seed = 1;
  std::size_t workers = 0;  // 0: one per hardware thread
  std::string output_dir = "out";
};

inline ExperimentConfig config_from_json(const json& j) {
  require(j.is_object() && j.contains("experiment"), "config: missing 'experiment'");
  ExperimentConfig c;
  c.experiment = j.at("experiment").get<std::string>();
  if (j.contains("params")) c.params = j.at("params");
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("workers")) c.workers = j.at("workers").get<std::size_t>();
  if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  for (const auto& [k, v] : j.items())
    require(k == "experiment" || k == "params" || k == "seed" || k == "workers" || k == "output_dir",
            "config: unknown key '" + k + "'");
  return c;
}

inline json config_to_json(const ExperimentConfig& c) {
  return {{"experiment", c.experiment}, {"params", c.params}, {"seed", c.seed}, {"workers", c.workers},
          {"output_dir", c.output_dir}};
}

struct RunRecord {
  ExperimentResult result;
  RunOutputs outputs;
  json manifest;
};

/// Runs the configured experiment in memory and builds its manifest. The
/// worker count never changes the outputs.
inline RunRecord run_experiment(const ExperimentConfig& cfg) {
  const Experiment& e = find_experiment(cfg.experiment);
  const json params = resolve_params(e, cfg.params);
  const RunContext ctx{cfg.seed, cfg.workers == 0 ? default_workers() : cfg.workers};
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult result = e.run(params, ctx);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  RunOutputs outputs = render(result, cfg.seed);

  json seeds = json::array();
  for (const auto& row : result.rows) seeds.push_back({{"cell", row.cell}, {"replica", row.replica}, {"seed", row.seed}});
  ExperimentConfig echo = cfg;
  echo.params = params;
  json manifest = {{"config", config_to_json(echo)},
                   {"code_version", kCodeVersion},
                   {"seed_derivation", "splitmix64(master, cell << 32 | replica)"},
                   {"seeds", seeds},
                   {"wall_time_seconds", wall},
                   {"digests",
                    {{"results.csv", sha256_hex(outputs.results_csv)},
                     {"aggregate.json", sha256_hex(outputs.aggregate_json)}}}};
  return {std::move(result), std::move(outputs), std::move(manifest)};
}

/// Output directory: the environment override when set, else the config value.
inline std::filesystem::path output_directory(const ExperimentConfig& cfg) {
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return cfg.output_dir;
}

inline void write_outputs(const RunRecord& rec, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "results.csv", rec.outputs.results_csv);
  write_file(dir / "aggregate.json", rec.outputs.aggregate_json);
  write_file(dir / "manifest.json", rec.manifest.dump(2) + "\n");
}

struct VerifyReport {
  bool ok = true;
  std::vector<std::string> lines;
};

/// Re-runs the configuration stored in a manifest and compares output digests.
inline VerifyReport verify_manifest(const json& manifest) {
  require(manifest.contains("config") && manifest.contains("digests"), "verify: manifest lacks config or digests");
  const RunRecord rec = run_experiment(config_from_json(manifest.at("config")));
  VerifyReport rep;
  for (const auto& [file, expected] : manifest.at("digests").items()) {
    const std::string actual = rec.manifest.at("digests").contains(file)
                                   ? rec.manifest.at("digests").at(file).get<std::string>()
                                   : std::string("missing");
    const bool match = actual == expected.get<std::string>();
    rep.ok = rep.ok && match;
    rep.lines.push_back(file + ": " + (match ? "match" : "MISMATCH expected " + expected.get<std::string>() +
                                                             " got " + actual));
  }
  return rep;
}

}  // namespace heavytail::harness
