#pragma once

// Degree and weight sequences: generation, criticality, window parameters,
// and moment diagnostics for heavy-tailed configuration models.

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "heavytail/common.hpp"

namespace heavytail {

struct TauExponents {
  double tau;
  double alpha;  // 1/(tau-1): hub degree scale n^alpha
  double rho;    // (tau-2)/(tau-1): critical component size scale
  double eta;    // (tau-3)/(tau-1): critical distance scale and window width
};

inline TauExponents exponents(double tau) {
  require(tau > 3.0 && tau < 4.0, "exponents: tau must lie in (3,4)");
  const double denom = tau - 1.0;
  return {tau, 1.0 / denom, (tau - 2.0) / denom, (tau - 3.0) / denom};
}

struct DegreeSequence {
  std::vector<long long> d;                   // non-increasing, all >= 1
  std::optional<std::vector<double>> weights;  // per-vertex weights w_i
  std::optional<double> tau;

  std::size_t n() const { return d.size(); }
  long long total() const { return std::accumulate(d.begin(), d.end(), 0LL); }
  double mean() const { return d.empty() ? 0.0 : double(total()) / double(n()); }

  /// Weights, defaulting to all-ones.
  std::vector<double> weights_or_ones() const {
    return weights ? *weights : std::vector<double>(n(), 1.0);
  }
};

/// Checks the structural invariants: even sum, sorted non-increasing, d_i >= 1.
inline void validate(const DegreeSequence& seq) {
  require(!seq.d.empty(), "degree sequence is empty");
  require(seq.total() % 2 == 0, "degree sum must be even");
  require(std::is_sorted(seq.d.rbegin(), seq.d.rend()), "degrees must be non-increasing");
  require(seq.d.back() >= 1, "degrees must be positive");
  if (seq.weights) require(seq.weights->size() == seq.n(), "weight length mismatch");
}

enum class DegreeMode { quantile, iid };

namespace detail {

inline void repair_parity(std::vector<long long>& d) {
  long long sum = std::accumulate(d.begin(), d.end(), 0LL);
  if (sum % 2 != 0) d.front() += 1;
}

}  // namespace detail

/// Quantile degrees d_i = max(1, floor(c (n/i)^alpha)), i = 1..n, parity
/// repaired at the hub.
inline DegreeSequence quantile_degrees(std::size_t n, double alpha, double scale) {
  require(n >= 2, "quantile_degrees: n must be at least 2");
  require(scale > 0.0, "quantile_degrees: scale must be positive");
  DegreeSequence seq;
  seq.d.resize(n);
  const double dn = double(n);
  for (std::size_t i = 1; i <= n; ++i) {
    const double raw = std::floor(scale * std::pow(dn / double(i), alpha));
    seq.d[i - 1] = std::max<long long>(1, static_cast<long long>(raw));
  }
  detail::repair_parity(seq.d);
  return seq;
}

/// Scale c for which the quantile sequence has mean closest to (and not below)
/// `target_mean`; found by bisection on the monotone map c -> mean.
inline double quantile_scale_for_mean(std::size_t n, double alpha, double target_mean) {
  require(target_mean >= 1.0, "target mean must be at least 1");
  auto mean_at = [&](double c) { return quantile_degrees(n, alpha, c).mean(); };
  double lo = 1e-9, hi = 1.0;
  while (mean_at(hi) < target_mean) hi *= 2.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mean_at(mid) < target_mean) lo = mid; else hi = mid;
  }
  return hi;
}

/// Power-law degrees with exponent tau. Quantile mode is deterministic; iid mode
/// draws P(D >= x) = x^{-(tau-1)}, x >= 1, and sorts. `target_mean` fixes the
/// quantile scale and is ignored in iid mode.
inline DegreeSequence generate_degrees(std::size_t n, double tau, DegreeMode mode,
                                       std::optional<double> target_mean, Rng& rng) {
  require(n >= 2, "generate_degrees: n must be at least 2");
  const TauExponents ex = exponents(tau);
  DegreeSequence seq;
  if (mode == DegreeMode::quantile) {
    const double c = target_mean ? quantile_scale_for_mean(n, ex.alpha, *target_mean) : 1.0;
    seq = quantile_degrees(n, ex.alpha, c);
  } else {
    seq.d.resize(n);
    const double inv = 1.0 / (tau - 1.0);
    for (auto& di : seq.d) {
      double u = uniform01(rng);
      while (u <= 0.0) u = uniform01(rng);
      const double x = std::pow(u, -inv);
      di = x >= 9.0e18 ? static_cast<long long>(9.0e18) : static_cast<long long>(std::floor(x));
    }
    std::sort(seq.d.begin(), seq.d.end(), std::greater<>());
    detail::repair_parity(seq.d);
  }
  seq.tau = tau;
  return seq;
}

/// nu_n = sum d_i(d_i - 1) / sum d_i.
inline double criticality_parameter(const std::vector<long long>& d) {
  require(!d.empty(), "criticality_parameter: empty sequence");
  long double num = 0.0L, den = 0.0L;
  for (long long di : d) {
    num += static_cast<long double>(di) * static_cast<long double>(di - 1);
    den += static_cast<long double>(di);
  }
  require(den > 0.0L, "criticality_parameter: degree sum must be positive");
  return static_cast<double>(num / den);
}

inline double criticality_parameter(const DegreeSequence& seq) {
  return criticality_parameter(seq.d);
}

struct PercolationProbability {
  double p;
  bool clamped;
};

/// Critical-window retention probability 1/nu + lambda * n^{-eta}, clamped to [0,1].
inline PercolationProbability percolation_probability(double nu, double lambda, double n_pow_minus_eta) {
  require(nu > 1.0, "percolation_probability: requires a supercritical base graph (nu > 1)");
  const double raw = 1.0 / nu + lambda * n_pow_minus_eta;
  const double p = std::clamp(raw, 0.0, 1.0);
  return {p, p != raw};
}

inline PercolationProbability percolation_probability(const DegreeSequence& seq, double lambda, double eta) {
  return percolation_probability(criticality_parameter(seq), lambda,
                                 std::pow(double(seq.n()), -eta));
}

struct AssumptionReport {
  std::vector<double> theta_estimates;             // n^{-alpha} d_i, i <= K
  double mu_hat = 0.0;                             // (1/n) sum d_i
  double mu2_hat = 0.0;                            // (1/n) sum d_i^2
  std::map<std::size_t, double> third_moment_tail;  // K' -> n^{-3 alpha} sum_{i > K'} d_i^3
  double nu_n = 0.0;
};

/// Finite-n view of the high-degree and moment conditions. The tail column is a
/// trend to inspect, never a verdict on membership of theta in l3 \ l2.
inline AssumptionReport assumption_diagnostics(const DegreeSequence& seq, double tau, std::size_t K) {
  const std::size_t n = seq.n();
  require(K < n, "assumption_diagnostics: K must be below n");
  const TauExponents ex = exponents(tau);
  const double scale = std::pow(double(n), -ex.alpha);
  AssumptionReport rep;
  for (std::size_t i = 0; i < K; ++i) rep.theta_estimates.push_back(scale * double(seq.d[i]));
  long double s1 = 0, s2 = 0;
  std::vector<long double> suffix(n + 1, 0.0L);
  for (std::size_t i = n; i-- > 0;) {
    const long double di = seq.d[i];
    s1 += di;
    s2 += di * di;
    suffix[i] = suffix[i + 1] + di * di * di;
  }
  rep.mu_hat = double(s1 / n);
  rep.mu2_hat = double(s2 / n);
  const long double cube_scale = std::pow(static_cast<long double>(n), -3.0L * ex.alpha);
  for (std::size_t k = 0; k <= K; ++k) rep.third_moment_tail[k] = double(cube_scale * suffix[k]);
  rep.nu_n = criticality_parameter(seq);
  return rep;
}

struct BarelySubcriticalSequence {
  DegreeSequence degrees;
  double target_nu;         // 1 - lambda0 * n^{-delta} as requested
  double achieved_nu;
  double achieved_lambda0;  // (1 - achieved_nu) * n^{delta}
};

/// Quantile degrees whose low-degree multiplicities are shifted (1 <-> 2 at the
/// tail) until nu' = 1 - lambda0 n^{-delta} is met from below. Hub degrees are
/// untouched, so the n^{-alpha} d_i limits are preserved.
inline BarelySubcriticalSequence barely_subcritical_degrees(std::size_t n, double tau, double delta,
                                                            double lambda0, double scale = 1.0) {
  const TauExponents ex = exponents(tau);
  require(delta > 0.0 && delta < ex.eta, "barely subcritical: need 0 < delta < eta");
  require(lambda0 > 0.0, "barely subcritical: lambda0 must be positive");
  DegreeSequence seq = quantile_degrees(n, ex.alpha, scale);
  auto& d = seq.d;
  const double target = 1.0 - lambda0 * std::pow(double(n), -delta);
  require(target > 0.0, "barely subcritical: target nu must be positive");
  long double num = 0, den = 0;
  for (long long di : d) { num += static_cast<long double>(di) * (di - 1); den += di; }
  auto ratio = [&] { return double(num / den); };
  if (ratio() > target) {
    // lower degrees at the tail to 1, smallest degrees first
    for (std::size_t i = n; i-- > 1 && ratio() > target;) {
      while (d[i] > 1 && ratio() > target) {
        num -= 2.0L * (d[i] - 1);
        den -= 1;
        d[i] -= 1;
      }
    }
  } else {
    for (std::size_t i = n; i-- > 1;) {
      if (d[i] != 1) continue;
      if ((num + 2) / (den + 1) > target) break;
      num += 2; den += 1; d[i] = 2;
    }
  }
  // parity: lowering any degree >= 2 by one also lowers nu' (it is below 2)
  if (static_cast<long long>(den) % 2 != 0) {
    bool fixed = false;
    for (std::size_t i = n; i-- > 1 && !fixed;) {
      if (d[i] >= 2) { num -= 2.0L * (d[i] - 1); den -= 1; d[i] -= 1; fixed = true; }
    }
    if (!fixed) { d[0] += 1; num += 2.0L * (d[0] - 1); den += 1; }
  }
  std::sort(d.begin(), d.end(), std::greater<>());
  seq.tau = tau;
  const double nu = criticality_parameter(seq);
  return {seq, target, nu, (1.0 - nu) * std::pow(double(n), delta)};
}

// ---- serialization --------------------------------------------------------

inline void write_degrees_text(std::ostream& out, const DegreeSequence& seq) {
  for (long long di : seq.d) out << di << '\n';
}

inline DegreeSequence read_degrees_text(std::istream& in) {
  DegreeSequence seq;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    long long v = 0;
    require(static_cast<bool>(ls >> v), "read_degrees_text: malformed line '" + line + "'");
    seq.d.push_back(v);
  }
  return seq;
}

inline nlohmann::json degrees_to_json(const DegreeSequence& seq) {
  nlohmann::json j;
  j["n"] = seq.n();
  j["d"] = seq.d;
  if (seq.weights) j["w"] = *seq.weights;
  if (seq.tau) j["tau"] = *seq.tau;
  return j;
}

inline DegreeSequence degrees_from_json(const nlohmann::json& j) {
  DegreeSequence seq;
  seq.d = j.at("d").get<std::vector<long long>>();
  if (j.contains("w")) seq.weights = j.at("w").get<std::vector<double>>();
  if (j.contains("tau")) seq.tau = j.at("tau").get<double>();
  if (j.contains("n"))
    require(j.at("n").get<std::size_t>() == seq.d.size(), "degrees_from_json: n does not match d");
  return seq;
}

}  // namespace heavytail
