#pragma once

// Limit objects: thinned Levy processes with exact reflected excursions and
// Poisson marks, the excursion rescaling identity, limit component parameters,
// finite-m approximations of the tilted continuum tree, and truncated ICRT
// stick-breaking.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <vector>

#include <json.hpp>

#include "heavytail/common.hpp"
#include "heavytail/metric.hpp"
#include "heavytail/rank_one.hpp"

namespace heavytail {

inline constexpr double kForever = std::numeric_limits<double>::infinity();

struct ThetaSeq {
  std::vector<double> theta;  // non-increasing, positive

  ThetaSeq() = default;
  explicit ThetaSeq(std::vector<double> t) : theta(std::move(t)) {
    for (double v : theta) require(v > 0.0, "ThetaSeq: entries must be positive");
    require(std::is_sorted(theta.rbegin(), theta.rend()), "ThetaSeq: entries must be non-increasing");
  }
  std::size_t K() const { return theta.size(); }
  double sum_squares() const {
    double s = 0.0;
    for (double v : theta) s += v * v;
    return s;
  }
  ThetaSeq scaled(double c) const {
    std::vector<double> t(theta);
    for (auto& v : t) v *= c;
    return ThetaSeq(std::move(t));
  }
};

struct Jump {
  double time;
  double size;
  std::size_t index;
};

/// S(t) = sum_i theta_i 1{zeta_i <= t} + (lambda - sum theta_i^2) t on [0, T].
struct LevyPath {
  std::vector<Jump> jumps;  // sorted by time, only those <= T
  double drift = 0.0;
  double T = 0.0;

  double value(double t) const {
    double v = drift * t;
    for (const auto& j : jumps) {
      if (j.time > t) break;
      v += j.size;
    }
    return v;
  }
};

/// Jump times zeta_i ~ Exp(theta_i). T may be infinite when the drift is
/// negative, in which case the path is followed until every jump has occurred.
inline LevyPath simulate_thinned_levy(const ThetaSeq& theta, double lambda, double T, Rng& rng) {
  require(T > 0.0, "simulate_thinned_levy: T must be positive");
  LevyPath path;
  path.drift = lambda - theta.sum_squares();
  require(std::isfinite(T) || path.drift < 0.0, "simulate_thinned_levy: infinite horizon needs negative drift");
  path.T = T;
  for (std::size_t i = 0; i < theta.K(); ++i) {
    const double z = exponential(rng, theta.theta[i]);
    if (z <= T) path.jumps.push_back({z, theta.theta[i], i});
  }
  std::sort(path.jumps.begin(), path.jumps.end(), [](const Jump& a, const Jump& b) { return a.time < b.time; });
  return path;
}

struct Excursion {
  double start = 0.0;
  double length = 0.0;
  double area = 0.0;
  std::vector<std::size_t> jumps;  // indices of the theta entries jumping inside
  long long marks = 0;
  bool censored = false;            // still open at the horizon
};

struct ExcursionSet {
  std::vector<Excursion> excursions;  // decreasing length
};

/// Excursions of S - inf S above zero, computed exactly on the piecewise-linear
/// path, with Poisson(area) marks per excursion.
inline ExcursionSet excursions_and_marks(const LevyPath& path, Rng& rng) {
  ExcursionSet out;
  const double c = path.drift;
  double t = 0.0, r = 0.0;
  std::optional<Excursion> cur;
  auto close = [&](double end) {
    cur->length = end - cur->start;
    out.excursions.push_back(std::move(*cur));
    cur.reset();
  };
  auto advance = [&](double until) {
    double dt = until - t;
    if (dt <= 0.0) return;
    if (c < 0.0) {
      if (r > 0.0) {
        const double to_zero = r / -c;
        if (to_zero <= dt) {
          cur->area += r * r / (2.0 * -c);
          close(t + to_zero);
          r = 0.0;
        } else {
          cur->area += r * dt + 0.5 * c * dt * dt;
          r += c * dt;
        }
      }
    } else if (r > 0.0 || c > 0.0) {
      if (!cur) cur = Excursion{t, 0, 0, {}, 0, false};
      cur->area += r * dt + 0.5 * c * dt * dt;
      r += c * dt;
    }
    t = until;
  };
  for (const auto& j : path.jumps) {
    advance(j.time);
    if (!cur) cur = Excursion{j.time, 0, 0, {}, 0, false};
    cur->jumps.push_back(j.index);
    r += j.size;
  }
  if (std::isfinite(path.T)) {
    advance(path.T);
    if (cur) {
      cur->censored = true;
      close(path.T);
    }
  } else if (cur) {
    // negative drift: the last excursion closes after r / |c| more time
    cur->area += r * r / (2.0 * -c);
    close(t + r / -c);
  }
  for (auto& e : out.excursions) e.marks = poisson(rng, e.area);
  std::stable_sort(out.excursions.begin(), out.excursions.end(),
                   [](const Excursion& a, const Excursion& b) { return a.length > b.length; });
  return out;
}

inline double largest_excursion(const ThetaSeq& theta, double lambda, double T, Rng& rng) {
  const auto ex = excursions_and_marks(simulate_thinned_levy(theta, lambda, T, rng), rng);
  return ex.excursions.empty() ? 0.0 : ex.excursions.front().length;
}

struct RescaledSamples {
  std::vector<double> direct;    // largest length of xi(eta1 theta, eta2 lambda)
  std::vector<double> rescaled;  // (1/eta1) largest length of xi(theta, eta2 lambda / eta1^2)
};

inline RescaledSamples rescaled_excursion_law(const ThetaSeq& theta, double lambda, double eta1, double eta2,
                                              std::size_t samples, Rng& rng, double T = kForever) {
  require(eta1 > 0.0 && eta2 > 0.0, "rescaled_excursion_law: eta1, eta2 must be positive");
  RescaledSamples out;
  const ThetaSeq scaled = theta.scaled(eta1);
  for (std::size_t k = 0; k < samples; ++k) {
    out.direct.push_back(largest_excursion(scaled, eta2 * lambda, T, rng));
    // an infinite horizon maps to itself under the time change
    out.rescaled.push_back(largest_excursion(theta, eta2 * lambda / (eta1 * eta1), T * eta1, rng) / eta1);
  }
  return out;
}

// ---- limit component parameters ----------------------------------------------------

struct LimitComponent {
  double xi_star = 0.0;
  std::vector<double> theta_sub;  // theta_j / (sum_{v in Xi} theta_v^2)^{1/2}, decreasing
  double gamma = 0.0;
  double space_scale = 0.0;       // nu/(nu-1) * xi* / (sum theta_v^2)^{1/2}
  long long marks = 0;
  bool degenerate = false;        // no jump inside the excursion
};

/// xi* = xi(theta/(mu(nu-1)), nu^2 lambda/(mu(nu-1)^2)); per excursion the
/// hub set Xi gives gamma = xi*/(mu(nu-1)) (sum theta_v^2)^{1/2} and the
/// square-root normalized sub-sequence, so that it has unit l2 norm.
inline std::vector<LimitComponent> limit_component_parameters(const ThetaSeq& theta, double lambda, double mu,
                                                              double nu, Rng& rng, double T = kForever) {
  require(nu > 1.0 && mu > 0.0, "limit_component_parameters: need mu > 0 and nu > 1");
  const double k = mu * (nu - 1.0);
  const auto ex = excursions_and_marks(
      simulate_thinned_levy(theta.scaled(1.0 / k), nu * nu * lambda / (mu * (nu - 1.0) * (nu - 1.0)), T, rng), rng);
  std::vector<LimitComponent> out;
  for (const auto& e : ex.excursions) {
    LimitComponent c;
    c.xi_star = e.length;
    c.marks = e.marks;
    double s2 = 0.0;
    for (std::size_t j : e.jumps) s2 += theta.theta[j] * theta.theta[j];
    if (s2 <= 0.0) {
      c.degenerate = true;
    } else {
      const double root = std::sqrt(s2);
      for (std::size_t j : e.jumps) c.theta_sub.push_back(theta.theta[j] / root);
      std::sort(c.theta_sub.rbegin(), c.theta_sub.rend());
      c.gamma = e.length / k * root;
      c.space_scale = nu / (nu - 1.0) * e.length / root;
    }
    out.push_back(std::move(c));
  }
  return out;
}

// ---- finite-m tilted continuum tree ------------------------------------------------

struct ApproxGInfinity {
  ProbVector p;
  double a = 0.0;
  double sigma = 0.0;
  ConnectedSample sample;
  MeasuredMetricSpace space;  // sigma * graph distance, measure p
};

/// Hub entries p_i = sigma beta_i and m-K equal fillers f with sum p = 1 and
/// sum p^2 = sigma^2 solved in closed form: f = sigma ((1-B2)/(m-K))^{1/2},
/// sigma = 1/(sum beta + ((1-B2)(m-K))^{1/2}).
inline ProbVector calibrate_hub_weights(const std::vector<double>& beta, std::size_t m) {
  const std::size_t K = beta.size();
  require(K >= 1 && m > K, "calibrate: m must exceed the truncation level");
  double B1 = 0.0, B2 = 0.0;
  for (double b : beta) {
    require(b > 0.0, "calibrate: beta entries must be positive");
    B1 += b;
    B2 += b * b;
  }
  require(B2 < 1.0, "calibrate: sum beta^2 must be below one to leave filler mass");
  const double fill = std::sqrt((1.0 - B2) * double(m - K));
  const double sigma = 1.0 / (B1 + fill);
  const double f = sigma * std::sqrt((1.0 - B2) / double(m - K));
  require(f <= sigma * beta.back(),
          "calibrate: infeasible, filler " + std::to_string(f) + " exceeds the smallest hub " +
              std::to_string(sigma * beta.back()) + "; increase m");
  std::vector<double> p;
  for (double b : beta) p.push_back(sigma * b);
  p.insert(p.end(), m - K, f);
  ProbVector pv = ProbVector::normalized(p);
  require(std::abs(pv.sigma() - sigma) < 1e-10, "calibrate: sigma consistency check failed");
  return pv;
}

inline ApproxGInfinity approx_G_infinity(const std::vector<double>& beta, double gamma, std::size_t m, Rng& rng,
                                         double acceptance_floor = 1e-4) {
  require(gamma >= 0.0, "approx_G_infinity: gamma must be non-negative");
  ProbVector p = calibrate_hub_weights(beta, m);
  const double sigma = p.sigma();
  const double a = gamma / sigma;
  TiltedSampler sampler(p, a, SurplusRoute::poisson, acceptance_floor);
  ConnectedSample cs = sampler.sample(rng);
  MeasuredMetricSpace space = graph_space(cs.graph, p.p).rescaled(sigma);
  return {std::move(p), a, sigma, std::move(cs), std::move(space)};
}

// ---- ICRT stick-breaking ---------------------------------------------------------

struct IcrtBranch {
  double start = 0.0;  // line coordinate of the branch's near end
  double end = 0.0;
  int parent = -1;     // branch holding the attachment point
  double attach = 0.0; // line coordinate of the attachment point
  int hub = -1;        // hub whose cutpoint opened the branch (-1 for the first)
};

/// Approximate: with finitely many hubs the hub set is not dense.
struct IcrtSkeleton {
  std::vector<IcrtBranch> branches;
  std::vector<double> joinpoints;  // per hub; infinite when the hub never appears
  std::vector<int> hub_degree;     // branches attached at each hub
  bool no_cutpoint = false;
  double length() const { return branches.empty() ? 0.0 : branches.back().end; }

  std::size_t branch_of(double x) const {
    auto it = std::upper_bound(branches.begin(), branches.end(), x,
                               [](double v, const IcrtBranch& b) { return v < b.end; });
    if (it == branches.end()) --it;
    return std::size_t(it - branches.begin());
  }

  double depth(double x) const {
    std::size_t b = branch_of(x);
    double d = x - branches[b].start;
    while (branches[b].parent >= 0) {
      const double at = branches[b].attach;
      b = std::size_t(branches[b].parent);
      d += at - branches[b].start;
    }
    return d;
  }

  /// Tree distance between two line coordinates.
  double distance(double x, double y) const {
    auto chain = [&](double z) {
      std::vector<std::pair<std::size_t, double>> c;  // (branch, entry coordinate)
      std::size_t b = branch_of(z);
      c.emplace_back(b, z);
      while (branches[b].parent >= 0) {
        const double at = branches[b].attach;
        b = std::size_t(branches[b].parent);
        c.emplace_back(b, at);
      }
      return c;
    };
    const auto cx = chain(x), cy = chain(y);
    for (const auto& [bx, px] : cx)
      for (const auto& [by, py] : cy)
        if (bx == by) {
          const double meet = std::min(px, py);
          return depth(x) + depth(y) - 2.0 * depth(meet);
        }
    return depth(x) + depth(y);
  }
};

inline IcrtSkeleton sample_icrt(const std::vector<double>& beta, double T_cut, Rng& rng) {
  require(T_cut > 0.0, "sample_icrt: T_cut must be positive");
  IcrtSkeleton sk;
  sk.joinpoints.assign(beta.size(), kForever);
  sk.hub_degree.assign(beta.size(), 0);
  std::vector<std::pair<double, int>> cuts;
  for (std::size_t i = 0; i < beta.size(); ++i) {
    require(beta[i] > 0.0, "sample_icrt: beta entries must be positive");
    double t = exponential(rng, beta[i]);
    if (t > T_cut) continue;
    sk.joinpoints[i] = t;
    for (t += exponential(rng, beta[i]); t <= T_cut; t += exponential(rng, beta[i])) cuts.emplace_back(t, int(i));
  }
  std::sort(cuts.begin(), cuts.end());
  if (cuts.empty()) {
    sk.no_cutpoint = true;
    sk.branches.push_back({0.0, T_cut, -1, 0.0, -1});
    return sk;
  }
  sk.branches.push_back({0.0, cuts.front().first, -1, 0.0, -1});
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const int hub = cuts[k].second;
    const double at = sk.joinpoints[std::size_t(hub)];
    const int parent = int(sk.branch_of(at));
    sk.branches.push_back({cuts[k].first, cuts[k + 1].first, parent, at, hub});
    ++sk.hub_degree[std::size_t(hub)];
  }
  return sk;
}

// ---- serialization ---------------------------------------------------------------

inline void write_excursions_csv(std::ostream& out, const ExcursionSet& ex) {
  out << "length,area,marks\n";
  out.precision(17);
  for (const auto& e : ex.excursions) out << e.length << ',' << e.area << ',' << e.marks << '\n';
}

inline nlohmann::json icrt_to_json(const IcrtSkeleton& sk) {
  nlohmann::json j;
  auto& arr = j["branches"] = nlohmann::json::array();
  for (const auto& b : sk.branches)
    arr.push_back({{"parent", b.parent}, {"branch_length", b.end - b.start}, {"hub", b.hub},
                   {"start", b.start}, {"attach", b.attach}});
  j["approximate"] = true;
  j["no_cutpoint"] = sk.no_cutpoint;
  j["hub_degree"] = sk.hub_degree;
  return j;
}

}  // namespace heavytail
