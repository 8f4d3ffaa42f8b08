#pragma once

// Small statistics toolkit for the experiments.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <vector>

#include "heavytail/common.hpp"

namespace heavytail::stats {

struct Slope {
  double slope = 0.0;
  double stderr_ = 0.0;
  double intercept = 0.0;
};

/// Least-squares fit of y = a + b x; stderr from residual variance (0 for two points).
inline Slope ols(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "ols: need matching inputs of length >= 2");
  const double n = double(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  require(sxx > 0.0, "ols: x values are all equal");
  Slope s;
  s.slope = sxy / sxx;
  s.intercept = my - s.slope * mx;
  if (x.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - s.intercept - s.slope * x[i];
      rss += r * r;
    }
    s.stderr_ = std::sqrt(rss / (n - 2.0) / sxx);
  }
  return s;
}

/// Slope of log y against log x.
inline Slope log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    require(x[i] > 0.0 && y[i] > 0.0, "log_log_slope: values must be positive");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  require(x.size() == y.size(), "log_log_slope: length mismatch");
  return ols(lx, ly);
}

struct KsResult {
  double D = 0.0;
  double critical_5 = 0.0;
  double critical_1 = 0.0;
};

/// Two-sample Kolmogorov-Smirnov distance with asymptotic critical values.
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), "ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = double(a.size()), nb = double(b.size());
  std::size_t i = 0, j = 0;
  double D = 0.0;
  while (i < a.size() && j < b.size()) {
    // values equal up to rounding are ties: rescaled atoms land a few ulps apart
    const double v = std::min(a[i], b[j]);
    const double tie = v + 1e-12 * std::abs(v);
    while (i < a.size() && a[i] <= tie) ++i;
    while (j < b.size() && b[j] <= tie) ++j;
    D = std::max(D, std::abs(double(i) / na - double(j) / nb));
  }
  const double scale = std::sqrt((na + nb) / (na * nb));
  return {D, 1.358 * scale, 1.628 * scale};
}

/// Total variation between two distributions on the same keys (missing = 0).
template <class Key>
double tv_distance(const std::map<Key, double>& p, const std::map<Key, double>& q) {
  double s = 0.0;
  for (const auto& [k, v] : p) {
    auto it = q.find(k);
    s += std::abs(v - (it == q.end() ? 0.0 : it->second));
  }
  for (const auto& [k, v] : q)
    if (!p.count(k)) s += std::abs(v);
  return 0.5 * s;
}

/// TV between empirical counts and an exact law.
template <class Key>
double tv_empirical(const std::map<Key, long long>& counts, const std::map<Key, double>& exact) {
  long long total = 0;
  for (const auto& [k, c] : counts) total += c;
  require(total > 0, "tv_empirical: no observations");
  std::map<Key, double> freq;
  for (const auto& [k, c] : counts) freq[k] = double(c) / double(total);
  return tv_distance(freq, exact);
}

/// Sequential sampling without replacement with probability proportional to
/// the remaining weights, via an exponential race (keys E_i / x_i). Indices
/// with zero weight follow in uniformly random order.
inline std::vector<std::size_t> size_biased_permutation(const std::vector<double>& x, Rng& rng) {
  std::vector<std::pair<double, std::size_t>> keyed, zero;
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] >= 0.0, "size_biased_permutation: negative weight");
    if (x[i] > 0.0) keyed.emplace_back(exponential(rng, 1.0) / x[i], i);
    else zero.emplace_back(uniform01(rng), i);
  }
  std::sort(keyed.begin(), keyed.end());
  std::sort(zero.begin(), zero.end());
  std::vector<std::size_t> out;
  for (const auto& k : keyed) out.push_back(k.second);
  for (const auto& k : zero) out.push_back(k.second);
  return out;
}

struct ReorderingCheck {
  double sup_deviation = 0.0;  // sup_{k<=l} |(1/(l c)) sum_{i in V(k)} y_i - k/l|, c = m11/m10
  double condition_1 = 0.0;    // l m21 / (m10 m11)
  double condition_2 = 0.0;    // m12 m10 / (l m11^2)
  double condition_3 = 0.0;    // l m20 / m10^2
};

/// Partial y-sums along a size-biased reordering by x against their linear
/// prediction, with the three moment ratios that control the deviation
/// (m_rs = sum x^r y^s).
inline ReorderingCheck size_biased_deviation(const std::vector<double>& x, const std::vector<double>& y, std::size_t l,
                                             Rng& rng) {
  require(x.size() == y.size() && !x.empty(), "size_biased_deviation: need matching non-empty weights");
  require(l >= 1, "size_biased_deviation: l must be positive");
  double m10 = 0, m11 = 0, m20 = 0, m21 = 0, m12 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    m10 += x[i];
    m11 += x[i] * y[i];
    m20 += x[i] * x[i];
    m21 += x[i] * x[i] * y[i];
    m12 += x[i] * y[i] * y[i];
  }
  require(m11 > 0.0, "size_biased_deviation: c_n = m11/m10 must be positive");
  const double c = m11 / m10, dl = double(l);
  ReorderingCheck out{0.0, dl * m21 / (m10 * m11), m12 * m10 / (dl * m11 * m11), dl * m20 / (m10 * m10)};
  const auto order = size_biased_permutation(x, rng);
  double acc = 0.0;
  for (std::size_t k = 1; k <= l && k <= order.size(); ++k) {
    acc += y[order[k - 1]];
    out.sup_deviation = std::max(out.sup_deviation, std::abs(acc / (dl * c) - double(k) / dl));
  }
  return out;
}

inline double mean(const std::vector<double>& v) {
  require(!v.empty(), "mean: empty input");
  return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

inline double stderr_of_mean(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / double(v.size() - 1) / double(v.size()));
}

inline double quantile(std::vector<double> v, double q) {
  require(!v.empty(), "quantile: empty input");
  std::sort(v.begin(), v.end());
  const double pos = q * double(v.size() - 1);
  const std::size_t lo = std::size_t(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - double(lo)) * (v[hi] - v[lo]);
}

inline double median(const std::vector<double>& v) { return quantile(v, 0.5); }

struct Interval {
  double lo = 0.0, hi = 0.0;
};

/// Percentile bootstrap interval for `stat`.
inline Interval bootstrap_ci(const std::vector<double>& v, const std::function<double(const std::vector<double>&)>& stat,
                             std::size_t resamples, double level, Rng& rng) {
  require(!v.empty() && resamples >= 10, "bootstrap_ci: need data and at least 10 resamples");
  std::vector<double> boot;
  std::vector<double> draw(v.size());
  for (std::size_t b = 0; b < resamples; ++b) {
    for (auto& d : draw) d = v[uniform_index(rng, v.size())];
    boot.push_back(stat(draw));
  }
  const double alpha = (1.0 - level) / 2.0;
  return {quantile(boot, alpha), quantile(boot, 1.0 - alpha)};
}

}  // namespace heavytail::stats
