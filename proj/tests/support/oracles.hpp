#pragma once

// Brute-force reference laws for small cases. Deliberately written without
// the library's own enumeration helpers so that tests compare two independent
// computations.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

using EdgeSet = std::set<std::pair<int, int>>;

inline EdgeSet normalize(std::vector<std::pair<int, int>> edges) {
  EdgeSet out;
  for (auto [u, v] : edges) out.insert({std::min(u, v), std::max(u, v)});
  return out;
}

/// Every rooted labeled tree on {0..m-1} as a parent array (-1 at the root),
/// found by filtering all parent functions for acyclicity.
inline std::vector<std::vector<int>> rooted_trees(int m) {
  std::vector<std::vector<int>> out;
  for (int root = 0; root < m; ++root) {
    std::vector<int> parent(m, 0);
    std::function<void(int)> rec = [&](int v) {
      if (v == m) {
        for (int s = 0; s < m; ++s) {
          int x = s, steps = 0;
          while (x != root && steps <= m) x = parent[x], ++steps;
          if (x != root) return;
        }
        out.push_back(parent);
        return;
      }
      if (v == root) {
        parent[v] = -1;
        rec(v + 1);
        return;
      }
      for (int p = 0; p < m; ++p) {
        if (p == v) continue;
        parent[v] = p;
        rec(v + 1);
      }
    };
    rec(0);
  }
  return out;
}

/// prod_v p_v^{children(v)}.
inline double ptree_probability(const std::vector<int>& parent, const std::vector<double>& p) {
  double w = 1.0;
  for (int par : parent)
    if (par >= 0) w *= p[par];
  return w;
}

/// Law of the connected graph on {0..m-1}: independent edges with probability
/// 1 - exp(-a p_i p_j), conditioned on connectivity. Keys are edge sets.
inline std::map<EdgeSet, double> connected_rank_one_law(const std::vector<double>& p, double a) {
  const int m = int(p.size());
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) pairs.push_back({i, j});
  std::map<EdgeSet, double> law;
  double total = 0.0;
  for (unsigned long mask = 0; mask < (1ul << pairs.size()); ++mask) {
    double w = 1.0;
    std::vector<std::vector<int>> adj(m);
    EdgeSet es;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const auto [i, j] = pairs[k];
      const double q = 1.0 - std::exp(-a * p[i] * p[j]);
      if (mask >> k & 1ul) {
        w *= q;
        adj[i].push_back(j);
        adj[j].push_back(i);
        es.insert(pairs[k]);
      } else {
        w *= 1.0 - q;
      }
    }
    std::vector<int> seen(m, 0), stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v : adj[u])
        if (!seen[v]) seen[v] = 1, ++count, stack.push_back(v);
    }
    if (count == m) {
      law[es] = w;
      total += w;
    }
  }
  for (auto& kv : law) kv.second /= total;
  return law;
}

/// Probability that the independent graph on `set` with q_ij = 1-exp(-t x_i x_j)
/// is connected, by the recursion on the component of the smallest element.
inline double connection_probability(const std::vector<int>& set, const std::vector<double>& x, double t) {
  const int k = int(set.size());
  if (k <= 1) return 1.0;
  // subsets containing set[0], encoded over the remaining k-1 elements
  double disconnected = 0.0;
  for (unsigned long sub = 0; sub + 1 < (1ul << (k - 1)); ++sub) {
    std::vector<int> in{set[0]}, out;
    for (int b = 0; b < k - 1; ++b) ((sub >> b & 1ul) ? in : out).push_back(set[b + 1]);
    double cut = 1.0;
    for (int i : in)
      for (int j : out) cut *= std::exp(-t * x[i] * x[j]);
    disconnected += connection_probability(in, x, t) * cut;
  }
  return 1.0 - disconnected;
}

/// Law of the component partition of that graph on all of {0..m-1}, keyed by
/// canonical labels (blocks numbered by first appearance).
inline std::map<std::vector<int>, double> partition_law(const std::vector<double>& x, double t) {
  const int m = int(x.size());
  std::map<std::vector<int>, double> law;
  std::vector<int> label(m, 0);
  std::function<void(int, int)> rec = [&](int v, int blocks) {
    if (v == m) {
      std::vector<std::vector<int>> parts(blocks);
      for (int i = 0; i < m; ++i) parts[label[i]].push_back(i);
      double w = 1.0;
      for (const auto& b : parts) w *= connection_probability(b, x, t);
      for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j)
          if (label[i] != label[j]) w *= std::exp(-t * x[i] * x[j]);
      law[label] = w;
      return;
    }
    for (int b = 0; b <= blocks; ++b) {
      label[v] = b;
      rec(v + 1, std::max(blocks, b + 1));
    }
  };
  rec(0, 0);
  return law;
}

/// Multigraph law of the configuration model: every perfect matching of the
/// half-edges is equally likely. Keys are sorted (u,v) lists with u <= v.
using MultiEdges = std::vector<std::pair<int, int>>;

inline std::map<MultiEdges, double> configuration_law(const std::vector<long long>& d) {
  std::vector<int> owner;
  for (int v = 0; v < int(d.size()); ++v)
    for (long long k = 0; k < d[v]; ++k) owner.push_back(v);
  std::map<MultiEdges, double> counts;
  double total = 0.0;
  std::vector<char> used(owner.size(), 0);
  MultiEdges cur;
  std::function<void()> rec = [&] {
    std::size_t first = 0;
    while (first < owner.size() && used[first]) ++first;
    if (first == owner.size()) {
      MultiEdges key = cur;
      std::sort(key.begin(), key.end());
      counts[key] += 1.0;
      total += 1.0;
      return;
    }
    used[first] = 1;
    for (std::size_t j = first + 1; j < owner.size(); ++j) {
      if (used[j]) continue;
      used[j] = 1;
      cur.push_back({std::min(owner[first], owner[j]), std::max(owner[first], owner[j])});
      rec();
      cur.pop_back();
      used[j] = 0;
    }
    used[first] = 0;
  };
  rec();
  for (auto& kv : counts) kv.second /= total;
  return counts;
}

/// Piecewise-linear path with drift c and upward jumps; reflected value at t.
struct JumpPath {
  double drift;
  std::vector<std::pair<double, double>> jumps;  // (time, size), sorted

  double value(double t) const {
    double v = drift * t;
    for (auto [s, h] : jumps)
      if (s <= t) v += h;
    return v;
  }
  /// S(t) - inf_{u <= t} S(u); with negative drift the infimum is attained at
  /// zero, at t, or just before a jump.
  double reflected(double t) const {
    double inf = std::min(0.0, value(t));
    double acc = 0.0;
    for (auto [s, h] : jumps) {
      if (s > t) break;
      inf = std::min(inf, drift * s + acc);
      acc += h;
    }
    return value(t) - inf;
  }
};

/// Total mark count on [0, T] by thinning a rate-`bound` Poisson process in
/// the plane: a point (t, y) counts when y < reflected(t).
template <class Rng>
long long thinned_marks(const JumpPath& path, double T, double bound, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::poisson_distribution<long long> count(bound * T);
  const long long N = count(rng);
  long long marks = 0;
  for (long long k = 0; k < N; ++k) {
    const double t = unif(rng) * T, y = unif(rng) * bound;
    if (y < path.reflected(t)) ++marks;
  }
  return marks;
}

}  // namespace oracle
