#pragma once

// Rank-one random graphs and p-trees: birthday and Pruefer samplers, depth-first
// annotation, tilted p-trees with surplus edges (the connected-component law),
// exact small-instance oracles, and the two-stage rank-one construction.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <utility>
#include <vector>

#include <json.hpp>

#include "heavytail/common.hpp"
#include "heavytail/graph.hpp"

namespace heavytail {

struct ProbVector {
  std::vector<double> p;

  ProbVector() = default;
  explicit ProbVector(std::vector<double> values) : p(std::move(values)) {
    require(!p.empty(), "ProbVector: empty");
    double s = 0.0;
    for (double v : p) {
      require(v > 0.0, "ProbVector: entries must be positive");
      s += v;
    }
    require(std::abs(s - 1.0) < 1e-12, "ProbVector: entries must sum to one");
  }

  /// Normalizes arbitrary positive masses.
  static ProbVector normalized(const std::vector<double>& x) {
    require(!x.empty(), "ProbVector: empty");
    const double s = std::accumulate(x.begin(), x.end(), 0.0);
    require(s > 0.0, "ProbVector: total mass must be positive");
    std::vector<double> p(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) p[i] = x[i] / s;
    // absorb rounding so the sum is one to the last bit we can manage
    const double drift = std::accumulate(p.begin(), p.end(), 0.0) - 1.0;
    p[std::max_element(p.begin(), p.end()) - p.begin()] -= drift;
    return ProbVector(std::move(p));
  }

  static ProbVector uniform(std::size_t m) { return normalized(std::vector<double>(m, 1.0)); }

  std::size_t size() const { return p.size(); }
  double operator[](std::size_t i) const { return p[i]; }
  double sigma() const {
    double s = 0.0;
    for (double v : p) s += v * v;
    return std::sqrt(s);
  }
};

/// Rooted tree on labels 0..m-1 with ordered child lists (left to right).
struct OrderedTree {
  std::vector<int> parent;               // -1 at the root
  std::vector<std::vector<int>> children;
  int root = 0;

  std::size_t size() const { return parent.size(); }

  static OrderedTree from_parents(const std::vector<int>& parent) {
    OrderedTree t;
    t.parent = parent;
    t.children.assign(parent.size(), {});
    int roots = 0;
    for (std::size_t v = 0; v < parent.size(); ++v) {
      if (parent[v] < 0) {
        t.root = int(v);
        ++roots;
      } else {
        require(std::size_t(parent[v]) < parent.size(), "OrderedTree: parent out of range");
        t.children[std::size_t(parent[v])].push_back(int(v));
      }
    }
    require(roots == 1, "OrderedTree: exactly one root required");
    return t;
  }

  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (std::size_t v = 0; v < parent.size(); ++v)
      if (parent[v] >= 0) out.emplace_back(Vertex(parent[v]), Vertex(v));
    return out;
  }
};

/// Checks that parent/children agree and every vertex reaches the root.
inline void validate(const OrderedTree& t) {
  const std::size_t m = t.size();
  require(m >= 1 && t.children.size() == m, "OrderedTree: size mismatch");
  require(t.root >= 0 && std::size_t(t.root) < m && t.parent[std::size_t(t.root)] < 0, "OrderedTree: bad root");
  std::vector<char> seen(m, 0);
  std::vector<int> stack{t.root};
  std::size_t count = 0;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    require(!seen[std::size_t(v)], "OrderedTree: cycle");
    seen[std::size_t(v)] = 1;
    ++count;
    for (int c : t.children[std::size_t(v)]) {
      require(t.parent[std::size_t(c)] == v, "OrderedTree: child/parent mismatch");
      stack.push_back(c);
    }
  }
  require(count == m, "OrderedTree: not spanning");
}

inline void shuffle_child_orders(OrderedTree& t, Rng& rng) {
  for (auto& c : t.children) std::shuffle(c.begin(), c.end(), rng);
}

// ---- p-tree samplers -----------------------------------------------------------

/// Birthday construction: i.i.d. labels Y_0, Y_1, ... from `draw`; each first
/// visit of Y_j adds the edge Y_{j-1} -> Y_j. The root is Y_0. Children are
/// listed by label; the tree is unordered.
template <class Draw>
OrderedTree sample_ptree_from(std::size_t m, Draw&& draw) {
  require(m >= 1, "sample_ptree: empty label set");
  std::vector<int> parent(m, -2);
  int prev = draw();
  require(prev >= 0 && std::size_t(prev) < m, "sample_ptree: draw out of range");
  parent[std::size_t(prev)] = -1;
  std::size_t seen = 1;
  while (seen < m) {
    const int y = draw();
    require(y >= 0 && std::size_t(y) < m, "sample_ptree: draw out of range");
    if (parent[std::size_t(y)] == -2) {
      parent[std::size_t(y)] = prev;
      ++seen;
    }
    prev = y;
  }
  return OrderedTree::from_parents(parent);
}

inline OrderedTree sample_ptree(const ProbVector& p, Rng& rng) {
  std::discrete_distribution<int> dist(p.p.begin(), p.p.end());
  return sample_ptree_from(p.size(), [&] { return dist(rng); });
}

/// p-tree via a Pruefer code of length m-1 with i.i.d. entries from p over
/// labels 0..m-1, decoded on m+1 vertices where the extra vertex m is the leaf
/// hanging below the root. Label v appears once per child, so the code law is
/// prod p_v^{d_v}: the p-tree law exactly. Child lists are then shuffled, giving
/// the ordered p-tree law.
inline OrderedTree sample_ptree_pruefer(const ProbVector& p, Rng& rng) {
  const std::size_t m = p.size();
  std::vector<int> parent(m, -1);
  if (m > 1) {
    std::discrete_distribution<int> dist(p.p.begin(), p.p.end());
    std::vector<int> code(m - 1);
    std::vector<std::size_t> degree(m + 1, 1);
    for (auto& c : code) {
      c = dist(rng);
      ++degree[std::size_t(c)];
    }
    std::size_t ptr = 0;
    while (degree[ptr] != 1) ++ptr;
    std::size_t leaf = ptr;
    for (int c : code) {
      parent[leaf] = c;  // rooted at the extra vertex m, leaves hang from their code entry
      const std::size_t v = std::size_t(c);
      if (--degree[v] == 1 && v < ptr) {
        leaf = v;
      } else {
        ++ptr;
        while (degree[ptr] != 1) ++ptr;
        leaf = ptr;
      }
    }
    parent[leaf] = -1;  // last edge joins the root to the extra vertex
  }
  OrderedTree t = OrderedTree::from_parents(parent);
  shuffle_child_orders(t, rng);
  return t;
}

/// prod p_v^{d_v} with d_v the child count; the ordered law divides by prod d_v!.
inline double ptree_weight(const OrderedTree& t, const ProbVector& p, bool ordered) {
  require(t.size() == p.size(), "ptree_weight: label set mismatch");
  double w = 1.0;
  for (std::size_t v = 0; v < t.size(); ++v) {
    const std::size_t d = t.children[v].size();
    w *= std::pow(p[v], double(d));
    if (ordered) w /= std::tgamma(double(d) + 1.0);
  }
  return w;
}

// ---- annotation -------------------------------------------------------------

/// Depth-first annotation of an ordered tree. A(v) is the p-mass of the
/// permitted endpoints for v: children of strict ancestors of v lying to the
/// right of the root-to-v path (equivalently, right siblings of v and of each
/// ancestor below the root).
struct AnnotatedPTree {
  OrderedTree tree;
  std::vector<int> dfs_order;       // v(1..m)
  std::vector<std::size_t> dfs_index;
  std::vector<double> A;
  std::vector<double> prefix;       // y*(i): cumulative p along dfs order, size m+1
  double a = 0.0;
  double Lambda = 0.0;
  double log_L = 0.0;

  double L_value() const { return std::exp(log_L); }

  /// Permitted endpoints of v in increasing dfs order: right siblings of v,
  /// then of its parent, and so on up to the children of the root.
  std::vector<int> permitted(int v) const {
    std::vector<int> out;
    for (int w = v; tree.parent[std::size_t(w)] >= 0; w = tree.parent[std::size_t(w)]) {
      const auto& sib = tree.children[std::size_t(tree.parent[std::size_t(w)])];
      auto it = std::find(sib.begin(), sib.end(), w);
      out.insert(out.end(), it + 1, sib.end());
    }
    return out;
  }
};

namespace detail {

/// log((e^x - 1)/x), continuous at x = 0.
inline double log_expm1_ratio(double x) {
  if (x < 1e-8) return 0.5 * x;
  return std::log(std::expm1(x) / x);
}

}  // namespace detail

inline AnnotatedPTree annotate(const OrderedTree& tree, const ProbVector& p, double a) {
  require(tree.size() == p.size(), "annotate: label set mismatch");
  require(a >= 0.0, "annotate: a must be non-negative");
  const std::size_t m = tree.size();
  AnnotatedPTree out;
  out.tree = tree;
  out.a = a;
  out.A.assign(m, 0.0);
  out.dfs_index.assign(m, 0);
  out.dfs_order.reserve(m);
  std::vector<int> stack{tree.root};
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    out.dfs_index[std::size_t(u)] = out.dfs_order.size();
    out.dfs_order.push_back(u);
    const auto& ch = tree.children[std::size_t(u)];
    double right = 0.0;
    for (std::size_t k = ch.size(); k-- > 0;) {
      out.A[std::size_t(ch[k])] = out.A[std::size_t(u)] + right;
      right += p[std::size_t(ch[k])];
      stack.push_back(ch[k]);
    }
  }
  require(out.dfs_order.size() == m, "annotate: tree does not span its labels");
  out.prefix.assign(m + 1, 0.0);
  double sum_pA = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t v = std::size_t(out.dfs_order[i]);
    out.prefix[i + 1] = out.prefix[i] + p[v];
    sum_pA += p[v] * out.A[v];
  }
  out.Lambda = a * sum_pA;
  double log_edges = 0.0;
  for (std::size_t v = 0; v < m; ++v)
    if (tree.parent[v] >= 0) log_edges += detail::log_expm1_ratio(a * p[v] * p[std::size_t(tree.parent[v])]);
  out.log_L = log_edges + out.Lambda;
  return out;
}

// ---- tilted trees and connected graphs ------------------------------------------

enum class SurplusRoute { poisson, geometric };

struct SurplusPair {
  int L;  // first endpoint
  int R;  // ancestor of L whose right child receives the edge
  int u;  // actual second endpoint: a permitted endpoint of L, child of R
};

struct ConnectedSample {
  AnnotatedPTree tree;
  std::vector<SurplusPair> surplus_pairs;  // as drawn, before deduplication
  std::size_t duplicates_removed = 0;
  MultiGraph graph;                        // tree edges plus distinct surplus edges
};

/// Thrown when the rejection sampler's acceptance rate falls below its floor.
class acceptance_failure : public std::runtime_error {
 public:
  acceptance_failure(double rate, double floor)
      : std::runtime_error("tilted p-tree rejection: acceptance rate " + std::to_string(rate) +
                           " below floor " + std::to_string(floor) +
                           "; reduce a or use a tighter proposal"),
        rate_(rate) {}
  double rate() const { return rate_; }

 private:
  double rate_;
};

namespace detail {

inline std::vector<SurplusPair> surplus_poisson(const AnnotatedPTree& t, const ProbVector& p, Rng& rng) {
  std::vector<SurplusPair> out;
  const long long N = poisson(rng, t.Lambda);
  if (N == 0) return out;
  const std::size_t m = t.tree.size();
  std::vector<double> w(m);
  for (std::size_t v = 0; v < m; ++v) w[v] = p[v] * t.A[v];
  std::discrete_distribution<int> first(w.begin(), w.end());
  for (long long j = 0; j < N; ++j) {
    const int v = first(rng);
    // ancestor y with probability (mass of its children right of the path)/A(v)
    double r = uniform01(rng) * t.A[std::size_t(v)];
    int chosen_y = -1, chosen_u = -1;
    int last_y = -1, last_u = -1;
    for (int w_ = v; t.tree.parent[std::size_t(w_)] >= 0 && chosen_u < 0; w_ = t.tree.parent[std::size_t(w_)]) {
      const int y = t.tree.parent[std::size_t(w_)];
      const auto& sib = t.tree.children[std::size_t(y)];
      auto it = std::find(sib.begin(), sib.end(), w_) + 1;
      double block = 0.0;
      for (auto k = it; k != sib.end(); ++k) block += p[std::size_t(*k)];
      if (block <= 0.0) continue;
      last_y = y;
      last_u = sib.back();
      if (r < block) {
        // second stage: a right child of y, proportional to p
        double s = uniform01(rng) * block;
        chosen_y = y;
        for (auto k = it; k != sib.end(); ++k) {
          s -= p[std::size_t(*k)];
          chosen_u = *k;
          if (s < 0.0) break;
        }
      } else {
        r -= block;
      }
    }
    if (chosen_u < 0) {  // rounding at the top of the path
      chosen_y = last_y;
      chosen_u = last_u;
    }
    out.push_back({v, chosen_y, chosen_u});
  }
  return out;
}

inline std::vector<SurplusPair> surplus_geometric(const AnnotatedPTree& t, const ProbVector& p, Rng& rng) {
  std::vector<SurplusPair> out;
  const double height = t.a * *std::max_element(t.A.begin(), t.A.end());
  if (height <= 0.0) return out;
  // rate-one Poisson points on [0,1] x [0,height], kept below the step function a A
  const long long N = poisson(rng, height);
  std::vector<std::pair<double, double>> pts(static_cast<std::size_t>(N));
  for (auto& pt : pts) pt = {uniform01(rng), uniform01(rng) * height};
  std::sort(pts.begin(), pts.end());
  for (auto [s, h] : pts) {
    std::size_t i = std::size_t(std::upper_bound(t.prefix.begin() + 1, t.prefix.end(), s) - t.prefix.begin()) - 1;
    i = std::min(i, t.dfs_order.size() - 1);
    const int v = t.dfs_order[i];
    if (h >= t.a * t.A[std::size_t(v)]) continue;
    double rest = h;
    int chosen = -1;
    const auto perm = t.permitted(v);
    for (int u : perm) {
      chosen = u;
      rest -= t.a * p[std::size_t(u)];
      if (rest < 0.0) break;
    }
    if (chosen < 0) continue;
    out.push_back({v, t.tree.parent[std::size_t(chosen)], chosen});
  }
  return out;
}

}  // namespace detail

/// Rejection sampler for the tilted ordered p-tree with surplus edges. Proposals
/// are ordered p-trees; acceptance is L(t)/M with M = exp(a(1 - sigma^2)/2),
/// valid because (e^x-1)/x <= e^x and tree edges plus permitted pairs are
/// distinct unordered pairs whose p_k p_l sum to at most (1 - sigma^2)/2.
class TiltedSampler {
 public:
  TiltedSampler(ProbVector p, double a, SurplusRoute route = SurplusRoute::poisson,
                double acceptance_floor = 1e-4, std::size_t floor_after = 2000)
      : p_(std::move(p)), a_(a), route_(route), floor_(acceptance_floor), floor_after_(floor_after) {
    require(a_ >= 0.0, "TiltedSampler: a must be non-negative");
    const double s = p_.sigma();
    log_M_ = a_ * (1.0 - s * s) / 2.0;
  }

  AnnotatedPTree sample_tree(Rng& rng) {
    for (;;) {
      AnnotatedPTree t = annotate(sample_ptree_pruefer(p_, rng), p_, a_);
      ++proposals_;
      const bool accept = uniform01(rng) < std::exp(std::min(0.0, t.log_L - log_M_));
      if (accept) {
        ++accepted_;
        return t;
      }
      if (proposals_ >= floor_after_ && acceptance_rate() < floor_)
        throw acceptance_failure(acceptance_rate(), floor_);
    }
  }

  ConnectedSample sample(Rng& rng) {
    ConnectedSample out;
    out.tree = sample_tree(rng);
    out.surplus_pairs = route_ == SurplusRoute::poisson ? detail::surplus_poisson(out.tree, p_, rng)
                                                        : detail::surplus_geometric(out.tree, p_, rng);
    out.graph = MultiGraph(p_.size(), out.tree.tree.edges());
    std::vector<Edge> seen;
    for (const auto& sp : out.surplus_pairs) {
      const Edge key{Vertex(std::min(sp.L, sp.u)), Vertex(std::max(sp.L, sp.u))};
      if (std::find(seen.begin(), seen.end(), key) != seen.end()) {
        ++out.duplicates_removed;
        continue;
      }
      seen.push_back(key);
      out.graph.add_edge(Vertex(sp.L), Vertex(sp.u));
    }
    return out;
  }

  double acceptance_rate() const { return proposals_ ? double(accepted_) / double(proposals_) : 1.0; }
  double log_envelope() const { return log_M_; }
  std::size_t proposals() const { return proposals_; }
  std::size_t accepted() const { return accepted_; }
  const ProbVector& p() const { return p_; }
  double a() const { return a_; }

 private:
  ProbVector p_;
  double a_;
  SurplusRoute route_;
  double floor_;
  std::size_t floor_after_;
  double log_M_ = 0.0;
  std::size_t proposals_ = 0, accepted_ = 0;
};

inline ConnectedSample sample_tilted_connected(const ProbVector& p, double a, Rng& rng,
                                               SurplusRoute route = SurplusRoute::poisson) {
  TiltedSampler sampler(p, a, route);
  return sampler.sample(rng);
}

// ---- exact oracles on tiny label sets ---------------------------------------------

/// Bit index of the unordered pair {i,j}, i < j, in lexicographic order.
inline int pair_bit(int i, int j, int m) {
  if (i > j) std::swap(i, j);
  return i * m - i * (i + 1) / 2 + (j - i - 1);
}

/// Simple-graph edge mask; requires a simple graph on at most 11 vertices.
inline std::uint64_t edge_mask(const MultiGraph& g) {
  const int m = int(g.n());
  require(m <= 11, "edge_mask: too many vertices");
  std::uint64_t mask = 0;
  for (auto [u, v] : g.edges()) {
    require(u != v, "edge_mask: self-loop");
    const std::uint64_t bit = std::uint64_t{1} << pair_bit(int(u), int(v), m);
    require(!(mask & bit), "edge_mask: multi-edge");
    mask |= bit;
  }
  return mask;
}

struct GraphLaw {
  int m = 0;
  std::vector<std::pair<std::uint64_t, double>> entries;  // (edge mask, probability)

  double probability(std::uint64_t mask) const {
    for (const auto& [k, v] : entries)
      if (k == mask) return v;
    return 0.0;
  }
};

namespace detail {

inline bool mask_connected(std::uint64_t mask, int m) {
  std::vector<int> parent(static_cast<std::size_t>(m));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[std::size_t(x)] != x) x = parent[std::size_t(x)] = parent[std::size_t(parent[std::size_t(x)])];
    return x;
  };
  int comps = m;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      if (mask >> pair_bit(i, j, m) & 1) {
        const int a = find(i), b = find(j);
        if (a != b) {
          parent[std::size_t(b)] = a;
          --comps;
        }
      }
  return comps == 1;
}

}  // namespace detail

/// Law of a connected simple graph on [m] proportional to
/// prod_E q_ij prod_{not E} (1 - q_ij), q_ij = 1 - exp(-a p_i p_j).
inline GraphLaw pcon_oracle(const ProbVector& p, double a) {
  const int m = int(p.size());
  require(m >= 1 && m <= 6, "pcon_oracle: enumeration limited to m <= 6");
  const int pairs = m * (m - 1) / 2;
  std::vector<double> q(static_cast<std::size_t>(pairs));
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) q[std::size_t(pair_bit(i, j, m))] = -std::expm1(-a * p[std::size_t(i)] * p[std::size_t(j)]);
  GraphLaw law;
  law.m = m;
  double total = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << pairs); ++mask) {
    if (!detail::mask_connected(mask, m)) continue;
    double w = 1.0;
    for (int b = 0; b < pairs; ++b) w *= (mask >> b & 1) ? q[std::size_t(b)] : 1.0 - q[std::size_t(b)];
    law.entries.emplace_back(mask, w);
    total += w;
  }
  require(total > 0.0, "pcon_oracle: no connected graph has positive weight");
  for (auto& e : law.entries) e.second /= total;
  return law;
}

/// Canonical block labels of a partition of [m]: blocks numbered in order of
/// their smallest element.
inline std::vector<int> partition_labels(const std::vector<std::vector<std::size_t>>& blocks, std::size_t m) {
  std::vector<int> label(m, -1);
  for (const auto& b : blocks)
    for (std::size_t v : b) {
      require(v < m && label[v] < 0, "partition_labels: blocks must partition [m]");
      label[v] = 0;
    }
  std::vector<int> out(m, -1);
  int next = 0;
  for (std::size_t v = 0; v < m; ++v) {
    require(label[v] == 0, "partition_labels: blocks must cover [m]");
    if (out[v] >= 0) continue;
    for (const auto& b : blocks)
      if (std::find(b.begin(), b.end(), v) != b.end())
        for (std::size_t u : b) out[u] = next;
    ++next;
  }
  return out;
}

/// Exact law of the component partition of the rank-one graph with
/// q_ij = 1 - exp(-t x_i x_j), by enumerating every edge set (m <= 6).
inline std::map<std::vector<int>, double> nr_partition_law(const std::vector<double>& x, double t) {
  const int m = int(x.size());
  require(m >= 1 && m <= 6, "nr_partition_law: enumeration limited to m <= 6");
  const int pairs = m * (m - 1) / 2;
  std::vector<double> q(static_cast<std::size_t>(pairs));
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      q[std::size_t(pair_bit(i, j, m))] = -std::expm1(-t * x[std::size_t(i)] * x[std::size_t(j)]);
  std::map<std::vector<int>, double> law;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << pairs); ++mask) {
    double w = 1.0;
    MultiGraph g(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) {
        const int b = pair_bit(i, j, m);
        if (mask >> b & 1) {
          w *= q[std::size_t(b)];
          g.add_edge(Vertex(i), Vertex(j));
        } else {
          w *= 1.0 - q[std::size_t(b)];
        }
      }
    std::vector<std::vector<std::size_t>> blocks;
    for (const auto& c : connected_components(Adjacency(g))) blocks.emplace_back(c.begin(), c.end());
    law[partition_labels(blocks, std::size_t(m))] += w;
  }
  return law;
}

// ---- rank-one (Norros-Reittu) graphs ---------------------------------------------

/// Independent edges with q_ij = 1 - exp(-t x_i x_j). Pairs with q below
/// `cutoff` are skipped (0 keeps the law exact).
inline MultiGraph sample_nr(const std::vector<double>& x, double t, Rng& rng, double cutoff = 0.0) {
  require(t >= 0.0, "sample_nr: t must be non-negative");
  const std::size_t n = x.size();
  MultiGraph g(n);
  if (t == 0.0) return g;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double q = -std::expm1(-t * x[i] * x[j]);
      if (q < cutoff) continue;
      if (uniform01(rng) < q) g.add_edge(Vertex(i), Vertex(j));
    }
  return g;
}

struct BlockParameters {
  std::vector<Vertex> block;
  ProbVector p;
  double a;
};

/// Per block: p = x restricted and normalized, a = t (sum_block x)^2.
inline std::vector<BlockParameters> two_stage_parameters(const std::vector<std::vector<Vertex>>& partition,
                                                         const std::vector<double>& x, double t) {
  std::vector<char> covered(x.size(), 0);
  std::vector<BlockParameters> out;
  for (const auto& block : partition) {
    require(!block.empty(), "two_stage_parameters: empty block");
    std::vector<double> xs;
    double s = 0.0;
    for (Vertex v : block) {
      require(v < x.size() && !covered[v], "two_stage_parameters: blocks must partition the labels");
      covered[v] = 1;
      xs.push_back(x[v]);
      s += x[v];
    }
    out.push_back({block, ProbVector::normalized(xs), t * s * s});
  }
  for (char c : covered) require(c != 0, "two_stage_parameters: partition does not cover the labels");
  return out;
}

/// Rank-one graph built in two stages: component partition from `partition_of`
/// (a sampled graph), then each component redrawn from the connected law.
inline MultiGraph sample_nr_two_stage(const std::vector<double>& x, double t, Rng& rng) {
  const MultiGraph first = sample_nr(x, t, rng);
  const auto blocks = connected_components(Adjacency(first));
  MultiGraph out(x.size());
  for (const auto& bp : two_stage_parameters(blocks, x, t)) {
    if (bp.block.size() == 1) continue;
    const ConnectedSample cs = sample_tilted_connected(bp.p, bp.a, rng);
    for (auto [u, v] : cs.graph.edges()) out.add_edge(bp.block[u], bp.block[v]);
  }
  return out;
}

// ---- serialization ---------------------------------------------------------------

inline nlohmann::json tree_to_json(const OrderedTree& t) {
  std::vector<int> parent(t.size());
  std::vector<std::vector<int>> children(t.size());
  for (std::size_t v = 0; v < t.size(); ++v) {
    parent[v] = t.parent[v] + 1;  // 1-based, 0 marks the root
    for (int c : t.children[v]) children[v].push_back(c + 1);
  }
  return {{"parent", parent}, {"children", children}};
}

inline OrderedTree tree_from_json(const nlohmann::json& j) {
  auto parent = j.at("parent").get<std::vector<int>>();
  for (auto& v : parent) v -= 1;
  OrderedTree t = OrderedTree::from_parents(parent);
  if (j.contains("children")) {
    auto ch = j.at("children").get<std::vector<std::vector<int>>>();
    require(ch.size() == t.size(), "tree_from_json: children length mismatch");
    for (std::size_t v = 0; v < ch.size(); ++v) {
      for (auto& c : ch[v]) c -= 1;
      auto expect = t.children[v];
      auto got = ch[v];
      std::sort(expect.begin(), expect.end());
      std::sort(got.begin(), got.end());
      require(expect == got, "tree_from_json: children disagree with parents");
      t.children[v] = ch[v];
    }
  }
  return t;
}

inline void write_law_csv(std::ostream& out, const GraphLaw& law) {
  out << "edge_mask,probability\n";
  out.precision(17);
  for (const auto& [mask, prob] : law.entries) out << mask << ',' << prob << '\n';
}

}  // namespace heavytail
