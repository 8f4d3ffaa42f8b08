#pragma once

// Half-edge multigraphs: configuration model, percolation, components with
// susceptibility functionals, and the breadth-first exploration walk.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "heavytail/common.hpp"
#include "heavytail/degrees.hpp"

namespace heavytail {

using Vertex = std::uint32_t;
using Edge = std::pair<Vertex, Vertex>;

class MultiGraph {
 public:
  MultiGraph() = default;
  explicit MultiGraph(std::size_t n) : degree_(n, 0) {}
  MultiGraph(std::size_t n, std::vector<Edge> edges) : degree_(n, 0), edges_(std::move(edges)) {
    for (const auto& [u, v] : edges_) {
      require(u < n && v < n, "MultiGraph: edge endpoint out of range");
      ++degree_[u];
      ++degree_[v];
    }
  }

  std::size_t n() const { return degree_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<long long>& degrees() const { return degree_; }
  long long degree(Vertex v) const { return degree_[v]; }

  void add_edge(Vertex u, Vertex v) {
    require(u < n() && v < n(), "add_edge: endpoint out of range");
    edges_.emplace_back(u, v);
    ++degree_[u];
    ++degree_[v];
  }

  bool is_simple() const {
    std::vector<Edge> keys;
    keys.reserve(edges_.size());
    for (auto [u, v] : edges_) {
      if (u == v) return false;
      keys.emplace_back(std::min(u, v), std::max(u, v));
    }
    std::sort(keys.begin(), keys.end());
    return std::adjacent_find(keys.begin(), keys.end()) == keys.end();
  }

 private:
  std::vector<long long> degree_;
  std::vector<Edge> edges_;
};

/// Compressed adjacency with half-edge slots. Slot k of vertex v is
/// offset[v] + k; a self-loop occupies two slots of its vertex.
struct Adjacency {
  std::vector<std::size_t> offset;      // n + 1
  std::vector<Vertex> neighbor;         // per slot
  std::vector<std::size_t> edge_of;     // per slot
  std::vector<std::size_t> partner;     // per slot: the other slot of the same edge

  explicit Adjacency(const MultiGraph& g) {
    const std::size_t n = g.n();
    offset.assign(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v) offset[v + 1] = offset[v] + std::size_t(g.degree(Vertex(v)));
    const std::size_t slots = offset[n];
    neighbor.resize(slots);
    edge_of.resize(slots);
    partner.resize(slots);
    std::vector<std::size_t> fill(offset.begin(), offset.end() - 1);
    const auto& edges = g.edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
      auto [u, v] = edges[e];
      const std::size_t su = fill[u]++;
      const std::size_t sv = fill[v]++;
      neighbor[su] = v;
      neighbor[sv] = u;
      edge_of[su] = edge_of[sv] = e;
      partner[su] = sv;
      partner[sv] = su;
    }
  }

  std::size_t n() const { return offset.size() - 1; }
  std::size_t begin(Vertex v) const { return offset[v]; }
  std::size_t end(Vertex v) const { return offset[v + 1]; }
  Vertex owner(std::size_t slot) const {
    return Vertex(std::upper_bound(offset.begin(), offset.end(), slot) - offset.begin() - 1);
  }
};

// ---- sampling ---------------------------------------------------------------

/// Uniform perfect matching of the half-edges (vertex v owns d_v consecutive
/// labels), realized by a Fisher-Yates shuffle paired off two at a time.
inline MultiGraph sample_cm(const std::vector<long long>& d, Rng& rng) {
  long long total = 0;
  for (long long di : d) {
    require(di >= 0, "sample_cm: negative degree");
    total += di;
  }
  require(total % 2 == 0, "sample_cm: degree sum must be even");
  std::vector<Vertex> stubs;
  stubs.reserve(std::size_t(total));
  for (std::size_t v = 0; v < d.size(); ++v)
    for (long long k = 0; k < d[v]; ++k) stubs.push_back(Vertex(v));
  std::shuffle(stubs.begin(), stubs.end(), rng);
  std::vector<Edge> edges;
  edges.reserve(stubs.size() / 2);
  for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) edges.emplace_back(stubs[i], stubs[i + 1]);
  return MultiGraph(d.size(), std::move(edges));
}

inline MultiGraph sample_cm(const DegreeSequence& seq, Rng& rng) { return sample_cm(seq.d, rng); }

class simplicity_failure : public std::runtime_error {
 public:
  simplicity_failure(std::size_t attempts)
      : std::runtime_error("sample_simple: no simple graph after " + std::to_string(attempts) + " attempts"),
        attempts_(attempts) {}
  std::size_t attempts() const { return attempts_; }

 private:
  std::size_t attempts_;
};

struct SimpleSample {
  MultiGraph graph;
  std::size_t attempts;
};

inline SimpleSample sample_simple(const std::vector<long long>& d, Rng& rng, std::size_t max_attempts) {
  for (std::size_t a = 1; a <= max_attempts; ++a) {
    MultiGraph g = sample_cm(d, rng);
    if (g.is_simple()) return {std::move(g), a};
  }
  throw simplicity_failure(max_attempts);
}

/// Keeps each edge independently with probability p.
inline MultiGraph percolate(const MultiGraph& g, double p, Rng& rng) {
  require(p >= 0.0 && p <= 1.0, "percolate: p must lie in [0,1]");
  MultiGraph out(g.n());
  std::bernoulli_distribution keep(p);
  for (auto [u, v] : g.edges())
    if (keep(rng)) out.add_edge(u, v);
  return out;
}

// ---- distances ----------------------------------------------------------------

/// Reusable BFS workspace; distances are -1 outside the last search.
class BfsScratch {
 public:
  explicit BfsScratch(std::size_t n) : dist_(n, -1) {}

  /// BFS from `source`; returns visited vertices in visiting order.
  const std::vector<Vertex>& run(const Adjacency& adj, Vertex source) {
    for (Vertex v : order_) dist_[v] = -1;
    order_.clear();
    dist_[source] = 0;
    order_.push_back(source);
    for (std::size_t head = 0; head < order_.size(); ++head) {
      const Vertex u = order_[head];
      for (std::size_t s = adj.begin(u); s < adj.end(u); ++s) {
        const Vertex w = adj.neighbor[s];
        if (dist_[w] < 0) {
          dist_[w] = dist_[u] + 1;
          order_.push_back(w);
        }
      }
    }
    return order_;
  }

  int dist(Vertex v) const { return dist_[v]; }
  int eccentricity() const { return order_.empty() ? 0 : dist_[order_.back()]; }

 private:
  std::vector<int> dist_;
  std::vector<Vertex> order_;
};

/// Exact diameter of the component holding `start` by iFUB: bounds from a BFS
/// tree rooted at a high-degree vertex, refined level by level from the fringe.
inline int component_diameter_ifub(const Adjacency& adj, const std::vector<Vertex>& comp, BfsScratch& bfs) {
  if (comp.size() <= 1) return 0;
  Vertex root = comp.front();
  for (Vertex v : comp)
    if (adj.end(v) - adj.begin(v) > adj.end(root) - adj.begin(root)) root = v;
  // two sweeps for a central-ish root
  const Vertex a = bfs.run(adj, root).back();
  auto path_end = bfs.run(adj, a);
  const Vertex b = path_end.back();
  const int ab = bfs.dist(b);
  // midpoint of the a-b path
  std::vector<int> da(adj.n(), 0);
  for (Vertex v : comp) da[v] = bfs.dist(v);
  bfs.run(adj, b);
  Vertex mid = b;
  for (Vertex v : comp)
    if (da[v] + bfs.dist(v) == ab && da[v] == ab / 2) { mid = v; break; }

  std::vector<Vertex> levels_order = bfs.run(adj, mid);
  std::vector<int> level(levels_order.size());
  for (std::size_t i = 0; i < levels_order.size(); ++i) level[i] = bfs.dist(levels_order[i]);
  int ecc_mid = level.back();
  int lb = std::max(ecc_mid, ab);
  int ub = 2 * ecc_mid;
  std::size_t idx = levels_order.size();
  for (int i = ecc_mid; i > 0 && ub > lb; --i) {
    int best = 0;
    while (idx > 0 && level[idx - 1] == i) {
      --idx;
      bfs.run(adj, levels_order[idx]);
      best = std::max(best, bfs.eccentricity());
    }
    lb = std::max(lb, best);
    if (lb > 2 * (i - 1)) return lb;
    ub = 2 * (i - 1);
  }
  return lb;
}

// ---- components -------------------------------------------------------------

struct ComponentStats {
  std::vector<Vertex> vertices;  // sorted ascending
  std::size_t size = 0;
  std::size_t edge_count = 0;
  long long surplus = 0;
  double mass = 0.0;
  int diameter = -1;  // -1 when not computed
};

struct SusceptibilityReport {
  double s2 = 0.0;
  double s3 = 0.0;
  double spr = 0.0;
  double Dstar = 0.0;
  double Dstar_stderr = 0.0;  // zero when every component was summed exactly
  int max_diameter = -1;
};

struct ComponentOptions {
  std::size_t exact_cutoff = 2000;  // components above this are sampled for Dstar
  std::size_t sampled_sources = 64;
  bool distances = true;            // Dstar
  bool diameters = true;
  std::uint64_t seed = 0;           // stream for sampled sources
};

struct ComponentReport {
  std::vector<ComponentStats> components;  // size descending, ties by smallest vertex
  SusceptibilityReport susceptibility;
};

/// Component labels by BFS; returns vertex lists ordered by size (desc) then
/// smallest vertex, each list sorted ascending.
inline std::vector<std::vector<Vertex>> connected_components(const Adjacency& adj) {
  const std::size_t n = adj.n();
  std::vector<char> seen(n, 0);
  std::vector<std::vector<Vertex>> comps;
  std::vector<Vertex> stack;
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::vector<Vertex> comp{Vertex(s)};
    seen[s] = 1;
    stack.assign(1, Vertex(s));
    while (!stack.empty()) {
      const Vertex u = stack.back();
      stack.pop_back();
      for (std::size_t k = adj.begin(u); k < adj.end(u); ++k) {
        const Vertex w = adj.neighbor[k];
        if (!seen[w]) {
          seen[w] = 1;
          comp.push_back(w);
          stack.push_back(w);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  std::stable_sort(comps.begin(), comps.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
  return comps;
}

inline ComponentReport components_and_stats(const MultiGraph& g, const std::vector<double>* weights = nullptr,
                                            const ComponentOptions& opt = {}) {
  const std::size_t n = g.n();
  require(n > 0, "components_and_stats: empty graph");
  if (weights) require(weights->size() == n, "components_and_stats: weight length mismatch");
  auto w = [&](Vertex v) { return weights ? (*weights)[v] : 1.0; };

  const Adjacency adj(g);
  ComponentReport rep;
  auto comps = connected_components(adj);
  std::vector<std::size_t> comp_of(n);
  for (std::size_t c = 0; c < comps.size(); ++c)
    for (Vertex v : comps[c]) comp_of[v] = c;
  std::vector<std::size_t> edge_counts(comps.size(), 0);
  for (auto [u, v] : g.edges()) ++edge_counts[comp_of[u]];

  BfsScratch bfs(n);
  Rng rng(derive_seed(opt.seed, 0x5eed));
  double var_sum = 0.0;
  auto& sus = rep.susceptibility;
  const double dn = double(n);
  rep.components.reserve(comps.size());
  for (std::size_t c = 0; c < comps.size(); ++c) {
    ComponentStats st;
    st.vertices = std::move(comps[c]);
    st.size = st.vertices.size();
    st.edge_count = edge_counts[c];
    st.surplus = static_cast<long long>(st.edge_count) - static_cast<long long>(st.size) + 1;
    for (Vertex v : st.vertices) st.mass += w(v);
    sus.s2 += st.mass * st.mass / dn;
    sus.s3 += st.mass * st.mass * st.mass / dn;
    sus.spr += st.mass * double(st.size) / dn;

    if (st.size > 1 && (opt.distances || opt.diameters)) {
      if (st.size <= opt.exact_cutoff) {
        int diam = 0;
        double total = 0.0;
        for (Vertex s : st.vertices) {
          const auto& order = bfs.run(adj, s);
          diam = std::max(diam, bfs.eccentricity());
          if (opt.distances) {
            double row = 0.0;
            for (Vertex v : order) row += w(v) * bfs.dist(v);
            total += w(s) * row;
          }
        }
        if (opt.diameters) st.diameter = diam;
        sus.Dstar += total / dn;
      } else {
        if (opt.distances) {
          // each sampled source contributes a full weighted row; average rows
          const std::size_t k = std::max<std::size_t>(2, opt.sampled_sources);
          double mean = 0.0, m2 = 0.0;
          for (std::size_t i = 0; i < k; ++i) {
            const Vertex s = st.vertices[uniform_index(rng, st.size)];
            const auto& order = bfs.run(adj, s);
            double row = 0.0;
            for (Vertex v : order) row += w(v) * bfs.dist(v);
            const double x = w(s) * row;
            const double delta = x - mean;
            mean += delta / double(i + 1);
            m2 += delta * (x - mean);
          }
          const double scale = double(st.size) / dn;
          sus.Dstar += scale * mean;
          var_sum += scale * scale * (m2 / double(k - 1)) / double(k);
        }
        if (opt.diameters) st.diameter = component_diameter_ifub(adj, st.vertices, bfs);
      }
    } else if (opt.diameters) {
      st.diameter = 0;
    }
    if (opt.diameters) sus.max_diameter = std::max(sus.max_diameter, st.diameter);
    rep.components.push_back(std::move(st));
  }
  sus.Dstar_stderr = std::sqrt(var_sum);
  return rep;
}

/// Graph distances between `pairs` independent uniform vertex pairs of `comp`.
inline std::vector<int> sample_two_point_distances(const MultiGraph& g, const std::vector<Vertex>& comp,
                                                   std::size_t pairs, Rng& rng) {
  require(!comp.empty(), "sample_two_point_distances: empty component");
  const Adjacency adj(g);
  BfsScratch bfs(g.n());
  std::vector<int> out;
  out.reserve(pairs);
  for (std::size_t i = 0; i < pairs; ++i) {
    const Vertex a = comp[uniform_index(rng, comp.size())];
    const Vertex b = comp[uniform_index(rng, comp.size())];
    bfs.run(adj, a);
    out.push_back(bfs.dist(b));
  }
  return out;
}

// ---- exploration walk ---------------------------------------------------------

struct WalkComponent {
  std::size_t start;  // index into steps of S(0) for this component
  std::size_t end;    // index of its final value (= start + edge count)
  std::vector<Vertex> vertices;  // in discovery order
  double weight = 0.0;           // total discovered weight
};

struct ExplorationWalk {
  std::vector<long long> steps;              // S values; each component contributes S(0..L)
  std::vector<std::size_t> surplus_events;   // indices into steps of post-surplus values
  std::vector<WalkComponent> components;     // in exploration order
};

struct WalkStart {
  std::optional<Vertex> fixed;  // otherwise chosen size-biased by degree
};

namespace detail {

/// Fenwick tree over non-negative integer weights, for sampling unexplored
/// vertices proportionally to degree.
class Fenwick {
 public:
  explicit Fenwick(const std::vector<long long>& w) : tree_(w.size() + 1, 0), total_(0) {
    for (std::size_t i = 0; i < w.size(); ++i) add(i, w[i]);
  }
  void add(std::size_t i, long long delta) {
    total_ += delta;
    for (std::size_t k = i + 1; k < tree_.size(); k += k & (~k + 1)) tree_[k] += delta;
  }
  long long total() const { return total_; }
  /// Smallest index whose prefix sum exceeds r, 0 <= r < total.
  std::size_t find(long long r) const {
    std::size_t pos = 0;
    std::size_t step = 1;
    while (step * 2 < tree_.size()) step *= 2;
    for (; step > 0; step /= 2) {
      if (pos + step < tree_.size() && tree_[pos + step] <= r) {
        pos += step;
        r -= tree_[pos];
      }
    }
    return pos;
  }

 private:
  std::vector<long long> tree_;
  long long total_;
};

/// Shared walk driver. `pairing.partner` returns the partner slot of an active
/// half-edge; the driver owns the active/discovered bookkeeping.
template <class Pairing>
ExplorationWalk run_walk(const std::vector<long long>& deg, const std::vector<double>* weights,
                         WalkStart start, Rng& rng, Pairing&& pairing) {
  const std::size_t n = deg.size();
  if (weights) require(weights->size() == n, "explore_walk: weight length mismatch");
  if (start.fixed) require(*start.fixed < n, "explore_walk: fixed start out of range");
  std::vector<std::size_t> offset(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) offset[v + 1] = offset[v] + std::size_t(deg[v]);

  Fenwick unexplored(deg);
  std::vector<char> discovered(n, 0);
  std::vector<char> active(offset[n], 0);
  std::vector<std::size_t> top(n);  // LIFO pointer within each vertex
  std::deque<Vertex> queue;
  ExplorationWalk walk;
  long long S = 0;

  auto discover = [&](Vertex v, std::optional<std::size_t> consumed) {
    discovered[v] = 1;
    unexplored.add(v, -deg[v]);
    for (std::size_t s = offset[v]; s < offset[v + 1]; ++s) {
      if (consumed && s == *consumed) continue;
      active[s] = 1;
      pairing.activate(s);
    }
    top[v] = offset[v + 1];
    queue.push_back(v);
    auto& comp = walk.components.back();
    comp.vertices.push_back(v);
    comp.weight += weights ? (*weights)[v] : 1.0;
  };
  auto kill = [&](std::size_t s) {
    active[s] = 0;
    pairing.deactivate(s);
  };
  auto next_active = [&]() -> std::optional<std::size_t> {
    while (!queue.empty()) {
      const Vertex v = queue.front();
      while (top[v] > offset[v]) {
        const std::size_t s = --top[v];
        if (active[s]) return s;
      }
      queue.pop_front();
    }
    return std::nullopt;
  };

  bool first = true;
  while (unexplored.total() > 0) {
    Vertex v;
    if (first && start.fixed) {
      v = *start.fixed;
    } else {
      v = Vertex(unexplored.find(std::uniform_int_distribution<long long>(0, unexplored.total() - 1)(rng)));
    }
    first = false;
    if (deg[v] == 0) continue;  // fixed start on an isolated vertex: deferred below
    walk.components.push_back({walk.steps.size(), 0, {}, 0.0});
    discover(v, std::nullopt);
    S = deg[v];
    walk.steps.push_back(S);
    while (auto s = next_active()) {
      kill(*s);
      const std::size_t f = pairing.partner(*s, rng, unexplored);
      const Vertex w = Vertex(std::upper_bound(offset.begin(), offset.end(), f) - offset.begin() - 1);
      if (discovered[w]) {
        require(active[f] != 0, "explore_walk: partner half-edge already used");
        kill(f);
        S -= 2;
        walk.steps.push_back(S);
        walk.surplus_events.push_back(walk.steps.size() - 1);
      } else {
        discover(w, f);
        S += deg[w] - 2;
        walk.steps.push_back(S);
      }
    }
    walk.components.back().end = walk.steps.size() - 1;
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (discovered[v]) continue;
    walk.components.push_back({walk.steps.size(), walk.steps.size(), {Vertex(v)},
                               weights ? (*weights)[v] : 1.0});
    walk.steps.push_back(0);
  }
  return walk;
}

}  // namespace detail

/// Walk over a fixed graph: pairing follows the graph's own half-edge partners.
inline ExplorationWalk explore_walk(const MultiGraph& g, const std::vector<double>* weights, WalkStart start,
                                    Rng& rng) {
  const Adjacency adj(g);
  struct GraphPairing {
    const Adjacency& adj;
    void activate(std::size_t) {}
    void deactivate(std::size_t) {}
    std::size_t partner(std::size_t s, Rng&, const detail::Fenwick&) const { return adj.partner[s]; }
  };
  return detail::run_walk(g.degrees(), weights, start, rng, GraphPairing{adj});
}

/// Walk over a degree sequence with on-the-fly uniform pairing: each active
/// half-edge is matched to a uniform unpaired half-edge, which is the law of
/// exploring a configuration model drawn in advance.
inline ExplorationWalk explore_walk(const DegreeSequence& seq, const std::vector<double>* weights,
                                    WalkStart start, Rng& rng) {
  require(seq.total() % 2 == 0, "explore_walk: degree sum must be even");
  const std::size_t n = seq.n();
  std::vector<std::size_t> offset(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) offset[v + 1] = offset[v] + std::size_t(seq.d[v]);

  struct LivePairing {
    const std::vector<std::size_t>& offset;
    std::vector<std::size_t> pool;   // active half-edges, indexable
    std::vector<std::size_t> where;  // slot -> position in pool

    void activate(std::size_t s) {
      where[s] = pool.size();
      pool.push_back(s);
    }
    void deactivate(std::size_t s) {
      const std::size_t pos = where[s];
      pool[pos] = pool.back();
      where[pool[pos]] = pos;
      pool.pop_back();
    }
    // the initiating half-edge is already out of the pool; an unexplored
    // vertex is hit with probability proportional to its degree
    std::size_t partner(std::size_t, Rng& rng, const detail::Fenwick& unexplored) const {
      const long long a = static_cast<long long>(pool.size());
      const long long u = unexplored.total();
      require(a + u > 0, "explore_walk: no half-edge left to pair with");
      const long long r = std::uniform_int_distribution<long long>(0, a + u - 1)(rng);
      if (r < a) return pool[std::size_t(r)];
      return offset[unexplored.find(r - a)];
    }
  };
  return detail::run_walk(seq.d, weights, start, rng,
                          LivePairing{offset, {}, std::vector<std::size_t>(offset[n], 0)});
}

// ---- serialization ------------------------------------------------------------

inline void write_edge_list(std::ostream& out, const MultiGraph& g) {
  out << "# n " << g.n() << '\n';
  for (auto [u, v] : g.edges()) out << (u + 1) << ' ' << (v + 1) << '\n';
}

/// Reads 1-based "u v" lines. A "# n N" header fixes the vertex count,
/// otherwise it is the largest label seen.
inline MultiGraph read_edge_list(std::istream& in) {
  std::vector<Edge> edges;
  std::size_t n = 0;
  bool fixed_n = false;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    if (line[line.find_first_not_of(" \t")] == '#') {
      std::string hash, key;
      std::size_t value = 0;
      if ((ls >> hash >> key >> value) && key == "n") { n = value; fixed_n = true; }
      continue;
    }
    long long u = 0, v = 0;
    require(static_cast<bool>(ls >> u >> v) && u >= 1 && v >= 1, "read_edge_list: malformed line '" + line + "'");
    edges.emplace_back(Vertex(u - 1), Vertex(v - 1));
    if (!fixed_n) n = std::max<std::size_t>(n, std::size_t(std::max(u, v)));
  }
  return MultiGraph(n, std::move(edges));
}

inline nlohmann::json component_report_json(const ComponentReport& rep, std::size_t max_components = 100) {
  nlohmann::json j;
  const auto& s = rep.susceptibility;
  j["susceptibility"] = {{"s2", s.s2}, {"s3", s.s3}, {"spr", s.spr}, {"Dstar", s.Dstar},
                         {"Dstar_stderr", s.Dstar_stderr}, {"max_diameter", s.max_diameter}};
  j["component_count"] = rep.components.size();
  auto& arr = j["components"] = nlohmann::json::array();
  for (std::size_t i = 0; i < rep.components.size() && i < max_components; ++i) {
    const auto& c = rep.components[i];
    std::vector<std::size_t> one_based(c.vertices.begin(), c.vertices.end());
    for (auto& v : one_based) ++v;
    arr.push_back({{"size", c.size}, {"edges", c.edge_count}, {"surplus", c.surplus},
                   {"mass", c.mass}, {"diameter", c.diameter}, {"vertices", one_based}});
  }
  return j;
}

}  // namespace heavytail
