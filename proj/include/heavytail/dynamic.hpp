#pragma once

// Dynamic half-edge construction of the configuration model, its snapshots as
// blob systems, the modified (exact multiplicative coalescent) process coupled
// to it, the plain multiplicative coalescent, and half-edge thinning.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <vector>

#include "heavytail/common.hpp"
#include "heavytail/degrees.hpp"
#include "heavytail/graph.hpp"

namespace heavytail {

// ---- time scales --------------------------------------------------------------

/// t_c(lambda) = 1/2 log(nu/(nu-1)) + nu/(2(nu-1)) * lambda * n^{-eta}.
inline double critical_time(double nu, double lambda, double n_pow_minus_eta) {
  require(nu > 1.0, "critical_time: requires nu > 1");
  return 0.5 * std::log(nu / (nu - 1.0)) + nu / (2.0 * (nu - 1.0)) * lambda * n_pow_minus_eta;
}

/// t_n = 1/2 log(nu/(nu-1)) - nu/(2(nu-1)) * n^{-delta}.
inline double subcritical_time(double nu, double n_pow_minus_delta) {
  require(nu > 1.0, "subcritical_time: requires nu > 1");
  return 0.5 * std::log(nu / (nu - 1.0)) - nu / (2.0 * (nu - 1.0)) * n_pow_minus_delta;
}

inline double critical_time(const DegreeSequence& seq, double lambda, double eta) {
  return critical_time(criticality_parameter(seq), lambda, std::pow(double(seq.n()), -eta));
}

inline double subcritical_time(const DegreeSequence& seq, double delta) {
  const TauExponents ex = exponents(seq.tau.value_or(3.5));
  require(delta > 0.0 && delta < ex.eta, "subcritical_time: need 0 < delta < eta");
  return subcritical_time(criticality_parameter(seq), std::pow(double(seq.n()), -delta));
}

// ---- dynamic construction --------------------------------------------------------

struct LoggedEdge {
  double time;
  std::size_t h1, h2;  // global half-edge ids (initiator, partner)
  Vertex u, v;
};

struct Trackers {
  long long s1 = 0;   // sum omega_i
  long long s2 = 0;   // sum omega_i^2
  long long sdw = 0;  // sum d_i omega_i
};

struct DynamicState {
  std::vector<long long> d;
  std::vector<Vertex> owner;           // half-edge -> vertex; vertex v owns a block of d_v ids
  double time = 0.0;                   // simulated horizon
  std::vector<std::size_t> alive;      // alive half-edges (unordered)
  std::vector<LoggedEdge> edge_log;    // in time order
  std::vector<long long> omega;        // open half-edges per vertex at `time`
  Trackers trackers;

  std::size_t n() const { return d.size(); }
};

namespace detail {

inline std::vector<Vertex> half_edge_owners(const std::vector<long long>& d) {
  std::vector<Vertex> owner;
  for (std::size_t v = 0; v < d.size(); ++v)
    for (long long k = 0; k < d[v]; ++k) owner.push_back(Vertex(v));
  return owner;
}

inline Trackers initial_trackers(const std::vector<long long>& d) {
  Trackers t;
  for (long long di : d) {
    t.s1 += di;
    t.s2 += di * di;
    t.sdw += di * di;
  }
  return t;
}

inline void close_half_edge(Trackers& t, std::vector<long long>& omega, const std::vector<long long>& d, Vertex v) {
  t.s2 -= 2 * omega[v] - 1;
  t.sdw -= d[v];
  t.s1 -= 1;
  omega[v] -= 1;
}

}  // namespace detail

/// Every alive half-edge carries a unit-rate clock; on a ring it pairs with a
/// uniform other alive half-edge and both die. Simulated event by event: the
/// next ring comes after Exp(s1). Runs until `t_end` or until fewer than two
/// half-edges remain (t_end may be infinite).
inline DynamicState run_dynamic(const std::vector<long long>& d, double t_end, Rng& rng) {
  require(t_end >= 0.0, "run_dynamic: t_end must be non-negative");
  DynamicState st;
  st.d = d;
  st.owner = detail::half_edge_owners(d);
  st.omega = d;
  st.trackers = detail::initial_trackers(d);
  st.alive.resize(st.owner.size());
  std::iota(st.alive.begin(), st.alive.end(), std::size_t{0});
  st.edge_log.reserve(st.alive.size() / 2);
  double t = 0.0;
  auto take = [&](std::size_t pos) {
    const std::size_t h = st.alive[pos];
    st.alive[pos] = st.alive.back();
    st.alive.pop_back();
    return h;
  };
  while (st.alive.size() >= 2) {
    const double next = t + exponential(rng, double(st.alive.size()));
    if (next > t_end) break;
    t = next;
    const std::size_t h1 = take(uniform_index(rng, st.alive.size()));
    const std::size_t h2 = take(uniform_index(rng, st.alive.size()));
    const Vertex u = st.owner[h1], v = st.owner[h2];
    detail::close_half_edge(st.trackers, st.omega, st.d, u);
    detail::close_half_edge(st.trackers, st.omega, st.d, v);
    st.edge_log.push_back({t, h1, h2, u, v});
  }
  st.time = t_end;
  return st;
}

/// Trackers at each (sorted) grid time, replayed from the edge log.
inline std::vector<Trackers> tracker_path(const DynamicState& st, const std::vector<double>& grid) {
  require(std::is_sorted(grid.begin(), grid.end()), "tracker_path: grid must be sorted");
  std::vector<long long> omega = st.d;
  Trackers tr = detail::initial_trackers(st.d);
  std::vector<Trackers> out;
  out.reserve(grid.size());
  std::size_t k = 0;
  for (double g : grid) {
    require(g <= st.time, "tracker_path: grid beyond simulated horizon");
    while (k < st.edge_log.size() && st.edge_log[k].time <= g) {
      detail::close_half_edge(tr, omega, st.d, st.edge_log[k].u);
      detail::close_half_edge(tr, omega, st.d, st.edge_log[k].v);
      ++k;
    }
    out.push_back(tr);
  }
  return out;
}

struct TrackerPrediction {
  double s1, s2, sdw;  // per-vertex (divided by n)
};

/// Fluid limits: s1/n ~ mu e^{-2t}, s2/n ~ mu e^{-4t}(nu + e^{2t}),
/// s_dw/n ~ mu(1+nu) e^{-2t}.
inline TrackerPrediction tracker_prediction(double mu, double nu, double t) {
  const double e2 = std::exp(-2.0 * t);
  return {mu * e2, mu * e2 * e2 * (nu + 1.0 / e2), mu * (1.0 + nu) * e2};
}

// ---- snapshots and blobs --------------------------------------------------------

struct OpenHalfEdge {
  std::size_t id;
  Vertex vertex;
  std::size_t blob;
};

struct BlobSystem {
  std::vector<std::vector<Vertex>> blobs;  // components of the snapshot graph
  std::vector<long long> mass;             // f_b: open half-edges per blob
  std::vector<OpenHalfEdge> open;          // every open half-edge with its blob
  std::vector<std::size_t> blob_of;        // vertex -> blob
  double time = 0.0;

  long long total_mass() const { return std::accumulate(mass.begin(), mass.end(), 0LL); }
};

struct Snapshot {
  MultiGraph graph;
  BlobSystem blobs;
  std::vector<long long> omega;
};

/// Graph of the edges formed by time t, its components as blobs, and the open
/// half-edges each blob still carries.
inline Snapshot snapshot(const DynamicState& st, double t) {
  require(t <= st.time, "snapshot: t beyond simulated horizon");
  const std::size_t n = st.n();
  Snapshot snap{MultiGraph(n), {}, st.d};
  std::vector<char> used(st.owner.size(), 0);
  for (const auto& e : st.edge_log) {
    if (e.time > t) break;
    snap.graph.add_edge(e.u, e.v);
    used[e.h1] = used[e.h2] = 1;
    --snap.omega[e.u];
    --snap.omega[e.v];
  }
  const Adjacency adj(snap.graph);
  auto& bs = snap.blobs;
  bs.time = t;
  bs.blobs = connected_components(adj);
  bs.blob_of.assign(n, 0);
  bs.mass.assign(bs.blobs.size(), 0);
  for (std::size_t b = 0; b < bs.blobs.size(); ++b)
    for (Vertex v : bs.blobs[b]) {
      bs.blob_of[v] = b;
      bs.mass[b] += snap.omega[v];
    }
  for (std::size_t h = 0; h < st.owner.size(); ++h)
    if (!used[h]) bs.open.push_back({h, st.owner[h], bs.blob_of[st.owner[h]]});
  return snap;
}

// ---- modified process and coupling -----------------------------------------------

struct CoupledEdge {
  double time;
  std::size_t e, f;  // indices into BlobSystem::open
  bool original;
};

struct CoupledGraphs {
  std::vector<CoupledEdge> modified_edges;   // every superstructure edge, in time order
  std::vector<std::size_t> original_edges;   // indices into modified_edges
  double t_start = 0.0, t_end = 0.0;
  double rate_constant = 0.0;                // 2/(s1(t_n) - 1)
};

/// Every unordered pair of distinct open half-edges carries an independent
/// Poisson process of rate 2/(s1-1), s1 the open count at the snapshot; the
/// total event rate is therefore s1 and each event is a uniform pair. Half-edges
/// never die here. An event is also an original edge when neither half-edge was
/// used by an earlier original edge, so originals form a partial matching
/// contained in the modified edge set.
inline CoupledGraphs run_modified(const BlobSystem& blobs, double t_start, double t_end, Rng& rng) {
  const std::size_t s1 = blobs.open.size();
  require(s1 >= 2, "run_modified: need at least two open half-edges");
  require(t_end >= t_start, "run_modified: t_end before t_start");
  CoupledGraphs out;
  out.t_start = t_start;
  out.t_end = t_end;
  out.rate_constant = 2.0 / double(s1 - 1);
  std::vector<char> used(s1, 0);
  double t = t_start;
  for (;;) {
    t += exponential(rng, double(s1));
    if (t > t_end) break;
    const std::size_t e = uniform_index(rng, s1);
    std::size_t f = uniform_index(rng, s1 - 1);
    if (f >= e) ++f;
    const bool original = !used[e] && !used[f];
    if (original) {
      used[e] = used[f] = 1;
      out.original_edges.push_back(out.modified_edges.size());
    }
    out.modified_edges.push_back({t, e, f, original});
  }
  return out;
}

/// Blob clusters of the modified process at time t (union of blobs joined by
/// superstructure edges), each with its summed mass.
struct BlobClusters {
  std::vector<std::vector<std::size_t>> members;  // blob indices
  std::vector<long long> mass;
};

namespace detail {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (a > b) std::swap(a, b);
    parent_[b] = a;
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace detail

inline BlobClusters modified_clusters(const BlobSystem& blobs, const CoupledGraphs& cg, double t,
                                      bool originals_only = false) {
  const std::size_t m = blobs.blobs.size();
  detail::UnionFind uf(m);
  for (const auto& e : cg.modified_edges) {
    if (e.time > t) break;
    if (originals_only && !e.original) continue;
    uf.unite(blobs.open[e.e].blob, blobs.open[e.f].blob);
  }
  std::vector<std::size_t> slot(m, m);
  BlobClusters out;
  for (std::size_t b = 0; b < m; ++b) {
    const std::size_t r = uf.find(b);
    if (slot[r] == m) {
      slot[r] = out.members.size();
      out.members.emplace_back();
      out.mass.push_back(0);
    }
    out.members[slot[r]].push_back(b);
    out.mass[slot[r]] += blobs.mass[b];
  }
  return out;
}

/// Structural coupling check: original edges are a subset of the modified
/// edges, use each open half-edge at most once, and every component of the
/// original graph lies inside one component of the modified graph.
inline bool coupling_holds(const BlobSystem& blobs, const CoupledGraphs& cg) {
  std::vector<char> in_modified(cg.modified_edges.size(), 0);
  std::vector<char> used(blobs.open.size(), 0);
  for (std::size_t idx : cg.original_edges) {
    if (idx >= cg.modified_edges.size() || !cg.modified_edges[idx].original) return false;
    const auto& e = cg.modified_edges[idx];
    if (used[e.e] || used[e.f] || e.e == e.f) return false;
    used[e.e] = used[e.f] = 1;
    in_modified[idx] = 1;
  }
  for (std::size_t i = 0; i < cg.modified_edges.size(); ++i)
    if (cg.modified_edges[i].original && !in_modified[i]) return false;
  const auto orig = modified_clusters(blobs, cg, cg.t_end, true);
  const auto full = modified_clusters(blobs, cg, cg.t_end, false);
  std::vector<std::size_t> full_of(blobs.blobs.size());
  for (std::size_t c = 0; c < full.members.size(); ++c)
    for (std::size_t b : full.members[c]) full_of[b] = c;
  for (const auto& c : orig.members)
    for (std::size_t b : c)
      if (full_of[b] != full_of[c.front()]) return false;
  return true;
}

struct ModifiedParameters {
  std::vector<double> x;  // n^{-rho} f_b
  double q;               // 1/sigma2(x) + lambda nu^2 / (mu (nu-1)^2)
};

inline ModifiedParameters modified_parameters(const std::vector<long long>& f, std::size_t n, double rho,
                                              double lambda, double mu, double nu) {
  require(nu > 1.0 && mu > 0.0, "modified_parameters: need mu > 0 and nu > 1");
  ModifiedParameters out;
  const double scale = std::pow(double(n), -rho);
  double sigma2 = 0.0;
  for (long long fb : f) {
    out.x.push_back(scale * double(fb));
    sigma2 += out.x.back() * out.x.back();
  }
  require(sigma2 > 0.0, "modified_parameters: sigma2(x) is zero");
  out.q = 1.0 / sigma2 + lambda * nu * nu / (mu * (nu - 1.0) * (nu - 1.0));
  return out;
}

// ---- multiplicative coalescent ---------------------------------------------------

struct Merge {
  double time;
  std::size_t i, j;  // cluster representatives (smallest original index)
};

struct CoalescentRun {
  std::vector<Merge> history;
  std::vector<std::vector<std::size_t>> clusters;  // final partition of indices
  std::vector<double> mass;
};

/// Gillespie simulation: clusters i, j merge at rate x_i x_j. The total rate is
/// ((sum x)^2 - sum x^2)/2; the pair is drawn with i, j independent size-biased
/// picks, rejecting i == j.
inline CoalescentRun simulate_mc(const std::vector<double>& x, double duration, Rng& rng) {
  require(!x.empty(), "simulate_mc: empty mass vector");
  for (double xi : x) require(xi > 0.0, "simulate_mc: masses must be positive");
  CoalescentRun run;
  for (std::size_t i = 0; i < x.size(); ++i) run.clusters.push_back({i});
  run.mass = x;
  double t = 0.0;
  while (run.mass.size() > 1) {
    double sum = 0.0, sumsq = 0.0;
    for (double m : run.mass) {
      sum += m;
      sumsq += m * m;
    }
    const double rate = 0.5 * (sum * sum - sumsq);
    if (rate <= 0.0) break;
    t += exponential(rng, rate);
    if (t > duration) break;
    std::size_t i, j;
    do {
      i = weighted_index(rng, run.mass, sum);
      j = weighted_index(rng, run.mass, sum);
    } while (i == j);
    if (run.clusters[j].front() < run.clusters[i].front()) std::swap(i, j);
    run.history.push_back({t, run.clusters[i].front(), run.clusters[j].front()});
    run.mass[i] += run.mass[j];
    auto& ci = run.clusters[i];
    ci.insert(ci.end(), run.clusters[j].begin(), run.clusters[j].end());
    std::sort(ci.begin(), ci.end());
    run.mass.erase(run.mass.begin() + std::ptrdiff_t(j));
    run.clusters.erase(run.clusters.begin() + std::ptrdiff_t(j));
  }
  return run;
}

/// a_i ~ Binomial(f_i, pi) independently; an odd total gets one extra
/// half-edge at index 0.
inline std::vector<long long> thin_half_edges(const std::vector<long long>& f, double pi, Rng& rng) {
  require(pi >= 0.0 && pi <= 1.0, "thin_half_edges: pi must lie in [0,1]");
  std::vector<long long> a(f.size());
  long long total = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    a[i] = binomial(rng, f[i], pi);
    total += a[i];
  }
  if (!a.empty() && total % 2 != 0) a[0] += 1;
  return a;
}

// ---- serialization ----------------------------------------------------------------

/// CSV rows (time,u,v,original_flag) with 1-based vertices.
inline void write_edge_log_csv(std::ostream& out, const DynamicState& st) {
  out << "time,u,v,original_flag\n";
  out.precision(17);
  for (const auto& e : st.edge_log) out << e.time << ',' << (e.u + 1) << ',' << (e.v + 1) << ",1\n";
}

inline void write_edge_log_csv(std::ostream& out, const BlobSystem& blobs, const CoupledGraphs& cg) {
  out << "time,u,v,original_flag\n";
  out.precision(17);
  for (const auto& e : cg.modified_edges)
    out << e.time << ',' << (blobs.open[e.e].vertex + 1) << ',' << (blobs.open[e.f].vertex + 1) << ','
        << (e.original ? 1 : 0) << '\n';
}

}  // namespace heavytail
