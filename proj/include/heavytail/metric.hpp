#pragma once

// Measured metric spaces backed by graphs or distance matrices, blob super
// graphs, sampled distance-matrix functionals, and a two-space discrepancy.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>
#include <queue>
#include <random>
#include <variant>
#include <vector>

#include "heavytail/common.hpp"
#include "heavytail/graph.hpp"

namespace heavytail {

inline constexpr double kInfDistance = std::numeric_limits<double>::infinity();

struct UnitGraphBackend {
  std::shared_ptr<const MultiGraph> graph;
  std::shared_ptr<const Adjacency> adj;
};

struct WeightedEdge {
  Vertex u, v;
  double w;
};

struct WeightedGraphBackend {
  std::size_t n = 0;
  std::vector<std::size_t> offset;
  std::vector<std::pair<Vertex, double>> arcs;

  WeightedGraphBackend() = default;
  WeightedGraphBackend(std::size_t n_, const std::vector<WeightedEdge>& edges) : n(n_), offset(n_ + 1, 0) {
    for (const auto& e : edges) {
      require(e.u < n && e.v < n && e.w >= 0.0, "WeightedGraphBackend: bad edge");
      ++offset[e.u + 1];
      ++offset[e.v + 1];
    }
    for (std::size_t i = 0; i < n; ++i) offset[i + 1] += offset[i];
    arcs.resize(offset[n]);
    std::vector<std::size_t> fill(offset.begin(), offset.end() - 1);
    for (const auto& e : edges) {
      arcs[fill[e.u]++] = {e.v, e.w};
      arcs[fill[e.v]++] = {e.u, e.w};
    }
  }
};

struct MatrixBackend {
  std::size_t n = 0;
  std::vector<double> d;  // row-major n x n
};

using DistanceBackend = std::variant<UnitGraphBackend, WeightedGraphBackend, MatrixBackend>;

class MeasuredMetricSpace {
 public:
  MeasuredMetricSpace(DistanceBackend backend, std::vector<double> mu, double scale = 1.0)
      : backend_(std::move(backend)), mu_(std::move(mu)), scale_(scale) {
    require(scale_ > 0.0, "MeasuredMetricSpace: scale must be positive");
    require(mu_.size() == backend_size(), "MeasuredMetricSpace: measure length mismatch");
    double s = 0.0;
    for (double m : mu_) {
      require(m >= 0.0, "MeasuredMetricSpace: negative measure");
      s += m;
    }
    require(std::abs(s - 1.0) < 1e-9, "MeasuredMetricSpace: measure must sum to one");
    sampler_ = std::discrete_distribution<std::size_t>(mu_.begin(), mu_.end());
  }

  std::size_t size() const { return mu_.size(); }
  const std::vector<double>& mu() const { return mu_; }
  double scale() const { return scale_; }
  const DistanceBackend& backend() const { return backend_; }

  /// Scaled distances from `x` to every point (infinite across components).
  std::vector<double> distances_from(std::size_t x) const {
    require(x < size(), "distances_from: point out of range");
    std::vector<double> out(size(), kInfDistance);
    if (const auto* g = std::get_if<UnitGraphBackend>(&backend_)) {
      BfsScratch bfs(size());
      for (Vertex v : bfs.run(*g->adj, Vertex(x))) out[v] = scale_ * bfs.dist(v);
    } else if (const auto* w = std::get_if<WeightedGraphBackend>(&backend_)) {
      using Item = std::pair<double, Vertex>;
      std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
      std::vector<double> dist(size(), kInfDistance);
      dist[x] = 0.0;
      pq.emplace(0.0, Vertex(x));
      while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u]) continue;
        for (std::size_t k = w->offset[u]; k < w->offset[u + 1]; ++k) {
          auto [v, len] = w->arcs[k];
          if (d + len < dist[v]) {
            dist[v] = d + len;
            pq.emplace(dist[v], v);
          }
        }
      }
      for (std::size_t i = 0; i < size(); ++i) out[i] = scale_ * dist[i];
    } else {
      const auto& m = std::get<MatrixBackend>(backend_);
      for (std::size_t i = 0; i < size(); ++i) out[i] = scale_ * m.d[x * m.n + i];
    }
    return out;
  }

  double distance(std::size_t x, std::size_t y) const { return distances_from(x)[y]; }

  std::size_t sample_point(Rng& rng) const { return sampler_(rng); }

  MeasuredMetricSpace rescaled(double c) const {
    require(c > 0.0, "rescale: factor must be positive");
    MeasuredMetricSpace out = *this;
    out.scale_ *= c;
    return out;
  }

 private:
  std::size_t backend_size() const {
    return std::visit(
        [](const auto& b) -> std::size_t {
          using T = std::decay_t<decltype(b)>;
          if constexpr (std::is_same_v<T, UnitGraphBackend>) return b.graph->n();
          else return b.n;
        },
        backend_);
  }

  DistanceBackend backend_;
  std::vector<double> mu_;
  double scale_;
  mutable std::discrete_distribution<std::size_t> sampler_;
};

inline MeasuredMetricSpace rescale(const MeasuredMetricSpace& M, double c) { return M.rescaled(c); }

/// Graph distance space with measure proportional to `weights` (uniform when empty).
inline MeasuredMetricSpace graph_space(MultiGraph g, std::vector<double> weights = {}) {
  const std::size_t n = g.n();
  require(n > 0, "graph_space: empty graph");
  if (weights.empty()) weights.assign(n, 1.0);
  require(weights.size() == n, "graph_space: weight length mismatch");
  const double s = std::accumulate(weights.begin(), weights.end(), 0.0);
  require(s > 0.0, "graph_space: total weight must be positive");
  for (auto& w : weights) w /= s;
  auto graph = std::make_shared<const MultiGraph>(std::move(g));
  auto adj = std::make_shared<const Adjacency>(*graph);
  return MeasuredMetricSpace(UnitGraphBackend{graph, adj}, std::move(weights));
}

inline MeasuredMetricSpace matrix_space(std::size_t n, std::vector<double> d, std::vector<double> mu) {
  require(d.size() == n * n, "matrix_space: matrix size mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    require(d[i * n + i] == 0.0, "matrix_space: non-zero diagonal");
    for (std::size_t j = 0; j < n; ++j) require(d[i * n + j] == d[j * n + i], "matrix_space: asymmetric");
  }
  return MeasuredMetricSpace(MatrixBackend{n, std::move(d)}, std::move(mu));
}

inline MeasuredMetricSpace point_space() { return matrix_space(1, {0.0}, {1.0}); }

// ---- super graphs ---------------------------------------------------------------

struct Junction {
  std::size_t point_i;  // X_{i,j}: point of blob i
  std::size_t point_j;  // X_{j,i}: point of blob j
};

struct SuperGraphSpec {
  std::vector<MeasuredMetricSpace> blobs;
  std::vector<double> p;                                  // blob weights, sum one
  std::vector<std::pair<std::size_t, std::size_t>> superstructure;
  std::vector<Junction> junctions;                        // one per superstructure edge
};

/// Junction points drawn from the blob measures, one per ordered blob pair and
/// shared by repeated superstructure edges between the same blobs.
inline std::vector<Junction> sample_junctions(const SuperGraphSpec& spec, Rng& rng) {
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> chosen;  // (i, j, point of i)
  auto point_for = [&](std::size_t i, std::size_t j) {
    for (const auto& [a, b, x] : chosen)
      if (a == i && b == j) return x;
    const std::size_t x = spec.blobs[i].sample_point(rng);
    chosen.emplace_back(i, j, x);
    return x;
  };
  std::vector<Junction> out;
  for (auto [i, j] : spec.superstructure) {
    const std::size_t xi = point_for(i, j);
    const std::size_t xj = point_for(j, i);
    out.push_back({xi, xj});
  }
  return out;
}

/// Super graph: blobs glued by unit edges between junction points, with
/// measure p_i mu_i on blob i. Graph blobs at scale one merge into a single
/// unit graph; anything else becomes a weighted auxiliary graph in which matrix
/// blobs contribute cliques.
inline MeasuredMetricSpace assemble_supergraph(const SuperGraphSpec& spec) {
  const std::size_t m = spec.blobs.size();
  require(m > 0 && spec.p.size() == m, "assemble_supergraph: blob/weight mismatch");
  require(spec.junctions.size() == spec.superstructure.size(), "assemble_supergraph: junction count mismatch");
  std::vector<std::size_t> offset(m + 1, 0);
  bool all_unit = true;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& b = spec.blobs[i];
    offset[i + 1] = offset[i] + b.size();
    const auto* g = std::get_if<UnitGraphBackend>(&b.backend());
    if (g) {
      require(connected_components(*g->adj).size() == 1, "assemble_supergraph: disconnected blob");
    }
    if (!g || b.scale() != 1.0) all_unit = false;
  }
  const std::size_t total = offset[m];
  std::vector<double> mu(total);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t x = 0; x < spec.blobs[i].size(); ++x) mu[offset[i] + x] = spec.p[i] * spec.blobs[i].mu()[x];
  for (std::size_t e = 0; e < spec.superstructure.size(); ++e) {
    auto [i, j] = spec.superstructure[e];
    require(i < m && j < m, "assemble_supergraph: superstructure endpoint out of range");
    require(spec.junctions[e].point_i < spec.blobs[i].size() && spec.junctions[e].point_j < spec.blobs[j].size(),
            "assemble_supergraph: junction point outside its blob");
  }

  if (all_unit) {
    MultiGraph g(total);
    for (std::size_t i = 0; i < m; ++i)
      for (auto [u, v] : std::get<UnitGraphBackend>(spec.blobs[i].backend()).graph->edges())
        g.add_edge(Vertex(offset[i] + u), Vertex(offset[i] + v));
    for (std::size_t e = 0; e < spec.superstructure.size(); ++e) {
      auto [i, j] = spec.superstructure[e];
      g.add_edge(Vertex(offset[i] + spec.junctions[e].point_i), Vertex(offset[j] + spec.junctions[e].point_j));
    }
    auto graph = std::make_shared<const MultiGraph>(std::move(g));
    auto adj = std::make_shared<const Adjacency>(*graph);
    return MeasuredMetricSpace(UnitGraphBackend{graph, adj}, std::move(mu));
  }

  std::vector<WeightedEdge> edges;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& b = spec.blobs[i];
    const double s = b.scale();
    if (const auto* g = std::get_if<UnitGraphBackend>(&b.backend())) {
      for (auto [u, v] : g->graph->edges()) edges.push_back({Vertex(offset[i] + u), Vertex(offset[i] + v), s});
    } else if (const auto* w = std::get_if<WeightedGraphBackend>(&b.backend())) {
      for (std::size_t u = 0; u < w->n; ++u)
        for (std::size_t k = w->offset[u]; k < w->offset[u + 1]; ++k)
          if (u < w->arcs[k].first)
            edges.push_back({Vertex(offset[i] + u), Vertex(offset[i] + w->arcs[k].first), s * w->arcs[k].second});
    } else {
      const auto& mb = std::get<MatrixBackend>(b.backend());
      for (std::size_t u = 0; u < mb.n; ++u)
        for (std::size_t v = u + 1; v < mb.n; ++v) {
          require(std::isfinite(mb.d[u * mb.n + v]), "assemble_supergraph: disconnected blob");
          edges.push_back({Vertex(offset[i] + u), Vertex(offset[i] + v), s * mb.d[u * mb.n + v]});
        }
    }
  }
  for (std::size_t e = 0; e < spec.superstructure.size(); ++e) {
    auto [i, j] = spec.superstructure[e];
    edges.push_back({Vertex(offset[i] + spec.junctions[e].point_i), Vertex(offset[j] + spec.junctions[e].point_j), 1.0});
  }
  return MeasuredMetricSpace(WeightedGraphBackend(total, edges), std::move(mu));
}

// ---- functionals -------------------------------------------------------------------

struct Estimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  bool exact = false;
};

/// E d(X, X') for X, X' independent from mu: exact double sum up to `cutoff`
/// points, otherwise Monte Carlo over `samples` source rows.
inline Estimate mean_pairwise_distance(const MeasuredMetricSpace& M, std::size_t cutoff, std::size_t samples,
                                       Rng& rng) {
  const auto& mu = M.mu();
  auto row_mean = [&](std::size_t x) {
    const auto d = M.distances_from(x);
    double s = 0.0;
    for (std::size_t y = 0; y < d.size(); ++y)
      if (mu[y] > 0.0) s += mu[y] * d[y];
    return s;
  };
  Estimate e;
  if (M.size() <= cutoff) {
    for (std::size_t x = 0; x < M.size(); ++x)
      if (mu[x] > 0.0) e.mean += mu[x] * row_mean(x);
    e.exact = true;
    return e;
  }
  require(samples >= 2, "mean_pairwise_distance: need at least two samples");
  double m2 = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    const double v = row_mean(M.sample_point(rng));
    const double delta = v - e.mean;
    e.mean += delta / double(k + 1);
    m2 += delta * (v - e.mean);
  }
  e.stderr_ = std::sqrt(m2 / double(samples - 1) / double(samples));
  return e;
}

/// Largest finite distance (scaled).
inline double space_diameter(const MeasuredMetricSpace& M) {
  if (const auto* g = std::get_if<UnitGraphBackend>(&M.backend())) {
    BfsScratch bfs(M.size());
    int diam = 0;
    for (const auto& comp : connected_components(*g->adj))
      diam = std::max(diam, comp.size() <= 2000 ? [&] {
        int d = 0;
        for (Vertex s : comp) {
          bfs.run(*g->adj, s);
          d = std::max(d, bfs.eccentricity());
        }
        return d;
      }() : component_diameter_ifub(*g->adj, comp, bfs));
    return M.scale() * diam;
  }
  double diam = 0.0;
  for (std::size_t x = 0; x < M.size(); ++x)
    for (double d : M.distances_from(x))
      if (std::isfinite(d)) diam = std::max(diam, d);
  return diam;
}

struct BlobFunctionals {
  std::vector<double> u;
  std::vector<double> u_stderr;
  double B = 0.0;
  double delta_max = 0.0;
  double assumption_ratio = 0.0;  // sigma(p) delta_max / (B + 1)
};

inline BlobFunctionals blob_functionals(const std::vector<MeasuredMetricSpace>& blobs, const std::vector<double>& p,
                                        Rng& rng, std::size_t cutoff = 2000, std::size_t samples = 256) {
  require(p.size() == blobs.size(), "blob_functionals: weight length mismatch");
  BlobFunctionals f;
  double sigma2 = 0.0;
  for (std::size_t i = 0; i < blobs.size(); ++i) {
    const Estimate e = mean_pairwise_distance(blobs[i], cutoff, samples, rng);
    f.u.push_back(e.mean);
    f.u_stderr.push_back(e.stderr_);
    f.B += p[i] * e.mean;
    f.delta_max = std::max(f.delta_max, space_diameter(blobs[i]));
    sigma2 += p[i] * p[i];
  }
  f.assumption_ratio = std::sqrt(sigma2) * f.delta_max / (f.B + 1.0);
  return f;
}

/// l x l matrix, row-major, of scaled distances between l i.i.d. mu-points.
using DistanceMatrix = std::vector<double>;

inline DistanceMatrix sample_distance_matrix(const MeasuredMetricSpace& M, std::size_t l, Rng& rng) {
  require(l >= 2, "sample_distance_matrix: l must be at least 2");
  std::vector<std::size_t> pts(l);
  for (auto& x : pts) x = M.sample_point(rng);
  DistanceMatrix D(l * l, 0.0);
  for (std::size_t i = 0; i < l; ++i) {
    const auto row = M.distances_from(pts[i]);
    for (std::size_t j = 0; j < l; ++j) D[i * l + j] = row[pts[j]];
  }
  return D;
}

using Polynomial = std::function<double(const DistanceMatrix&, std::size_t l)>;

/// Test functions on sampled distance matrices.
namespace phi {

inline Polynomial coordinate(std::size_t i = 0, std::size_t j = 1) {
  return [i, j](const DistanceMatrix& D, std::size_t l) { return D[i * l + j]; };
}

inline Polynomial max_entry() {
  return [](const DistanceMatrix& D, std::size_t) { return *std::max_element(D.begin(), D.end()); };
}

/// Mean off-diagonal distance.
inline Polynomial mean_entry() {
  return [](const DistanceMatrix& D, std::size_t l) {
    double s = 0.0;
    for (std::size_t i = 0; i < l; ++i)
      for (std::size_t j = i + 1; j < l; ++j) s += D[i * l + j];
    return s / double(l * (l - 1) / 2);
  };
}

/// Mean of exp(-D) over off-diagonal entries; bounded in [0,1].
inline Polynomial soft_min() {
  return [](const DistanceMatrix& D, std::size_t l) {
    double s = 0.0;
    for (std::size_t i = 0; i < l; ++i)
      for (std::size_t j = i + 1; j < l; ++j) s += std::exp(-D[i * l + j]);
    return s / double(l * (l - 1) / 2);
  };
}

}  // namespace phi

inline Estimate estimate_polynomial(const MeasuredMetricSpace& M, const Polynomial& f, std::size_t l,
                                    std::size_t reps, Rng& rng) {
  require(reps >= 2, "estimate_polynomial: need at least two repetitions");
  Estimate e;
  double m2 = 0.0;
  for (std::size_t k = 0; k < reps; ++k) {
    const double v = f(sample_distance_matrix(M, l, rng), l);
    const double delta = v - e.mean;
    e.mean += delta / double(k + 1);
    m2 += delta * (v - e.mean);
  }
  e.stderr_ = std::sqrt(m2 / double(reps - 1) / double(reps));
  return e;
}

// ---- discrepancy ---------------------------------------------------------------------

struct DiscrepancyResult {
  double statistic = 0.0;
  double null_band = 0.0;  // statistic above this rejects equality at 5%
  bool exceeds() const { return statistic > null_band; }
};

namespace detail {

inline std::vector<double> sorted_upper(const DistanceMatrix& D, std::size_t l) {
  std::vector<double> v;
  v.reserve(l * (l - 1) / 2);
  for (std::size_t i = 0; i < l; ++i)
    for (std::size_t j = i + 1; j < l; ++j) v.push_back(D[i * l + j]);
  std::sort(v.begin(), v.end());
  return v;
}

inline double euclid(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

}  // namespace detail

/// Energy distance between the laws of sorted upper-triangular distance
/// vectors of the two spaces. Sorting makes it invariant under relabeling.
/// Up to 1000 reps per side the full V-statistic is compared with a 200-draw
/// permutation band; above that a linear-time paired estimator with a normal
/// band is used.
inline DiscrepancyResult discrepancy(const MeasuredMetricSpace& M1, const MeasuredMetricSpace& M2, std::size_t l,
                                     std::size_t reps, Rng& rng) {
  require(l >= 2 && reps >= 4, "discrepancy: need l >= 2 and reps >= 4");
  std::vector<std::vector<double>> X, Y;
  for (std::size_t k = 0; k < reps; ++k) X.push_back(detail::sorted_upper(sample_distance_matrix(M1, l, rng), l));
  for (std::size_t k = 0; k < reps; ++k) Y.push_back(detail::sorted_upper(sample_distance_matrix(M2, l, rng), l));
  DiscrepancyResult r;
  if (reps <= 1000) {
    std::vector<std::vector<double>> Z(X);
    Z.insert(Z.end(), Y.begin(), Y.end());
    const std::size_t N = Z.size();
    std::vector<double> dist(N * N, 0.0);
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = i + 1; j < N; ++j) dist[i * N + j] = dist[j * N + i] = detail::euclid(Z[i], Z[j]);
    auto energy = [&](const std::vector<std::size_t>& idx) {
      double xy = 0, xx = 0, yy = 0;
      for (std::size_t i = 0; i < reps; ++i)
        for (std::size_t j = 0; j < reps; ++j) {
          xy += dist[idx[i] * N + idx[reps + j]];
          xx += dist[idx[i] * N + idx[j]];
          yy += dist[idx[reps + i] * N + idx[reps + j]];
        }
      const double r2 = double(reps) * double(reps);
      return (2.0 * xy - xx - yy) / r2;
    };
    std::vector<std::size_t> idx(N);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    r.statistic = energy(idx);
    std::vector<double> null;
    for (int b = 0; b < 200; ++b) {
      std::shuffle(idx.begin(), idx.end(), rng);
      null.push_back(energy(idx));
    }
    std::sort(null.begin(), null.end());
    r.null_band = null[std::size_t(0.95 * double(null.size()))];
    return r;
  }
  const std::size_t pairs = reps / 2;
  double mean = 0.0, m2 = 0.0;
  for (std::size_t k = 0; k < pairs; ++k) {
    const auto &x1 = X[2 * k], &x2 = X[2 * k + 1], &y1 = Y[2 * k], &y2 = Y[2 * k + 1];
    const double h = 0.5 * (detail::euclid(x1, y2) + detail::euclid(x2, y1) + detail::euclid(x1, y1) +
                            detail::euclid(x2, y2)) -
                     detail::euclid(x1, x2) - detail::euclid(y1, y2);
    const double delta = h - mean;
    mean += delta / double(k + 1);
    m2 += delta * (h - mean);
  }
  r.statistic = mean;
  r.null_band = 1.645 * std::sqrt(m2 / double(pairs - 1) / double(pairs));
  return r;
}

// ---- serialization ---------------------------------------------------------------------

inline void write_distance_matrices_csv(std::ostream& out, const std::vector<DistanceMatrix>& mats, std::size_t l) {
  out << "sample";
  for (std::size_t i = 0; i < l; ++i)
    for (std::size_t j = i + 1; j < l; ++j) out << ",d_" << (i + 1) << '_' << (j + 1);
  out << '\n';
  out.precision(17);
  for (std::size_t k = 0; k < mats.size(); ++k) {
    out << k;
    for (std::size_t i = 0; i < l; ++i)
      for (std::size_t j = i + 1; j < l; ++j) out << ',' << mats[k][i * l + j];
    out << '\n';
  }
}

}  // namespace heavytail
