#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include "heavytail/dynamic.hpp"
#include "heavytail/stats.hpp"
#include "support/oracles.hpp"

using namespace heavytail;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

oracle::MultiEdges key_of(const MultiGraph& g) {
  oracle::MultiEdges k;
  for (auto [u, v] : g.edges()) k.push_back({int(std::min(u, v)), int(std::max(u, v))});
  std::sort(k.begin(), k.end());
  return k;
}

/// Singleton blobs with the given open half-edge counts.
BlobSystem singleton_blobs(const std::vector<long long>& f) {
  BlobSystem bs;
  std::size_t id = 0;
  for (std::size_t b = 0; b < f.size(); ++b) {
    bs.blobs.push_back({Vertex(b)});
    bs.mass.push_back(f[b]);
    bs.blob_of.push_back(b);
    for (long long k = 0; k < f[b]; ++k) bs.open.push_back({id++, Vertex(b), b});
  }
  return bs;
}

std::vector<int> labels_of(const std::vector<std::vector<std::size_t>>& blocks, std::size_t m) {
  std::vector<int> out(m, -1);
  int next = 0;
  for (std::size_t v = 0; v < m; ++v) {
    if (out[v] >= 0) continue;
    for (const auto& b : blocks)
      if (std::find(b.begin(), b.end(), v) != b.end())
        for (std::size_t w : b) out[w] = next;
    ++next;
  }
  return out;
}

}  // namespace

TEST(TimeScales, HandValues) {
  EXPECT_NEAR(critical_time(2.0, 0.0, 0.3), 0.5 * std::log(2.0), 1e-15);
  EXPECT_NEAR(subcritical_time(2.0, 0.01), 0.5 * std::log(2.0) - 0.01, 1e-15);
  EXPECT_NEAR(critical_time(2.0, 1.0, 0.1), 0.5 * std::log(2.0) + 0.1, 1e-15);
}

TEST(TimeScales, SubcriticalPrecedesCritical) {
  for (std::size_t n : {10000u, 100000u}) {
    auto seq = quantile_degrees(n, 0.4, 1.0);
    seq.tau = 3.5;
    EXPECT_LT(subcritical_time(seq, 0.12), critical_time(seq, 0.0, 0.2));
  }
}

TEST(RunDynamic, SingleEdge) {
  Rng rng(1);
  const auto st = run_dynamic({1, 1}, kInf, rng);
  ASSERT_EQ(st.edge_log.size(), 1u);
  EXPECT_EQ(key_of(snapshot(st, kInf).graph), (oracle::MultiEdges{{0, 1}}));
}

TEST(RunDynamic, OpenHalfEdgesFollowFluidLimit) {
  Rng rng(2);
  const std::size_t n = 100000;
  const auto st = run_dynamic(std::vector<long long>(n, 3), 1.0, rng);
  const double t = 0.5 * std::log(2.0);
  const auto tr = tracker_path(st, {t});
  EXPECT_NEAR(double(tr[0].s1) / double(n), 1.5, 0.02);
  const auto pred = tracker_prediction(3.0, 2.0, t);
  EXPECT_NEAR(pred.s1, 1.5, 1e-12);
  EXPECT_NEAR(double(tr[0].s2) / double(n), pred.s2, 0.05);
}

TEST(RunDynamic, FinalGraphIsConfigurationModel) {
  const std::vector<long long> d{2, 2, 1, 1};
  const auto exact = oracle::configuration_law(d);
  Rng rng(3);
  std::map<oracle::MultiEdges, long long> counts;
  for (int i = 0; i < 100000; ++i) ++counts[key_of(snapshot(run_dynamic(d, kInf, rng), kInf).graph)];
  EXPECT_LT(stats::tv_empirical(counts, exact), 0.03);
}

TEST(Snapshot, EndpointsAndConservation) {
  Rng rng(4);
  const std::vector<long long> d{4, 3, 2, 2, 1, 1, 1};
  const auto st = run_dynamic(d, kInf, rng);
  const auto s0 = snapshot(st, 0.0);
  EXPECT_EQ(s0.graph.edge_count(), 0u);
  ASSERT_EQ(s0.blobs.blobs.size(), d.size());
  for (std::size_t b = 0; b < d.size(); ++b) EXPECT_EQ(s0.blobs.mass[b], d[s0.blobs.blobs[b][0]]);

  const auto sinf = snapshot(st, kInf);
  EXPECT_EQ(sinf.blobs.total_mass(), 0);
  EXPECT_TRUE(sinf.blobs.open.empty());

  const auto mid = run_dynamic(std::vector<long long>(500, 3), 0.3, rng);
  const auto sm = snapshot(mid, 0.3);
  EXPECT_EQ(sm.blobs.total_mass(), mid.trackers.s1);
  EXPECT_EQ(std::size_t(sm.blobs.total_mass()), sm.blobs.open.size());
  EXPECT_THROW(snapshot(mid, 0.5), domain_error);
}

TEST(RunModified, FirstEdgeWaitingTime) {
  const auto bs = singleton_blobs({1, 1});
  Rng rng(5);
  const int N = 100000;
  double sum = 0.0;
  for (int i = 0; i < N; ++i) {
    const auto cg = run_modified(bs, 0.0, 50.0, rng);
    ASSERT_FALSE(cg.modified_edges.empty());
    sum += cg.modified_edges[0].time;
  }
  // Exp(2): mean 1/2, standard deviation 1/2
  EXPECT_NEAR(sum / N, 0.5, 3.0 * 0.5 / std::sqrt(double(N)));
}

TEST(RunModified, OriginalsAreContainedInModified) {
  Rng rng(6);
  const auto st = run_dynamic(std::vector<long long>(2000, 3), 1.0, rng);
  const auto snap = snapshot(st, 0.4);
  for (int i = 0; i < 20; ++i) {
    const auto cg = run_modified(snap.blobs, 0.4, 1.0, rng);
    EXPECT_TRUE(coupling_holds(snap.blobs, cg));
    std::vector<char> used(snap.blobs.open.size(), 0);
    for (std::size_t idx : cg.original_edges) {
      const auto& e = cg.modified_edges[idx];
      EXPECT_FALSE(used[e.e] || used[e.f]);
      used[e.e] = used[e.f] = 1;
    }
  }
}

TEST(RunModified, ClusterPartitionIsRankOne) {
  const std::vector<long long> f{1, 2, 1, 2};
  const auto bs = singleton_blobs(f);
  const double t0 = 1.0, t1 = 1.4;
  const double s1 = 6.0, tt = 2.0 * (t1 - t0) / (s1 - 1.0);
  const auto exact = oracle::partition_law({1.0, 2.0, 1.0, 2.0}, tt);
  Rng rng(7);
  std::map<std::vector<int>, long long> counts;
  for (int i = 0; i < 100000; ++i) {
    const auto cg = run_modified(bs, t0, t1, rng);
    ++counts[labels_of(modified_clusters(bs, cg, t1).members, f.size())];
  }
  EXPECT_LT(stats::tv_empirical(counts, exact), 0.03);
}

TEST(ModifiedParameters, HandValues) {
  const auto one = modified_parameters({5}, 100, 0.6, 0.0, 2.0, 2.0);
  EXPECT_NEAR(1.0 / one.q, one.x[0] * one.x[0], 1e-15);
  EXPECT_TRUE(std::isfinite(one.q));

  const auto a = modified_parameters({2, 1}, 16, 0.6, 0.0, 2.0, 2.0);
  const double s = std::pow(16.0, -0.6);
  EXPECT_NEAR(a.q, 1.0 / (4 * s * s + s * s), 1e-12);

  const auto b = modified_parameters({6, 3}, 16, 0.6, 0.0, 2.0, 2.0);
  EXPECT_NEAR(a.q / b.q, 9.0, 1e-12);

  const auto c = modified_parameters({2, 1}, 16, 0.6, 1.0, 2.0, 3.0);
  EXPECT_NEAR(c.q - a.q, 9.0 / (2.0 * 4.0), 1e-12);
}

TEST(SimulateMc, PairMergeTime) {
  Rng rng(8);
  const int N = 100000;
  const double t = 0.7;
  long long merged = 0;
  for (int i = 0; i < N; ++i) merged += simulate_mc({1.0, 1.0}, t, rng).history.empty() ? 0 : 1;
  const double p = 1.0 - std::exp(-t);
  EXPECT_NEAR(double(merged) / N, p, 3.0 * std::sqrt(p * (1 - p) / N));
}

TEST(SimulateMc, PartitionMatchesRankOneGraph) {
  const std::vector<double> x{1.0, 2.0, 3.0};
  const double t = 0.1;
  const auto exact = oracle::partition_law(x, t);
  ASSERT_EQ(exact.size(), 5u);
  Rng rng(9);
  std::map<std::vector<int>, long long> counts;
  for (int i = 0; i < 100000; ++i) {
    const auto run = simulate_mc(x, t, rng);
    std::vector<std::vector<std::size_t>> blocks(run.clusters.begin(), run.clusters.end());
    ++counts[labels_of(blocks, x.size())];
  }
  EXPECT_LT(stats::tv_empirical(counts, exact), 0.02);
}

TEST(SimulateMc, MassConserved) {
  Rng rng(10);
  const std::vector<double> x{0.5, 1.5, 2.0, 0.25, 3.0};
  const auto run = simulate_mc(x, 10.0, rng);
  EXPECT_NEAR(std::accumulate(run.mass.begin(), run.mass.end(), 0.0), 7.25, 1e-12);
  std::size_t members = 0;
  for (const auto& c : run.clusters) members += c.size();
  EXPECT_EQ(members, x.size());
  EXPECT_EQ(run.history.size() + run.clusters.size(), x.size());
}

TEST(ThinHalfEdges, ExtremesAndMean) {
  Rng rng(11);
  const std::vector<long long> f{5, 3, 2};
  EXPECT_EQ(thin_half_edges(f, 1.0, rng), f);
  EXPECT_EQ(thin_half_edges({5, 3, 1}, 1.0, rng), (std::vector<long long>{6, 3, 1}));
  EXPECT_EQ(thin_half_edges(f, 0.0, rng), (std::vector<long long>{0, 0, 0}));

  const int N = 100000;
  const double pi = 0.3;
  std::vector<double> sum(3, 0.0);
  for (int i = 0; i < N; ++i) {
    const auto a = thin_half_edges(f, pi, rng);
    for (std::size_t k = 0; k < 3; ++k) sum[k] += double(a[k]);
  }
  // index 0 absorbs parity repairs, worth at most +1 with probability about 1/2
  for (std::size_t k = 1; k < 3; ++k) {
    const double se = std::sqrt(double(f[k]) * pi * (1 - pi) / N);
    EXPECT_NEAR(sum[k] / N, double(f[k]) * pi, 3.0 * se);
  }
}

TEST(EdgeLog, CsvFormat) {
  Rng rng(12);
  const auto st = run_dynamic({1, 1}, kInf, rng);
  std::ostringstream out;
  write_edge_log_csv(out, st);
  const auto s = out.str();
  EXPECT_EQ(s.rfind("time,u,v,original_flag\n", 0), 0u);
  EXPECT_TRUE(s.find(",1,2,1\n") != std::string::npos || s.find(",2,1,1\n") != std::string::npos) << s;
}
