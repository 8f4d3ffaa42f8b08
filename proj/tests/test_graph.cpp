#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "heavytail/graph.hpp"
#include "heavytail/stats.hpp"
#include "support/oracles.hpp"

using namespace heavytail;

namespace {

oracle::MultiEdges key_of(const MultiGraph& g) {
  oracle::MultiEdges k;
  for (auto [u, v] : g.edges()) k.push_back({int(std::min(u, v)), int(std::max(u, v))});
  std::sort(k.begin(), k.end());
  return k;
}

MultiGraph path3() { return MultiGraph(3, {{0, 1}, {1, 2}}); }
MultiGraph triangle() { return MultiGraph(3, {{0, 1}, {1, 2}, {0, 2}}); }

}  // namespace

TEST(SampleCm, Degenerate) {
  Rng rng(1);
  const auto g = sample_cm(std::vector<long long>{1, 1}, rng);
  ASSERT_EQ(g.edge_count(), 1u);
  EXPECT_EQ(key_of(g), (oracle::MultiEdges{{0, 1}}));
  const auto loop = sample_cm(std::vector<long long>{2}, rng);
  ASSERT_EQ(loop.edge_count(), 1u);
  EXPECT_EQ(loop.edges()[0], Edge(0, 0));
  EXPECT_THROW(sample_cm(std::vector<long long>{1, 1, 1}, rng), domain_error);
}

TEST(SampleCm, ThreeMatchingsEquallyLikely) {
  Rng rng(2);
  const int N = 100000;
  std::map<oracle::MultiEdges, long long> counts;
  for (int i = 0; i < N; ++i) ++counts[key_of(sample_cm(std::vector<long long>{1, 1, 1, 1}, rng))];
  ASSERT_EQ(counts.size(), 3u);
  const double se = std::sqrt((1.0 / 3.0) * (2.0 / 3.0) / N);
  for (const auto& [k, c] : counts) EXPECT_NEAR(double(c) / N, 1.0 / 3.0, 3.0 * se);
}

TEST(SampleCm, MultigraphLawMatchesMatchingEnumeration) {
  const std::vector<long long> d{3, 2, 2, 1};
  const auto exact = oracle::configuration_law(d);
  Rng rng(3);
  std::map<oracle::MultiEdges, long long> counts;
  for (int i = 0; i < 100000; ++i) ++counts[key_of(sample_cm(d, rng))];
  EXPECT_LT(stats::tv_empirical(counts, exact), 0.02);
}

TEST(SampleSimple, SingleEdgeAcceptsImmediately) {
  Rng rng(4);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_simple({1, 1}, rng, 1).attempts, 1u);
}

TEST(SampleSimple, NoSimpleGraphExhaustsAttempts) {
  Rng rng(5);
  try {
    sample_simple({2, 2}, rng, 50);
    FAIL() << "expected simplicity_failure";
  } catch (const simplicity_failure& e) {
    EXPECT_EQ(e.attempts(), 50u);
  }
}

TEST(SampleSimple, TriangleAcceptanceMatchesPairingCount) {
  const auto law = oracle::configuration_law({2, 2, 2});
  const double accept = law.at({{0, 1}, {0, 2}, {1, 2}});
  EXPECT_NEAR(accept, 8.0 / 15.0, 1e-12);
  Rng rng(6);
  const int N = 50000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < N; ++i) {
    const auto s = sample_simple({2, 2, 2}, rng, 1000);
    EXPECT_EQ(key_of(s.graph), (oracle::MultiEdges{{0, 1}, {0, 2}, {1, 2}}));
    sum += double(s.attempts);
    sumsq += double(s.attempts) * double(s.attempts);
  }
  const double mean = sum / N, se = std::sqrt((sumsq / N - mean * mean) / N);
  EXPECT_NEAR(mean, 1.0 / accept, 3.0 * se);
}

TEST(Percolate, Extremes) {
  Rng rng(7);
  const auto g = triangle();
  EXPECT_EQ(key_of(percolate(g, 1.0, rng)), key_of(g));
  EXPECT_EQ(percolate(g, 0.0, rng).edge_count(), 0u);
  EXPECT_THROW(percolate(g, 1.5, rng), domain_error);
}

TEST(Percolate, RetainedCountIsBinomial) {
  Rng rng(8);
  std::map<int, long long> counts;
  for (int i = 0; i < 100000; ++i) ++counts[int(percolate(triangle(), 0.5, rng).edge_count())];
  const std::map<int, double> exact{{0, 0.125}, {1, 0.375}, {2, 0.375}, {3, 0.125}};
  EXPECT_LT(stats::tv_empirical(counts, exact), 0.02);
}

TEST(Components, SusceptibilityHandSums) {
  const MultiGraph g(3, {{0, 1}});
  const auto rep = components_and_stats(g);
  ASSERT_EQ(rep.components.size(), 2u);
  EXPECT_EQ(rep.components[0].size, 2u);
  EXPECT_NEAR(rep.susceptibility.s2, 5.0 / 3.0, 1e-15);
  EXPECT_NEAR(rep.susceptibility.s3, 3.0, 1e-15);
  EXPECT_NEAR(rep.susceptibility.spr, 5.0 / 3.0, 1e-15);
}

TEST(Components, PathDistances) {
  const auto rep = components_and_stats(path3());
  EXPECT_NEAR(rep.susceptibility.Dstar, 8.0 / 3.0, 1e-15);
  EXPECT_EQ(rep.components[0].diameter, 2);
  EXPECT_EQ(rep.susceptibility.max_diameter, 2);
}

TEST(Components, Surplus) {
  EXPECT_EQ(components_and_stats(triangle()).components[0].surplus, 1);
  EXPECT_EQ(components_and_stats(path3()).components[0].surplus, 0);
  EXPECT_EQ(components_and_stats(MultiGraph(1, {{0, 0}})).components[0].surplus, 1);
}

TEST(Components, SampledDistancesAgreeWithExact) {
  Rng rng(9);
  std::vector<long long> d(3000, 3);
  const auto g = sample_cm(d, rng);
  ComponentOptions exact;
  exact.exact_cutoff = 100000;
  ComponentOptions sampled;
  sampled.exact_cutoff = 10;
  sampled.sampled_sources = 400;
  const auto a = components_and_stats(g, nullptr, exact).susceptibility;
  const auto b = components_and_stats(g, nullptr, sampled).susceptibility;
  EXPECT_GT(b.Dstar_stderr, 0.0);
  EXPECT_NEAR(b.Dstar, a.Dstar, 4.0 * b.Dstar_stderr);
  EXPECT_EQ(a.max_diameter, b.max_diameter);
}

TEST(Components, WeightedMasses) {
  const std::vector<double> w{2.0, 1.0, 0.5};
  const auto rep = components_and_stats(MultiGraph(3, {{0, 1}}), &w);
  EXPECT_NEAR(rep.components[0].mass, 3.0, 1e-15);
  EXPECT_NEAR(rep.susceptibility.s2, (9.0 + 0.25) / 3.0, 1e-15);
  EXPECT_NEAR(rep.susceptibility.spr, (3.0 * 2 + 0.5) / 3.0, 1e-15);
}

TEST(ExploreWalk, DoubleEdgeTrace) {
  Rng rng(10);
  const MultiGraph g(2, {{0, 1}, {0, 1}});
  const auto walk = explore_walk(g, nullptr, WalkStart{0}, rng);
  EXPECT_EQ(walk.steps, (std::vector<long long>{2, 2, 0}));
  ASSERT_EQ(walk.components.size(), 1u);
  EXPECT_EQ(walk.components[0].end - walk.components[0].start, 2u);
  EXPECT_EQ(walk.surplus_events.size(), 1u);
}

TEST(ExploreWalk, SingleEdgeTrace) {
  Rng rng(11);
  const MultiGraph g(2, {{0, 1}});
  const auto walk = explore_walk(g, nullptr, WalkStart{0}, rng);
  EXPECT_EQ(walk.steps, (std::vector<long long>{1, 0}));
  EXPECT_TRUE(walk.surplus_events.empty());
}

TEST(ExploreWalk, BoundariesMatchComponentEdgeCounts) {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 5 + uniform_index(rng, 46);
    std::vector<long long> d(n);
    for (auto& x : d) x = 1 + static_cast<long long>(uniform_index(rng, 4));
    if (std::accumulate(d.begin(), d.end(), 0LL) % 2) d[0] += 1;
    const auto g = sample_cm(d, rng);
    const auto walk = explore_walk(g, nullptr, WalkStart{}, rng);
    std::multiset<std::size_t> from_walk, from_bfs;
    long long surplus_walk = 0, surplus_bfs = 0;
    for (const auto& c : walk.components) from_walk.insert(c.end - c.start);
    for (const auto& c : components_and_stats(g).components) {
      from_bfs.insert(c.edge_count);
      surplus_bfs += c.surplus;
    }
    surplus_walk = static_cast<long long>(walk.surplus_events.size());
    EXPECT_EQ(from_walk, from_bfs);
    EXPECT_EQ(surplus_walk, surplus_bfs);
  }
}

TEST(ExploreWalk, LivePairingComponentSizesSumToN) {
  Rng rng(13);
  DegreeSequence seq;
  seq.d.assign(1000, 3);
  const auto walk = explore_walk(seq, nullptr, WalkStart{}, rng);
  std::size_t vertices = 0;
  long long edges = 0;
  for (const auto& c : walk.components) {
    vertices += c.vertices.size();
    edges += static_cast<long long>(c.end - c.start);
  }
  EXPECT_EQ(vertices, 1000u);
  EXPECT_EQ(edges, 1500);
}

TEST(EdgeList, RoundTripIsOneBased) {
  const MultiGraph g(4, {{0, 1}, {2, 2}});
  std::stringstream ss;
  write_edge_list(ss, g);
  EXPECT_NE(ss.str().find("1 2\n3 3\n"), std::string::npos);
  const auto back = read_edge_list(ss);
  EXPECT_EQ(back.n(), 4u);
  EXPECT_EQ(back.edges(), g.edges());
  std::stringstream bad("0 1\n");
  EXPECT_THROW(read_edge_list(bad), domain_error);
}

TEST(ComponentReportJson, Fields) {
  const auto j = component_report_json(components_and_stats(triangle()));
  EXPECT_EQ(j.at("component_count"), 1);
  EXPECT_EQ(j.at("components")[0].at("surplus"), 1);
  EXPECT_EQ(j.at("components")[0].at("vertices"), (std::vector<int>{1, 2, 3}));
}
