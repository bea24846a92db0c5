#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "oracles.hpp"
#include "sessionkit/community.hpp"
#include "sessionkit/error.hpp"
#include "sessionkit/rng.hpp"
#include "sessionkit/synth.hpp"

using namespace sessionkit;

namespace {

WeightedGraph triangle() {
  WeightedGraph g(3);
  g.add_edge(0, 1, 1);
  g.add_edge(1, 2, 1);
  g.add_edge(0, 2, 1);
  return g;
}

WeightedGraph two_triangles(bool bridge) {
  WeightedGraph g(6);
  for (int base : {0, 3}) {
    g.add_edge(base, base + 1, 1);
    g.add_edge(base + 1, base + 2, 1);
    g.add_edge(base, base + 2, 1);
  }
  if (bridge) g.add_edge(2, 3, 1);
  return g;
}

constexpr std::int64_t kDay0 = 15706LL * kMillisPerDay;

Session at_day(std::int32_t id, int day, double start_sod, double length_s) {
  const std::int64_t start = kDay0 + day * kMillisPerDay + static_cast<std::int64_t>(start_sod * 1000);
  return make_session("u", id, start, start + static_cast<std::int64_t>(length_s * 1000), 0);
}

std::vector<Session> renumber(std::vector<Session> s) {
  std::sort(s.begin(), s.end(), [](const Session& a, const Session& b) { return a.start_ms < b.start_ms; });
  for (std::size_t i = 0; i < s.size(); ++i) s[i].session_id = static_cast<std::int32_t>(i + 1);
  return s;
}

std::vector<Session> three_slot_sessions(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Session> s;
  for (int day = 0; day < 30; ++day) {
    for (double centre : {9 * 3600.0, 13 * 3600.0, 21 * 3600.0}) {
      s.push_back(at_day(0, day, std::floor(centre + rng.uniform(-600, 600)), 300));
    }
  }
  return renumber(s);
}

UserProfile profile_of(const std::string& id, const std::vector<Session>& sessions) {
  UserClustering c = cluster_sessions(sessions, GraphOptions{});
  UserProfile p{id, {}};
  for (const auto& cl : c.clusters) p.centroids.push_back(cl.centroid());
  return p;
}

}  // namespace

TEST(Modularity, SingleCommunityIsZero) {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    WeightedGraph g = oracle::random_graph(rng, 2 + static_cast<int>(rng.below(7)), 0.6);
    if (g.edges().empty()) continue;
    std::vector<std::int32_t> one(static_cast<std::size_t>(g.node_count()), 0);
    EXPECT_NEAR(modularity(g, one), 0.0, 1e-15);
  }
}

TEST(Modularity, TwoTrianglesWithBridge) {
  WeightedGraph g = two_triangles(true);
  std::vector<std::int32_t> split{0, 0, 0, 1, 1, 1};
  const double expected = 2 * (3.0 / 7.0 - std::pow(7.0 / 14.0, 2));
  EXPECT_NEAR(modularity(g, split), expected, 1e-12);
  EXPECT_NEAR(modularity(g, split), 0.3571, 1e-4);

  oracle::Optimum best = oracle::exhaustive_optimum(g);
  EXPECT_NEAR(best.q, expected, 1e-12);
  EXPECT_TRUE(oracle::same_partition(best.assignment, split));
}

TEST(Modularity, SingletonTriangle) {
  std::vector<std::int32_t> singletons{0, 1, 2};
  EXPECT_NEAR(modularity(triangle(), singletons), -1.0 / 3.0, 1e-12);
}

TEST(Modularity, MatchesNewmanDoubleSum) {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(8));
    WeightedGraph g = oracle::random_graph(rng, n, 0.5);
    if (g.edges().empty()) continue;
    std::vector<std::int32_t> a(static_cast<std::size_t>(n));
    for (auto& c : a) c = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(n)));
    const double expected = oracle::newman_q(g, a);
    EXPECT_NEAR(modularity(g, a), expected, 1e-9 * std::max(1.0, std::abs(expected)));
  }
}

TEST(Modularity, LabelsAreOnlyNames) {
  WeightedGraph g = two_triangles(true);
  std::vector<std::int32_t> a{0, 0, 0, 1, 1, 1};
  std::vector<std::int32_t> b{7, 7, 7, 2, 2, 2};
  EXPECT_DOUBLE_EQ(modularity(g, a), modularity(g, b));
}

TEST(Modularity, WithinMathematicalRange) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(7));
    WeightedGraph g = oracle::random_graph(rng, n, 0.7);
    if (g.edges().empty()) continue;
    oracle::for_each_partition(n, [&](const std::vector<std::int32_t>& a) {
      const double q = modularity(g, a);
      EXPECT_GE(q, -0.5 - 1e-12);
      EXPECT_LE(q, 1.0);
    });
  }
}

TEST(Modularity, Errors) {
  WeightedGraph empty(3);
  std::vector<std::int32_t> a{0, 1, 2};
  EXPECT_THROW(modularity(empty, a), EmptyGraph);
  std::vector<std::int32_t> short_a{0, 1};
  EXPECT_THROW(modularity(triangle(), short_a), InvalidSpec);
}

TEST(Louvain, TwoDisjointTriangles) {
  WeightedGraph g = two_triangles(false);
  Partition p = louvain(g);
  EXPECT_EQ(p.community_count, 2);
  EXPECT_TRUE(oracle::same_partition(p.assignment, std::vector<std::int32_t>{0, 0, 0, 1, 1, 1}));
  EXPECT_NEAR(p.modularity, oracle::exhaustive_optimum(g).q, 1e-12);
}

TEST(Louvain, SingleNode) {
  Partition p = louvain(WeightedGraph(1));
  EXPECT_EQ(p.community_count, 1);
  EXPECT_EQ(p.assignment, std::vector<std::int32_t>{0});
  EXPECT_EQ(p.modularity, 0.0);
}

TEST(Louvain, EdgelessGraphGivesSingletons) {
  Partition p = louvain(WeightedGraph(4));
  EXPECT_EQ(p.community_count, 4);
  EXPECT_EQ(p.modularity, 0.0);
}

TEST(Louvain, PlantedThreeBlocks) {
  std::vector<std::int32_t> blocks{10, 10, 10};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    PlantedGraph pg = gen_planted_graph(blocks, 1.0, 0.01, seed);
    Partition p = louvain(pg.graph, seed);
    EXPECT_TRUE(oracle::same_partition(p.assignment, pg.labels)) << "seed " << seed;
  }
}

TEST(Louvain, NearOptimalOnSmallGraphs) {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(9));
    WeightedGraph g = oracle::random_graph(rng, n, 0.5);
    if (g.edges().empty()) continue;
    const double best = oracle::exhaustive_optimum(g).q;
    for (std::uint64_t seed : {0ULL, 17ULL}) {
      Partition p = louvain(g, seed);
      EXPECT_GE(p.modularity, 0.95 * best - 1e-12) << "trial " << trial;
      std::vector<std::int32_t> singletons(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) singletons[static_cast<std::size_t>(i)] = i;
      EXPECT_GE(p.modularity, modularity(g, singletons) - 1e-12);
      EXPECT_GE(p.modularity, -1e-12);
    }
  }
}

TEST(Louvain, ReportedQMatchesModularity) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    WeightedGraph g = oracle::random_graph(rng, 5 + static_cast<int>(rng.below(40)), 0.3);
    if (g.edges().empty()) continue;
    Partition p = louvain(g, trial);
    const double q = oracle::newman_q(g, p.assignment);
    EXPECT_NEAR(p.modularity, q, 1e-9 * std::max(1.0, std::abs(q)));
  }
}

TEST(Louvain, AssignmentIsCompact) {
  Rng rng(6);
  WeightedGraph g = oracle::random_graph(rng, 30, 0.2);
  Partition p = louvain(g, 3);
  std::set<std::int32_t> labels(p.assignment.begin(), p.assignment.end());
  EXPECT_EQ(static_cast<std::int32_t>(labels.size()), p.community_count);
  EXPECT_EQ(*labels.begin(), 0);
  EXPECT_EQ(*labels.rbegin(), p.community_count - 1);
  EXPECT_EQ(p.assignment[0], 0);
}

TEST(Louvain, TraceNonDecreasing) {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    WeightedGraph g = oracle::random_graph(rng, 10 + static_cast<int>(rng.below(50)), 0.2);
    if (g.edges().empty()) continue;
    LouvainTrace trace;
    Partition p = louvain(g, trial, &trace);
    ASSERT_FALSE(trace.sweep_modularity.empty());
    EXPECT_GE(trace.levels, 1);
    for (std::size_t i = 1; i < trace.sweep_modularity.size(); ++i) {
      EXPECT_GE(trace.sweep_modularity[i], trace.sweep_modularity[i - 1] - 1e-12);
    }
    EXPECT_NEAR(trace.sweep_modularity.back(), p.modularity, 1e-9);
  }
}

TEST(Louvain, Deterministic) {
  Rng rng(8);
  WeightedGraph g = oracle::random_graph(rng, 80, 0.1);
  for (std::uint64_t seed : {0ULL, 1ULL, 42ULL}) {
    Partition a = louvain(g, seed);
    Partition b = louvain(g, seed);
    EXPECT_EQ(a.assignment, b.assignment);
    EXPECT_EQ(a.modularity, b.modularity);
  }
}

TEST(Compact, FirstAppearanceOrder) {
  std::vector<std::int32_t> a{5, 5, 2, 9, 2};
  Partition p = compact(a);
  EXPECT_EQ(p.assignment, (std::vector<std::int32_t>{0, 0, 1, 2, 1}));
  EXPECT_EQ(p.community_count, 3);
}

TEST(ClusterSessions, ThreePlantedSlots) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::vector<Session> s = three_slot_sessions(seed);
    UserClustering c = cluster_sessions(s, GraphOptions{});
    ASSERT_EQ(c.clusters.size(), 3u) << "seed " << seed;
    EXPECT_TRUE(c.noise.empty());
    EXPECT_GT(c.modularity, 0.5);
    for (const auto& cl : c.clusters) {
      EXPECT_EQ(cl.size, 30);
      EXPECT_EQ(cl.session_days.size(), 30u);
    }
    EXPECT_EQ(c.node_count, 90);
    EXPECT_EQ(c.edge_count, 90u * 89u / 2u);
  }
}

TEST(ClusterSessions, SingleSessionIsNoise) {
  std::vector<Session> s{at_day(1, 0, 3600, 60)};
  UserClustering c = cluster_sessions(s, GraphOptions{});
  EXPECT_TRUE(c.clusters.empty());
  ASSERT_EQ(c.noise.size(), 1u);
  EXPECT_TRUE(c.noise[0].is_noise);
  EXPECT_EQ(c.noise[0].size, 1);
  EXPECT_EQ(c.modularity, 0.0);
}

TEST(ClusterSessions, MidnightAlternation) {
  std::vector<Session> s;
  for (int day = 0; day < 30; ++day) {
    s.push_back(at_day(0, day, day % 2 == 0 ? 23 * 3600 + 55 * 60 : 5 * 60, 120));
  }
  UserClustering c = cluster_sessions(renumber(s), GraphOptions{});
  ASSERT_EQ(c.clusters.size(), 1u);
  EXPECT_EQ(c.clusters[0].size, 30);
  EXPECT_TRUE(c.noise.empty());
}

TEST(ClusterSessions, SummariesAreConsistent) {
  std::vector<Session> s = gen_user_sessions(builtin_archetype("evening"), "u", 12);
  UserClustering c = cluster_sessions(s, GraphOptions{});
  std::set<std::int32_t> seen;
  std::int32_t previous_size = INT32_MAX;
  double previous_start = -1;
  std::int32_t expected_id = 1;
  for (const auto& cl : c.clusters) {
    EXPECT_EQ(cl.cluster_id, expected_id++);
    EXPECT_EQ(cl.size, static_cast<std::int32_t>(cl.member_session_ids.size()));
    EXPECT_GE(cl.size, 2);
    EXPECT_FALSE(cl.is_noise);
    EXPECT_TRUE(std::find(cl.member_session_ids.begin(), cl.member_session_ids.end(),
                          cl.centroid_session_id) != cl.member_session_ids.end());
    const Session& centre = s[static_cast<std::size_t>(cl.centroid_session_id - 1)];
    EXPECT_EQ(centre.start_sod, cl.centroid_start_sod);
    EXPECT_EQ(centre.end_sod, cl.centroid_end_sod);

    std::set<std::int32_t> days;
    for (std::int32_t id : cl.member_session_ids) {
      EXPECT_TRUE(seen.insert(id).second);
      days.insert(s[static_cast<std::size_t>(id - 1)].day_key.days);
    }
    EXPECT_EQ(days.size(), cl.session_days.size());

    EXPECT_TRUE(cl.size < previous_size || (cl.size == previous_size && cl.centroid_start_sod >= previous_start));
    previous_size = cl.size;
    previous_start = cl.centroid_start_sod;
  }
  for (const auto& n : c.noise) {
    EXPECT_EQ(n.cluster_id, expected_id++);
    EXPECT_TRUE(seen.insert(n.member_session_ids[0]).second);
  }
  EXPECT_EQ(seen.size(), s.size());
}

TEST(ClusterSessions, RecordsMirrorSummaries) {
  std::vector<Session> s = three_slot_sessions(9);
  s.push_back(at_day(0, 3, 4 * 3600, 60));
  s = renumber(s);
  UserClustering c = cluster_sessions(s, GraphOptions{});
  std::vector<ClusterRecord> records = to_records(c);
  ASSERT_EQ(records.size(), c.clusters.size() + c.noise.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(records[i].is_noise, i >= c.clusters.size());
    EXPECT_EQ(records[i].modularity, c.modularity);
  }
  EXPECT_EQ(records[0].n_session_days, 30);

  UserClustering lone = cluster_sessions(std::vector<Session>{s[0]}, GraphOptions{});
  std::vector<ClusterRecord> lone_records = to_records(lone);
  ASSERT_EQ(lone_records.size(), 1u);
  EXPECT_TRUE(lone_records[0].is_noise);
}

TEST(ClusterSessions, GraphOut) {
  std::vector<Session> s = three_slot_sessions(2);
  WeightedGraph g;
  UserClustering c = cluster_sessions(s, GraphOptions{}, 0, &g);
  EXPECT_EQ(g.node_count(), 90);
  EXPECT_EQ(g.edges().size(), c.edge_count);
}

TEST(ClusterSessions, KnnAboveThreshold) {
  std::vector<Session> s = three_slot_sessions(3);
  GraphOptions o;
  o.knn_threshold = 50;
  o.knn_k = 10;
  UserClustering c = cluster_sessions(s, o);
  EXPECT_LT(c.edge_count, 90u * 89u / 2u);
  EXPECT_GE(c.clusters.size(), 3u);
  EXPECT_TRUE(c.noise.empty());
  // Sessions were generated slot by slot, so id modulo 3 names the slot.
  for (const auto& cl : c.clusters) {
    std::set<std::int32_t> slots;
    for (std::int32_t id : cl.member_session_ids) slots.insert((id - 1) % 3);
    EXPECT_EQ(slots.size(), 1u);
  }
}

TEST(UserCommunities, TwoIdenticalUsers) {
  std::vector<UserProfile> users{{"a", {{3600, 3900}}}, {"b", {{3600, 3900}}}};
  UserCommunities uc = detect_user_communities(users);
  ASSERT_EQ(uc.communities.size(), 1u);
  EXPECT_EQ(uc.communities[0].size, 2);
  EXPECT_TRUE(uc.communities[0].small);
  EXPECT_DOUBLE_EQ(uc.communities[0].share, 1.0);
  EXPECT_EQ(uc.membership[0].second, uc.membership[1].second);
}

TEST(UserCommunities, EmptyProfilesExcluded) {
  std::vector<UserProfile> users{{"a", {{3600, 3900}}}, {"empty", {}}, {"b", {{3700, 3900}}}};
  UserCommunities uc = detect_user_communities(users);
  EXPECT_EQ(uc.excluded_users, std::vector<std::string>{"empty"});
  EXPECT_EQ(uc.membership.size(), 2u);
}

TEST(UserCommunities, ThreeArchetypes) {
  std::vector<UserProfile> users;
  std::vector<std::int32_t> truth;
  const std::vector<std::string> names{"morning", "evening", "allday"};
  for (std::size_t a = 0; a < names.size(); ++a) {
    for (int i = 0; i < 20; ++i) {
      const std::string id = names[a] + std::to_string(i);
      users.push_back(profile_of(id, gen_user_sessions(builtin_archetype(names[a]), id, 1000 + a * 100 + i)));
      truth.push_back(static_cast<std::int32_t>(a));
    }
  }
  UserCommunities uc = detect_user_communities(users, 0);
  std::vector<std::int32_t> found;
  for (const auto& [user, community] : uc.membership) found.push_back(community);
  EXPECT_GE(oracle::adjusted_rand_index(found, truth), 0.9);
  EXPECT_EQ(uc.communities.size(), 3u);

  std::int32_t previous = INT32_MAX;
  for (std::size_t i = 0; i < uc.communities.size(); ++i) {
    EXPECT_EQ(uc.communities[i].community_id, static_cast<std::int32_t>(i + 1));
    EXPECT_LE(uc.communities[i].size, previous);
    previous = uc.communities[i].size;
    EXPECT_FALSE(uc.communities[i].small);
  }
  EXPECT_GT(uc.modularity, 0.0);
}

TEST(AdjustedRand, OracleSanity) {
  std::vector<std::int32_t> a{0, 0, 1, 1};
  std::vector<std::int32_t> b{5, 5, 3, 3};
  EXPECT_DOUBLE_EQ(oracle::adjusted_rand_index(a, b), 1.0);
  std::vector<std::int32_t> c{0, 1, 0, 1};
  EXPECT_LT(oracle::adjusted_rand_index(a, c), 0.1);
}
