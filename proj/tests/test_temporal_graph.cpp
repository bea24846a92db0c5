#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "oracles.hpp"
#include "sessionkit/community.hpp"
#include "sessionkit/error.hpp"
#include "sessionkit/rng.hpp"
#include "sessionkit/synth.hpp"
#include "sessionkit/temporal_graph.hpp"

using namespace sessionkit;

namespace {

constexpr std::int64_t kDay0 = 15706LL * kMillisPerDay;

Session at(std::int32_t id, double start_sod, double end_sod, std::int32_t day = 0) {
  const std::int64_t base = kDay0 + day * kMillisPerDay;
  const auto start = base + static_cast<std::int64_t>(start_sod * 1000);
  auto end = base + static_cast<std::int64_t>(end_sod * 1000);
  if (end < start) end += kMillisPerDay;
  return make_session("u", id, start, end, 0);
}

double hms(int h, int m, int s = 0) { return h * 3600.0 + m * 60.0 + s; }

std::vector<Session> random_sessions(Rng& rng, int n) {
  std::vector<Session> out;
  for (int i = 0; i < n; ++i) {
    const double s = std::floor(rng.uniform(0, 86400));
    const double len = std::floor(rng.uniform(0, 3600));
    out.push_back(at(i + 1, s, std::fmod(s + len, 86400.0), static_cast<int>(rng.below(30))));
  }
  return out;
}

}  // namespace

TEST(CircDiff, MidnightNeighbours) { EXPECT_EQ(circ_diff(60, 86340), 120.0); }

TEST(CircDiff, Identity) {
  for (double x : {0.0, 1.0, 43200.0, 86399.0, 12345.678}) EXPECT_EQ(circ_diff(x, x), 0.0);
}

TEST(CircDiff, Antipodal) { EXPECT_EQ(circ_diff(0, 43200), 43200.0); }

TEST(CircDiff, RejectsOutOfRange) {
  EXPECT_THROW(circ_diff(-1, 0), DomainError);
  EXPECT_THROW(circ_diff(0, 86400), DomainError);
  EXPECT_THROW(circ_diff(std::numeric_limits<double>::quiet_NaN(), 0), DomainError);
  EXPECT_THROW(circ_diff(0, std::numeric_limits<double>::infinity()), DomainError);
}

TEST(CircDiff, Properties) {
  Rng rng(1);
  for (int i = 0; i < 20000; ++i) {
    const double a = rng.uniform(0, 86400);
    const double b = rng.uniform(0, 86400);
    const double c = rng.uniform(0, 86400);
    const double ab = circ_diff(a, b);
    EXPECT_EQ(ab, circ_diff(b, a));
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 43200.0);
    EXPECT_NEAR(ab, oracle::clock_gap(a, b), 1e-9);
    EXPECT_EQ(ab == 0.0, a == b);
    EXPECT_LE(ab, circ_diff(a, c) + circ_diff(c, b) + 1e-9);
  }
}

TEST(SessionDistance, IdenticalIsZero) {
  EXPECT_EQ(session_distance(at(1, hms(8, 0), hms(8, 5)), at(2, hms(8, 0), hms(8, 5))), 0.0);
}

TEST(SessionDistance, OneHourApart) {
  const double d = session_distance(at(1, hms(8, 0), hms(8, 0)), at(2, hms(9, 0), hms(9, 0)));
  EXPECT_NEAR(d, std::hypot(3600.0, 3600.0), 1e-9);
  EXPECT_NEAR(d, 5091.17, 0.01);
}

TEST(SessionDistance, MidnightWrap) {
  const double d =
      session_distance(at(1, hms(23, 59), hms(23, 59, 30)), at(2, hms(0, 1), hms(0, 1, 30)));
  EXPECT_NEAR(d, std::hypot(120.0, 120.0), 1e-9);
  EXPECT_NEAR(d, 169.71, 0.01);
}

TEST(SessionDistance, CalendarDayIrrelevant) {
  Rng rng(2);
  for (int i = 0; i < 2000; ++i) {
    const double s1 = std::floor(rng.uniform(0, 86400));
    const double e1 = std::floor(rng.uniform(0, 86400));
    const double s2 = std::floor(rng.uniform(0, 86400));
    const double e2 = std::floor(rng.uniform(0, 86400));
    const Session p = at(1, s1, e1);
    const Session q = at(2, s2, e2);
    const double d = session_distance(p, q);
    EXPECT_NEAR(d, oracle::pair_distance(s1, e1, s2, e2), 1e-9);
    Session q_later = make_session("u", 2, q.start_ms + kMillisPerDay, q.end_ms + kMillisPerDay, 0);
    EXPECT_EQ(session_distance(p, q_later), d);
  }
}

TEST(WeightedGraph, RejectsInvalidEdges) {
  WeightedGraph g(3);
  EXPECT_THROW(g.add_edge(0, 0, 1.0), InvalidSpec);
  EXPECT_THROW(g.add_edge(0, 1, 0.0), InvalidSpec);
  EXPECT_THROW(g.add_edge(0, 1, -1.0), InvalidSpec);
  EXPECT_THROW(g.add_edge(0, 3, 1.0), InvalidSpec);
  g.add_edge(0, 1, 1.0);
  g.add_edge(1, 0, 2.0);
  EXPECT_THROW(g.validate(), InvalidSpec);
}

TEST(SessionGraph, CompleteGraphWeights) {
  std::vector<Session> s{at(1, hms(8, 0), hms(8, 10)), at(2, hms(12, 0), hms(12, 30)),
                         at(3, hms(20, 0), hms(20, 5))};
  WeightedGraph g = build_session_graph(s, Sparsify::complete(), 1.0);
  ASSERT_EQ(g.edges().size(), 3u);
  for (const Edge& e : g.edges()) {
    EXPECT_DOUBLE_EQ(e.w, 1.0 / session_distance(s[e.u], s[e.v]));
  }
  g.validate();
}

TEST(SessionGraph, IdenticalTimesHitTheFloor) {
  std::vector<Session> s{at(1, hms(8, 0), hms(8, 10)), at(2, hms(8, 0), hms(8, 10), 1)};
  WeightedGraph unit = build_session_graph(s, Sparsify::complete(), 1.0);
  ASSERT_EQ(unit.edges().size(), 1u);
  EXPECT_EQ(unit.edges()[0].w, 1.0);
  WeightedGraph coarse = build_session_graph(s, Sparsify::complete());
  EXPECT_EQ(coarse.edges()[0].w, 1.0 / kDefaultEpsilonS);
}

TEST(SessionGraph, SingleSessionHasNoEdges) {
  std::vector<Session> s{at(1, 100, 200)};
  WeightedGraph g = build_session_graph(s, Sparsify::complete());
  EXPECT_EQ(g.node_count(), 1);
  EXPECT_TRUE(g.edges().empty());
}

TEST(SessionGraph, WeightsPositiveAndBounded) {
  Rng rng(3);
  for (double eps : {1.0, 900.0}) {
    std::vector<Session> s = random_sessions(rng, 40);
    WeightedGraph g = build_session_graph(s, Sparsify::complete(), eps);
    EXPECT_EQ(g.edges().size(), 40u * 39u / 2u);
    for (const Edge& e : g.edges()) {
      EXPECT_GT(e.w, 0.0);
      EXPECT_LE(e.w, 1.0 / eps);
    }
  }
}

TEST(SessionGraph, KnnOneMatchesBruteForce) {
  std::vector<Session> s{at(1, 100, 100), at(2, 400, 400), at(3, 1000, 1000),
                         at(4, 50000, 50000), at(5, 50300, 50300)};
  WeightedGraph g = build_session_graph(s, Sparsify::knn(1), 1.0);
  EXPECT_LE(g.edges().size(), 5u);
  std::set<std::pair<std::int32_t, std::int32_t>> expected;
  for (std::int32_t i = 0; i < 5; ++i) {
    std::int32_t best = -1;
    double best_d = 1e300;
    for (std::int32_t j = 0; j < 5; ++j) {
      if (j == i) continue;
      const double d = oracle::pair_distance(s[i].start_sod, s[i].end_sod, s[j].start_sod, s[j].end_sod);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    expected.emplace(std::min(i, best), std::max(i, best));
  }
  EXPECT_EQ(oracle::edge_pairs(g), expected);
}

TEST(SessionGraph, KnnRandomMatchesBruteForce) {
  Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 5 + static_cast<int>(rng.below(40));
    const int k = 1 + static_cast<int>(rng.below(6));
    std::vector<Session> s = random_sessions(rng, n);
    WeightedGraph g = build_session_graph(s, Sparsify::knn(k), 1.0);
    g.validate();

    std::set<std::pair<std::int32_t, std::int32_t>> expected;
    for (int i = 0; i < n; ++i) {
      std::vector<std::pair<double, int>> by_distance;
      for (int j = 0; j < n; ++j) {
        if (j != i) by_distance.emplace_back(session_distance(s[i], s[j]), j);
      }
      std::sort(by_distance.begin(), by_distance.end());
      const int keep = std::min<int>(k, n - 1);
      for (int r = 0; r < keep; ++r) {
        const int j = by_distance[r].second;
        expected.emplace(std::min(i, j), std::max(i, j));
      }
      // A pair strictly closer than the kth neighbour is always kept.
      const double kth = by_distance[keep - 1].first;
      for (const auto& [d, j] : by_distance) {
        if (d < kth) EXPECT_TRUE(oracle::edge_pairs(g).count({std::min(i, j), std::max(i, j)}));
      }
    }
    EXPECT_EQ(oracle::edge_pairs(g), expected);
    for (const Edge& e : g.edges()) {
      EXPECT_DOUBLE_EQ(e.w, 1.0 / std::max(session_distance(s[e.u], s[e.v]), 1.0));
    }
  }
}

TEST(SessionGraph, KnnWithLargeKIsComplete) {
  Rng rng(5);
  std::vector<Session> s = random_sessions(rng, 12);
  WeightedGraph knn = build_session_graph(s, Sparsify::knn(50), 1.0);
  WeightedGraph full = build_session_graph(s, Sparsify::complete(), 1.0);
  EXPECT_EQ(oracle::edge_pairs(knn), oracle::edge_pairs(full));
}

TEST(GraphOptions, ThresholdSwitchesToKnn) {
  GraphOptions o;
  o.knn_threshold = 10;
  o.knn_k = 3;
  EXPECT_EQ(o.sparsify_for(10).mode, Sparsify::Mode::Complete);
  EXPECT_EQ(o.sparsify_for(11).mode, Sparsify::Mode::Knn);
  EXPECT_EQ(o.sparsify_for(11).k, 3);
}

TEST(SelectCentroid, Singleton) {
  std::vector<Session> s{at(7, 100, 200)};
  EXPECT_EQ(select_centroid(s), 0u);
}

TEST(SelectCentroid, MiddleOfThree) {
  std::vector<Session> s{at(1, 100, 100), at(2, 200, 200), at(3, 300, 300)};
  EXPECT_EQ(select_centroid(s), 1u);
}

TEST(SelectCentroid, TieGoesToLowestSessionId) {
  std::vector<Session> s{at(9, 100, 100), at(4, 200, 200)};
  EXPECT_EQ(s[select_centroid(s)].session_id, 4);
}

TEST(SelectCentroid, MatchesClosenessEnumeration) {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Session> s = random_sessions(rng, 2 + static_cast<int>(rng.below(15)));
    std::size_t best = 0;
    double best_closeness = -1;
    for (std::size_t i = 0; i < s.size(); ++i) {
      double sum = 0;
      for (std::size_t j = 0; j < s.size(); ++j) {
        if (i != j) sum += oracle::pair_distance(s[i].start_sod, s[i].end_sod, s[j].start_sod, s[j].end_sod);
      }
      const double closeness = static_cast<double>(s.size() - 1) / sum;
      if (closeness > best_closeness) {
        best_closeness = closeness;
        best = i;
      }
    }
    EXPECT_EQ(select_centroid(s), best);
  }
}

TEST(UserDistance, IdenticalProfiles) {
  std::vector<Centroid> a{{hms(8, 0), hms(8, 10)}};
  EXPECT_EQ(user_distance(a, a), 0.0);
}

TEST(UserDistance, TwelveHoursApart) {
  std::vector<Centroid> a{{hms(8, 0), hms(8, 10)}};
  std::vector<Centroid> b{{hms(20, 0), hms(20, 10)}};
  EXPECT_NEAR(user_distance(a, b), 43200.0 * std::sqrt(2.0), 1e-6);
  EXPECT_NEAR(user_distance(a, b), 61094.03, 0.01);
}

TEST(UserDistance, MeanOverAllPairs) {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Centroid> a(2), b(3);
    for (auto* side : {&a, &b}) {
      for (auto& c : *side) c = {rng.uniform(0, 86400), rng.uniform(0, 86400)};
    }
    double sum = 0;
    for (const auto& u : a) {
      for (const auto& v : b) sum += oracle::pair_distance(u.start_sod, u.end_sod, v.start_sod, v.end_sod);
    }
    EXPECT_NEAR(user_distance(a, b), sum / 6.0, 1e-9);
    EXPECT_NEAR(user_distance(a, b), user_distance(b, a), 1e-9);
  }
}

TEST(UserDistance, EmptyProfileThrows) {
  std::vector<Centroid> a{{1, 2}};
  std::vector<Centroid> none;
  EXPECT_THROW(user_distance(a, none), EmptyProfile);
  EXPECT_THROW(user_distance(none, a), EmptyProfile);
}

TEST(UserGraph, TwoUsersOneEdge) {
  std::vector<UserProfile> users{{"a", {{100, 200}}}, {"b", {{5000, 6000}}}};
  WeightedGraph g = build_user_graph(users, 1.0);
  ASSERT_EQ(g.edges().size(), 1u);
  EXPECT_DOUBLE_EQ(g.edges()[0].w, 1.0 / oracle::pair_distance(100, 200, 5000, 6000));
}

TEST(UserGraph, IdenticalPairCarriesCappedWeight) {
  std::vector<UserProfile> users{{"a", {{100, 200}}}, {"b", {{100, 200}}}, {"c", {{40000, 41000}}}};
  WeightedGraph g = build_user_graph(users, 1.0);
  ASSERT_EQ(g.edges().size(), 3u);
  double max_w = 0;
  for (const Edge& e : g.edges()) {
    max_w = std::max(max_w, e.w);
    if ((e.u == 0 && e.v == 1) || (e.u == 1 && e.v == 0)) EXPECT_EQ(e.w, 1.0);
  }
  EXPECT_EQ(max_w, 1.0);
}

TEST(UserGraph, PlantedArchetypesOrderWeights) {
  std::vector<UserProfile> users;
  std::vector<int> label;
  int index = 0;
  for (const char* name : {"morning", "evening"}) {
    for (int rep = 0; rep < 2; ++rep, ++index) {
      const std::string id = "u" + std::to_string(index);
      auto sessions = gen_user_sessions(builtin_archetype(name), id, 100 + index);
      UserClustering c = cluster_sessions(sessions, GraphOptions{});
      UserProfile p{id, {}};
      for (const auto& cl : c.clusters) p.centroids.push_back(cl.centroid());
      users.push_back(p);
      label.push_back(name[0] == 'm' ? 0 : 1);
    }
  }
  WeightedGraph g = build_user_graph(users, 1.0);
  double min_within = 1e300;
  double max_cross = 0;
  for (const Edge& e : g.edges()) {
    if (label[e.u] == label[e.v]) {
      min_within = std::min(min_within, e.w);
    } else {
      max_cross = std::max(max_cross, e.w);
    }
  }
  EXPECT_GT(min_within, max_cross);
}
