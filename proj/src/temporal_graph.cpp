#include "sessionkit/temporal_graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sessionkit/error.hpp"

namespace sessionkit {
namespace {

void check_sod(double sod) {
  if (!(sod >= 0.0 && sod < static_cast<double>(kSecondsPerDay))) {
    throw DomainError("seconds-of-day out of range [0, 86400): " + std::to_string(sod));
  }
}

}  // namespace

double circ_diff(double a_sod, double b_sod) {
  check_sod(a_sod);
  check_sod(b_sod);
  const double d = std::fabs(a_sod - b_sod);
  return std::min(d, static_cast<double>(kSecondsPerDay) - d);
}

double clock_distance(double start_a, double end_a, double start_b, double end_b) {
  const double ds = circ_diff(start_a, start_b);
  const double de = circ_diff(end_a, end_b);
  return std::sqrt(ds * ds + de * de);
}

double session_distance(const Session& p, const Session& q) {
  return clock_distance(p.start_sod, p.end_sod, q.start_sod, q.end_sod);
}

double WeightedGraph::total_weight() const {
  double w = 0;
  for (const Edge& e : edges_) w += e.w;
  return w;
}

void WeightedGraph::add_edge(std::int32_t u, std::int32_t v, double w) {
  if (u < 0 || v < 0 || u >= node_count_ || v >= node_count_) {
    throw InvalidSpec("edge endpoint out of range");
  }
  if (u == v) throw InvalidSpec("self-loop on node " + std::to_string(u));
  if (!(w > 0) || !std::isfinite(w)) throw InvalidSpec("edge weight must be positive and finite");
  edges_.push_back(Edge{u, v, w});
}

void WeightedGraph::validate() const {
  std::vector<std::pair<std::int32_t, std::int32_t>> pairs;
  pairs.reserve(edges_.size());
  for (const Edge& e : edges_) {
    if (e.u == e.v) throw InvalidSpec("self-loop on node " + std::to_string(e.u));
    if (!(e.w > 0)) throw InvalidSpec("non-positive edge weight");
    pairs.emplace_back(std::min(e.u, e.v), std::max(e.u, e.v));
  }
  std::sort(pairs.begin(), pairs.end());
  if (std::adjacent_find(pairs.begin(), pairs.end()) != pairs.end()) {
    throw InvalidSpec("parallel edges");
  }
}

Sparsify GraphOptions::sparsify_for(std::size_t node_count) const {
  if (node_count > static_cast<std::size_t>(knn_threshold)) return Sparsify::knn(knn_k);
  return Sparsify::complete();
}

WeightedGraph build_session_graph(std::span<const Session> sessions, Sparsify sparsify,
                                  double epsilon_s) {
  const auto n = static_cast<std::int32_t>(sessions.size());
  WeightedGraph g(n);
  auto weight = [epsilon_s](double d) { return 1.0 / std::max(d, epsilon_s); };

  if (sparsify.mode == Sparsify::Mode::Complete || sparsify.k >= n - 1) {
    for (std::int32_t i = 0; i < n; ++i) {
      for (std::int32_t j = i + 1; j < n; ++j) {
        g.add_edge(i, j, weight(session_distance(sessions[i], sessions[j])));
      }
    }
    return g;
  }

  // Each node keeps its k nearest neighbours (ties by index); the union over
  // both directions becomes the edge set.
  const auto k = static_cast<std::size_t>(std::max(sparsify.k, 1));
  struct Candidate {
    double d;
    std::int32_t u, v;
  };
  std::vector<Candidate> kept;
  kept.reserve(static_cast<std::size_t>(n) * k);
  std::vector<std::pair<double, std::int32_t>> row(static_cast<std::size_t>(n) - 1);
  for (std::int32_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (std::int32_t j = 0; j < n; ++j) {
      if (j != i) row[r++] = {session_distance(sessions[i], sessions[j]), j};
    }
    std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k - 1), row.end());
    for (std::size_t t = 0; t < k; ++t) {
      const auto [d, j] = row[t];
      kept.push_back({d, std::min(i, j), std::max(i, j)});
    }
  }
  std::sort(kept.begin(), kept.end(), [](const Candidate& a, const Candidate& b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  });
  kept.erase(std::unique(kept.begin(), kept.end(),
                         [](const Candidate& a, const Candidate& b) {
                           return a.u == b.u && a.v == b.v;
                         }),
             kept.end());
  for (const Candidate& c : kept) g.add_edge(c.u, c.v, weight(c.d));
  return g;
}

std::size_t select_centroid(std::span<const Session> members) {
  const std::size_t m = members.size();
  if (m <= 1) return 0;
  std::vector<double> total(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double d = session_distance(members[i], members[j]);
      total[i] += d;
      total[j] += d;
    }
  }
  // Closeness (m - 1) / total is maximal where total is minimal. Sums equal up
  // to rounding count as ties.
  std::size_t best = 0;
  for (std::size_t i = 1; i < m; ++i) {
    const double tol = 1e-12 * std::max(total[i], total[best]);
    if (total[i] < total[best] - tol) {
      best = i;
    } else if (std::fabs(total[i] - total[best]) <= tol &&
               members[i].session_id < members[best].session_id) {
      best = i;
    }
  }
  return best;
}

double user_distance(std::span<const Centroid> a, std::span<const Centroid> b) {
  if (a.empty() || b.empty()) throw EmptyProfile("user has no session-clusters");
  double sum = 0;
  for (const Centroid& u : a) {
    for (const Centroid& v : b) {
      sum += clock_distance(u.start_sod, u.end_sod, v.start_sod, v.end_sod);
    }
  }
  return sum / static_cast<double>(a.size() * b.size());
}

double user_distance(std::span<const ClusterSummary> a, std::span<const ClusterSummary> b) {
  std::vector<Centroid> ca, cb;
  for (const auto& c : a) ca.push_back(c.centroid());
  for (const auto& c : b) cb.push_back(c.centroid());
  return user_distance(ca, cb);
}

WeightedGraph build_user_graph(std::span<const UserProfile> users, double epsilon_s) {
  const auto n = static_cast<std::int32_t>(users.size());
  WeightedGraph g(n);
  for (std::int32_t i = 0; i < n; ++i) {
    for (std::int32_t j = i + 1; j < n; ++j) {
      const double d = user_distance(users[i].centroids, users[j].centroids);
      g.add_edge(i, j, 1.0 / std::max(d, epsilon_s));
    }
  }
  return g;
}

}  // namespace sessionkit
