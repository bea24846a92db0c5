#include "sessionkit/community.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sessionkit/error.hpp"
#include "sessionkit/rng.hpp"

namespace sessionkit {

Partition compact(std::span<const std::int32_t> assignment) {
  Partition p;
  p.assignment.resize(assignment.size());
  std::vector<std::int32_t> relabel;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    const auto c = static_cast<std::size_t>(assignment[i]);
    if (c >= relabel.size()) relabel.resize(c + 1, -1);
    if (relabel[c] < 0) relabel[c] = p.community_count++;
    p.assignment[i] = relabel[c];
  }
  return p;
}

double modularity(const WeightedGraph& g, std::span<const std::int32_t> assignment) {
  if (assignment.size() != static_cast<std::size_t>(g.node_count())) {
    throw InvalidSpec("partition does not cover the graph");
  }
  if (g.edges().empty()) throw EmptyGraph("modularity of a graph without edges");
  std::int32_t max_c = -1;
  for (std::int32_t c : assignment) {
    if (c < 0) throw InvalidSpec("negative community id");
    max_c = std::max(max_c, c);
  }
  std::vector<double> inner(static_cast<std::size_t>(max_c) + 1, 0.0);
  std::vector<double> degree(inner.size(), 0.0);
  double total = 0;
  for (const Edge& e : g.edges()) {
    const auto cu = static_cast<std::size_t>(assignment[static_cast<std::size_t>(e.u)]);
    const auto cv = static_cast<std::size_t>(assignment[static_cast<std::size_t>(e.v)]);
    total += e.w;
    degree[cu] += e.w;
    degree[cv] += e.w;
    if (cu == cv) inner[cu] += e.w;
  }
  double q = 0;
  for (std::size_t c = 0; c < inner.size(); ++c) {
    const double share = degree[c] / (2.0 * total);
    q += inner[c] / total - share * share;
  }
  return q;
}

namespace {

// Graph of one Louvain level. Self-loops carry the weight already internal
// to an aggregated node; degree includes twice that weight.
struct LevelGraph {
  std::vector<std::vector<std::pair<std::int32_t, double>>> adj;
  std::vector<double> self_loop;
  std::vector<double> degree;
  double total = 0;

  std::size_t size() const { return adj.size(); }

  static LevelGraph from(const WeightedGraph& g) {
    LevelGraph lg;
    const auto n = static_cast<std::size_t>(g.node_count());
    lg.adj.resize(n);
    lg.self_loop.assign(n, 0.0);
    lg.degree.assign(n, 0.0);
    for (const Edge& e : g.edges()) {
      lg.adj[static_cast<std::size_t>(e.u)].emplace_back(e.v, e.w);
      lg.adj[static_cast<std::size_t>(e.v)].emplace_back(e.u, e.w);
      lg.degree[static_cast<std::size_t>(e.u)] += e.w;
      lg.degree[static_cast<std::size_t>(e.v)] += e.w;
      lg.total += e.w;
    }
    return lg;
  }

  double modularity(std::span<const std::int32_t> comm) const {
    std::vector<double> inner(size(), 0.0), tot(size(), 0.0);
    for (std::size_t i = 0; i < size(); ++i) {
      const auto c = static_cast<std::size_t>(comm[i]);
      inner[c] += self_loop[i];
      tot[c] += degree[i];
      for (const auto& [j, w] : adj[i]) {
        if (comm[static_cast<std::size_t>(j)] == comm[i]) inner[c] += 0.5 * w;
      }
    }
    double q = 0;
    for (std::size_t c = 0; c < size(); ++c) {
      const double share = tot[c] / (2.0 * total);
      q += inner[c] / total - share * share;
    }
    return q;
  }

  // Collapses communities (dense ids 0..count-1) into single nodes.
  LevelGraph aggregate(std::span<const std::int32_t> comm, std::int32_t count) const {
    LevelGraph next;
    const auto k = static_cast<std::size_t>(count);
    next.adj.resize(k);
    next.self_loop.assign(k, 0.0);
    next.degree.assign(k, 0.0);
    next.total = total;
    std::vector<double> acc(k, 0.0);
    std::vector<std::int32_t> touched;
    std::vector<std::vector<std::size_t>> members(k);
    for (std::size_t i = 0; i < size(); ++i) members[static_cast<std::size_t>(comm[i])].push_back(i);
    for (std::size_t c = 0; c < k; ++c) {
      touched.clear();
      for (std::size_t i : members[c]) {
        next.self_loop[c] += self_loop[i];
        next.degree[c] += degree[i];
        for (const auto& [j, w] : adj[i]) {
          const auto cj = comm[static_cast<std::size_t>(j)];
          if (static_cast<std::size_t>(cj) == c) {
            next.self_loop[c] += 0.5 * w;
          } else {
            if (acc[static_cast<std::size_t>(cj)] == 0.0) touched.push_back(cj);
            acc[static_cast<std::size_t>(cj)] += w;
          }
        }
      }
      std::sort(touched.begin(), touched.end());
      for (std::int32_t cj : touched) {
        next.adj[c].emplace_back(cj, acc[static_cast<std::size_t>(cj)]);
        acc[static_cast<std::size_t>(cj)] = 0.0;
      }
    }
    return next;
  }
};

constexpr int kMaxSweeps = 1000;

// One level of local moves. Returns whether any node changed community.
bool move_nodes(const LevelGraph& g, std::span<const std::int32_t> order,
                std::vector<std::int32_t>& comm, LouvainTrace* trace) {
  const std::size_t n = g.size();
  std::vector<double> tot(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) tot[static_cast<std::size_t>(comm[i])] += g.degree[i];
  std::vector<double> link(n, 0.0);
  std::vector<std::int32_t> touched;
  const double two_m = 2.0 * g.total;

  bool any_move = false;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool moved = false;
    for (std::int32_t node : order) {
      const auto i = static_cast<std::size_t>(node);
      const std::int32_t home = comm[i];
      const double k_i = g.degree[i];
      if (k_i <= 0) continue;

      touched.clear();
      touched.push_back(home);
      link[static_cast<std::size_t>(home)] = 0.0;
      for (const auto& [j, w] : g.adj[i]) {
        const std::int32_t c = comm[static_cast<std::size_t>(j)];
        if (link[static_cast<std::size_t>(c)] == 0.0 && c != home) touched.push_back(c);
        link[static_cast<std::size_t>(c)] += w;
      }

      tot[static_cast<std::size_t>(home)] -= k_i;
      std::int32_t best = home;
      double best_gain =
          link[static_cast<std::size_t>(home)] - tot[static_cast<std::size_t>(home)] * k_i / two_m;
      const double margin = 1e-10 * k_i;
      for (std::int32_t c : touched) {
        const double gain =
            link[static_cast<std::size_t>(c)] - tot[static_cast<std::size_t>(c)] * k_i / two_m;
        if (gain > best_gain + margin) {
          best_gain = gain;
          best = c;
        }
      }
      tot[static_cast<std::size_t>(best)] += k_i;
      comm[i] = best;
      if (best != home) moved = true;
      for (std::int32_t c : touched) link[static_cast<std::size_t>(c)] = 0.0;
    }
    if (trace != nullptr) trace->sweep_modularity.push_back(g.modularity(comm));
    if (!moved) break;
    any_move = true;
  }
  return any_move;
}

}  // namespace

Partition louvain(const WeightedGraph& g, std::uint64_t seed, LouvainTrace* trace) {
  const auto n = static_cast<std::size_t>(g.node_count());
  std::vector<std::int32_t> flat(n);
  std::iota(flat.begin(), flat.end(), 0);
  if (n == 0 || g.edges().empty()) {
    Partition p = compact(flat);
    p.modularity = 0;
    return p;
  }

  // Coarsening: local moves, then collapse communities into nodes.
  std::vector<LevelGraph> levels{LevelGraph::from(g)};
  std::vector<std::vector<std::int32_t>> orders;
  std::vector<std::vector<std::int32_t>> parents;  // node -> node of next level
  for (std::int32_t depth = 0;; ++depth) {
    const LevelGraph& level = levels.back();
    std::vector<std::int32_t> order(level.size());
    std::iota(order.begin(), order.end(), 0);
    if (seed != 0) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(depth)));
      rng.shuffle(std::span<std::int32_t>(order));
    }
    std::vector<std::int32_t> comm(level.size());
    std::iota(comm.begin(), comm.end(), 0);
    if (trace != nullptr) trace->levels = depth + 1;
    const bool moved = move_nodes(level, order, comm, trace);
    orders.push_back(std::move(order));
    if (!moved) break;

    Partition dense = compact(comm);
    if (dense.community_count == static_cast<std::int32_t>(level.size())) break;
    LevelGraph next = level.aggregate(dense.assignment, dense.community_count);
    parents.push_back(std::move(dense.assignment));
    levels.push_back(std::move(next));
  }

  // Refinement: project the coarsest partition back down one level at a
  // time and let single nodes move again at every finer level.
  std::vector<std::int32_t> comm(levels.back().size());
  std::iota(comm.begin(), comm.end(), 0);
  for (std::size_t l = parents.size(); l-- > 0;) {
    std::vector<std::int32_t> finer(levels[l].size());
    for (std::size_t i = 0; i < finer.size(); ++i) {
      finer[i] = comm[static_cast<std::size_t>(parents[l][i])];
    }
    comm = std::move(finer);
    move_nodes(levels[l], orders[l], comm, trace);
  }
  flat = comm;

  Partition p = compact(flat);
  p.modularity = modularity(g, p.assignment);
  return p;
}

UserClustering cluster_sessions(std::span<const Session> sessions, const GraphOptions& options,
                                std::uint64_t seed, WeightedGraph* graph_out) {
  UserClustering result;
  if (sessions.empty()) return result;
  result.user_id = sessions.front().user_id;

  WeightedGraph g =
      build_session_graph(sessions, options.sparsify_for(sessions.size()), options.epsilon_s);
  const Partition p = louvain(g, seed);
  result.modularity = p.modularity;
  result.node_count = g.node_count();
  result.edge_count = g.edges().size();

  std::vector<std::vector<Session>> groups(static_cast<std::size_t>(p.community_count));
  for (std::size_t i = 0; i < sessions.size(); ++i) {
    groups[static_cast<std::size_t>(p.assignment[i])].push_back(sessions[i]);
  }
  std::vector<std::pair<ClusterSummary, std::int32_t>> clusters;  // with first session id
  for (auto& members : groups) {
    ClusterSummary c;
    c.user_id = result.user_id;
    c.size = static_cast<std::int32_t>(members.size());
    for (const Session& s : members) {
      c.member_session_ids.push_back(s.session_id);
      c.session_days.push_back(s.day_key);
    }
    std::sort(c.session_days.begin(), c.session_days.end());
    c.session_days.erase(std::unique(c.session_days.begin(), c.session_days.end()),
                         c.session_days.end());
    const Session& centre = members[select_centroid(members)];
    c.centroid_session_id = centre.session_id;
    c.centroid_start_sod = centre.start_sod;
    c.centroid_end_sod = centre.end_sod;
    c.is_noise = members.size() == 1;
    const std::int32_t first =
        *std::min_element(c.member_session_ids.begin(), c.member_session_ids.end());
    if (c.is_noise) {
      result.noise.push_back(std::move(c));
    } else {
      clusters.emplace_back(std::move(c), first);
    }
  }

  std::sort(clusters.begin(), clusters.end(), [](const auto& a, const auto& b) {
    if (a.first.size != b.first.size) return a.first.size > b.first.size;
    if (a.first.centroid_start_sod != b.first.centroid_start_sod) {
      return a.first.centroid_start_sod < b.first.centroid_start_sod;
    }
    return a.second < b.second;
  });
  std::sort(result.noise.begin(), result.noise.end(),
            [](const ClusterSummary& a, const ClusterSummary& b) {
              return a.member_session_ids.front() < b.member_session_ids.front();
            });
  std::int32_t next_id = 1;
  for (auto& [c, first] : clusters) {
    c.cluster_id = next_id++;
    result.clusters.push_back(std::move(c));
  }
  for (auto& c : result.noise) c.cluster_id = next_id++;

  if (graph_out != nullptr) *graph_out = std::move(g);
  return result;
}

std::vector<ClusterRecord> to_records(const UserClustering& clustering) {
  std::vector<ClusterRecord> records;
  auto add = [&](const ClusterSummary& c) {
    records.push_back(ClusterRecord{c.user_id, c.cluster_id, c.size, c.centroid_start_sod,
                                    c.centroid_end_sod,
                                    static_cast<std::int32_t>(c.session_days.size()),
                                    clustering.modularity, c.is_noise});
  };
  for (const auto& c : clustering.clusters) add(c);
  for (const auto& c : clustering.noise) add(c);
  return records;
}

UserCommunities detect_user_communities(std::span<const UserProfile> users, std::uint64_t seed,
                                        std::int32_t min_report_size, double epsilon_s,
                                        WeightedGraph* graph_out) {
  UserCommunities result;
  std::vector<UserProfile> kept;
  for (const UserProfile& u : users) {
    if (u.centroids.empty()) {
      result.excluded_users.push_back(u.user_id);
    } else {
      kept.push_back(u);
    }
  }
  if (kept.empty()) return result;

  WeightedGraph g = build_user_graph(kept, epsilon_s);
  const Partition p = louvain(g, seed);
  result.modularity = p.modularity;

  // Renumber by descending size, then by first member.
  std::vector<std::int32_t> sizes(static_cast<std::size_t>(p.community_count), 0);
  for (std::int32_t c : p.assignment) ++sizes[static_cast<std::size_t>(c)];
  std::vector<std::int32_t> by_size(sizes.size());
  std::iota(by_size.begin(), by_size.end(), 0);
  std::stable_sort(by_size.begin(), by_size.end(), [&](std::int32_t a, std::int32_t b) {
    return sizes[static_cast<std::size_t>(a)] > sizes[static_cast<std::size_t>(b)];
  });
  std::vector<std::int32_t> final_id(sizes.size());
  for (std::size_t rank = 0; rank < by_size.size(); ++rank) {
    const auto c = static_cast<std::size_t>(by_size[rank]);
    final_id[c] = static_cast<std::int32_t>(rank + 1);
    CommunityInfo info;
    info.community_id = final_id[c];
    info.size = sizes[c];
    info.share = static_cast<double>(sizes[c]) / static_cast<double>(kept.size());
    info.small = sizes[c] < min_report_size;
    result.communities.push_back(info);
  }
  for (std::size_t i = 0; i < kept.size(); ++i) {
    result.membership.emplace_back(kept[i].user_id, final_id[static_cast<std::size_t>(p.assignment[i])]);
  }
  if (graph_out != nullptr) *graph_out = std::move(g);
  return result;
}

}  // namespace sessionkit
