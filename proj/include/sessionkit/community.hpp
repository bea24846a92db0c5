#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sessionkit/sessionize.hpp"
#include "sessionkit/temporal_graph.hpp"

namespace sessionkit {

struct Partition {
  std::vector<std::int32_t> assignment;  // node -> community, dense from 0
  std::int32_t community_count = 0;
  double modularity = 0;
};

// Relabels communities densely in order of first appearance by node id.
Partition compact(std::span<const std::int32_t> assignment);

// Newman modularity (resolution 1). Throws EmptyGraph for edgeless graphs.
double modularity(const WeightedGraph& g, std::span<const std::int32_t> assignment);
inline double modularity(const WeightedGraph& g, const Partition& p) {
  return modularity(g, p.assignment);
}

struct LouvainTrace {
  // Modularity after every local-moving sweep, across all levels.
  std::vector<double> sweep_modularity;
  std::int32_t levels = 0;
};

// Two-phase Louvain. seed 0 visits nodes in ascending id order; any other seed
// visits them in a seeded shuffle (reshuffled per level). The returned
// modularity is recomputed on g for the final flat partition, or 0 if g has
// no edges.
Partition louvain(const WeightedGraph& g, std::uint64_t seed = 0, LouvainTrace* trace = nullptr);

struct UserClustering {
  std::string user_id;
  // Non-noise clusters ordered by descending size then earliest centroid
  // start; their cluster_ids are 1..n in that order. Noise singletons follow
  // with ids n+1.. in session order.
  std::vector<ClusterSummary> clusters;
  std::vector<ClusterSummary> noise;
  double modularity = 0;
  std::int32_t node_count = 0;
  std::size_t edge_count = 0;
};

// Sessions must all belong to one user.
UserClustering cluster_sessions(std::span<const Session> sessions, const GraphOptions& options,
                                std::uint64_t seed = 0, WeightedGraph* graph_out = nullptr);

std::vector<ClusterRecord> to_records(const UserClustering& clustering);

struct CommunityInfo {
  std::int32_t community_id = 0;
  std::int32_t size = 0;
  double share = 0;  // of clustered users
  bool small = false;
};

struct UserCommunities {
  // (user_id, community_id), ordered as the input users.
  std::vector<std::pair<std::string, std::int32_t>> membership;
  // Ordered by descending size; ids 1..n in that order.
  std::vector<CommunityInfo> communities;
  double modularity = 0;
  std::vector<std::string> excluded_users;  // empty profiles
};

// Users with empty profiles are excluded and listed. Communities smaller than
// min_report_size are flagged small but kept.
UserCommunities detect_user_communities(std::span<const UserProfile> users, std::uint64_t seed = 0,
                                        std::int32_t min_report_size = 5,
                                        double epsilon_s = kDefaultEpsilonS,
                                        WeightedGraph* graph_out = nullptr);

}  // namespace sessionkit
