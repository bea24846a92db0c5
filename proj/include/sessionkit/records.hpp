#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sessionkit/community.hpp"
#include "sessionkit/sessionize.hpp"
#include "sessionkit/table.hpp"
#include "sessionkit/temporal_graph.hpp"

// Stage hand-off files: sessions.csv, clusters.csv, communities.csv.
namespace sessionkit {

Table sessions_table(std::span<const Session> sessions);
std::vector<Session> read_sessions(const CsvFile& csv);

Table clusters_table(std::span<const ClusterRecord> clusters);
std::vector<ClusterRecord> read_clusters(const CsvFile& csv);

struct CommunityMembership {
  std::string user_id;
  std::int32_t community_id = 0;
};

Table communities_table(std::span<const CommunityMembership> rows);
std::vector<CommunityMembership> read_communities(const CsvFile& csv);

Table edges_table(const WeightedGraph& g);

// Groups consecutive runs by user_id, preserving order; input must already
// be grouped (as every file this library writes is).
template <typename T>
std::vector<std::span<const T>> group_by_user(std::span<const T> items) {
  std::vector<std::span<const T>> groups;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= items.size(); ++i) {
    if (i == items.size() || items[i].user_id != items[begin].user_id) {
      if (i > begin) groups.push_back(items.subspan(begin, i - begin));
      begin = i;
    }
  }
  return groups;
}

}  // namespace sessionkit
