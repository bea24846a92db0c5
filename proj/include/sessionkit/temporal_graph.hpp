#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sessionkit/calendar.hpp"
#include "sessionkit/sessionize.hpp"

namespace sessionkit {

inline constexpr double kHalfDay = 43200.0;

// Distance floor before taking the reciprocal. Sessions closer than this on
// the clock are treated as equally similar, which keeps the weights of one
// daily slot near-uniform.
inline constexpr double kDefaultEpsilonS = 900.0;

// Clock distance in seconds between two seconds-of-day values, in [0, 43200].
// Throws DomainError when an argument is outside [0, 86400).
double circ_diff(double a_sod, double b_sod);

// Euclidean distance of (start, end) clock positions.
double clock_distance(double start_a, double end_a, double start_b, double end_b);
double session_distance(const Session& p, const Session& q);

struct Edge {
  std::int32_t u = 0;
  std::int32_t v = 0;
  double w = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// Undirected graph with strictly positive weights, no self-loops and at most
// one edge per unordered pair. add_edge enforces the first two; builders in
// this library never produce parallel edges, validate() checks all three.
class WeightedGraph {
 public:
  WeightedGraph() = default;
  explicit WeightedGraph(std::int32_t node_count) : node_count_(node_count) {}

  std::int32_t node_count() const { return node_count_; }
  const std::vector<Edge>& edges() const { return edges_; }
  double total_weight() const;

  void add_edge(std::int32_t u, std::int32_t v, double w);
  void validate() const;

 private:
  std::int32_t node_count_ = 0;
  std::vector<Edge> edges_;
};

struct Sparsify {
  enum class Mode { Complete, Knn };
  Mode mode = Mode::Complete;
  std::int32_t k = 50;

  static Sparsify complete() { return {}; }
  static Sparsify knn(std::int32_t k) { return {Mode::Knn, k}; }
};

struct GraphOptions {
  double epsilon_s = kDefaultEpsilonS;
  std::int32_t knn_k = 50;
  // Session graphs with more nodes than this use Knn(knn_k).
  std::int32_t knn_threshold = 2000;

  Sparsify sparsify_for(std::size_t node_count) const;
};

// Nodes are the sessions in input order; w = 1 / max(distance, epsilon).
WeightedGraph build_session_graph(std::span<const Session> sessions, Sparsify sparsify,
                                  double epsilon_s = kDefaultEpsilonS);

// Index (into members) of the member with the smallest total distance to the
// others, i.e. maximal closeness; ties go to the lowest session_id.
std::size_t select_centroid(std::span<const Session> members);

struct Centroid {
  double start_sod = 0;
  double end_sod = 0;
};

// Summary of one session-cluster of one user. Noise clusters are singletons.
struct ClusterSummary {
  std::string user_id;
  std::int32_t cluster_id = 0;
  std::vector<std::int32_t> member_session_ids;
  std::int32_t size = 0;
  std::int32_t centroid_session_id = 0;
  double centroid_start_sod = 0;
  double centroid_end_sod = 0;
  std::vector<DayKey> session_days;  // sorted, unique
  bool is_noise = false;

  Centroid centroid() const { return {centroid_start_sod, centroid_end_sod}; }
};

// Form of a cluster that survives the clusters.csv hand-off.
struct ClusterRecord {
  std::string user_id;
  std::int32_t cluster_id = 0;
  std::int32_t size = 0;
  double centroid_start_sod = 0;
  double centroid_end_sod = 0;
  std::int32_t n_session_days = 0;
  double modularity = 0;
  bool is_noise = false;

  Centroid centroid() const { return {centroid_start_sod, centroid_end_sod}; }
};

// Mean centroid-pair distance. Throws EmptyProfile if either side is empty.
double user_distance(std::span<const Centroid> a, std::span<const Centroid> b);
double user_distance(std::span<const ClusterSummary> a, std::span<const ClusterSummary> b);

struct UserProfile {
  std::string user_id;
  std::vector<Centroid> centroids;  // non-noise clusters only
};

// Complete graph over users, w = 1 / max(user_distance, epsilon).
WeightedGraph build_user_graph(std::span<const UserProfile> users,
                              double epsilon_s = kDefaultEpsilonS);

}  // namespace sessionkit
