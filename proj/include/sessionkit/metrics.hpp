#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sessionkit/calendar.hpp"
#include "sessionkit/sessionize.hpp"
#include "sessionkit/temporal_graph.hpp"

namespace sessionkit {

struct Summary {
  double mean = 0;
  double median = 0;
  double min = 0;
  double max = 0;
  std::int64_t n = 0;
};

Summary summarize(std::span<const double> values);

// Log-spaced histogram. Non-positive values are counted separately.
struct Histogram {
  std::vector<double> edges;  // bins are [edges[i], edges[i+1])
  std::vector<std::int64_t> counts;
  std::int64_t non_positive = 0;
};

Histogram log_histogram(std::span<const double> values, int bins_per_decade = 5);

// ---------------------------------------------------------------- daily ----

struct DailyUsage {
  std::string user_id;
  DayKey day_key;
  double total_minutes = 0;
  std::int32_t n_sessions = 0;
  double mean_session_minutes = 0;
};

struct DailyStats {
  std::vector<DailyUsage> rows;  // ordered by (user_id, day_key)
  Summary total_minutes;
  Summary n_sessions;
  Summary mean_session_minutes;
  Histogram total_minutes_hist;
  Histogram n_sessions_hist;
  Histogram mean_session_minutes_hist;
};

DailyStats daily_stats(std::span<const Session> sessions);

// -------------------------------------------------------------- clusters ----

struct UserClusterStats {
  std::string user_id;
  std::int32_t n_clusters = 0;  // non-noise
  double mean_size = 0;
  double median_size = 0;
  double modularity = 0;
  std::int32_t n_noise = 0;
};

struct ClusterStats {
  std::vector<UserClusterStats> users;
  Summary n_clusters;
  Summary mean_size;    // users with at least one cluster
  Summary median_size;  // users with at least one cluster
  Summary modularity;
  std::int64_t noise_sessions = 0;
  std::int64_t clustered_sessions = 0;
  Histogram n_clusters_hist;
};

ClusterStats cluster_stats(std::span<const ClusterRecord> clusters);

// ------------------------------------------------------------------- RRS ----

// Rate of repeated sessions for one user. Noise clusters and clusters smaller
// than min_cluster_size are skipped. Throws NoClusters if none remain.
double rrs(std::span<const ClusterRecord> user_clusters, std::int32_t n_active_days,
           std::int32_t min_cluster_size = 1);

struct RrsRow {
  std::string user_id;
  std::int32_t n_clusters = 0;
  std::int32_t n_active_days = 0;
  double rrs = 0;
};

struct RrsReport {
  std::vector<RrsRow> rows;
  Summary rrs;
  std::int64_t n_clusters = 0;
  std::vector<std::string> users_without_clusters;
  std::int32_t min_cluster_size = 1;
};

RrsReport rrs_report(std::span<const ClusterRecord> clusters,
                     const std::map<std::string, std::int32_t>& active_days,
                     std::int32_t min_cluster_size);

std::map<std::string, std::int32_t> active_days_per_user(std::span<const Session> sessions);

// ----------------------------------------------------------------- trend ----

enum class TrendClass { Increase, Decrease, NoChange };
std::string_view to_string(TrendClass c);

struct TrendResult {
  std::string user_id;
  double slope = 0;
  double p_value = 1;
  TrendClass classification = TrendClass::NoChange;
  std::int32_t n_days_used = 0;
  DayKey window_start;
  DayKey window_end;  // inclusive
};

struct DailyCount {
  DayKey day;
  double n_sessions = 0;
};

struct TrendOptions {
  double alpha = 0.05;
  std::int32_t min_days_per_month = 10;
  std::int32_t consecutive_months = 3;
  // Re-insert missing days inside the window as zero counts.
  bool include_zero_days = false;
};

struct OlsFit {
  double slope = 0;
  double intercept = 0;
  double p_value = 1;  // two-sided t-test on the slope
  std::int32_t n = 0;
};

OlsFit ols_slope_test(std::span<const double> x, std::span<const double> y);

// Returns nullopt when the user is ineligible. Counts may be in any order.
std::optional<TrendResult> trend(std::string user_id, std::span<const DailyCount> counts,
                                 const TrendOptions& options = {});

struct TrendReport {
  std::vector<TrendResult> rows;
  std::vector<std::string> ineligible;
  double share_increase = 0;
  double share_decrease = 0;
  double share_no_change = 0;
};

TrendReport trend_report(std::span<const DailyUsage> daily, const TrendOptions& options = {});

// ---------------------------------------------------------- discriminant ----

struct UserDayObservation {
  double total_minutes = 0;
  double n_sessions = 0;
  double weight = 1;
};

// Weighted least squares of total minutes on session count; with a single
// predictor the squared semi-partial correlation is the weighted r^2.
// Throws DegenerateInput with fewer than 3 rows or zero predictor variance.
double discriminant(std::span<const UserDayObservation> rows, bool log_transform);

// Observations from daily rows, weighted by each user's active-day count.
std::vector<UserDayObservation> discriminant_inputs(std::span<const DailyUsage> daily);

// --------------------------------------------------------------- heatmap ----

struct HeatmapMatrix {
  std::int32_t bin_s = 900;
  std::vector<std::int32_t> community_ids;
  std::vector<std::int32_t> community_sizes;  // users
  std::vector<std::int64_t> user_days;
  std::vector<std::vector<double>> cells;  // [row][bin]

  std::int32_t bins() const { return static_cast<std::int32_t>(kSecondsPerDay / bin_s); }
};

// Per-bin coverage fractions of one user-day; sessions wrap at midnight and
// each cell is capped at 1.
std::vector<double> day_coverage(std::span<const Session> day_sessions, std::int32_t bin_s);

// community_of maps user_id -> community_id; users absent from it are
// ignored. communities lists (id, size) rows in output order.
HeatmapMatrix heatmap(std::span<const Session> sessions,
                      const std::map<std::string, std::int32_t>& community_of,
                      std::span<const std::pair<std::int32_t, std::int32_t>> communities,
                      std::int32_t bin_s = 900);

}  // namespace sessionkit
