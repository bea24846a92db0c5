#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sessionkit/calendar.hpp"
#include "sessionkit/community.hpp"
#include "sessionkit/metrics.hpp"
#include "sessionkit/sessionize.hpp"
#include "sessionkit/temporal_graph.hpp"

namespace sessionkit {

struct DailySlot {
  double center_sod = 0;  // planted session start before jitter
  double duration_s = 0;
  double jitter_s = 0;    // start drawn uniformly from center +- jitter
  double probability = 1; // chance the slot fires on a given day
};

struct ArchetypeSpec {
  std::string name;
  std::vector<DailySlot> slots;
  std::int32_t days = 30;
  std::int64_t tz_offset_s = 0;
  DayKey first_day{15706};  // 2013-01-01
  double noise_rate_per_hour = 10;

  // Throws InvalidSpec: empty name, days < 1, probability outside (0, 1],
  // negative jitter or duration, or slots overlapping after maximal jitter.
  void validate() const;
};

// Built-in archetypes: "morning", "evening", "allday". Throws InvalidSpec.
ArchetypeSpec builtin_archetype(std::string_view name);
std::vector<std::string> builtin_archetype_names();

struct PlantedSession {
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;

  friend auto operator<=>(const PlantedSession&, const PlantedSession&) = default;
};

struct SyntheticUser {
  std::string user_id;
  std::vector<std::string> lines;  // time-ordered log lines
  std::vector<PlantedSession> planted;
};

// Each fired slot emits ScreenOn at start - 100 ms, KeyguardRemoved at start
// and ScreenOff at end. Other events arrive as a Poisson process over the
// whole span.
SyntheticUser gen_user_logs(const ArchetypeSpec& spec, const std::string& user_id,
                            std::uint64_t seed);

// Planted sessions of gen_user_logs converted to Session values directly,
// without the text round trip.
std::vector<Session> gen_user_sessions(const ArchetypeSpec& spec, const std::string& user_id,
                                       std::uint64_t seed);

struct PlantedGraph {
  WeightedGraph graph;
  std::vector<std::int32_t> labels;  // block of each node
};

// Complete graph, w_in inside blocks and w_out across. Node ids are a seeded
// permutation of the block layout. Throws InvalidSpec unless
// w_in > w_out > 0 and every block is non-empty.
PlantedGraph gen_planted_graph(std::span<const std::int32_t> blocks, double w_in, double w_out,
                               std::uint64_t seed);

// Daily session counts round(intercept + slope * t + N(0, sigma)), floored
// at 1, for `days` consecutive days starting at first_day.
std::vector<DailyCount> gen_daily_counts(double intercept, double slope, double sigma,
                                         std::int32_t days, DayKey first_day, std::uint64_t seed);

}  // namespace sessionkit
