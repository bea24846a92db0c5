#include "sessionkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sessionkit/error.hpp"
#include "sessionkit/ingest.hpp"
#include "sessionkit/rng.hpp"

namespace sessionkit {
namespace {

constexpr double kDay = static_cast<double>(kSecondsPerDay);
constexpr std::int64_t kWakeLeadMs = 100;

double wrap(double s) {
  double r = std::fmod(s, kDay);
  return r < 0 ? r + kDay : r;
}

// Arc a covers [a_start, a_start + a_len) on the 24 h circle.
bool arcs_overlap(double a_start, double a_len, double b_start, double b_len) {
  return wrap(b_start - a_start) < a_len || wrap(a_start - b_start) < b_len;
}

std::string_view noise_key(std::uint64_t i) {
  static constexpr std::string_view keys[] = {"app_started", "battery_level", "wifi_scan",
                                              "cpu_wakelock", "notification_posted"};
  return keys[i % std::size(keys)];
}

std::string format_line(const LogEvent& e) {
  std::string line = e.user_id;
  line += ';';
  line += std::to_string(e.timestamp_ms);
  line += ';';
  if (e.kind == EventKind::Other) {
    line += e.other_key;
    if (!e.value.empty()) {
      line += ';';
      line += e.value;
    }
  } else {
    line += to_key(e.kind);
  }
  return line;
}

std::vector<PlantedSession> plant_sessions(const ArchetypeSpec& spec, Rng& rng) {
  std::vector<PlantedSession> planted;
  for (std::int32_t d = 0; d < spec.days; ++d) {
    const double day_start = static_cast<double>(spec.first_day.days + d) * kDay;
    for (const DailySlot& slot : spec.slots) {
      if (!rng.bernoulli(slot.probability)) continue;
      const double offset = slot.jitter_s > 0 ? rng.uniform(-slot.jitter_s, slot.jitter_s) : 0.0;
      const auto local_ms = static_cast<std::int64_t>(
          std::llround((day_start + slot.center_sod + offset) * 1000.0));
      const std::int64_t start = local_ms - spec.tz_offset_s * 1000;
      const std::int64_t end = start + static_cast<std::int64_t>(std::llround(slot.duration_s * 1000.0));
      planted.push_back({start, end});
    }
  }
  std::sort(planted.begin(), planted.end());
  return planted;
}

}  // namespace

void ArchetypeSpec::validate() const {
  if (name.empty()) throw InvalidSpec("archetype needs a name");
  if (days < 1) throw InvalidSpec("archetype '" + name + "': days must be >= 1");
  if (slots.empty()) throw InvalidSpec("archetype '" + name + "': no slots");
  if (noise_rate_per_hour < 0) throw InvalidSpec("archetype '" + name + "': negative noise rate");
  std::vector<std::pair<double, double>> arcs;
  for (const DailySlot& s : slots) {
    if (!(s.probability > 0 && s.probability <= 1)) {
      throw InvalidSpec("archetype '" + name + "': slot probability must be in (0, 1]");
    }
    if (!(s.center_sod >= 0 && s.center_sod < kDay)) {
      throw InvalidSpec("archetype '" + name + "': slot centre outside [0, 86400)");
    }
    if (s.jitter_s < 0 || s.duration_s < 0) {
      throw InvalidSpec("archetype '" + name + "': negative jitter or duration");
    }
    const double len = 2 * s.jitter_s + s.duration_s + kWakeLeadMs / 1000.0;
    if (len >= kDay) throw InvalidSpec("archetype '" + name + "': slot covers the whole day");
    arcs.emplace_back(wrap(s.center_sod - s.jitter_s - kWakeLeadMs / 1000.0), len);
  }
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    for (std::size_t j = i + 1; j < arcs.size(); ++j) {
      if (arcs_overlap(arcs[i].first, arcs[i].second, arcs[j].first, arcs[j].second)) {
        throw InvalidSpec("archetype '" + name + "': slots " + std::to_string(i) + " and " +
                          std::to_string(j) + " overlap after jitter");
      }
    }
  }
}

ArchetypeSpec builtin_archetype(std::string_view name) {
  auto at = [](int h, int m) { return h * 3600.0 + m * 60.0; };
  ArchetypeSpec spec;
  if (name == "morning") {
    spec.name = "morning";
    spec.slots = {{at(7, 10), 600, 600, 0.9}, {at(8, 30), 900, 600, 0.9}};
  } else if (name == "evening") {
    spec.name = "evening";
    spec.slots = {{at(19, 30), 900, 600, 0.9}, {at(21, 0), 1200, 600, 0.9},
                  {at(22, 30), 900, 600, 0.9}};
  } else if (name == "allday" || name == "all-day") {
    spec.name = "allday";
    spec.slots = {{at(10, 0), 600, 600, 0.9}, {at(12, 30), 600, 600, 0.9},
                  {at(15, 0), 600, 600, 0.9}, {at(17, 30), 600, 600, 0.9}};
  } else {
    throw InvalidSpec("unknown archetype '" + std::string(name) + "'");
  }
  return spec;
}

std::vector<std::string> builtin_archetype_names() { return {"morning", "evening", "allday"}; }

SyntheticUser gen_user_logs(const ArchetypeSpec& spec, const std::string& user_id,
                            std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  SyntheticUser user;
  user.user_id = user_id;
  user.planted = plant_sessions(spec, rng);

  std::vector<LogEvent> events;
  events.reserve(user.planted.size() * 3);
  auto push = [&](std::int64_t t, EventKind kind) {
    events.push_back(LogEvent{user_id, t, kind, {}, {}});
  };
  for (const PlantedSession& s : user.planted) {
    push(s.start_ms - kWakeLeadMs, EventKind::ScreenOn);
    push(s.start_ms, EventKind::KeyguardRemoved);
    push(s.end_ms, EventKind::ScreenOff);
  }

  if (spec.noise_rate_per_hour > 0) {
    const std::int64_t begin = (static_cast<std::int64_t>(spec.first_day.days) * kSecondsPerDay -
                                spec.tz_offset_s) * 1000;
    const std::int64_t end = begin + static_cast<std::int64_t>(spec.days) * kMillisPerDay;
    const double rate_per_ms = spec.noise_rate_per_hour / 3.6e6;
    double t = static_cast<double>(begin);
    for (;;) {
      t += rng.exponential(rate_per_ms);
      const auto ms = static_cast<std::int64_t>(t);
      if (ms >= end) break;
      const std::uint64_t pick = rng.below(1000);
      events.push_back(LogEvent{user_id, ms, EventKind::Other, std::string(noise_key(pick)),
                                "com.example.app" + std::to_string(pick % 37)});
    }
  }

  std::stable_sort(events.begin(), events.end(), event_before);
  user.lines.reserve(events.size());
  for (const LogEvent& e : events) user.lines.push_back(format_line(e));
  return user;
}

std::vector<Session> gen_user_sessions(const ArchetypeSpec& spec, const std::string& user_id,
                                       std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  std::vector<Session> sessions;
  std::int32_t id = 0;
  for (const PlantedSession& p : plant_sessions(spec, rng)) {
    sessions.push_back(make_session(user_id, ++id, p.start_ms, p.end_ms, spec.tz_offset_s));
  }
  return sessions;
}

PlantedGraph gen_planted_graph(std::span<const std::int32_t> blocks, double w_in, double w_out,
                               std::uint64_t seed) {
  if (blocks.empty()) throw InvalidSpec("planted graph needs at least one block");
  if (!(w_out > 0 && w_in > w_out)) throw InvalidSpec("planted graph needs w_in > w_out > 0");
  std::vector<std::int32_t> layout;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b] < 1) throw InvalidSpec("planted graph blocks must be non-empty");
    layout.insert(layout.end(), static_cast<std::size_t>(blocks[b]), static_cast<std::int32_t>(b));
  }
  if (seed != 0) {
    Rng rng(seed);
    rng.shuffle(std::span<std::int32_t>(layout));
  }
  PlantedGraph out;
  out.labels = layout;
  const auto n = static_cast<std::int32_t>(layout.size());
  out.graph = WeightedGraph(n);
  for (std::int32_t i = 0; i < n; ++i) {
    for (std::int32_t j = i + 1; j < n; ++j) {
      out.graph.add_edge(i, j, layout[static_cast<std::size_t>(i)] ==
                                       layout[static_cast<std::size_t>(j)]
                                   ? w_in
                                   : w_out);
    }
  }
  return out;
}

std::vector<DailyCount> gen_daily_counts(double intercept, double slope, double sigma,
                                         std::int32_t days, DayKey first_day, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<DailyCount> counts;
  counts.reserve(static_cast<std::size_t>(std::max(days, 0)));
  for (std::int32_t t = 0; t < days; ++t) {
    const double v = std::round(intercept + slope * t + rng.normal(0, sigma));
    counts.push_back({DayKey{first_day.days + t}, std::max(1.0, v)});
  }
  return counts;
}

}  // namespace sessionkit
