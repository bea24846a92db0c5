#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sessionkit/calendar.hpp"
#include "sessionkit/ingest.hpp"

namespace sessionkit {

// One unlock-to-lock usage interval.
struct Session {
  std::string user_id;
  std::int32_t session_id = 0;  // per-user ordinal, from 1
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  DayKey day_key;        // local day of start
  double start_sod = 0;  // local seconds-of-day, [0, 86400)
  double end_sod = 0;

  double duration_s() const { return static_cast<double>(end_ms - start_ms) / 1000.0; }
  double duration_minutes() const { return static_cast<double>(end_ms - start_ms) / 60000.0; }

  friend bool operator==(const Session&, const Session&) = default;
};

Session make_session(std::string user_id, std::int32_t session_id, std::int64_t start_ms,
                     std::int64_t end_ms, std::int64_t tz_offset_s);

struct SessionizeStats {
  std::int64_t sessions_built = 0;
  std::int64_t aborted_wakeups = 0;
  std::int64_t unterminated_dropped = 0;
  std::int64_t long_sessions = 0;  // longer than 24 h, kept
  std::int64_t zero_length_sessions = 0;

  SessionizeStats& operator+=(const SessionizeStats& other);
};

struct SessionizeResult {
  std::vector<Session> sessions;
  SessionizeStats stats;
};

// Screen-state automaton:
//   idle   --ScreenOn-->         woken
//   woken  --KeyguardRemoved-->  open (session starts)
//   woken  --ScreenOff/Shutdown--> idle   (aborted wake-up)
//   woken  --ScreenOn-->         woken    (aborted wake-up, re-armed)
//   open   --ScreenOff/Shutdown--> idle   (session ends)
// Other events never change state; ScreenOn/KeyguardRemoved while open are
// ignored. An open session at end of log is dropped.
SessionizeResult build_sessions(const UserTimeline& timeline, std::int64_t tz_offset_s = 0);

std::string sessionize_stats_json(const SessionizeStats& stats);

}  // namespace sessionkit
