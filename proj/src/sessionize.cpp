#include "sessionkit/sessionize.hpp"

#include "json.hpp"

namespace sessionkit {

Session make_session(std::string user_id, std::int32_t session_id, std::int64_t start_ms,
                     std::int64_t end_ms, std::int64_t tz_offset_s) {
  Session s;
  s.user_id = std::move(user_id);
  s.session_id = session_id;
  s.start_ms = start_ms;
  s.end_ms = end_ms;
  s.day_key = day_of(start_ms, tz_offset_s);
  s.start_sod = seconds_of_day(start_ms, tz_offset_s);
  s.end_sod = seconds_of_day(end_ms, tz_offset_s);
  return s;
}

SessionizeStats& SessionizeStats::operator+=(const SessionizeStats& other) {
  sessions_built += other.sessions_built;
  aborted_wakeups += other.aborted_wakeups;
  unterminated_dropped += other.unterminated_dropped;
  long_sessions += other.long_sessions;
  zero_length_sessions += other.zero_length_sessions;
  return *this;
}

SessionizeResult build_sessions(const UserTimeline& timeline, std::int64_t tz_offset_s) {
  enum class State { Idle, Woken, Open };

  SessionizeResult result;
  State state = State::Idle;
  std::int64_t unlocked_at = 0;

  for (const LogEvent& e : timeline.events) {
    switch (state) {
      case State::Idle:
        if (e.kind == EventKind::ScreenOn) state = State::Woken;
        break;
      case State::Woken:
        if (e.kind == EventKind::KeyguardRemoved) {
          unlocked_at = e.timestamp_ms;
          state = State::Open;
        } else if (e.kind == EventKind::ScreenOn) {
          ++result.stats.aborted_wakeups;
        } else if (e.kind == EventKind::ScreenOff || e.kind == EventKind::Shutdown) {
          ++result.stats.aborted_wakeups;
          state = State::Idle;
        }
        break;
      case State::Open:
        if (e.kind == EventKind::ScreenOff || e.kind == EventKind::Shutdown) {
          const auto id = static_cast<std::int32_t>(result.sessions.size() + 1);
          result.sessions.push_back(
              make_session(timeline.user_id, id, unlocked_at, e.timestamp_ms, tz_offset_s));
          const std::int64_t length = e.timestamp_ms - unlocked_at;
          if (length > kMillisPerDay) ++result.stats.long_sessions;
          if (length == 0) ++result.stats.zero_length_sessions;
          state = State::Idle;
        }
        break;
    }
  }
  if (state == State::Open) ++result.stats.unterminated_dropped;
  if (state == State::Woken) ++result.stats.aborted_wakeups;
  result.stats.sessions_built = static_cast<std::int64_t>(result.sessions.size());
  return result;
}

std::string sessionize_stats_json(const SessionizeStats& stats) {
  nlohmann::ordered_json j;
  j["sessions_built"] = stats.sessions_built;
  j["aborted_wakeups"] = stats.aborted_wakeups;
  j["unterminated_dropped"] = stats.unterminated_dropped;
  j["long_sessions"] = stats.long_sessions;
  j["zero_length_sessions"] = stats.zero_length_sessions;
  return j.dump(2) + "\n";
}

}  // namespace sessionkit
