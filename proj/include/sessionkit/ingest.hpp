#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace sessionkit {

// Declaration order is the equal-timestamp tie-break order.
enum class EventKind : std::uint8_t {
  ScreenOn,
  KeyguardRemoved,
  ScreenOff,
  Shutdown,
  Other,
};

std::string_view to_key(EventKind kind);

struct LogEvent {
  std::string user_id;
  std::int64_t timestamp_ms = 0;
  EventKind kind = EventKind::Other;
  // Raw key and optional value; both empty unless kind == Other.
  std::string other_key;
  std::string value;

  friend bool operator==(const LogEvent&, const LogEvent&) = default;
};

// Total order used by load_events: timestamp, kind, then key and value so
// that the result does not depend on input line order.
bool event_before(const LogEvent& a, const LogEvent& b);

struct UserTimeline {
  std::string user_id;
  std::vector<LogEvent> events;
};

struct Skip {};

struct MalformedLine {
  std::string source;
  std::int64_t line_no = 0;
  std::string reason;

  std::string message() const;
};

using ParseResult = std::variant<LogEvent, Skip, MalformedLine>;

// Parses one `user_id;timestamp_ms;key[;value]` line. Everything after the
// third separator is the value, separators included. A trailing '\r' is
// ignored.
ParseResult parse_line(std::string_view text, std::int64_t line_no = 0,
                       std::string_view source = {});

struct IngestStats {
  std::int64_t lines_read = 0;
  std::int64_t skipped = 0;
  std::int64_t malformed = 0;
  std::int64_t duplicates_removed = 0;

  IngestStats& operator+=(const IngestStats& other);
};

struct IngestResult {
  // Sorted by user_id.
  std::vector<UserTimeline> timelines;
  IngestStats stats;
  // First kMaxReportedErrors malformed lines, for diagnostics.
  std::vector<MalformedLine> errors;
};

inline constexpr std::size_t kMaxReportedErrors = 100;

IngestResult load_events(std::istream& source, std::string_view source_name = "<stream>");
IngestResult load_events(std::string_view text, std::string_view source_name = "<memory>");

// Reads plain or gzip-compressed files; a directory contributes its regular
// files (non-recursive, sorted by name, hidden and .json files skipped). Files are parsed on up to
// `threads` workers and merged afterwards. Throws IoFailure.
IngestResult load_event_files(std::span<const std::filesystem::path> paths, unsigned threads = 1);

// Canonical text form, one line per event, in timeline order.
void write_events(std::ostream& out, std::span<const UserTimeline> timelines);

std::string ingest_stats_json(const IngestStats& stats);

}  // namespace sessionkit
