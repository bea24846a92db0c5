#include "sessionkit/ingest.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <istream>
#include <iterator>
#include <ostream>
#include <thread>
#include <unordered_map>

#include "json.hpp"
#include "sessionkit/error.hpp"

namespace sessionkit {

std::string_view to_key(EventKind kind) {
  switch (kind) {
    case EventKind::ScreenOn:
      return "screen_on";
    case EventKind::KeyguardRemoved:
      return "keyguard_removed";
    case EventKind::ScreenOff:
      return "screen_off";
    case EventKind::Shutdown:
      return "shutdown";
    case EventKind::Other:
      break;
  }
  return "other";
}

bool event_before(const LogEvent& a, const LogEvent& b) {
  if (a.timestamp_ms != b.timestamp_ms) return a.timestamp_ms < b.timestamp_ms;
  if (a.kind != b.kind) return a.kind < b.kind;
  if (a.other_key != b.other_key) return a.other_key < b.other_key;
  return a.value < b.value;
}

std::string MalformedLine::message() const {
  std::string msg = source.empty() ? std::string("<input>") : source;
  msg += ':';
  msg += std::to_string(line_no);
  msg += ": ";
  msg += reason;
  return msg;
}

IngestStats& IngestStats::operator+=(const IngestStats& other) {
  lines_read += other.lines_read;
  skipped += other.skipped;
  malformed += other.malformed;
  duplicates_removed += other.duplicates_removed;
  return *this;
}

namespace {

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t'; });
}

EventKind classify(std::string_view key) {
  if (key == "screen_on") return EventKind::ScreenOn;
  if (key == "keyguard_removed") return EventKind::KeyguardRemoved;
  if (key == "screen_off") return EventKind::ScreenOff;
  if (key == "shutdown") return EventKind::Shutdown;
  return EventKind::Other;
}

MalformedLine malformed(std::string_view source, std::int64_t line_no, std::string reason) {
  return MalformedLine{std::string(source), line_no, std::move(reason)};
}

}  // namespace

ParseResult parse_line(std::string_view text, std::int64_t line_no, std::string_view source) {
  if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
  if (is_blank(text) || text.front() == '#') return Skip{};

  const std::size_t s1 = text.find(';');
  const std::size_t s2 = s1 == std::string_view::npos ? s1 : text.find(';', s1 + 1);
  if (s2 == std::string_view::npos) {
    return malformed(source, line_no, "expected at least 3 ';'-separated fields");
  }
  const std::size_t s3 = text.find(';', s2 + 1);

  const std::string_view user = text.substr(0, s1);
  const std::string_view ts = text.substr(s1 + 1, s2 - s1 - 1);
  const std::string_view key =
      s3 == std::string_view::npos ? text.substr(s2 + 1) : text.substr(s2 + 1, s3 - s2 - 1);

  if (user.empty()) return malformed(source, line_no, "field 'user_id' is empty");
  std::int64_t timestamp = 0;
  const auto [end, ec] = std::from_chars(ts.data(), ts.data() + ts.size(), timestamp);
  if (ts.empty() || ec != std::errc{} || end != ts.data() + ts.size() || timestamp < 0) {
    return malformed(source, line_no,
                     "field 'timestamp_ms' is not a non-negative integer: '" + std::string(ts) +
                         "'");
  }
  if (key.empty()) return malformed(source, line_no, "field 'key' is empty");

  LogEvent event;
  event.user_id = std::string(user);
  event.timestamp_ms = timestamp;
  event.kind = classify(key);
  if (event.kind == EventKind::Other) {
    event.other_key = std::string(key);
    if (s3 != std::string_view::npos) event.value = std::string(text.substr(s3 + 1));
  }
  return event;
}

namespace {

// Unsorted accumulation of parsed events; finish() sorts and deduplicates.
class Accumulator {
 public:
  void add_text(std::string_view text, std::string_view source) {
    std::int64_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t nl = text.find('\n', pos);
      if (nl == std::string_view::npos) nl = text.size();
      add_line(text.substr(pos, nl - pos), ++line_no, source);
      pos = nl + 1;
    }
  }

  void add_line(std::string_view line, std::int64_t line_no, std::string_view source) {
    ++stats_.lines_read;
    ParseResult parsed = parse_line(line, line_no, source);
    if (auto* event = std::get_if<LogEvent>(&parsed)) {
      auto [it, inserted] = index_.try_emplace(event->user_id, users_.size());
      if (inserted) users_.push_back(UserTimeline{event->user_id, {}});
      users_[it->second].events.push_back(std::move(*event));
    } else if (auto* bad = std::get_if<MalformedLine>(&parsed)) {
      ++stats_.malformed;
      if (errors_.size() < kMaxReportedErrors) errors_.push_back(std::move(*bad));
    } else {
      ++stats_.skipped;
    }
  }

  void merge(Accumulator&& other) {
    stats_ += other.stats_;
    for (auto& e : other.errors_) {
      if (errors_.size() >= kMaxReportedErrors) break;
      errors_.push_back(std::move(e));
    }
    for (auto& user : other.users_) {
      auto [it, inserted] = index_.try_emplace(user.user_id, users_.size());
      if (inserted) {
        users_.push_back(std::move(user));
      } else {
        auto& dst = users_[it->second].events;
        dst.insert(dst.end(), std::make_move_iterator(user.events.begin()),
                   std::make_move_iterator(user.events.end()));
      }
    }
  }

  IngestResult finish() && {
    IngestResult result;
    result.stats = stats_;
    result.errors = std::move(errors_);
    result.timelines = std::move(users_);
    std::sort(result.timelines.begin(), result.timelines.end(),
              [](const UserTimeline& a, const UserTimeline& b) { return a.user_id < b.user_id; });
    for (auto& timeline : result.timelines) {
      auto& events = timeline.events;
      std::sort(events.begin(), events.end(), event_before);
      const auto last = std::unique(events.begin(), events.end());
      result.stats.duplicates_removed += std::distance(last, events.end());
      events.erase(last, events.end());
    }
    return result;
  }

 private:
  IngestStats stats_;
  std::vector<MalformedLine> errors_;
  std::vector<UserTimeline> users_;
  std::unordered_map<std::string, std::size_t> index_;
};

std::string read_maybe_gzip(const std::filesystem::path& path) {
  // gzread passes uncompressed files through unchanged.
  gzFile file = gzopen(path.c_str(), "rb");
  if (file == nullptr) throw IoFailure("cannot open '" + path.string() + "'");
  gzbuffer(file, 1 << 17);
  std::string content;
  char buf[1 << 16];
  for (;;) {
    const int n = gzread(file, buf, sizeof buf);
    if (n < 0) {
      int code = 0;
      std::string msg = gzerror(file, &code);
      gzclose(file);
      throw IoFailure("cannot read '" + path.string() + "': " + msg);
    }
    if (n == 0) break;
    content.append(buf, static_cast<std::size_t>(n));
  }
  gzclose(file);
  return content;
}

std::vector<std::filesystem::path> expand(std::span<const std::filesystem::path> paths) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  for (const auto& p : paths) {
    std::error_code ec;
    if (fs::is_directory(p, ec)) {
      std::vector<fs::path> inside;
      for (const auto& entry : fs::directory_iterator(p, ec)) {
        const std::string name = entry.path().filename().string();
        // Skip hidden files and JSON side files such as ground-truth.json.
        if (!entry.is_regular_file() || name.starts_with('.') || entry.path().extension() == ".json") {
          continue;
        }
        inside.push_back(entry.path());
      }
      if (ec) throw IoFailure("cannot list '" + p.string() + "': " + ec.message());
      std::sort(inside.begin(), inside.end());
      files.insert(files.end(), inside.begin(), inside.end());
    } else if (fs::exists(p, ec)) {
      files.push_back(p);
    } else {
      throw IoFailure("no such file or directory: '" + p.string() + "'");
    }
  }
  return files;
}

}  // namespace

IngestResult load_events(std::string_view text, std::string_view source_name) {
  Accumulator acc;
  acc.add_text(text, source_name);
  return std::move(acc).finish();
}

IngestResult load_events(std::istream& source, std::string_view source_name) {
  std::string text{std::istreambuf_iterator<char>(source), std::istreambuf_iterator<char>()};
  if (source.bad()) throw IoFailure("cannot read '" + std::string(source_name) + "'");
  return load_events(std::string_view(text), source_name);
}

IngestResult load_event_files(std::span<const std::filesystem::path> paths, unsigned threads) {
  const std::vector<std::filesystem::path> files = expand(paths);
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, files.size()));
  std::vector<Accumulator> shards(workers);
  std::vector<std::exception_ptr> failures(workers);

  auto work = [&](std::size_t w) {
    try {
      for (std::size_t i = w; i < files.size(); i += workers) {
        const std::string content = read_maybe_gzip(files[i]);
        shards[w].add_text(content, files[i].string());
      }
    } catch (...) {
      failures[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  Accumulator merged;
  for (auto& shard : shards) merged.merge(std::move(shard));
  return std::move(merged).finish();
}

void write_events(std::ostream& out, std::span<const UserTimeline> timelines) {
  for (const auto& timeline : timelines) {
    for (const auto& e : timeline.events) {
      out << e.user_id << ';' << e.timestamp_ms << ';';
      if (e.kind == EventKind::Other) {
        out << e.other_key;
        if (!e.value.empty()) out << ';' << e.value;
      } else {
        out << to_key(e.kind);
      }
      out << '\n';
    }
  }
}

std::string ingest_stats_json(const IngestStats& stats) {
  nlohmann::ordered_json j;
  j["lines_read"] = stats.lines_read;
  j["skipped"] = stats.skipped;
  j["malformed"] = stats.malformed;
  j["duplicates_removed"] = stats.duplicates_removed;
  return j.dump(2) + "\n";
}

}  // namespace sessionkit
