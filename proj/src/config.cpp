#include "sessionkit/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <thread>

#include "sessionkit/calendar.hpp"
#include "sessionkit/error.hpp"
#include "sessionkit/table.hpp"

namespace sessionkit {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view key, std::string_view value, std::string_view where) {
  T out{};
  const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc{} || p != value.data() + value.size()) {
    throw InputError(std::string(where) + ": field '" + std::string(key) + "': invalid value '" +
                     std::string(value) + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value, std::string_view where) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw InputError(std::string(where) + ": field '" + std::string(key) + "': invalid value '" +
                   std::string(value) + "'");
}

void require(bool ok, std::string_view field, std::string_view what) {
  if (!ok) throw InputError("config: field '" + std::string(field) + "': " + std::string(what));
}

}  // namespace

void PipelineConfig::validate() const {
  require(epsilon_s > 0, "epsilon_s", "must be positive");
  require(knn_k >= 1, "knn_k", "must be >= 1");
  require(knn_threshold >= 1, "knn_threshold", "must be >= 1");
  require(min_cluster_size_for_rrs >= 1, "min_cluster_size_for_rrs", "must be >= 1");
  require(min_report_size >= 1, "min_report_size", "must be >= 1");
  require(trend_alpha > 0 && trend_alpha < 1, "trend_alpha", "must be in (0, 1)");
  require(heatmap_bin_s > 0 && kSecondsPerDay % heatmap_bin_s == 0, "heatmap_bin_s",
          "must be a positive divisor of 86400");
  require(tz_offset_s > -86400 && tz_offset_s < 86400, "tz_offset_s", "must be within one day");
}

void apply_setting(PipelineConfig& c, std::string_view key, std::string_view value,
                   std::string_view where) {
  if (key == "tz_offset_s") {
    c.tz_offset_s = parse_number<std::int64_t>(key, value, where);
  } else if (key == "epsilon_s") {
    c.epsilon_s = parse_number<double>(key, value, where);
  } else if (key == "knn_k") {
    c.knn_k = parse_number<std::int32_t>(key, value, where);
  } else if (key == "knn_threshold") {
    c.knn_threshold = parse_number<std::int32_t>(key, value, where);
  } else if (key == "min_cluster_size_for_rrs") {
    c.min_cluster_size_for_rrs = parse_number<std::int32_t>(key, value, where);
  } else if (key == "min_report_size") {
    c.min_report_size = parse_number<std::int32_t>(key, value, where);
  } else if (key == "trend_alpha") {
    c.trend_alpha = parse_number<double>(key, value, where);
  } else if (key == "trend_include_zero_days") {
    c.trend_include_zero_days = parse_bool(key, value, where);
  } else if (key == "heatmap_bin_s") {
    c.heatmap_bin_s = parse_number<std::int32_t>(key, value, where);
  } else if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(key, value, where);
  } else if (key == "threads") {
    c.threads = parse_number<unsigned>(key, value, where);
  } else if (key == "in") {
    c.in = std::string(value);
  } else if (key == "out") {
    c.out = std::string(value);
  } else {
    throw InputError(std::string(where) + ": unknown key '" + std::string(key) + "'");
  }
}

void load_config(PipelineConfig& config, std::string_view text, std::string_view source) {
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) throw InputError(where + ": expected 'key = value'");
    apply_setting(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), where);
  }
}

void load_config_file(PipelineConfig& config, const std::filesystem::path& path) {
  load_config(config, read_file(path), path.string());
}

std::uint64_t stage_seed(std::uint64_t seed, std::uint64_t offset) {
  return seed == 0 ? 0 : seed + offset;
}

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SESSIONKIT_THREADS")) {
    unsigned v = 0;
    const std::string_view s(env);
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc{} && p == s.data() + s.size() && v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace sessionkit
