#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace sessionkit {

struct PipelineConfig {
  std::int64_t tz_offset_s = 0;
  double epsilon_s = 900.0;
  std::int32_t knn_k = 50;
  std::int32_t knn_threshold = 2000;
  std::int32_t min_cluster_size_for_rrs = 1;
  std::int32_t min_report_size = 5;
  double trend_alpha = 0.05;
  bool trend_include_zero_days = false;
  std::int32_t heatmap_bin_s = 900;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0: hardware concurrency
  std::filesystem::path in;
  std::filesystem::path out;

  // Throws InputError naming the offending field.
  void validate() const;
};

// Applies one `key = value` assignment. Throws InputError for unknown keys or
// unparsable values; `where` prefixes the message (e.g. "run.conf:3").
void apply_setting(PipelineConfig& config, std::string_view key, std::string_view value,
                   std::string_view where);

// Flat `key = value` text, one per line; blank lines and '#' comments skipped.
void load_config(PipelineConfig& config, std::string_view text, std::string_view source);
void load_config_file(PipelineConfig& config, const std::filesystem::path& path);

// Per-stage seeds fan out from the global seed by fixed offsets; seed 0 stays
// 0 so the whole pipeline keeps ascending-order Louvain.
std::uint64_t stage_seed(std::uint64_t seed, std::uint64_t offset);

inline constexpr std::uint64_t kClusterSeedOffset = 1;
inline constexpr std::uint64_t kCommunitySeedOffset = 2;
inline constexpr std::uint64_t kSynthSeedOffset = 3;

// --threads, else SESSIONKIT_THREADS, else hardware concurrency.
unsigned resolve_threads(unsigned requested);

}  // namespace sessionkit
