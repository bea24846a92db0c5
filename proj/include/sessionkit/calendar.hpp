#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace sessionkit {

inline constexpr std::int64_t kSecondsPerDay = 86400;
inline constexpr std::int64_t kMillisPerDay = kSecondsPerDay * 1000;

// Calendar day as a count of days since 1970-01-01 (proleptic Gregorian).
struct DayKey {
  std::int32_t days = 0;

  friend constexpr auto operator<=>(DayKey, DayKey) = default;
};

struct CivilDate {
  std::int32_t year;
  unsigned month;  // 1..12
  unsigned day;    // 1..31
};

CivilDate to_civil(DayKey day);
DayKey from_civil(const CivilDate& date);

// "YYYY-MM-DD"
std::string format_day(DayKey day);
std::optional<DayKey> parse_day(std::string_view text);

// Local calendar day and seconds-of-day of an epoch timestamp.
DayKey day_of(std::int64_t epoch_ms, std::int64_t tz_offset_s);
double seconds_of_day(std::int64_t epoch_ms, std::int64_t tz_offset_s);

// Month index (year * 12 + month - 1), used to test for consecutive months.
std::int32_t month_index(DayKey day);

}  // namespace sessionkit
