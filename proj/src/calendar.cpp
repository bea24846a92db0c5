#include "sessionkit/calendar.hpp"

#include <charconv>
#include <cstdio>

namespace sessionkit {
namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t floor_mod(std::int64_t a, std::int64_t b) { return a - floor_div(a, b) * b; }

}  // namespace

// Civil-from-days and days-from-civil after H. Hinnant's date algorithms.
CivilDate to_civil(DayKey day) {
  const std::int64_t z = static_cast<std::int64_t>(day.days) + 719468;
  const std::int64_t era = floor_div(z, 146097);
  const std::int64_t doe = z - era * 146097;
  const std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const std::int64_t mp = (5 * doy + 2) / 153;
  const auto d = static_cast<unsigned>(doy - (153 * mp + 2) / 5 + 1);
  const auto m = static_cast<unsigned>(mp < 10 ? mp + 3 : mp - 9);
  const std::int64_t y = yoe + era * 400 + (m <= 2 ? 1 : 0);
  return {static_cast<std::int32_t>(y), m, d};
}

DayKey from_civil(const CivilDate& date) {
  const std::int64_t y = static_cast<std::int64_t>(date.year) - (date.month <= 2 ? 1 : 0);
  const std::int64_t era = floor_div(y, 400);
  const std::int64_t yoe = y - era * 400;
  const std::int64_t m = date.month;
  const std::int64_t doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + date.day - 1;
  const std::int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return DayKey{static_cast<std::int32_t>(era * 146097 + doe - 719468)};
}

std::string format_day(DayKey day) {
  const CivilDate c = to_civil(day);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", c.year, c.month, c.day);
  return buf;
}

std::optional<DayKey> parse_day(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0, d = 0;
  auto parse = [](std::string_view s, auto& v) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc{} && p == s.data() + s.size();
  };
  if (!parse(text.substr(0, 4), y) || !parse(text.substr(5, 2), m) ||
      !parse(text.substr(8, 2), d)) {
    return std::nullopt;
  }
  if (m < 1 || m > 12 || d < 1 || d > 31) return std::nullopt;
  const DayKey key = from_civil({y, m, d});
  const CivilDate back = to_civil(key);
  if (back.month != m || back.day != d) return std::nullopt;  // e.g. Feb 30
  return key;
}

DayKey day_of(std::int64_t epoch_ms, std::int64_t tz_offset_s) {
  return DayKey{static_cast<std::int32_t>(floor_div(epoch_ms + tz_offset_s * 1000, kMillisPerDay))};
}

double seconds_of_day(std::int64_t epoch_ms, std::int64_t tz_offset_s) {
  return static_cast<double>(floor_mod(epoch_ms + tz_offset_s * 1000, kMillisPerDay)) / 1000.0;
}

std::int32_t month_index(DayKey day) {
  const CivilDate c = to_civil(day);
  return c.year * 12 + static_cast<std::int32_t>(c.month) - 1;
}

}  // namespace sessionkit
