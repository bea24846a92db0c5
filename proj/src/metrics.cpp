#include "sessionkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <boost/math/distributions/students_t.hpp>

#include "sessionkit/error.hpp"

namespace sessionkit {

Summary summarize(std::span<const double> values) {
  Summary s;
  s.n = static_cast<std::int64_t>(values.size());
  if (values.empty()) return s;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  s.min = sorted.front();
  s.max = sorted.back();
  s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
  const std::size_t mid = sorted.size() / 2;
  s.median = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  return s;
}

Histogram log_histogram(std::span<const double> values, int bins_per_decade) {
  Histogram h;
  double lo = 0, hi = 0;
  bool any = false;
  for (double v : values) {
    if (!(v > 0)) {
      ++h.non_positive;
      continue;
    }
    lo = any ? std::min(lo, v) : v;
    hi = any ? std::max(hi, v) : v;
    any = true;
  }
  if (!any) return h;
  const double bpd = bins_per_decade;
  const double first = std::floor(std::log10(lo) * bpd);
  double last = std::ceil(std::log10(hi) * bpd);
  if (last <= first) last = first + 1;
  // The top value must fall strictly inside the last bin.
  if (std::log10(hi) * bpd >= last) last += 1;
  const auto bins = static_cast<std::size_t>(last - first);
  for (std::size_t i = 0; i <= bins; ++i) {
    h.edges.push_back(std::pow(10.0, (first + static_cast<double>(i)) / bpd));
  }
  h.counts.assign(bins, 0);
  for (double v : values) {
    if (!(v > 0)) continue;
    auto idx = static_cast<std::ptrdiff_t>(std::floor(std::log10(v) * bpd - first));
    idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(bins) - 1);
    ++h.counts[static_cast<std::size_t>(idx)];
  }
  return h;
}

namespace {

std::vector<std::size_t> order_by_user_day(std::span<const Session> sessions) {
  std::vector<std::size_t> idx(sessions.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (sessions[a].user_id != sessions[b].user_id) return sessions[a].user_id < sessions[b].user_id;
    return sessions[a].day_key < sessions[b].day_key;
  });
  return idx;
}

}  // namespace

DailyStats daily_stats(std::span<const Session> sessions) {
  DailyStats out;
  const auto idx = order_by_user_day(sessions);
  for (std::size_t k = 0; k < idx.size();) {
    const Session& head = sessions[idx[k]];
    DailyUsage row;
    row.user_id = head.user_id;
    row.day_key = head.day_key;
    for (; k < idx.size() && sessions[idx[k]].user_id == head.user_id &&
           sessions[idx[k]].day_key == head.day_key;
         ++k) {
      row.total_minutes += sessions[idx[k]].duration_minutes();
      ++row.n_sessions;
    }
    row.mean_session_minutes = row.total_minutes / row.n_sessions;
    out.rows.push_back(std::move(row));
  }

  std::vector<double> totals, counts, means;
  for (const auto& r : out.rows) {
    totals.push_back(r.total_minutes);
    counts.push_back(r.n_sessions);
    means.push_back(r.mean_session_minutes);
  }
  out.total_minutes = summarize(totals);
  out.n_sessions = summarize(counts);
  out.mean_session_minutes = summarize(means);
  out.total_minutes_hist = log_histogram(totals);
  out.n_sessions_hist = log_histogram(counts);
  out.mean_session_minutes_hist = log_histogram(means);
  return out;
}

ClusterStats cluster_stats(std::span<const ClusterRecord> clusters) {
  ClusterStats out;
  std::vector<std::size_t> idx(clusters.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return clusters[a].user_id < clusters[b].user_id;
  });

  std::vector<double> counts, mean_sizes, median_sizes, modularities;
  for (std::size_t k = 0; k < idx.size();) {
    const ClusterRecord& head = clusters[idx[k]];
    UserClusterStats u;
    u.user_id = head.user_id;
    u.modularity = head.modularity;
    std::vector<double> sizes;
    for (; k < idx.size() && clusters[idx[k]].user_id == head.user_id; ++k) {
      const ClusterRecord& c = clusters[idx[k]];
      if (c.is_noise) {
        ++u.n_noise;
        out.noise_sessions += c.size;
      } else {
        sizes.push_back(c.size);
        out.clustered_sessions += c.size;
      }
    }
    u.n_clusters = static_cast<std::int32_t>(sizes.size());
    counts.push_back(u.n_clusters);
    modularities.push_back(u.modularity);
    if (!sizes.empty()) {
      const Summary s = summarize(sizes);
      u.mean_size = s.mean;
      u.median_size = s.median;
      mean_sizes.push_back(s.mean);
      median_sizes.push_back(s.median);
    }
    out.users.push_back(std::move(u));
  }
  out.n_clusters = summarize(counts);
  out.mean_size = summarize(mean_sizes);
  out.median_size = summarize(median_sizes);
  out.modularity = summarize(modularities);
  out.n_clusters_hist = log_histogram(counts);
  return out;
}

double rrs(std::span<const ClusterRecord> user_clusters, std::int32_t n_active_days,
           std::int32_t min_cluster_size) {
  if (n_active_days < 1) throw DegenerateInput("RRS needs at least one active day");
  std::int64_t retained = 0;
  std::int64_t session_days = 0;
  for (const ClusterRecord& c : user_clusters) {
    if (c.is_noise || c.size < min_cluster_size) continue;
    ++retained;
    session_days += c.n_session_days;
  }
  if (retained == 0) throw NoClusters("no clusters with at least " +
                                      std::to_string(min_cluster_size) + " sessions");
  return static_cast<double>(session_days) /
         (static_cast<double>(retained) * static_cast<double>(n_active_days));
}

std::map<std::string, std::int32_t> active_days_per_user(std::span<const Session> sessions) {
  std::set<std::pair<std::string_view, DayKey>> seen;
  std::map<std::string, std::int32_t> days;
  for (const Session& s : sessions) {
    if (seen.emplace(s.user_id, s.day_key).second) ++days[s.user_id];
  }
  return days;
}

RrsReport rrs_report(std::span<const ClusterRecord> clusters,
                     const std::map<std::string, std::int32_t>& active_days,
                     std::int32_t min_cluster_size) {
  RrsReport report;
  report.min_cluster_size = min_cluster_size;
  std::map<std::string, std::vector<ClusterRecord>> by_user;
  for (const auto& c : clusters) by_user[c.user_id].push_back(c);

  std::vector<double> values;
  for (const auto& [user, records] : by_user) {
    const auto it = active_days.find(user);
    if (it == active_days.end()) {
      throw InputError("user '" + user + "' has clusters but no sessions");
    }
    try {
      RrsRow row;
      row.user_id = user;
      row.n_active_days = it->second;
      row.rrs = rrs(records, it->second, min_cluster_size);
      for (const auto& c : records) {
        if (!c.is_noise && c.size >= min_cluster_size) ++row.n_clusters;
      }
      report.n_clusters += row.n_clusters;
      values.push_back(row.rrs);
      report.rows.push_back(std::move(row));
    } catch (const NoClusters&) {
      report.users_without_clusters.push_back(user);
    }
  }
  report.rrs = summarize(values);
  return report;
}

std::string_view to_string(TrendClass c) {
  switch (c) {
    case TrendClass::Increase:
      return "increase";
    case TrendClass::Decrease:
      return "decrease";
    case TrendClass::NoChange:
      break;
  }
  return "no_change";
}

OlsFit ols_slope_test(std::span<const double> x, std::span<const double> y) {
  OlsFit fit;
  fit.n = static_cast<std::int32_t>(x.size());
  if (x.size() != y.size()) throw InvalidSpec("x and y differ in length");
  if (x.size() < 3) throw DegenerateInput("slope test needs at least 3 points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0)) throw DegenerateInput("predictor has zero variance");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    rss += r * r;
  }
  const double se = std::sqrt(rss / (n - 2) / sxx);
  if (se == 0) {
    fit.p_value = fit.slope == 0 ? 1.0 : 0.0;
    return fit;
  }
  const boost::math::students_t dist(n - 2);
  fit.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(
                                        dist, std::fabs(fit.slope / se))));
  return fit;
}

std::optional<TrendResult> trend(std::string user_id, std::span<const DailyCount> counts,
                                 const TrendOptions& options) {
  std::map<DayKey, double> by_day;
  for (const auto& c : counts) {
    if (c.n_sessions > 0) by_day[c.day] += c.n_sessions;
  }
  std::map<std::int32_t, std::int32_t> days_in_month;
  for (const auto& [day, n] : by_day) ++days_in_month[month_index(day)];

  // Earliest run of consecutive qualifying months.
  std::optional<std::int32_t> first_month;
  std::int32_t run_start = 0, run_length = 0, prev = 0;
  for (const auto& [month, days] : days_in_month) {
    if (days < options.min_days_per_month) {
      run_length = 0;
      continue;
    }
    if (run_length > 0 && month == prev + 1) {
      ++run_length;
    } else {
      run_start = month;
      run_length = 1;
    }
    prev = month;
    if (run_length == options.consecutive_months) {
      first_month = run_start;
      break;
    }
  }
  if (!first_month) return std::nullopt;

  auto month_start = [](std::int32_t m) {
    return from_civil({m / 12, static_cast<unsigned>(m % 12 + 1), 1});
  };
  TrendResult result;
  result.user_id = std::move(user_id);
  result.window_start = month_start(*first_month);
  result.window_end = DayKey{month_start(*first_month + options.consecutive_months).days - 1};

  std::vector<double> x, y;
  if (options.include_zero_days) {
    for (DayKey d = result.window_start; d <= result.window_end; d.days++) {
      const auto it = by_day.find(d);
      x.push_back(d.days - result.window_start.days);
      y.push_back(it == by_day.end() ? 0.0 : it->second);
    }
  } else {
    for (auto it = by_day.lower_bound(result.window_start);
         it != by_day.end() && it->first <= result.window_end; ++it) {
      x.push_back(it->first.days - result.window_start.days);
      y.push_back(it->second);
    }
  }
  const OlsFit fit = ols_slope_test(x, y);
  result.slope = fit.slope;
  result.p_value = fit.p_value;
  result.n_days_used = fit.n;
  if (fit.p_value < options.alpha && fit.slope > 0) {
    result.classification = TrendClass::Increase;
  } else if (fit.p_value < options.alpha && fit.slope < 0) {
    result.classification = TrendClass::Decrease;
  } else {
    result.classification = TrendClass::NoChange;
  }
  return result;
}

TrendReport trend_report(std::span<const DailyUsage> daily, const TrendOptions& options) {
  TrendReport report;
  std::map<std::string, std::vector<DailyCount>> by_user;
  for (const auto& row : daily) {
    by_user[row.user_id].push_back({row.day_key, static_cast<double>(row.n_sessions)});
  }
  std::int64_t inc = 0, dec = 0, none = 0;
  for (auto& [user, counts] : by_user) {
    auto r = trend(user, counts, options);
    if (!r) {
      report.ineligible.push_back(user);
      continue;
    }
    switch (r->classification) {
      case TrendClass::Increase:
        ++inc;
        break;
      case TrendClass::Decrease:
        ++dec;
        break;
      case TrendClass::NoChange:
        ++none;
        break;
    }
    report.rows.push_back(std::move(*r));
  }
  if (!report.rows.empty()) {
    const double n = static_cast<double>(report.rows.size());
    report.share_increase = static_cast<double>(inc) / n;
    report.share_decrease = static_cast<double>(dec) / n;
    report.share_no_change = static_cast<double>(none) / n;
  }
  return report;
}

double discriminant(std::span<const UserDayObservation> rows, bool log_transform) {
  if (rows.size() < 3) throw DegenerateInput("discriminant needs at least 3 user-days");
  auto tf = [log_transform](double v) { return log_transform ? std::log(std::max(v, 1e-6)) : v; };

  double sw = 0, sx = 0, sy = 0, max_abs_x = 0;
  for (const auto& r : rows) {
    const double x = tf(r.n_sessions), y = tf(r.total_minutes);
    sw += r.weight;
    sx += r.weight * x;
    sy += r.weight * y;
    max_abs_x = std::max(max_abs_x, std::fabs(x));
  }
  if (!(sw > 0)) throw DegenerateInput("weights sum to zero");
  const double mx = sx / sw, my = sy / sw;
  double vx = 0, vy = 0, cxy = 0;
  for (const auto& r : rows) {
    const double dx = tf(r.n_sessions) - mx, dy = tf(r.total_minutes) - my;
    vx += r.weight * dx * dx;
    vy += r.weight * dy * dy;
    cxy += r.weight * dx * dy;
  }
  const double noise_floor = 1e-12 * max_abs_x;
  if (vx / sw <= noise_floor * noise_floor) {
    throw DegenerateInput("number of sessions has zero variance");
  }
  if (vy == 0) return 0.0;
  return std::clamp(cxy * cxy / (vx * vy), 0.0, 1.0);
}

std::vector<UserDayObservation> discriminant_inputs(std::span<const DailyUsage> daily) {
  std::map<std::string_view, std::int32_t> active;
  for (const auto& r : daily) ++active[r.user_id];
  std::vector<UserDayObservation> rows;
  rows.reserve(daily.size());
  for (const auto& r : daily) {
    rows.push_back({r.total_minutes, static_cast<double>(r.n_sessions),
                    static_cast<double>(active[r.user_id])});
  }
  return rows;
}

std::vector<double> day_coverage(std::span<const Session> day_sessions, std::int32_t bin_s) {
  if (bin_s <= 0 || kSecondsPerDay % bin_s != 0) {
    throw InvalidSpec("bin width must divide 86400 seconds");
  }
  const auto bins = static_cast<std::size_t>(kSecondsPerDay / bin_s);
  const double width = bin_s;
  const double day = static_cast<double>(kSecondsPerDay);
  std::vector<double> seconds(bins, 0.0);

  auto add = [&](double a, double b) {  // [a, b) within [0, 86400]
    auto first = static_cast<std::size_t>(a / width);
    for (std::size_t k = first; k < bins; ++k) {
      const double lo = static_cast<double>(k) * width, hi = lo + width;
      if (lo >= b) break;
      seconds[k] += std::min(b, hi) - std::max(a, lo);
    }
  };
  for (const Session& s : day_sessions) {
    double start = s.start_sod;
    double remaining = s.duration_s();
    while (remaining > 0) {
      const double end = std::min(day, start + remaining);
      add(start, end);
      remaining -= end - start;
      start = 0;
    }
  }
  for (double& v : seconds) v = std::min(1.0, v / width);
  return seconds;
}

HeatmapMatrix heatmap(std::span<const Session> sessions,
                      const std::map<std::string, std::int32_t>& community_of,
                      std::span<const std::pair<std::int32_t, std::int32_t>> communities,
                      std::int32_t bin_s) {
  HeatmapMatrix m;
  m.bin_s = bin_s;
  const auto bins = static_cast<std::size_t>(m.bins());
  std::map<std::int32_t, std::size_t> row_of;
  for (const auto& [id, size] : communities) {
    row_of[id] = m.community_ids.size();
    m.community_ids.push_back(id);
    m.community_sizes.push_back(size);
    m.user_days.push_back(0);
    m.cells.emplace_back(bins, 0.0);
  }

  const auto idx = order_by_user_day(sessions);
  std::vector<Session> day;
  for (std::size_t k = 0; k < idx.size();) {
    const Session& head = sessions[idx[k]];
    day.clear();
    for (; k < idx.size() && sessions[idx[k]].user_id == head.user_id &&
           sessions[idx[k]].day_key == head.day_key;
         ++k) {
      day.push_back(sessions[idx[k]]);
    }
    const auto c = community_of.find(day.front().user_id);
    if (c == community_of.end()) continue;
    const auto r = row_of.find(c->second);
    if (r == row_of.end()) continue;
    const std::vector<double> cover = day_coverage(day, bin_s);
    for (std::size_t b = 0; b < bins; ++b) m.cells[r->second][b] += cover[b];
    ++m.user_days[r->second];
  }
  for (std::size_t r = 0; r < m.cells.size(); ++r) {
    if (m.user_days[r] == 0) continue;
    for (double& v : m.cells[r]) v /= static_cast<double>(m.user_days[r]);
  }
  return m;
}

}  // namespace sessionkit
