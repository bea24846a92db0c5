#include "sessionkit/records.hpp"

#include <algorithm>

#include "sessionkit/error.hpp"

namespace sessionkit {
namespace {

std::string str(std::int64_t v) { return std::to_string(v); }

}  // namespace

Table sessions_table(std::span<const Session> sessions) {
  Table t({{"user_id"},
           {"session_id", true},
           {"start_ms", true},
           {"end_ms", true},
           {"day_key"},
           {"start_sod", true},
           {"end_sod", true}});
  for (const Session& s : sessions) {
    t.add_row({s.user_id, str(s.session_id), str(s.start_ms), str(s.end_ms), format_day(s.day_key),
               format_double(s.start_sod), format_double(s.end_sod)});
  }
  return t;
}

std::vector<Session> read_sessions(const CsvFile& csv) {
  const std::size_t c_user = csv.column("user_id"), c_id = csv.column("session_id"),
                    c_start = csv.column("start_ms"), c_end = csv.column("end_ms"),
                    c_day = csv.column("day_key"), c_ssod = csv.column("start_sod"),
                    c_esod = csv.column("end_sod");
  std::vector<Session> out;
  out.reserve(csv.row_count());
  for (std::size_t r = 0; r < csv.row_count(); ++r) {
    Session s;
    s.user_id = csv.text(r, c_user);
    s.session_id = static_cast<std::int32_t>(csv.integer(r, c_id));
    s.start_ms = csv.integer(r, c_start);
    s.end_ms = csv.integer(r, c_end);
    const auto day = parse_day(csv.text(r, c_day));
    if (!day) {
      throw InputError(csv.source() + ":" + std::to_string(csv.line_of(r)) +
                       ": field 'day_key': not a YYYY-MM-DD date '" + csv.text(r, c_day) + "'");
    }
    s.day_key = *day;
    s.start_sod = csv.real(r, c_ssod);
    s.end_sod = csv.real(r, c_esod);
    if (s.user_id.empty()) {
      throw InputError(csv.source() + ":" + std::to_string(csv.line_of(r)) + ": field 'user_id' is empty");
    }
    if (s.end_ms < s.start_ms) {
      throw InputError(csv.source() + ":" + std::to_string(csv.line_of(r)) +
                       ": field 'end_ms' precedes start_ms");
    }
    for (double sod : {s.start_sod, s.end_sod}) {
      if (!(sod >= 0 && sod < static_cast<double>(kSecondsPerDay))) {
        throw InputError(csv.source() + ":" + std::to_string(csv.line_of(r)) +
                         ": seconds-of-day outside [0, 86400)");
      }
    }
    out.push_back(std::move(s));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Session& a, const Session& b) { return a.user_id < b.user_id; });
  return out;
}

Table clusters_table(std::span<const ClusterRecord> clusters) {
  Table t({{"user_id"},
           {"cluster_id", true},
           {"size", true},
           {"centroid_start_sod", true},
           {"centroid_end_sod", true},
           {"n_session_days", true},
           {"modularity", true},
           {"is_noise", true}});
  for (const ClusterRecord& c : clusters) {
    t.add_row({c.user_id, str(c.cluster_id), str(c.size), format_double(c.centroid_start_sod),
               format_double(c.centroid_end_sod), str(c.n_session_days),
               format_double(c.modularity), c.is_noise ? "1" : "0"});
  }
  return t;
}

std::vector<ClusterRecord> read_clusters(const CsvFile& csv) {
  const std::size_t c_user = csv.column("user_id"), c_id = csv.column("cluster_id"),
                    c_size = csv.column("size"), c_ss = csv.column("centroid_start_sod"),
                    c_es = csv.column("centroid_end_sod"), c_days = csv.column("n_session_days"),
                    c_q = csv.column("modularity"), c_noise = csv.column("is_noise");
  std::vector<ClusterRecord> out;
  out.reserve(csv.row_count());
  for (std::size_t r = 0; r < csv.row_count(); ++r) {
    ClusterRecord c;
    c.user_id = csv.text(r, c_user);
    c.cluster_id = static_cast<std::int32_t>(csv.integer(r, c_id));
    c.size = static_cast<std::int32_t>(csv.integer(r, c_size));
    c.centroid_start_sod = csv.real(r, c_ss);
    c.centroid_end_sod = csv.real(r, c_es);
    c.n_session_days = static_cast<std::int32_t>(csv.integer(r, c_days));
    c.modularity = csv.real(r, c_q);
    c.is_noise = csv.boolean(r, c_noise);
    if (c.size < 1) {
      throw InputError(csv.source() + ":" + std::to_string(csv.line_of(r)) + ": field 'size' must be >= 1");
    }
    out.push_back(std::move(c));
  }
  std::stable_sort(out.begin(), out.end(), [](const ClusterRecord& a, const ClusterRecord& b) {
    return a.user_id < b.user_id;
  });
  return out;
}

Table communities_table(std::span<const CommunityMembership> rows) {
  Table t({{"user_id"}, {"community_id", true}});
  for (const auto& r : rows) t.add_row({r.user_id, str(r.community_id)});
  return t;
}

std::vector<CommunityMembership> read_communities(const CsvFile& csv) {
  const std::size_t c_user = csv.column("user_id"), c_id = csv.column("community_id");
  std::vector<CommunityMembership> out;
  for (std::size_t r = 0; r < csv.row_count(); ++r) {
    out.push_back({csv.text(r, c_user), static_cast<std::int32_t>(csv.integer(r, c_id))});
  }
  return out;
}

Table edges_table(const WeightedGraph& g) {
  Table t({{"u", true}, {"v", true}, {"w", true}});
  for (const Edge& e : g.edges()) t.add_row({str(e.u), str(e.v), format_double(e.w)});
  return t;
}

}  // namespace sessionkit
