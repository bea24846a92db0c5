#include "sessionkit/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "parallel.hpp"
#include "sessionkit/community.hpp"
#include "sessionkit/config.hpp"
#include "sessionkit/error.hpp"
#include "sessionkit/ingest.hpp"
#include "sessionkit/metrics.hpp"
#include "sessionkit/records.hpp"
#include "sessionkit/rng.hpp"
#include "sessionkit/sessionize.hpp"
#include "sessionkit/synth.hpp"
#include "sessionkit/table.hpp"

namespace sessionkit::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

// Raised for settings that parse but are out of range; maps to exit 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

enum class Format { Csv, Json };

struct Context {
  PipelineConfig config;
  Format format = Format::Csv;
  unsigned threads = 1;
  std::ostream& log;
};

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void write_json(const fs::path& path, const Json& j) { write_file(path, dump(j)); }

// Per-row outputs honour --format; the stage hand-off files are always CSV.
fs::path write_table(const Context& ctx, const fs::path& dir, const std::string& stem,
                     const Table& table) {
  std::ostringstream os;
  fs::path path;
  if (ctx.format == Format::Json) {
    table.write_json(os);
    path = dir / (stem + ".json");
  } else {
    table.write_csv(os);
    path = dir / (stem + ".csv");
  }
  write_file(path, os.str());
  return path;
}

void write_csv(const fs::path& path, const Table& table) {
  std::ostringstream os;
  table.write_csv(os);
  write_file(path, os.str());
}

Json summary_json(const Summary& s) {
  Json j;
  j["n"] = s.n;
  j["mean"] = s.mean;
  j["median"] = s.median;
  j["min"] = s.min;
  j["max"] = s.max;
  return j;
}

Table histogram_table(const Histogram& h) {
  Table t({{"bin_lo", true}, {"bin_hi", true}, {"count", true}});
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    t.add_row({format_double(h.edges[i]), format_double(h.edges[i + 1]),
               std::to_string(h.counts[i])});
  }
  return t;
}

std::string safe_name(std::string_view s) {
  std::string out;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '-' || c == '.';
    out += ok ? c : '_';
  }
  return out;
}

std::string hhmm(std::int64_t sod) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02d:%02d", static_cast<int>(sod / 3600),
                static_cast<int>(sod % 3600 / 60));
  return buf;
}

std::vector<Session> load_sessions(const fs::path& path) {
  return read_sessions(CsvFile::read(path));
}

// ------------------------------------------------------------- stages ----

void stage_sessionize(const Context& ctx, const std::vector<fs::path>& inputs,
                      const fs::path& out) {
  IngestResult ingest = load_event_files(inputs, ctx.threads);
  constexpr std::size_t kShown = 10;
  for (std::size_t i = 0; i < std::min(kShown, ingest.errors.size()); ++i) {
    ctx.log << "warning: " << ingest.errors[i].message() << '\n';
  }
  if (ingest.stats.malformed > static_cast<std::int64_t>(kShown)) {
    ctx.log << "warning: " << ingest.stats.malformed - static_cast<std::int64_t>(kShown)
            << " more malformed lines\n";
  }

  std::vector<SessionizeResult> per_user(ingest.timelines.size());
  parallel_for(ingest.timelines.size(), ctx.threads, [&](std::size_t i) {
    per_user[i] = build_sessions(ingest.timelines[i], ctx.config.tz_offset_s);
  });
  std::vector<Session> sessions;
  SessionizeStats stats;
  for (auto& r : per_user) {
    stats += r.stats;
    sessions.insert(sessions.end(), std::make_move_iterator(r.sessions.begin()),
                    std::make_move_iterator(r.sessions.end()));
  }
  write_csv(out / "sessions.csv", sessions_table(sessions));
  write_file(out / "sessionize-stats.json", sessionize_stats_json(stats));
  write_file(out / "ingest-stats.json", ingest_stats_json(ingest.stats));
  ctx.log << "sessionize: " << sessions.size() << " sessions from " << ingest.timelines.size()
          << " users, " << ingest.stats.lines_read << " lines (" << ingest.stats.malformed
          << " malformed)\n";
}

void stage_cluster(const Context& ctx, const fs::path& sessions_csv, const fs::path& out,
                   const std::optional<fs::path>& graph_out) {
  const std::vector<Session> sessions = load_sessions(sessions_csv);
  const auto users = group_by_user(std::span<const Session>(sessions));
  GraphOptions options;
  options.epsilon_s = ctx.config.epsilon_s;
  options.knn_k = ctx.config.knn_k;
  options.knn_threshold = ctx.config.knn_threshold;
  const std::uint64_t seed = stage_seed(ctx.config.seed, kClusterSeedOffset);

  std::vector<UserClustering> results(users.size());
  parallel_for(users.size(), ctx.threads, [&](std::size_t i) {
    const std::string& user = users[i].front().user_id;
    const std::uint64_t user_seed = seed == 0 ? 0 : derive_seed(seed, fnv1a(user));
    WeightedGraph g;
    results[i] = cluster_sessions(users[i], options, user_seed, graph_out ? &g : nullptr);
    if (graph_out) write_csv(*graph_out / (safe_name(user) + ".csv"), edges_table(g));
  });

  std::vector<ClusterRecord> records;
  Table members({{"user_id"}, {"cluster_id", true}, {"session_id", true}});
  std::int64_t n_clusters = 0, n_noise = 0;
  for (const auto& r : results) {
    auto rec = to_records(r);
    records.insert(records.end(), rec.begin(), rec.end());
    n_clusters += static_cast<std::int64_t>(r.clusters.size());
    n_noise += static_cast<std::int64_t>(r.noise.size());
    for (const auto* group : {&r.clusters, &r.noise}) {
      for (const auto& c : *group) {
        for (std::int32_t id : c.member_session_ids) {
          members.add_row({c.user_id, std::to_string(c.cluster_id), std::to_string(id)});
        }
      }
    }
  }
  write_csv(out / "clusters.csv", clusters_table(records));
  write_csv(out / "cluster-members.csv", members);

  Json j;
  j["users"] = users.size();
  j["sessions"] = sessions.size();
  j["clusters"] = n_clusters;
  j["noise_sessions"] = n_noise;
  j["noise_share"] = sessions.empty() ? 0.0 : static_cast<double>(n_noise) / sessions.size();
  write_json(out / "cluster-run.json", j);
  ctx.log << "cluster: " << n_clusters << " clusters, " << n_noise << " noise sessions over "
          << users.size() << " users\n";
}

void stage_communities(const Context& ctx, const fs::path& clusters_csv, const fs::path& out,
                       const std::optional<fs::path>& graph_out) {
  const std::vector<ClusterRecord> records = read_clusters(CsvFile::read(clusters_csv));
  std::vector<UserProfile> profiles;
  for (const auto& c : records) {
    if (profiles.empty() || profiles.back().user_id != c.user_id) profiles.push_back({c.user_id, {}});
    if (!c.is_noise) profiles.back().centroids.push_back(c.centroid());
  }
  WeightedGraph g;
  const UserCommunities uc =
      detect_user_communities(profiles, stage_seed(ctx.config.seed, kCommunitySeedOffset),
                              ctx.config.min_report_size, ctx.config.epsilon_s, &g);

  std::vector<CommunityMembership> rows;
  for (const auto& [user, id] : uc.membership) rows.push_back({user, id});
  write_csv(out / "communities.csv", communities_table(rows));
  if (graph_out) write_csv(*graph_out / "user-graph.csv", edges_table(g));

  Json j;
  j["users"] = uc.membership.size();
  j["communities"] = uc.communities.size();
  j["modularity"] = uc.modularity;
  j["min_report_size"] = ctx.config.min_report_size;
  Json list = Json::array();
  for (const auto& c : uc.communities) {
    Json e;
    e["community_id"] = c.community_id;
    e["size"] = c.size;
    e["share"] = c.share;
    e["small"] = c.small;
    list.push_back(e);
  }
  j["community_table"] = list;
  j["excluded_users"] = uc.excluded_users;
  j["reference"] = {{"modularity", 0.83}, {"communities", 13}, {"small_communities", 2}};
  write_json(out / "community-summary.json", j);
  ctx.log << "communities: " << uc.communities.size() << " communities over "
          << uc.membership.size() << " users, modularity " << uc.modularity << '\n';
}

void stage_stats(const Context& ctx, const fs::path& sessions_csv,
                 const std::optional<fs::path>& clusters_csv, const fs::path& out) {
  const std::vector<Session> sessions = load_sessions(sessions_csv);
  const DailyStats ds = daily_stats(sessions);
  Table daily({{"user_id"},
               {"day_key"},
               {"total_minutes", true},
               {"n_sessions", true},
               {"mean_session_minutes", true}});
  for (const auto& r : ds.rows) {
    daily.add_row({r.user_id, format_day(r.day_key), format_double(r.total_minutes),
                   std::to_string(r.n_sessions), format_double(r.mean_session_minutes)});
  }
  write_table(ctx, out, "daily", daily);
  write_table(ctx, out, "hist-total-minutes", histogram_table(ds.total_minutes_hist));
  write_table(ctx, out, "hist-n-sessions", histogram_table(ds.n_sessions_hist));
  write_table(ctx, out, "hist-mean-session-minutes", histogram_table(ds.mean_session_minutes_hist));

  Json j;
  j["user_days"] = ds.rows.size();
  j["total_minutes"] = summary_json(ds.total_minutes);
  j["n_sessions"] = summary_json(ds.n_sessions);
  j["mean_session_minutes"] = summary_json(ds.mean_session_minutes);
  j["zero_total_minutes_days"] = ds.total_minutes_hist.non_positive;
  j["reference"] = {{"mean_total_minutes", 175}, {"median_total_minutes", 97},
                    {"mean_n_sessions", 24},     {"median_n_sessions", 18},
                    {"mean_session_minutes", 17}, {"median_session_minutes", 4}};
  write_json(out / "daily-summary.json", j);

  if (clusters_csv) {
    const auto records = read_clusters(CsvFile::read(*clusters_csv));
    const ClusterStats cs = cluster_stats(records);
    Table per_user({{"user_id"},
                    {"n_clusters", true},
                    {"mean_size", true},
                    {"median_size", true},
                    {"modularity", true},
                    {"n_noise", true}});
    for (const auto& u : cs.users) {
      per_user.add_row({u.user_id, std::to_string(u.n_clusters), format_double(u.mean_size),
                        format_double(u.median_size), format_double(u.modularity),
                        std::to_string(u.n_noise)});
    }
    write_table(ctx, out, "cluster-stats", per_user);
    write_table(ctx, out, "hist-n-clusters", histogram_table(cs.n_clusters_hist));
    Json c;
    c["users"] = cs.users.size();
    c["n_clusters"] = summary_json(cs.n_clusters);
    c["mean_size"] = summary_json(cs.mean_size);
    c["median_size"] = summary_json(cs.median_size);
    c["modularity"] = summary_json(cs.modularity);
    c["noise_sessions"] = cs.noise_sessions;
    c["clustered_sessions"] = cs.clustered_sessions;
    const auto total = cs.noise_sessions + cs.clustered_sessions;
    c["noise_share"] = total == 0 ? 0.0 : static_cast<double>(cs.noise_sessions) / total;
    c["reference"] = {{"mean_n_clusters", 13}, {"modularity_low", 0.77}, {"modularity_high", 0.80}};
    write_json(out / "cluster-summary.json", c);
  }
  ctx.log << "stats: " << ds.rows.size() << " user-days\n";
}

void stage_rrs(const Context& ctx, const fs::path& clusters_csv, const fs::path& sessions_csv,
               const fs::path& out) {
  const auto records = read_clusters(CsvFile::read(clusters_csv));
  const auto sessions = load_sessions(sessions_csv);
  const RrsReport report =
      rrs_report(records, active_days_per_user(sessions), ctx.config.min_cluster_size_for_rrs);
  Table t({{"user_id"}, {"n_clusters", true}, {"n_active_days", true}, {"rrs", true}});
  for (const auto& r : report.rows) {
    t.add_row({r.user_id, std::to_string(r.n_clusters), std::to_string(r.n_active_days),
               format_double(r.rrs)});
  }
  write_table(ctx, out, "rrs", t);
  Json j;
  j["min_cluster_size"] = report.min_cluster_size;
  j["users"] = report.rows.size();
  j["clusters"] = report.n_clusters;
  j["rrs"] = summary_json(report.rrs);
  j["users_without_clusters"] = report.users_without_clusters;
  j["reference"] = {{"all_clusters_mean", 0.48}, {"all_clusters_median", 0.48},
                    {"min_size_10_mean", 0.60}, {"min_size_10_median", 0.63}};
  write_json(out / "rrs-summary.json", j);
  ctx.log << "rrs: mean " << report.rrs.mean << " over " << report.rows.size() << " users\n";
}

void stage_trend(const Context& ctx, const fs::path& sessions_csv, const fs::path& out) {
  const auto sessions = load_sessions(sessions_csv);
  const DailyStats ds = daily_stats(sessions);
  TrendOptions options;
  options.alpha = ctx.config.trend_alpha;
  options.include_zero_days = ctx.config.trend_include_zero_days;
  const TrendReport report = trend_report(ds.rows, options);
  Table t({{"user_id"},
           {"window_start"},
           {"window_end"},
           {"n_days_used", true},
           {"slope", true},
           {"p_value", true},
           {"classification"}});
  for (const auto& r : report.rows) {
    t.add_row({r.user_id, format_day(r.window_start), format_day(r.window_end),
               std::to_string(r.n_days_used), format_double(r.slope), format_double(r.p_value),
               std::string(to_string(r.classification))});
  }
  write_table(ctx, out, "trend", t);
  Json j;
  j["alpha"] = options.alpha;
  j["include_zero_days"] = options.include_zero_days;
  j["eligible_users"] = report.rows.size();
  j["ineligible_users"] = report.ineligible.size();
  j["share_increase"] = report.share_increase;
  j["share_decrease"] = report.share_decrease;
  j["share_no_change"] = report.share_no_change;
  j["reference"] = {{"share_increase", 0.19}, {"share_decrease", 0.38}, {"share_no_change", 0.47}};
  write_json(out / "trend-summary.json", j);
  ctx.log << "trend: " << report.rows.size() << " eligible users\n";
}

void stage_discriminant(const Context& ctx, const fs::path& sessions_csv, const fs::path& out) {
  const auto sessions = load_sessions(sessions_csv);
  const DailyStats ds = daily_stats(sessions);
  const auto rows = discriminant_inputs(ds.rows);
  Json j;
  j["model"] =
      "weighted least squares of daily total minutes on daily session count, weights = user's "
      "active-day count; with one predictor the squared semi-partial correlation equals the "
      "weighted r^2";
  j["user_days"] = rows.size();
  for (const bool logged : {false, true}) {
    const char* key = logged ? "sr2_log" : "sr2_raw";
    try {
      j[key] = discriminant(rows, logged);
    } catch (const DegenerateInput& e) {
      j[key] = nullptr;
      j[std::string(key) + "_error"] = e.what();
    }
  }
  j["reference"] = {{"sr2_raw", 0.018}, {"sr2_log", 0.284}};
  if (ctx.format == Format::Csv) {
    Table t({{"transform"}, {"sr2", true}});
    t.add_row({"raw", j["sr2_raw"].is_null() ? "" : format_double(j["sr2_raw"].get<double>())});
    t.add_row({"log", j["sr2_log"].is_null() ? "" : format_double(j["sr2_log"].get<double>())});
    write_csv(out / "discriminant.csv", t);
  }
  write_json(out / "discriminant.json", j);
  ctx.log << "discriminant: " << rows.size() << " user-days\n";
}

void stage_heatmap(const Context& ctx, const fs::path& sessions_csv,
                   const fs::path& communities_csv, const fs::path& out) {
  const auto sessions = load_sessions(sessions_csv);
  const auto membership = read_communities(CsvFile::read(communities_csv));
  std::map<std::string, std::int32_t> community_of;
  std::map<std::int32_t, std::int32_t> sizes;
  for (const auto& m : membership) {
    community_of[m.user_id] = m.community_id;
    ++sizes[m.community_id];
  }
  const std::vector<std::pair<std::int32_t, std::int32_t>> rows(sizes.begin(), sizes.end());
  const HeatmapMatrix hm = heatmap(sessions, community_of, rows, ctx.config.heatmap_bin_s);

  std::vector<Table::Column> cols = {{"community_id", true}, {"size", true}, {"user_days", true}};
  for (std::int32_t b = 0; b < hm.bins(); ++b) {
    cols.push_back({hhmm(static_cast<std::int64_t>(b) * hm.bin_s), true});
  }
  Table t(cols);
  Json peaks = Json::array();
  for (std::size_t r = 0; r < hm.cells.size(); ++r) {
    std::vector<std::string> row = {std::to_string(hm.community_ids[r]),
                                    std::to_string(hm.community_sizes[r]),
                                    std::to_string(hm.user_days[r])};
    for (double v : hm.cells[r]) row.push_back(format_double(v));
    t.add_row(std::move(row));
    const auto peak = std::max_element(hm.cells[r].begin(), hm.cells[r].end());
    Json p;
    p["community_id"] = hm.community_ids[r];
    p["size"] = hm.community_sizes[r];
    p["peak_bin"] = hhmm(static_cast<std::int64_t>(peak - hm.cells[r].begin()) * hm.bin_s);
    p["peak_value"] = *peak;
    peaks.push_back(p);
  }
  write_table(ctx, out, "heatmap", t);
  Json j;
  j["bin_s"] = hm.bin_s;
  j["bins"] = hm.bins();
  j["communities"] = peaks;
  write_json(out / "heatmap-summary.json", j);
  ctx.log << "heatmap: " << hm.cells.size() << " communities x " << hm.bins() << " bins\n";
}

void run_synth(const Context& ctx, const std::vector<std::string>& archetypes, std::int32_t users,
               std::int32_t days, double noise_rate, const fs::path& out) {
  std::vector<ArchetypeSpec> specs;
  for (const auto& name : archetypes) {
    ArchetypeSpec s = builtin_archetype(name);
    s.days = days;
    s.tz_offset_s = ctx.config.tz_offset_s;
    s.noise_rate_per_hour = noise_rate;
    specs.push_back(std::move(s));
  }
  Json truth;
  truth["seed"] = ctx.config.seed;
  truth["days"] = days;
  truth["tz_offset_s"] = ctx.config.tz_offset_s;
  truth["first_day"] = format_day(specs.front().first_day);
  Json list = Json::array();
  std::vector<SyntheticUser> generated(static_cast<std::size_t>(users));
  parallel_for(generated.size(), ctx.threads, [&](std::size_t i) {
    char name[32];
    std::snprintf(name, sizeof name, "u%04zu", i + 1);
    generated[i] = gen_user_logs(specs[i % specs.size()], name,
                                 derive_seed(ctx.config.seed, static_cast<std::uint64_t>(i + 1)));
  });
  for (std::size_t i = 0; i < generated.size(); ++i) {
    const SyntheticUser& u = generated[i];
    std::string text;
    for (const auto& line : u.lines) {
      text += line;
      text += '\n';
    }
    write_file(out / (u.user_id + ".log"), text);
    Json e;
    e["user_id"] = u.user_id;
    e["archetype"] = specs[i % specs.size()].name;
    e["n_sessions"] = u.planted.size();
    Json sessions = Json::array();
    for (const auto& p : u.planted) sessions.push_back({p.start_ms, p.end_ms});
    e["sessions"] = sessions;
    list.push_back(e);
  }
  truth["users"] = list;
  write_json(out / "ground-truth.json", truth);
  ctx.log << "synth: " << users << " users x " << days << " days written to " << out.string()
          << '\n';
}

// ---------------------------------------------------------- arguments ----

// Options every subcommand accepts. Flags override the config file.
struct CommonFlags {
  std::string config_path;
  std::optional<std::int64_t> tz_offset_s;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string format = "csv";

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "Flat key = value config file");
    app->add_option("--tz-offset", tz_offset_s, "Timezone offset in seconds east of UTC");
    app->add_option("--seed", seed, "Global seed");
    app->add_option("--threads", threads, "Worker threads (default: SESSIONKIT_THREADS or all cores)");
    app->add_option("--format", format, "Per-row output format")
        ->check(CLI::IsMember({"csv", "json"}));
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"sessionkit: mobile usage sessions, session-clusters and user-communities"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  CommonFlags common;
  std::string out_dir;
  std::vector<std::string> inputs;
  std::string sessions_path, clusters_path, communities_path, graph_out;
  std::optional<double> epsilon, alpha;
  std::optional<std::int32_t> knn_k, knn_threshold, min_size, min_report, bin_s;
  bool zero_days = false;
  std::vector<std::string> archetypes;
  std::int32_t users = 10, days = 30;
  double noise_rate = 10;

  auto add = [&](const char* name, const char* about) {
    CLI::App* sub = app.add_subcommand(name, about);
    common.attach(sub);
    sub->add_option("--out", out_dir, "Output directory")->required();
    return sub;
  };
  auto graph_flags = [&](CLI::App* sub) {
    sub->add_option("--epsilon", epsilon, "Distance floor in seconds before the reciprocal");
  };

  CLI::App* sessionize = add("sessionize", "Event logs -> sessions.csv");
  sessionize->add_option("--in", inputs, "Log files or directories (plain or gzip)")->required();

  CLI::App* stats = add("stats", "Daily usage and cluster descriptives");
  stats->add_option("--sessions", sessions_path)->required();
  stats->add_option("--clusters", clusters_path);

  CLI::App* cluster = add("cluster", "sessions.csv -> clusters.csv");
  cluster->add_option("--sessions", sessions_path)->required();
  cluster->add_option("--graph-out", graph_out, "Directory for per-user u,v,w edge lists");
  cluster->add_option("--knn-k", knn_k);
  cluster->add_option("--knn-threshold", knn_threshold);
  graph_flags(cluster);

  CLI::App* communities = add("communities", "clusters.csv -> communities.csv");
  communities->add_option("--clusters", clusters_path)->required();
  communities->add_option("--min-report-size", min_report);
  communities->add_option("--graph-out", graph_out, "Directory for the user-graph edge list");
  graph_flags(communities);

  CLI::App* rrs_cmd = add("rrs", "Rate of repeated sessions");
  rrs_cmd->add_option("--clusters", clusters_path)->required();
  rrs_cmd->add_option("--sessions", sessions_path,
                      "Defaults to sessions.csv next to the clusters file");
  rrs_cmd->add_option("--min-size", min_size, "Only clusters with at least this many sessions");

  CLI::App* trend_cmd = add("trend", "Per-user fragmentation trend");
  trend_cmd->add_option("--sessions", sessions_path)->required();
  trend_cmd->add_option("--alpha", alpha);
  trend_cmd->add_flag("--include-zero-days", zero_days);

  CLI::App* discr = add("discriminant", "Weighted regression of daily time on session count");
  discr->add_option("--sessions", sessions_path)->required();

  CLI::App* heat = add("heatmap", "Community x time-of-day activity matrix");
  heat->add_option("--sessions", sessions_path)->required();
  heat->add_option("--communities", communities_path)->required();
  heat->add_option("--bin-s", bin_s);

  CLI::App* synth = add("synth", "Synthetic logs with ground truth");
  synth->add_option("--archetype", archetypes, "morning, evening, allday (repeatable or comma list)")
      ->delimiter(',');
  synth->add_option("--users", users)->check(CLI::PositiveNumber);
  synth->add_option("--days", days)->check(CLI::PositiveNumber);
  synth->add_option("--noise-rate", noise_rate, "Other events per hour")->check(CLI::NonNegativeNumber);

  CLI::App* pipeline = add("pipeline", "Run every stage");
  pipeline->add_option("--in", inputs, "Log files or directories")->required();
  pipeline->add_option("--graph-out", graph_out);
  pipeline->add_option("--knn-k", knn_k);
  pipeline->add_option("--knn-threshold", knn_threshold);
  pipeline->add_option("--min-size", min_size);
  pipeline->add_option("--min-report-size", min_report);
  pipeline->add_option("--alpha", alpha);
  pipeline->add_flag("--include-zero-days", zero_days);
  pipeline->add_option("--bin-s", bin_s);
  graph_flags(pipeline);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::ostringstream os;
    app.exit(e, os, os);
    err << os.str();
    return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
  }

  try {
    PipelineConfig config;
    if (!common.config_path.empty()) load_config_file(config, common.config_path);
    if (common.tz_offset_s) config.tz_offset_s = *common.tz_offset_s;
    if (common.seed) config.seed = *common.seed;
    if (common.threads) config.threads = *common.threads;
    if (epsilon) config.epsilon_s = *epsilon;
    if (knn_k) config.knn_k = *knn_k;
    if (knn_threshold) config.knn_threshold = *knn_threshold;
    if (min_size) config.min_cluster_size_for_rrs = *min_size;
    if (min_report) config.min_report_size = *min_report;
    if (alpha) config.trend_alpha = *alpha;
    if (zero_days) config.trend_include_zero_days = true;
    if (bin_s) config.heatmap_bin_s = *bin_s;
    config.out = out_dir;
    try {
      config.validate();
    } catch (const InputError& e) {
      throw UsageError(e.what());
    }

    Context ctx{config, common.format == "json" ? Format::Json : Format::Csv,
                resolve_threads(config.threads), out};
    const fs::path dir = out_dir;
    const std::vector<fs::path> in_paths(inputs.begin(), inputs.end());
    const std::optional<fs::path> graph_dir =
        graph_out.empty() ? std::nullopt : std::optional<fs::path>(graph_out);
    const std::optional<fs::path> clusters_opt =
        clusters_path.empty() ? std::nullopt : std::optional<fs::path>(clusters_path);

    if (*sessionize) {
      stage_sessionize(ctx, in_paths, dir);
    } else if (*stats) {
      stage_stats(ctx, sessions_path, clusters_opt, dir);
    } else if (*cluster) {
      stage_cluster(ctx, sessions_path, dir, graph_dir);
    } else if (*communities) {
      stage_communities(ctx, clusters_path, dir, graph_dir);
    } else if (*rrs_cmd) {
      const fs::path sessions_file = sessions_path.empty()
                                         ? fs::path(clusters_path).parent_path() / "sessions.csv"
                                         : fs::path(sessions_path);
      stage_rrs(ctx, clusters_path, sessions_file, dir);
    } else if (*trend_cmd) {
      stage_trend(ctx, sessions_path, dir);
    } else if (*discr) {
      stage_discriminant(ctx, sessions_path, dir);
    } else if (*heat) {
      stage_heatmap(ctx, sessions_path, communities_path, dir);
    } else if (*synth) {
      if (archetypes.empty()) archetypes = builtin_archetype_names();
      run_synth(ctx, archetypes, users, days, noise_rate, dir);
    } else if (*pipeline) {
      stage_sessionize(ctx, in_paths, dir);
      const fs::path sessions_file = dir / "sessions.csv";
      const fs::path clusters_file = dir / "clusters.csv";
      stage_cluster(ctx, sessions_file, dir, graph_dir);
      stage_communities(ctx, clusters_file, dir, graph_dir);
      stage_stats(ctx, sessions_file, clusters_file, dir);
      stage_rrs(ctx, clusters_file, sessions_file, dir);
      stage_trend(ctx, sessions_file, dir);
      stage_discriminant(ctx, sessions_file, dir);
      stage_heatmap(ctx, sessions_file, dir / "communities.csv", dir);
    }
    return kExitOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidSpec& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
}

}  // namespace sessionkit::cli
