#pragma once

#include <cctype>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mobimetrics/anomaly.hpp"
#include "mobimetrics/cohort.hpp"
#include "mobimetrics/configfile.hpp"
#include "mobimetrics/econometrics.hpp"
#include "mobimetrics/indices.hpp"
#include "mobimetrics/io.hpp"
#include "mobimetrics/presence.hpp"
#include "mobimetrics/spatial.hpp"
#include "mobimetrics/version.hpp"

// Stage orchestration shared by the CLI and the test suites. Every stage is a
// pure function of its input files and config: outputs are written with
// sorted iteration and round-trip number formatting, so re-running a stage on
// unchanged inputs reproduces files byte for byte.
namespace mobimetrics::pipeline {

struct PipelineConfig {
    std::string config_dir;

    // mobility inputs (empty when the world has no mobility side)
    std::string positioning_path;
    std::string queries_path;
    std::string poi_path;
    std::string aoi_path;

    std::int64_t window_start_day = 0;
    std::int64_t window_end_day = 0;
    int base_year = 2014;
    int employee_day_threshold = 10;
    WorkHours work_hours;
    double cell_size_deg = 0.01;
    std::vector<std::string> trend_categories;
    std::vector<std::string> trend_categories_raw;

    // venue panel inputs
    std::string venues_daily_path;
    std::string platform_daily_path;
    bool normalize_queries = false;
    std::int64_t nowcast_start_day = 0;
    std::vector<std::string> suspected_venues;
    std::vector<std::string> control_venues;
    std::int64_t detect_train_start = 0;
    std::int64_t detect_train_end = 0;
    double z_threshold = 3.0;
    int min_run = 5;

    TimeWindow time_window() const {
        return {day_start_timestamp(window_start_day), day_start_timestamp(window_end_day + 1) - 1};
    }
    MonthId first_month() const { return month_of_day(window_start_day); }
    MonthId last_month() const { return month_of_day(window_end_day); }
    MonthId first_report_month() const { return MonthId::from_index(first_month().index() + 12); }

    static PipelineConfig load(const std::string& path) {
        namespace fs = std::filesystem;
        ConfigFile cfg = ConfigFile::load(path);
        PipelineConfig p;
        p.config_dir = fs::path(path).parent_path().string();
        auto resolve = [&](const std::string& key) -> std::string {
            if (!cfg.has(key)) return {};
            fs::path v = cfg.get_string(key);
            if (v.is_absolute()) return v.string();
            return (fs::path(p.config_dir) / v).string();
        };
        p.positioning_path = resolve("positioning");
        p.queries_path = resolve("queries");
        p.poi_path = resolve("pois");
        p.aoi_path = resolve("aois");
        p.window_start_day = cfg.get_date("window_start");
        p.window_end_day = cfg.get_date("window_end");
        if (p.window_start_day > p.window_end_day)
            throw std::runtime_error(path + ": window_start after window_end");
        p.base_year = static_cast<int>(cfg.get_int("base_year", p.base_year));
        p.employee_day_threshold = static_cast<int>(cfg.get_int("employee_day_threshold", 10));
        p.work_hours.start_hour = static_cast<int>(cfg.get_int("work_start_hour", 9));
        p.work_hours.end_hour = static_cast<int>(cfg.get_int("work_end_hour", 18));
        p.cell_size_deg = cfg.get_double("cell_size_deg", 0.01);
        p.trend_categories = cfg.get_list("trend_categories");
        p.trend_categories_raw = cfg.get_list("trend_categories_raw");
        p.venues_daily_path = resolve("venues_daily");
        p.platform_daily_path = resolve("platform_daily");
        p.normalize_queries = cfg.get_bool("normalize_queries", false);
        p.nowcast_start_day = cfg.get_date("nowcast_start", 0);
        p.suspected_venues = cfg.get_list("suspected_venues");
        p.control_venues = cfg.get_list("control_venues");
        p.detect_train_start = cfg.get_date("detect_train_start", p.window_start_day);
        p.detect_train_end = cfg.get_date("detect_train_end", 0);
        p.z_threshold = cfg.get_double("z_threshold", 3.0);
        p.min_run = static_cast<int>(cfg.get_int("min_run", 5));
        return p;
    }

    void require_mobility(const char* stage) const {
        if (positioning_path.empty() || poi_path.empty() || aoi_path.empty())
            throw std::runtime_error(std::string(stage) +
                                     ": config lacks mobility inputs (positioning/pois/aois)");
    }
    void require_venues(const char* stage) const {
        if (venues_daily_path.empty())
            throw std::runtime_error(std::string(stage) + ": config lacks venue inputs (venues_daily)");
    }
};

// ---------------------------------------------------------------------------

struct VenueDaily {
    DailySeries visitors;
    DailySeries queries;
    DailySeries revenue;
};

// venues_daily.csv: venue_id,date,visitors,queries,revenue with a contiguous
// date range per venue. Gaps or format defects are fatal.
inline std::map<std::string, VenueDaily> load_venues_daily(const std::string& path) {
    std::string buf = read_file(path);
    struct Raw {
        std::vector<std::int64_t> days;
        std::vector<double> vis, q, rev;
    };
    std::map<std::string, Raw> raw;
    bool saw_header = false;
    for_each_line(buf, [&](std::size_t line_no, std::string_view line) {
        if (trim(line).empty()) return;
        auto fields = split(line, ',');
        if (!saw_header) {
            if (fields.size() != 5 || fields[0] != "venue_id" || fields[1] != "date")
                throw std::runtime_error(path + ": expected header venue_id,date,visitors,queries,revenue");
            saw_header = true;
            return;
        }
        if (fields.size() != 5)
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed row");
        Raw& r = raw[fields[0]];
        r.days.push_back(parse_date(fields[1]));
        r.vis.push_back(parse_double(fields[2], "visitors"));
        r.q.push_back(parse_double(fields[3], "queries"));
        r.rev.push_back(parse_double(fields[4], "revenue"));
    });
    if (!saw_header) throw std::runtime_error(path + ": missing header row");
    std::map<std::string, VenueDaily> out;
    for (auto& [id, r] : raw) {
        for (std::size_t i = 1; i < r.days.size(); ++i)
            if (r.days[i] != r.days[i - 1] + 1)
                throw std::runtime_error(path + ": venue '" + id + "' has a date gap at " + format_date(r.days[i]));
        VenueDaily v;
        v.visitors = DailySeries{r.days.front(), std::move(r.vis)};
        v.queries = DailySeries{r.days.front(), std::move(r.q)};
        v.revenue = DailySeries{r.days.front(), std::move(r.rev)};
        v.visitors.validate("visitors");
        v.queries.validate("queries");
        v.revenue.validate("revenue");
        out.emplace(id, std::move(v));
    }
    return out;
}

inline DailySeries load_platform_daily(const std::string& path) {
    std::string buf = read_file(path);
    std::vector<std::int64_t> days;
    std::vector<double> vals;
    bool saw_header = false;
    for_each_line(buf, [&](std::size_t line_no, std::string_view line) {
        if (trim(line).empty()) return;
        auto fields = split(line, ',');
        if (!saw_header) {
            if (fields.size() != 2 || fields[0] != "date")
                throw std::runtime_error(path + ": expected header date,total_queries");
            saw_header = true;
            return;
        }
        if (fields.size() != 2) throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed row");
        days.push_back(parse_date(fields[0]));
        vals.push_back(parse_double(fields[1], "total_queries"));
    });
    if (days.empty()) throw std::runtime_error(path + ": empty platform series");
    for (std::size_t i = 1; i < days.size(); ++i)
        if (days[i] != days[i - 1] + 1) throw std::runtime_error(path + ": date gap at " + format_date(days[i]));
    return DailySeries{days.front(), std::move(vals)};
}

// ---------------------------------------------------------------------------
// Stage helpers (in-memory) and stage runners (file to file).
// ---------------------------------------------------------------------------

struct MobilityData {
    std::vector<PositioningRecord> positioning;
    RejectLog positioning_rejects;
    std::vector<MapQueryRecord> queries;
    RejectLog query_rejects;
    PoiCatalog pois;
    AoiCatalog aois;
};

inline MobilityData load_mobility(const PipelineConfig& cfg) {
    MobilityData d;
    auto [pos, prej] = load_positioning(cfg.positioning_path, cfg.time_window());
    d.positioning = std::move(pos);
    d.positioning_rejects = std::move(prej);
    if (!cfg.queries_path.empty()) {
        auto [q, qrej] = load_queries(cfg.queries_path, cfg.time_window());
        d.queries = std::move(q);
        d.query_rejects = std::move(qrej);
    }
    auto [pc, ac] = load_catalog(cfg.poi_path, cfg.aoi_path);
    d.pois = std::move(pc);
    d.aois = std::move(ac);
    return d;
}

inline std::vector<MonthId> report_months(const PipelineConfig& cfg) {
    std::vector<MonthId> out;
    for (int m = cfg.first_report_month().index(); m <= cfg.last_month().index(); ++m)
        out.push_back(MonthId::from_index(m));
    if (out.empty())
        throw std::runtime_error("study window too short: no report month has 12 predecessor months");
    return out;
}

inline std::map<MonthId, std::set<std::string>> monthly_cohorts(const ActivityCalendar& calendar,
                                                                const PipelineConfig& cfg) {
    std::map<MonthId, std::set<std::string>> out;
    for (MonthId m : report_months(cfg)) out.emplace(m, continuous_users(calendar, m, cfg.first_month()));
    return out;
}

inline void ensure_out_dir(const std::string& out_dir) { std::filesystem::create_directories(out_dir); }

// ingest: parse and validate the event streams, write reject reports.
inline nlohmann::ordered_json run_ingest(const PipelineConfig& cfg, const std::string& out_dir) {
    cfg.require_mobility("ingest");
    ensure_out_dir(out_dir);
    MobilityData d = load_mobility(cfg);
    write_file(out_dir + "/rejects_positioning.csv", d.positioning_rejects.to_csv());
    write_file(out_dir + "/rejects_queries.csv", d.query_rejects.to_csv());
    nlohmann::ordered_json doc;
    doc["version"] = kVersion;
    doc["positioning"] = {{"records", d.positioning.size()},
                          {"rejects", d.positioning_rejects.size()},
                          {"lines", d.positioning.size() + d.positioning_rejects.size()}};
    doc["queries"] = {{"records", d.queries.size()},
                      {"rejects", d.query_rejects.size()},
                      {"lines", d.queries.size() + d.query_rejects.size()}};
    doc["pois"] = d.pois.size();
    doc["aois"] = d.aois.size();
    write_file(out_dir + "/ingest_summary.json", doc.dump(1) + "\n");
    return doc;
}

// cohort: 13-month continuous-user sets per report month.
inline nlohmann::ordered_json run_cohort(const PipelineConfig& cfg, const std::string& out_dir) {
    cfg.require_mobility("cohort");
    ensure_out_dir(out_dir);
    auto [records, rejects] = load_positioning(cfg.positioning_path, cfg.time_window());
    ActivityCalendar calendar = monthly_activity(records);
    auto cohorts = monthly_cohorts(calendar, cfg);

    std::string sizes = "year,month,cohort_size\n";
    std::string users = "year,month,user_id\n";
    for (const auto& [m, set] : cohorts) {
        sizes += std::to_string(m.year) + "," + std::to_string(m.month) + "," + std::to_string(set.size()) + "\n";
        for (const auto& u : set)
            users += std::to_string(m.year) + "," + std::to_string(m.month) + "," + u + "\n";
    }
    write_file(out_dir + "/cohort_sizes.csv", sizes);
    write_file(out_dir + "/cohort_users.csv", users);
    nlohmann::ordered_json doc;
    doc["version"] = kVersion;
    doc["report_months"] = cohorts.size();
    doc["first_cohort_size"] = cohorts.begin()->second.size();
    write_file(out_dir + "/cohort_summary.json", doc.dump(1) + "\n");
    return doc;
}

struct PresenceOutputs {
    PresenceMatrix matrix;
    AoiMonthCounts counts;
    MobilityData data;
};

inline PresenceOutputs compute_presence(const PipelineConfig& cfg, unsigned n_threads = 1) {
    PresenceOutputs out{.matrix = {}, .counts = {}, .data = load_mobility(cfg)};
    ActivityCalendar calendar = monthly_activity(out.data.positioning);
    auto cohorts = monthly_cohorts(calendar, cfg);
    AoiIndex index = build_aoi_index(out.data.aois, cfg.cell_size_deg);
    out.matrix = build_presence(out.data.positioning, cohorts, index, cfg.work_hours, n_threads);
    out.counts = count_all(out.matrix, out.data.aois, cfg.employee_day_threshold);
    return out;
}

// presence: per-user-AOI-month activity matrix plus employee/consumer counts.
inline nlohmann::ordered_json run_presence(const PipelineConfig& cfg, const std::string& out_dir,
                                           unsigned n_threads = 1) {
    cfg.require_mobility("presence");
    ensure_out_dir(out_dir);
    PresenceOutputs p = compute_presence(cfg, n_threads);
    write_file(out_dir + "/presence.csv", p.matrix.to_csv(p.data.aois));

    auto counts_csv = [&](const std::map<std::pair<std::uint32_t, std::int32_t>, long>& counts) {
        std::string csv = "aoi_id,year,month,count\n";
        for (const auto& [key, count] : counts) {
            MonthId m = MonthId::from_index(key.second);
            csv += p.data.aois.at(key.first).aoi_id;
            csv += ',';
            csv += std::to_string(m.year);
            csv += ',';
            csv += std::to_string(m.month);
            csv += ',';
            csv += std::to_string(count);
            csv += '\n';
        }
        return csv;
    };
    write_file(out_dir + "/employees.csv", counts_csv(p.counts.employees));
    write_file(out_dir + "/consumers.csv", counts_csv(p.counts.consumers));

    // firm-level tracking: employee series normalized by the first month
    std::string firm = "aoi_id,year,month,count,normalized\n";
    std::map<std::uint32_t, long> first_count;
    for (const auto& [key, count] : p.counts.employees)
        first_count.try_emplace(key.first, count);
    for (const auto& [key, count] : p.counts.employees) {
        MonthId m = MonthId::from_index(key.second);
        firm += p.data.aois.at(key.first).aoi_id;
        firm += ',';
        firm += std::to_string(m.year);
        firm += ',';
        firm += std::to_string(m.month);
        firm += ',';
        firm += std::to_string(count);
        firm += ',';
        const long f = first_count[key.first];
        firm += format_double(f > 0 ? double(count) / double(f) : 0.0);
        firm += '\n';
    }
    write_file(out_dir + "/firm_employment.csv", firm);

    nlohmann::ordered_json doc;
    doc["version"] = kVersion;
    doc["matrix_cells"] = p.matrix.size();
    doc["employee_day_threshold"] = cfg.employee_day_threshold;
    doc["work_hours"] = {cfg.work_hours.start_hour, cfg.work_hours.end_hour};
    write_file(out_dir + "/presence_summary.json", doc.dump(1) + "\n");
    return doc;
}

// index: all three index families plus a manifest.
inline nlohmann::ordered_json run_index(const PipelineConfig& cfg, const std::string& out_dir,
                                        unsigned n_threads = 1) {
    cfg.require_mobility("index");
    ensure_out_dir(out_dir);
    PresenceOutputs p = compute_presence(cfg, n_threads);

    std::vector<const IndexSeries*> emitted;
    EmploymentIndices emp = employment_index(p.counts.employees, p.data.aois, cfg.base_year);
    IndexSeries cons = consumer_index(p.counts.consumers, p.data.aois, cfg.base_year);

    RejectLog trend_rejects;
    std::vector<IndexSeries> trends;
    for (const auto& cat : cfg.trend_categories)
        trends.push_back(consumption_trends(p.data.queries, p.data.pois, cat, cfg.base_year, trend_rejects, true));
    for (const auto& cat : cfg.trend_categories_raw)
        trends.push_back(consumption_trends(p.data.queries, p.data.pois, cat, cfg.base_year, trend_rejects, false));

    auto slug = [](const std::string& label) {
        std::string s;
        for (char c : label) s += (std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
        return s;
    };
    auto emit = [&](const IndexSeries& s) {
        write_file(out_dir + "/" + slug(s.label) + ".csv", index_to_csv(s));
        emitted.push_back(&s);
    };
    emit(emp.all);
    emit(emp.traditional);
    emit(emp.hightech);
    emit(cons);
    for (const auto& t : trends) emit(t);
    write_file(out_dir + "/trend_rejects.csv", trend_rejects.to_csv());

    nlohmann::ordered_json manifest;
    manifest["version"] = kVersion;
    manifest["base_year"] = cfg.base_year;
    manifest["employee_day_threshold"] = cfg.employee_day_threshold;
    manifest["work_hours"] = {cfg.work_hours.start_hour, cfg.work_hours.end_hour};
    manifest["window"] = {format_date(cfg.window_start_day), format_date(cfg.window_end_day)};
    nlohmann::ordered_json series = nlohmann::ordered_json::array();
    for (const auto* s : emitted)
        series.push_back({{"label", s->label}, {"file", slug(s->label) + ".csv"}, {"normalized", s->normalized}});
    manifest["series"] = std::move(series);
    write_file(out_dir + "/index_manifest.json", manifest.dump(1) + "\n");
    return manifest;
}

namespace detail {

struct VenueGroups {
    std::map<std::string, VenueDaily> venues;
    std::optional<DailySeries> platform;
};

inline VenueGroups load_venue_inputs(const PipelineConfig& cfg) {
    VenueGroups g;
    g.venues = load_venues_daily(cfg.venues_daily_path);
    if (cfg.normalize_queries) {
        if (cfg.platform_daily_path.empty())
            throw std::runtime_error("normalize_queries is set but platform_daily is missing");
        g.platform = load_platform_daily(cfg.platform_daily_path);
    }
    return g;
}

inline DailySeries maybe_normalize(const VenueGroups& g, const DailySeries& q) {
    return g.platform ? normalize_queries(q, *g.platform) : q;
}

inline nlohmann::ordered_json fit_to_json(const RegressionFit& fit) {
    nlohmann::ordered_json doc;
    doc["spec"] = to_string(fit.spec);
    doc["n"] = fit.n_observations;
    doc["r_squared"] = fit.r_squared;
    nlohmann::ordered_json coef, se;
    for (std::size_t i = 0; i < fit.column_names.size(); ++i) {
        coef[fit.column_names[i]] = fit.coefficients[i];
        se[fit.column_names[i]] = fit.std_errors[i];
    }
    doc["coefficients"] = std::move(coef);
    doc["std_errors"] = std::move(se);
    return doc;
}

}  // namespace detail

// fit: per-venue regression report, all three specifications (foot traffic
// on its own lags and on query volume).
inline nlohmann::ordered_json run_fit(const PipelineConfig& cfg, const std::string& out_dir) {
    cfg.require_venues("fit");
    ensure_out_dir(out_dir);
    auto groups = detail::load_venue_inputs(cfg);
    nlohmann::ordered_json doc;
    doc["version"] = kVersion;
    nlohmann::ordered_json venues = nlohmann::ordered_json::array();
    for (const auto& [id, v] : groups.venues) {
        const DailySeries q = detail::maybe_normalize(groups, v.queries);
        nlohmann::ordered_json item;
        item["venue_id"] = id;
        item["fits"] = nlohmann::ordered_json::array();
        for (RegressionSpec spec :
             {RegressionSpec::Baseline, RegressionSpec::QueryAugmented, RegressionSpec::QueryOnly})
            item["fits"].push_back(detail::fit_to_json(fit_model(v.visitors, q, spec)));
        venues.push_back(std::move(item));
    }
    doc["venues"] = std::move(venues);
    write_file(out_dir + "/fits.json", doc.dump(1) + "\n");
    return doc;
}

inline std::string forecast_to_csv(const std::vector<ForecastRecord>& records) {
    std::string csv = "date,actual,predicted,abs_error\n";
    for (const auto& r : records) {
        csv += format_date(r.date);
        csv += ',';
        csv += format_double(r.actual);
        csv += ',';
        csv += format_double(r.predicted);
        csv += ',';
        csv += format_double(r.abs_error);
        csv += '\n';
    }
    return csv;
}

// nowcast: rolling out-of-sample forecast of total daily box office, baseline
// AR vs query-augmented model.
inline nlohmann::ordered_json run_nowcast(const PipelineConfig& cfg, const std::string& out_dir) {
    cfg.require_venues("nowcast");
    if (cfg.nowcast_start_day == 0) throw std::runtime_error("nowcast: config lacks nowcast_start");
    ensure_out_dir(out_dir);
    auto groups = detail::load_venue_inputs(cfg);
    std::set<std::string> all_ids;
    for (const auto& [id, _] : groups.venues) all_ids.insert(id);

    std::map<std::string, DailySeries> rev, q;
    for (const auto& [id, v] : groups.venues) {
        rev.emplace(id, v.revenue);
        q.emplace(id, v.queries);
    }
    DailySeries y = group_series(rev, all_ids);
    DailySeries qs = detail::maybe_normalize(groups, group_series(q, all_ids));

    auto baseline = rolling_forecast(y, std::nullopt, RegressionSpec::Baseline, cfg.nowcast_start_day);
    auto query = rolling_forecast(y, qs, RegressionSpec::QueryAugmented, cfg.nowcast_start_day);
    write_file(out_dir + "/nowcast_baseline.csv", forecast_to_csv(baseline));
    write_file(out_dir + "/nowcast_query.csv", forecast_to_csv(query));

    nlohmann::ordered_json doc;
    doc["version"] = kVersion;
    doc["start"] = format_date(cfg.nowcast_start_day);
    doc["days"] = baseline.size();
    doc["mae_baseline"] = mae(baseline);
    doc["mae_query"] = mae(query);
    doc["mae_ratio"] = mae(query) / mae(baseline);
    write_file(out_dir + "/nowcast_summary.json", doc.dump(1) + "\n");
    return doc;
}

// detect: forecast-residual fraud scan of the suspected group against the
// control group.
inline nlohmann::ordered_json run_detect(const PipelineConfig& cfg, const std::string& out_dir) {
    cfg.require_venues("detect");
    if (cfg.suspected_venues.empty() || cfg.control_venues.empty())
        throw std::runtime_error("detect: config lacks suspected_venues / control_venues");
    if (cfg.detect_train_end == 0) throw std::runtime_error("detect: config lacks detect_train_end");
    ensure_out_dir(out_dir);
    auto groups = detail::load_venue_inputs(cfg);

    std::map<std::string, DailySeries> rev, q;
    for (const auto& [id, v] : groups.venues) {
        rev.emplace(id, v.revenue);
        q.emplace(id, v.queries);
    }
    const std::set<std::string> sus(cfg.suspected_venues.begin(), cfg.suspected_venues.end());
    const std::set<std::string> ctl(cfg.control_venues.begin(), cfg.control_venues.end());
    DailySeries sus_rev = group_series(rev, sus);
    DailySeries ctl_rev = group_series(rev, ctl);
    DailySeries sus_q = detail::maybe_normalize(groups, group_series(q, sus));
    DailySeries ctl_q = detail::maybe_normalize(groups, group_series(q, ctl));

    AnomalyReport report = detect(sus_rev, sus_q, ctl_rev, ctl_q,
                                  DateWindow{cfg.detect_train_start, cfg.detect_train_end}, cfg.z_threshold,
                                  cfg.min_run);

    nlohmann::ordered_json doc;
    doc["version"] = kVersion;
    doc["z_threshold"] = report.z_threshold;
    doc["min_run"] = report.min_run;
    doc["train"] = {format_date(report.train_window.start), format_date(report.train_window.end)};
    nlohmann::ordered_json wins = nlohmann::ordered_json::array();
    for (const auto& w : report.flagged_windows) wins.push_back({format_date(w.start), format_date(w.end)});
    doc["flagged_windows"] = std::move(wins);
    nlohmann::ordered_json days = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < report.scan_days.size(); ++i)
        days.push_back({{"date", format_date(report.scan_days[i])},
                        {"z_suspected", report.z_suspected[i]},
                        {"z_control", report.z_control[i]}});
    doc["daily"] = std::move(days);
    write_file(out_dir + "/anomaly.json", doc.dump(1) + "\n");
    return doc;
}

}  // namespace mobimetrics::pipeline
