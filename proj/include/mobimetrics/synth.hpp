#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mobimetrics/anomaly.hpp"
#include "mobimetrics/calendar.hpp"
#include "mobimetrics/configfile.hpp"
#include "mobimetrics/econometrics.hpp"
#include "mobimetrics/geo.hpp"
#include "mobimetrics/io.hpp"
#include "mobimetrics/records.hpp"
#include "mobimetrics/rng.hpp"
#include "mobimetrics/util.hpp"

// Deterministic synthetic-world generator plus its ground truth. The emitted
// datasets use the exact pipeline wire formats; every planted quantity is
// recorded so tests can compare pipeline output against construction truth.
// All randomness flows through SplitMix64 sub-streams keyed by (seed, domain,
// entity), so enlarging one dimension of a world never perturbs another.
namespace mobimetrics::synth {

// Sub-stream domain tags.
enum StreamTag : std::uint64_t {
    kTagAoiShape = 1,
    kTagAoiLevel = 2,
    kTagUserHome = 3,
    kTagUserSampling = 4,
    kTagStaffDays = 5,
    kTagVisitorPick = 6,
    kTagVisitorDays = 7,
    kTagChurn = 8,
    kTagTrendEvents = 9,
    kTagCorruptPositioning = 10,
    kTagCorruptQueries = 11,
    kTagVenueBase = 12,
    kTagVenueIdio = 13,
    kTagVenueCommon = 14,
    kTagVenueQueryNoise = 15,
    kTagVenueRevenueNoise = 16,
    kTagPerfAoi = 17,
    kTagPerfPoints = 18,
    kTagPoiPlace = 19,
};

struct WorldConfig {
    std::uint64_t seed = 42;

    // scale
    int n_users = 20000;
    int n_aoi_traditional = 15;
    int n_aoi_hightech = 15;
    int n_aoi_commercial = 10;
    int n_poi_per_category = 25;

    // study window (civil days, inclusive)
    std::int64_t window_start_day = days_from_civil(2013, 1, 1);
    std::int64_t window_end_day = days_from_civil(2016, 6, 30);
    int base_year = 2014;

    // mobility
    double sampling_rate = 0.05;  // background point probability per user-day
    double churner_fraction = 0.15;

    // employment trajectories
    double employment_level_min = 60;
    double employment_level_max = 250;
    double trend_traditional = -0.005;  // monthly multiplicative
    double trend_hightech = 0.008;
    int shock_aoi_count = 2;
    std::optional<MonthId> shock_month = MonthId{2016, 1};
    double shock_magnitude = 0.6;
    double staff_weekday_presence = 0.75;
    int mall_staff_per_aoi = 30;

    // consumer seasonality
    double visitors_base_min = 400;
    double visitors_base_max = 900;
    double weekend_uplift = 1.6;
    double summer_bump = 1.25;   // July & August multiplier
    double festival_dip = 0.70;  // February multiplier
    double consumer_monthly_trend = -0.002;
    double consumer_visit_days_mean = 1.8;

    // query coupling: queries per visitor. 1/2.6 makes the foot-traffic
    // regression's query coefficient 2.6.
    double gamma_queries_per_visitor = 1.0 / 2.6;
    double query_noise_frac = 0.10;  // noise sd as a fraction of the clean query series sd
    double trend_monthly_base = 2500;

    // parser-robustness corruption
    double corruption_rate = 0.0;

    // daily venue panel (cinemas + malls)
    int n_venues_suspected = 0;
    int n_venues_control = 0;
    int n_venue_malls = 0;
    double venue_base_min = 1500;
    double venue_base_max = 3500;
    double demand_ar_phi = 0.4;
    double demand_common_sd = 0.20;
    double demand_idio_sd = 0.15;
    double ticket_price = 45.0;
    double revenue_noise_frac = 0.03;
    double platform_growth = 0.30;  // centered ramp amplitude, mean factor = 1
    double platform_base = 1e6;
    bool fraud_enabled = false;
    std::int64_t fraud_start_day = days_from_civil(2015, 8, 25);
    std::int64_t fraud_end_day = days_from_civil(2015, 9, 16);
    double fraud_magnitude_sd = 4.0;  // units: sd of the clean suspected-group revenue series
    std::int64_t nowcast_start_day = days_from_civil(2015, 7, 1);

    // pipeline parameters copied into the emitted run.cfg
    int employee_day_threshold = 10;
    int work_start_hour = 9;
    int work_end_hour = 18;
    double cell_size_deg = 0.01;
    double z_threshold = 3.0;
    int min_run = 5;

    static WorldConfig from_config(const ConfigFile& cfg);

    int n_months() const {
        return month_of_day(window_end_day).index() - month_of_day(window_start_day).index() + 1;
    }
    MonthId first_month() const { return month_of_day(window_start_day); }
    TimeWindow time_window() const {
        return {day_start_timestamp(window_start_day), day_start_timestamp(window_end_day + 1) - 1};
    }
};

inline WorldConfig WorldConfig::from_config(const ConfigFile& cfg) {
    WorldConfig w;
    w.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 42));
    w.n_users = static_cast<int>(cfg.get_int("n_users", w.n_users));
    w.n_aoi_traditional = static_cast<int>(cfg.get_int("n_aoi_traditional", w.n_aoi_traditional));
    w.n_aoi_hightech = static_cast<int>(cfg.get_int("n_aoi_hightech", w.n_aoi_hightech));
    w.n_aoi_commercial = static_cast<int>(cfg.get_int("n_aoi_commercial", w.n_aoi_commercial));
    w.n_poi_per_category = static_cast<int>(cfg.get_int("n_poi_per_category", w.n_poi_per_category));
    w.window_start_day = cfg.get_date("window_start", w.window_start_day);
    w.window_end_day = cfg.get_date("window_end", w.window_end_day);
    w.base_year = static_cast<int>(cfg.get_int("base_year", w.base_year));
    w.sampling_rate = cfg.get_double("sampling_rate", w.sampling_rate);
    w.churner_fraction = cfg.get_double("churner_fraction", w.churner_fraction);
    w.employment_level_min = cfg.get_double("employment_level_min", w.employment_level_min);
    w.employment_level_max = cfg.get_double("employment_level_max", w.employment_level_max);
    w.trend_traditional = cfg.get_double("trend_traditional", w.trend_traditional);
    w.trend_hightech = cfg.get_double("trend_hightech", w.trend_hightech);
    w.shock_aoi_count = static_cast<int>(cfg.get_int("shock_aoi_count", w.shock_aoi_count));
    w.shock_month = cfg.has("shock_month") ? std::optional<MonthId>(cfg.get_month("shock_month")) : std::nullopt;
    w.shock_magnitude = cfg.get_double("shock_magnitude", w.shock_magnitude);
    w.staff_weekday_presence = cfg.get_double("staff_weekday_presence", w.staff_weekday_presence);
    w.mall_staff_per_aoi = static_cast<int>(cfg.get_int("mall_staff_per_aoi", w.mall_staff_per_aoi));
    w.visitors_base_min = cfg.get_double("visitors_base_min", w.visitors_base_min);
    w.visitors_base_max = cfg.get_double("visitors_base_max", w.visitors_base_max);
    w.weekend_uplift = cfg.get_double("weekend_uplift", w.weekend_uplift);
    w.summer_bump = cfg.get_double("summer_bump", w.summer_bump);
    w.festival_dip = cfg.get_double("festival_dip", w.festival_dip);
    w.consumer_monthly_trend = cfg.get_double("consumer_monthly_trend", w.consumer_monthly_trend);
    w.consumer_visit_days_mean = cfg.get_double("consumer_visit_days_mean", w.consumer_visit_days_mean);
    w.gamma_queries_per_visitor = cfg.get_double("gamma_queries_per_visitor", w.gamma_queries_per_visitor);
    w.query_noise_frac = cfg.get_double("query_noise_frac", w.query_noise_frac);
    w.trend_monthly_base = cfg.get_double("trend_monthly_base", w.trend_monthly_base);
    w.corruption_rate = cfg.get_double("corruption_rate", w.corruption_rate);
    w.n_venues_suspected = static_cast<int>(cfg.get_int("n_venues_suspected", w.n_venues_suspected));
    w.n_venues_control = static_cast<int>(cfg.get_int("n_venues_control", w.n_venues_control));
    w.n_venue_malls = static_cast<int>(cfg.get_int("n_venue_malls", w.n_venue_malls));
    w.venue_base_min = cfg.get_double("venue_base_min", w.venue_base_min);
    w.venue_base_max = cfg.get_double("venue_base_max", w.venue_base_max);
    w.demand_ar_phi = cfg.get_double("demand_ar_phi", w.demand_ar_phi);
    w.demand_common_sd = cfg.get_double("demand_common_sd", w.demand_common_sd);
    w.demand_idio_sd = cfg.get_double("demand_idio_sd", w.demand_idio_sd);
    w.ticket_price = cfg.get_double("ticket_price", w.ticket_price);
    w.revenue_noise_frac = cfg.get_double("revenue_noise_frac", w.revenue_noise_frac);
    w.platform_growth = cfg.get_double("platform_growth", w.platform_growth);
    w.platform_base = cfg.get_double("platform_base", w.platform_base);
    w.fraud_enabled = cfg.get_bool("fraud_enabled", w.fraud_enabled);
    w.fraud_start_day = cfg.get_date("fraud_start", w.fraud_start_day);
    w.fraud_end_day = cfg.get_date("fraud_end", w.fraud_end_day);
    w.fraud_magnitude_sd = cfg.get_double("fraud_magnitude_sd", w.fraud_magnitude_sd);
    w.nowcast_start_day = cfg.get_date("nowcast_start", w.nowcast_start_day);
    w.employee_day_threshold = static_cast<int>(cfg.get_int("employee_day_threshold", w.employee_day_threshold));
    w.work_start_hour = static_cast<int>(cfg.get_int("work_start_hour", w.work_start_hour));
    w.work_end_hour = static_cast<int>(cfg.get_int("work_end_hour", w.work_end_hour));
    w.cell_size_deg = cfg.get_double("cell_size_deg", w.cell_size_deg);
    w.z_threshold = cfg.get_double("z_threshold", w.z_threshold);
    w.min_run = static_cast<int>(cfg.get_int("min_run", w.min_run));
    return w;
}

struct TrendCurve {
    std::string category;
    bool normalized = true;
    std::vector<long> monthly;  // planted distinct (user, poi, day) counts per window month
};

struct AoiPlan {
    std::string aoi_id;
    AoiKind kind = AoiKind::IndustrialTraditional;
    std::uint32_t staff_first = 0;  // first user index of the staff block
    std::uint32_t staff_cap = 0;    // block size = max monthly headcount
    std::vector<long> headcount;    // per window month
};

struct MallPlan {
    std::string aoi_id;
    std::uint32_t staff_first = 0;
    std::uint32_t staff_count = 0;
    std::vector<long> visitors;  // planted distinct visitors per window month
};

struct VenueTruth {
    std::string venue_id;
    double base = 0.0;
    double clean_query_sd = 0.0;
};

struct WorldTruth {
    std::vector<MonthId> months;
    std::vector<AoiPlan> industrial;
    std::vector<MallPlan> malls;
    std::map<std::string, std::vector<int>> churn_gaps;  // user_id -> missing month offsets
    std::vector<TrendCurve> trends;

    std::vector<std::string> suspected_venues;
    std::vector<std::string> control_venues;
    std::vector<std::string> mall_venues;
    std::vector<VenueTruth> venues;
    bool fraud_enabled = false;
    DateWindow fraud_window;
    double fraud_magnitude_sd = 0.0;
    double suspected_group_revenue_sd = 0.0;

    std::vector<RejectEntry> corrupt_positioning;
    std::vector<RejectEntry> corrupt_queries;
    std::size_t positioning_lines = 0;
    std::size_t query_lines = 0;
};

namespace detail {

inline std::string user_name(int idx) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "u%06d", idx);
    return buf;
}

inline double round6(double v) { return std::round(v * 1e6) / 1e6; }

// Star-shaped simple polygon around a center: jittered angles, varying radii.
inline Polygon star_polygon(SplitMix64& rng, GeoPoint center, double radius, int k) {
    Polygon poly;
    const double step = 2.0 * kPi / k;
    for (int i = 0; i < k; ++i) {
        const double ang = step * i + rng.uniform(-0.2, 0.2) * step;
        const double r = radius * rng.uniform(0.6, 1.0);
        poly.push_back(GeoPoint{round6(center.lon + r * std::cos(ang)), round6(center.lat + r * std::sin(ang))});
    }
    return poly;
}

struct Geography {
    // AOI lattice spacing and sizes chosen so a home point can never fall
    // inside an AOI: nearest home node is >= 0.005 deg from an AOI center,
    // AOI radius <= 0.0020 and home jitter <= 0.0015.
    static constexpr double kOriginLon = 121.0;
    static constexpr double kOriginLat = 30.8;
    static constexpr double kAoiSpacing = 0.03;
    static constexpr double kHomeSpacing = 0.01;
    static constexpr double kHomeOffset = 0.015;

    static GeoPoint aoi_center(int idx) {
        const int cols = 8;
        return {kOriginLon + (idx % cols) * kAoiSpacing, kOriginLat + (idx / cols) * kAoiSpacing};
    }

    static GeoPoint home(std::uint64_t seed, int user) {
        auto rng = substream(seed, kTagUserHome, static_cast<std::uint64_t>(user));
        const int cols = 120;
        const int node = user % (cols * cols);
        const double ang = rng.uniform(0.0, 2.0 * kPi);
        const double r = 0.0015 * std::sqrt(rng.uniform());
        return {round6(kOriginLon + (node % cols) * kHomeSpacing + kHomeOffset + r * std::cos(ang)),
                round6(kOriginLat + (node / cols) * kHomeSpacing + kHomeOffset + r * std::sin(ang))};
    }

    // A point strictly inside the AOI: centroid plus a small jitter. The
    // margin to any edge stays well above 1e-6 degrees.
    static GeoPoint inside_aoi(SplitMix64& rng, const Polygon& poly) {
        double clon = 0, clat = 0;
        for (const auto& p : poly) {
            clon += p.lon;
            clat += p.lat;
        }
        clon /= double(poly.size());
        clat /= double(poly.size());
        const double ang = rng.uniform(0.0, 2.0 * kPi);
        const double r = 0.0004 * std::sqrt(rng.uniform());
        return {round6(clon + r * std::cos(ang)), round6(clat + r * std::sin(ang))};
    }
};

inline std::vector<std::int64_t> weekdays_of_month(MonthId m) {
    std::vector<std::int64_t> out;
    const std::int64_t first = days_from_civil(m.year, m.month, 1);
    const int len = days_in_month(m.year, m.month);
    for (int d = 0; d < len; ++d)
        if (weekday_from_days(first + d) < 5) out.push_back(first + d);
    return out;
}

// Corruption kinds rotate deterministically; each produces a line the loader
// must reject for the stated reason.
struct Corruptor {
    std::uint64_t seed;
    StreamTag tag;
    double rate;
    bool queries;
    std::vector<RejectEntry>* manifest;
    std::int64_t out_of_window_ts = 0;

    // Returns the line to write (possibly a corrupted replacement).
    std::string apply(std::size_t line_no, std::string clean) {
        if (rate <= 0.0) return clean;
        auto rng = substream(seed, tag, line_no);
        if (!rng.bernoulli(rate)) return clean;
        const int kind = static_cast<int>(rng.below(queries ? 7 : 8));
        std::string reason;
        std::string line;
        if (!queries) {
            switch (kind) {
                case 0: line = R"({"u":"x","lon":121.0,"lat":31.0,"t":)"; reason = "truncated json"; break;
                case 1: line = R"({"u":"x","lon":200.5,"lat":31.0,"t":1420070400})"; reason = "lon out of range"; break;
                case 2: line = R"({"u":"x","lon":121.0,"lat":95.0,"t":1420070400})"; reason = "lat out of range"; break;
                case 3: line = R"({"u":"","lon":121.0,"lat":31.0,"t":1420070400})"; reason = "empty user_id"; break;
                case 4: line = R"({"u":"x","lon":121.0,"lat":31.0,"t":12.5})"; reason = "non-integer timestamp"; break;
                case 5: line = R"({"u":"x","lon":121.0,"lat":31.0,"t":1420070400,"extra":1})"; reason = "unexpected field"; break;
                case 6: line = ""; reason = "blank line"; break;
                default:
                    line = R"({"u":"x","lon":121.0,"lat":31.0,"t":)" + std::to_string(out_of_window_ts) + "}";
                    reason = "timestamp outside window";
            }
        } else {
            switch (kind) {
                case 0: line = R"({"u":"x","poi":"p1","t":)"; reason = "truncated json"; break;
                case 1: line = R"({"u":"","poi":"p1","t":1420070400})"; reason = "empty user_id"; break;
                case 2: line = R"({"u":"x","poi":"","t":1420070400})"; reason = "empty poi_id"; break;
                case 3: line = R"({"u":"x","poi":"p1","t":bad})"; reason = "non-integer timestamp"; break;
                case 4: line = R"({"u":"x","poi":"p1","t":1420070400,"zz":2})"; reason = "unexpected field"; break;
                case 5: line = ""; reason = "blank line"; break;
                default: line = R"({"u":"a b","poi":"p1","t":1420070400})"; reason = "whitespace user_id";
            }
        }
        manifest->push_back({line_no, reason});
        return line + "\n";
    }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Random-world helpers shared with the spatial tests and the performance
// criterion: star-shaped AOIs scattered over a region, plus probe points.
// ---------------------------------------------------------------------------

inline AoiCatalog make_random_aois(int n, std::uint64_t seed, double lon0 = 100.0, double lat0 = 25.0,
                                   double lon_span = 20.0, double lat_span = 15.0) {
    std::vector<Aoi> aois;
    aois.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto rng = substream(seed, kTagPerfAoi, static_cast<std::uint64_t>(i));
        Aoi a;
        char buf[16];
        std::snprintf(buf, sizeof(buf), "aoi_%05d", i);
        a.aoi_id = buf;
        a.name = "zone " + std::to_string(i);
        const int pick = static_cast<int>(rng.below(3));
        a.kind = pick == 0 ? AoiKind::IndustrialTraditional
                           : (pick == 1 ? AoiKind::IndustrialHighTech : AoiKind::Commercial);
        while (true) {
            GeoPoint center{rng.uniform(lon0, lon0 + lon_span), rng.uniform(lat0, lat0 + lat_span)};
            const double radius = rng.uniform(0.002, 0.005);
            const int k = 5 + static_cast<int>(rng.below(5));
            a.polygon = detail::star_polygon(rng, center, radius, k);
            if (!validate_polygon(a.polygon)) break;
            a.polygon.clear();
        }
        aois.push_back(std::move(a));
    }
    return AoiCatalog(std::move(aois));
}

// Probe points: a blend of uniform background points and points planted
// strictly inside randomly chosen AOIs.
inline std::vector<GeoPoint> make_probe_points(std::size_t n, std::uint64_t seed, const AoiCatalog& catalog,
                                               double inside_fraction, double lon0 = 100.0, double lat0 = 25.0,
                                               double lon_span = 20.0, double lat_span = 15.0) {
    std::vector<GeoPoint> pts;
    pts.reserve(n);
    auto rng = substream(seed, kTagPerfPoints);
    for (std::size_t i = 0; i < n; ++i) {
        if (catalog.size() > 0 && rng.bernoulli(inside_fraction)) {
            const auto& aoi = catalog.at(rng.below(catalog.size()));
            pts.push_back(detail::Geography::inside_aoi(rng, aoi.polygon));
        } else {
            pts.push_back(GeoPoint{rng.uniform(lon0, lon0 + lon_span), rng.uniform(lat0, lat0 + lat_span)});
        }
    }
    return pts;
}

// ---------------------------------------------------------------------------
// Venue daily panel (in-memory form; the file emitter serializes it).
// ---------------------------------------------------------------------------

struct VenuePanel {
    std::vector<std::string> venue_ids;
    std::map<std::string, DailySeries> visitors;
    std::map<std::string, DailySeries> queries;  // observed: noisy, platform-inflated
    std::map<std::string, DailySeries> revenue;
    DailySeries platform_total;
};

namespace detail {

inline double season_factor(std::int64_t day) {
    const CivilDate c = civil_from_days(day);
    const double doy = static_cast<double>(day - days_from_civil(c.year, 1, 1));
    return 1.0 + 0.10 * std::sin(2.0 * kPi * doy / 365.25);
}

}  // namespace detail

// Generates the daily venue panel. Traffic model per venue:
//   visitors_t = base * weekly(dow) * season(t) * exp(common_t + idio_t)
// with AR(1) demand shocks shared across venues (common) and per venue
// (idio). Queries couple as gamma * visitors plus Gaussian noise scaled to
// the clean query series' sd, then a platform-wide search-trend ramp
// multiplies observed queries (platform_total carries the same ramp, so
// normalize_queries removes it). Revenue is ticket_price * visitors with
// small noise; fraud adds a flat group-level inflation to suspected venues'
// revenue only, leaving queries untouched.
inline VenuePanel generate_venue_panel(const WorldConfig& cfg, WorldTruth* truth = nullptr) {
    VenuePanel panel;
    const std::int64_t start = cfg.window_start_day;
    const std::int64_t end = cfg.window_end_day;
    const std::size_t n_days = static_cast<std::size_t>(end - start + 1);

    if (cfg.fraud_enabled && (cfg.fraud_start_day < start || cfg.fraud_end_day > end ||
                              cfg.fraud_start_day > cfg.fraud_end_day))
        throw std::runtime_error("infeasible config: fraud window outside the study window");

    std::vector<std::pair<std::string, int>> venues;  // (id, global venue index)
    int vi = 0;
    for (int i = 0; i < cfg.n_venues_suspected; ++i, ++vi) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "s%03d", i + 1);
        venues.emplace_back(buf, vi);
        if (truth) truth->suspected_venues.emplace_back(buf);
    }
    for (int i = 0; i < cfg.n_venues_control; ++i, ++vi) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "c%03d", i + 1);
        venues.emplace_back(buf, vi);
        if (truth) truth->control_venues.emplace_back(buf);
    }
    for (int i = 0; i < cfg.n_venue_malls; ++i, ++vi) {
        std::string id = "mall_" + std::to_string(i + 1);
        venues.emplace_back(id, vi);
        if (truth) truth->mall_venues.push_back(id);
    }

    // common market-wide demand shocks, one AR(1) path for the whole world
    std::vector<double> common(n_days, 0.0);
    {
        auto rng = substream(cfg.seed, kTagVenueCommon);
        double prev = 0.0;
        for (std::size_t t = 0; t < n_days; ++t) {
            prev = cfg.demand_ar_phi * prev + rng.normal(0.0, cfg.demand_common_sd);
            common[t] = prev;
        }
    }

    const auto weekly = [&](int dow) {
        if (dow >= 5) return cfg.weekend_uplift;
        if (dow == 4) return 1.0 + (cfg.weekend_uplift - 1.0) * 0.25;  // Friday shoulder
        return 1.0;
    };
    const auto platform_factor = [&](std::size_t t) {
        if (n_days <= 1) return 1.0;
        return 1.0 + cfg.platform_growth * (double(t) / double(n_days - 1) - 0.5);
    };

    std::map<std::string, std::vector<double>> clean_revenue;
    for (const auto& [id, idx] : venues) {
        auto base_rng = substream(cfg.seed, kTagVenueBase, static_cast<std::uint64_t>(idx));
        const double base = base_rng.uniform(cfg.venue_base_min, cfg.venue_base_max);

        auto idio_rng = substream(cfg.seed, kTagVenueIdio, static_cast<std::uint64_t>(idx));
        DailySeries vis{start, std::vector<double>(n_days)};
        double prev = 0.0;
        for (std::size_t t = 0; t < n_days; ++t) {
            prev = cfg.demand_ar_phi * prev + idio_rng.normal(0.0, cfg.demand_idio_sd);
            const std::int64_t day = start + static_cast<std::int64_t>(t);
            vis.values[t] =
                base * weekly(weekday_from_days(day)) * detail::season_factor(day) * std::exp(common[t] + prev);
        }

        // clean query series and its sd (defines the noise scale)
        std::vector<double> q_clean(n_days);
        double mean = 0.0;
        for (std::size_t t = 0; t < n_days; ++t) {
            q_clean[t] = cfg.gamma_queries_per_visitor * vis.values[t];
            mean += q_clean[t];
        }
        mean /= double(n_days);
        double var = 0.0;
        for (double v : q_clean) var += (v - mean) * (v - mean);
        const double q_sd = n_days > 1 ? std::sqrt(var / double(n_days - 1)) : 0.0;

        auto qn_rng = substream(cfg.seed, kTagVenueQueryNoise, static_cast<std::uint64_t>(idx));
        DailySeries q{start, std::vector<double>(n_days)};
        for (std::size_t t = 0; t < n_days; ++t) {
            double v = q_clean[t];
            if (cfg.query_noise_frac > 0.0) v += qn_rng.normal(0.0, cfg.query_noise_frac * q_sd);
            q.values[t] = std::max(0.0, v * platform_factor(t));
        }

        auto rn_rng = substream(cfg.seed, kTagVenueRevenueNoise, static_cast<std::uint64_t>(idx));
        DailySeries rev{start, std::vector<double>(n_days)};
        auto& clean = clean_revenue[id];
        clean.resize(n_days);
        for (std::size_t t = 0; t < n_days; ++t) {
            clean[t] = cfg.ticket_price * vis.values[t];
            double noise = cfg.revenue_noise_frac > 0.0 ? rn_rng.normal(0.0, cfg.revenue_noise_frac) : 0.0;
            rev.values[t] = clean[t] * (1.0 + noise);
        }

        panel.venue_ids.push_back(id);
        panel.visitors.emplace(id, std::move(vis));
        panel.queries.emplace(id, std::move(q));
        panel.revenue.emplace(id, std::move(rev));
        if (truth) truth->venues.push_back({id, base, q_sd});
    }

    // fraud plant: flat inflation of the suspected group's revenue, sized in
    // units of the clean group revenue series' standard deviation
    if (cfg.fraud_enabled && cfg.n_venues_suspected > 0) {
        std::vector<double> group(n_days, 0.0);
        for (int i = 0; i < cfg.n_venues_suspected; ++i) {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "s%03d", i + 1);
            const auto& clean = clean_revenue[buf];
            for (std::size_t t = 0; t < n_days; ++t) group[t] += clean[t];
        }
        double mean = 0.0;
        for (double v : group) mean += v;
        mean /= double(n_days);
        double var = 0.0;
        for (double v : group) var += (v - mean) * (v - mean);
        const double group_sd = std::sqrt(var / double(n_days - 1));
        const double per_venue = cfg.fraud_magnitude_sd * group_sd / double(cfg.n_venues_suspected);
        for (int i = 0; i < cfg.n_venues_suspected; ++i) {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "s%03d", i + 1);
            auto& rev = panel.revenue.at(buf);
            for (std::int64_t d = cfg.fraud_start_day; d <= cfg.fraud_end_day; ++d)
                rev.values[static_cast<std::size_t>(d - start)] += per_venue;
        }
        if (truth) {
            truth->fraud_enabled = true;
            truth->fraud_window = {cfg.fraud_start_day, cfg.fraud_end_day};
            truth->fraud_magnitude_sd = cfg.fraud_magnitude_sd;
            truth->suspected_group_revenue_sd = group_sd;
        }
    }

    panel.platform_total = DailySeries{start, std::vector<double>(n_days)};
    for (std::size_t t = 0; t < n_days; ++t) panel.platform_total.values[t] = cfg.platform_base * platform_factor(t);
    return panel;
}

// ---------------------------------------------------------------------------
// Mobility world: AOIs, POIs, per-user trace schedules, query events.
// ---------------------------------------------------------------------------

struct CategoryDef {
    const char* path;
    bool normalized;
};

// The four tracked consumption sectors plus catalog texture.
inline const std::vector<CategoryDef>& trend_categories() {
    static const std::vector<CategoryDef> cats = {
        {"Auto/Dealership", true},
        {"Restaurant/Chinese", true},
        {"Finance/Investment", false},
        {"Tourism/Attraction", true},
    };
    return cats;
}

inline const std::vector<const char*>& texture_categories() {
    static const std::vector<const char*> cats = {"Shopping/Mall", "Cinema/Multiplex"};
    return cats;
}

namespace detail {

// Planted monthly curves per sector, scaled by trend_monthly_base. Shapes:
// rising auto sales, declining restaurants, volatile finance, seasonal
// tourism with summer spikes.
inline long trend_curve_value(const std::string& category, int month_offset, int calendar_month, double base) {
    const double m = static_cast<double>(month_offset);
    double v = base;
    if (category == "Auto/Dealership") {
        v *= (1.0 + 0.025 * m) * (1.0 + 0.06 * std::sin(2.0 * kPi * m / 6.3));
    } else if (category == "Restaurant/Chinese") {
        v *= (1.0 - 0.004 * m) * (1.0 + 0.05 * std::sin(2.0 * kPi * (m + 2.0) / 8.1));
    } else if (category == "Finance/Investment") {
        v *= 1.0 + 0.45 * std::sin(2.0 * kPi * m / 11.0) + 0.25 * std::sin(2.0 * kPi * m / 4.7);
    } else if (category == "Tourism/Attraction") {
        double seasonal = 1.0;
        if (calendar_month == 7 || calendar_month == 8) seasonal = 1.35;
        else if (calendar_month == 10) seasonal = 1.20;
        else if (calendar_month == 2) seasonal = 0.90;
        v *= (1.0 + 0.003 * m) * seasonal;
    }
    return std::max<long>(0, static_cast<long>(std::llround(v)));
}

struct UserEvent {
    std::int64_t timestamp = 0;
    GeoPoint point;
};

}  // namespace detail

struct WorldFiles {
    std::string positioning;
    std::string queries;
    std::string pois;
    std::string aois;
    std::string venues_daily;
    std::string platform_daily;
    std::string truth_dir;
    std::string run_cfg;
};

inline void write_truth_files(const WorldConfig& cfg, const WorldTruth& truth, const std::string& out_dir);
inline void write_run_config(const WorldConfig& cfg, const std::string& out_dir);

// Emits the complete synthetic world into out_dir:
//   positioning.ndjson, queries.ndjson, pois.csv, aois.json,
//   venues_daily.csv, platform_daily.csv, truth/*.json, run.cfg
// and returns the ground truth. Identical config + seed reproduce every file
// byte for byte.
inline WorldTruth generate_world(const WorldConfig& cfg, const std::string& out_dir) {
    namespace fs = std::filesystem;
    if (cfg.window_start_day > cfg.window_end_day)
        throw std::runtime_error("infeasible config: window_start after window_end");

    fs::create_directories(out_dir);
    fs::create_directories(out_dir + "/truth");

    WorldTruth truth;
    const MonthId first_month = cfg.first_month();
    const int n_months = cfg.n_months();
    for (int i = 0; i < n_months; ++i) truth.months.push_back(MonthId::from_index(first_month.index() + i));
    if (cfg.shock_month && cfg.n_users > 0) {
        const int off = cfg.shock_month->index() - first_month.index();
        if (off < 0 || off >= n_months)
            throw std::runtime_error("infeasible config: shock month outside the study window");
    }

    // ---- geography & plans -------------------------------------------------
    const int n_industrial = cfg.n_aoi_traditional + cfg.n_aoi_hightech;
    const int n_aois = n_industrial + cfg.n_aoi_commercial;
    std::vector<Aoi> aois;
    std::uint32_t next_user = 0;

    for (int i = 0; i < n_aois && cfg.n_users > 0; ++i) {
        auto rng = substream(cfg.seed, kTagAoiShape, static_cast<std::uint64_t>(i));
        Aoi a;
        char buf[24];
        if (i < cfg.n_aoi_traditional) {
            std::snprintf(buf, sizeof(buf), "ind_t%03d", i);
            a.kind = AoiKind::IndustrialTraditional;
        } else if (i < n_industrial) {
            std::snprintf(buf, sizeof(buf), "ind_h%03d", i - cfg.n_aoi_traditional);
            a.kind = AoiKind::IndustrialHighTech;
        } else {
            std::snprintf(buf, sizeof(buf), "com_%03d", i - n_industrial);
            a.kind = AoiKind::Commercial;
        }
        a.aoi_id = buf;
        a.name = std::string(to_string(a.kind)) + " zone " + std::to_string(i);
        while (true) {
            a.polygon = detail::star_polygon(rng, detail::Geography::aoi_center(i), rng.uniform(0.0012, 0.0020), 8);
            if (!validate_polygon(a.polygon)) break;
            a.polygon.clear();
        }
        aois.push_back(std::move(a));
    }

    // employment plans: per-industrial-AOI level, kind trend, optional shock
    for (int i = 0; i < n_industrial && cfg.n_users > 0; ++i) {
        auto rng = substream(cfg.seed, kTagAoiLevel, static_cast<std::uint64_t>(i));
        const bool traditional = i < cfg.n_aoi_traditional;
        AoiPlan plan;
        plan.aoi_id = aois[static_cast<std::size_t>(i)].aoi_id;
        plan.kind = traditional ? AoiKind::IndustrialTraditional : AoiKind::IndustrialHighTech;
        const double level = rng.uniform(cfg.employment_level_min, cfg.employment_level_max);
        const double trend = traditional ? cfg.trend_traditional : cfg.trend_hightech;
        const bool shocked = cfg.shock_month && traditional && i < cfg.shock_aoi_count;
        long cap = 0;
        for (int m = 0; m < n_months; ++m) {
            double v = level * std::pow(1.0 + trend, m);
            if (shocked && truth.months[static_cast<std::size_t>(m)] >= *cfg.shock_month)
                v *= cfg.shock_magnitude;
            const long h = std::max<long>(1, std::lround(v));
            plan.headcount.push_back(h);
            cap = std::max(cap, h);
        }
        plan.staff_first = next_user;
        plan.staff_cap = static_cast<std::uint32_t>(cap);
        next_user += plan.staff_cap;
        truth.industrial.push_back(std::move(plan));
    }

    // mall plans: constant staff, seasonal planted visitors
    for (int i = 0; i < cfg.n_aoi_commercial && cfg.n_users > 0; ++i) {
        auto rng = substream(cfg.seed, kTagAoiLevel, static_cast<std::uint64_t>(1000 + i));
        MallPlan plan;
        plan.aoi_id = aois[static_cast<std::size_t>(n_industrial + i)].aoi_id;
        plan.staff_first = next_user;
        plan.staff_count = static_cast<std::uint32_t>(cfg.mall_staff_per_aoi);
        next_user += plan.staff_count;
        const double base = rng.uniform(cfg.visitors_base_min, cfg.visitors_base_max);
        for (int m = 0; m < n_months; ++m) {
            const MonthId month = truth.months[static_cast<std::size_t>(m)];
            double seasonal = 1.0;
            if (month.month == 7 || month.month == 8) seasonal = cfg.summer_bump;
            else if (month.month == 2) seasonal = cfg.festival_dip;
            else if (month.month == 12 || month.month == 1) seasonal = 1.0 + (cfg.summer_bump - 1.0) * 0.5;
            const double v = base * seasonal * std::pow(1.0 + cfg.consumer_monthly_trend, m);
            plan.visitors.push_back(std::max<long>(0, std::lround(v)));
        }
        truth.malls.push_back(std::move(plan));
    }

    const std::uint32_t staff_total = next_user;
    const std::uint32_t n_churners =
        cfg.n_users > 0 ? static_cast<std::uint32_t>(std::lround(cfg.churner_fraction * cfg.n_users)) : 0;
    if (cfg.n_users > 0 && staff_total + n_churners >= static_cast<std::uint32_t>(cfg.n_users))
        throw std::runtime_error("infeasible config: staff blocks + churners exceed n_users (need > " +
                                 std::to_string(staff_total + n_churners) + ")");
    const std::uint32_t churn_first = staff_total;
    const std::uint32_t consumer_first = staff_total + n_churners;
    // planted visitor counts can never exceed the consumer pool
    if (cfg.n_users > 0) {
        const long pool = static_cast<long>(cfg.n_users) - static_cast<long>(consumer_first);
        for (auto& plan : truth.malls)
            for (auto& v : plan.visitors) v = std::min(v, pool);
    }

    // churn schedules: a third joins late, a third leaves early, a third has
    // scattered gap months
    std::vector<std::vector<int>> churn_gaps(n_churners);
    for (std::uint32_t c = 0; c < n_churners; ++c) {
        auto rng = substream(cfg.seed, kTagChurn, c);
        std::set<int> gaps;
        const int style = static_cast<int>(rng.below(3));
        if (style == 0) {
            const int join = 1 + static_cast<int>(rng.below(std::uint64_t(std::max(1, n_months - 1))));
            for (int m = 0; m < join; ++m) gaps.insert(m);
        } else if (style == 1) {
            const int leave = 1 + static_cast<int>(rng.below(std::uint64_t(std::max(1, n_months - 1))));
            for (int m = n_months - leave; m < n_months; ++m) gaps.insert(m);
        } else {
            const int k = 1 + static_cast<int>(rng.below(4));
            for (int g = 0; g < k; ++g) gaps.insert(static_cast<int>(rng.below(std::uint64_t(n_months))));
        }
        churn_gaps[c].assign(gaps.begin(), gaps.end());
        truth.churn_gaps.emplace(detail::user_name(static_cast<int>(churn_first + c)), churn_gaps[c]);
    }

    // visitor selection: per (mall, month), distinct consumers with 1..3
    // visit days each; collected per user for ordered emission
    std::vector<std::vector<std::pair<std::int64_t, std::uint32_t>>> visits(
        static_cast<std::size_t>(std::max(0, cfg.n_users)));  // user -> (day, aoi index)
    const std::uint32_t n_consumers = cfg.n_users > 0 ? static_cast<std::uint32_t>(cfg.n_users) - consumer_first : 0;
    for (std::size_t mi = 0; mi < truth.malls.size(); ++mi) {
        const auto& plan = truth.malls[mi];
        const std::uint32_t aoi_idx = static_cast<std::uint32_t>(n_industrial + static_cast<int>(mi));
        for (int m = 0; m < n_months; ++m) {
            const long want = std::min<long>(plan.visitors[static_cast<std::size_t>(m)], n_consumers);
            if (want <= 0) continue;
            auto rng = substream(cfg.seed, kTagVisitorPick, (static_cast<std::uint64_t>(mi) << 20) | std::uint64_t(m));
            std::set<std::uint32_t> chosen;
            while (chosen.size() < static_cast<std::size_t>(want))
                chosen.insert(consumer_first + static_cast<std::uint32_t>(rng.below(n_consumers)));
            const MonthId month = truth.months[static_cast<std::size_t>(m)];
            const std::int64_t month_first = days_from_civil(month.year, month.month, 1);
            const int month_len = days_in_month(month.year, month.month);
            for (std::uint32_t u : chosen) {
                // 1..3 visit days, weekend-biased via rejection at 1/uplift
                int n_visits = 1 + static_cast<int>(rng.below(
                                       std::uint64_t(std::max(1.0, 2.0 * cfg.consumer_visit_days_mean - 1.0))));
                std::set<std::int64_t> days;
                int guard = 0;
                while (static_cast<int>(days.size()) < n_visits && guard++ < 200) {
                    const std::int64_t day = month_first + static_cast<std::int64_t>(rng.below(std::uint64_t(month_len)));
                    const bool weekend = weekday_from_days(day) >= 5;
                    if (!weekend && cfg.weekend_uplift > 1.0 && !rng.bernoulli(1.0 / cfg.weekend_uplift)) continue;
                    days.insert(day);
                }
                if (days.empty()) days.insert(month_first);  // planted visitor must appear
                for (std::int64_t d : days) visits[u].emplace_back(d, aoi_idx);
            }
        }
    }

    // ---- POI catalog ---------------------------------------------------------
    std::vector<Poi> pois;
    std::map<std::string, std::vector<std::string>> pois_by_category;
    {
        int poi_seq = 0;
        auto add_poi = [&](const std::string& id, const std::string& name, const char* path) {
            auto rng = substream(cfg.seed, kTagPoiPlace, static_cast<std::uint64_t>(poi_seq));
            Poi p;
            p.poi_id = id;
            p.name = name;
            p.location = GeoPoint{detail::round6(detail::Geography::kOriginLon + rng.uniform(0.0, 0.5)),
                                  detail::round6(detail::Geography::kOriginLat + rng.uniform(0.0, 0.5))};
            for (auto& seg : split_trimmed(path, '/')) p.category_path.push_back(seg);
            pois.push_back(std::move(p));
            pois_by_category[path].push_back(id);
            ++poi_seq;
        };
        for (const auto& cat : trend_categories())
            for (int i = 0; i < cfg.n_poi_per_category; ++i) {
                char buf[16];
                std::snprintf(buf, sizeof(buf), "p%05d", poi_seq);
                add_poi(buf, std::string(cat.path) + " #" + std::to_string(i), cat.path);
            }
        for (const auto* cat : texture_categories())
            for (int i = 0; i < cfg.n_poi_per_category; ++i) {
                char buf[16];
                std::snprintf(buf, sizeof(buf), "p%05d", poi_seq);
                add_poi(buf, std::string(cat) + " #" + std::to_string(i), cat);
            }
        // venue POIs (cinemas, malls) share ids with the daily panel
        for (int i = 0; i < cfg.n_venues_suspected; ++i) {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "s%03d", i + 1);
            add_poi(buf, "Cinema S" + std::to_string(i + 1), "Cinema/Multiplex");
        }
        for (int i = 0; i < cfg.n_venues_control; ++i) {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "c%03d", i + 1);
            add_poi(buf, "Cinema C" + std::to_string(i + 1), "Cinema/Multiplex");
        }
        for (int i = 0; i < cfg.n_venue_malls; ++i)
            add_poi("mall_" + std::to_string(i + 1), "Mall " + std::to_string(i + 1), "Shopping/Mall");
    }

    // ---- emit catalogs -------------------------------------------------------
    {
        std::string csv = "poi_id,name,lon,lat,category_path\n";
        for (const auto& p : pois) {
            csv += csv_escape(p.poi_id);
            csv += ',';
            csv += csv_escape(p.name);
            csv += ',';
            csv += format_double(p.location.lon);
            csv += ',';
            csv += format_double(p.location.lat);
            csv += ',';
            std::string path;
            for (std::size_t i = 0; i < p.category_path.size(); ++i) {
                if (i) path += '/';
                path += p.category_path[i];
            }
            csv += csv_escape(path);
            csv += '\n';
        }
        write_file(out_dir + "/pois.csv", csv);
    }
    {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& a : aois) {
            nlohmann::ordered_json item;
            item["aoi_id"] = a.aoi_id;
            item["name"] = a.name;
            item["kind"] = to_string(a.kind);
            nlohmann::ordered_json poly = nlohmann::ordered_json::array();
            for (const auto& v : a.polygon) poly.push_back({v.lon, v.lat});
            item["polygon"] = std::move(poly);
            arr.push_back(std::move(item));
        }
        write_file(out_dir + "/aois.json", arr.dump(1) + "\n");
    }

    // ---- emit positioning ----------------------------------------------------
    const TimeWindow window = cfg.time_window();
    detail::Corruptor pos_corrupt{cfg.seed, kTagCorruptPositioning, cfg.corruption_rate, false,
                                  &truth.corrupt_positioning, window.end + 1};
    {
        std::ofstream out(out_dir + "/positioning.ndjson", std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + out_dir + "/positioning.ndjson");
        std::size_t line_no = 0;
        std::string buf;
        std::vector<detail::UserEvent> events;

        auto staff_plan_of = [&](std::uint32_t u) -> std::pair<const AoiPlan*, std::uint32_t> {
            for (const auto& p : truth.industrial)
                if (u >= p.staff_first && u < p.staff_first + p.staff_cap) return {&p, u - p.staff_first};
            return {nullptr, 0};
        };
        auto mall_plan_of = [&](std::uint32_t u) -> const MallPlan* {
            for (const auto& p : truth.malls)
                if (u >= p.staff_first && u < p.staff_first + p.staff_count) return &p;
            return nullptr;
        };
        auto aoi_index_by_id = [&](const std::string& id) -> std::size_t {
            for (std::size_t i = 0; i < aois.size(); ++i)
                if (aois[i].aoi_id == id) return i;
            throw std::logic_error("internal: unknown aoi " + id);
        };

        for (int ui = 0; ui < cfg.n_users; ++ui) {
            const std::uint32_t u = static_cast<std::uint32_t>(ui);
            events.clear();
            const GeoPoint home = detail::Geography::home(cfg.seed, ui);
            const std::vector<int>* gaps = nullptr;
            if (u >= churn_first && u < consumer_first) gaps = &churn_gaps[u - churn_first];
            auto active = [&](int month_offset) {
                return !gaps || std::find(gaps->begin(), gaps->end(), month_offset) == gaps->end();
            };

            auto srng = substream(cfg.seed, kTagUserSampling, u);
            // monthly anchor + background sampling
            for (int m = 0; m < n_months; ++m) {
                if (!active(m)) continue;
                const MonthId month = truth.months[static_cast<std::size_t>(m)];
                const std::int64_t month_first = days_from_civil(month.year, month.month, 1);
                events.push_back({day_start_timestamp(month_first) + 20 * 3600 + 600 + ui % 60, home});
                const int month_len = days_in_month(month.year, month.month);
                for (int d = 0; d < month_len; ++d) {
                    if (!srng.bernoulli(cfg.sampling_rate)) continue;
                    const std::int64_t day = month_first + d;
                    const int sec = 18 * 3600 + static_cast<int>(srng.below(5 * 3600));
                    const double jlon = srng.uniform(-0.0012, 0.0012);
                    const double jlat = srng.uniform(-0.0012, 0.0012);
                    events.push_back({day_start_timestamp(day) + sec,
                                      {detail::round6(home.lon + jlon), detail::round6(home.lat + jlat)}});
                }
            }

            // industrial staff work points
            if (auto [plan, rank] = staff_plan_of(u); plan) {
                const std::size_t aidx = aoi_index_by_id(plan->aoi_id);
                auto wrng = substream(cfg.seed, kTagStaffDays, u);
                for (int m = 0; m < n_months; ++m) {
                    if (static_cast<long>(rank) >= plan->headcount[static_cast<std::size_t>(m)]) continue;
                    for (std::int64_t day : detail::weekdays_of_month(truth.months[static_cast<std::size_t>(m)])) {
                        if (!wrng.bernoulli(cfg.staff_weekday_presence)) continue;
                        const int sec = 9 * 3600 + 1800 + static_cast<int>(wrng.below(7 * 3600));
                        events.push_back({day_start_timestamp(day) + sec,
                                          detail::Geography::inside_aoi(wrng, aois[aidx].polygon)});
                    }
                }
            }
            // mall staff work points (constant roster)
            if (const MallPlan* plan = mall_plan_of(u); plan) {
                const std::size_t aidx = aoi_index_by_id(plan->aoi_id);
                auto wrng = substream(cfg.seed, kTagStaffDays, u);
                for (int m = 0; m < n_months; ++m) {
                    for (std::int64_t day : detail::weekdays_of_month(truth.months[static_cast<std::size_t>(m)])) {
                        if (!wrng.bernoulli(std::max(0.9, cfg.staff_weekday_presence))) continue;
                        const int sec = 9 * 3600 + 1800 + static_cast<int>(wrng.below(7 * 3600));
                        events.push_back({day_start_timestamp(day) + sec,
                                          detail::Geography::inside_aoi(wrng, aois[aidx].polygon)});
                    }
                }
            }
            // mall visits
            if (!visits[static_cast<std::size_t>(ui)].empty()) {
                auto vrng = substream(cfg.seed, kTagVisitorDays, u);
                for (auto [day, aidx] : visits[static_cast<std::size_t>(ui)]) {
                    const int sec = 10 * 3600 + static_cast<int>(vrng.below(11 * 3600));
                    events.push_back({day_start_timestamp(day) + sec,
                                      detail::Geography::inside_aoi(vrng, aois[aidx].polygon)});
                }
            }

            std::sort(events.begin(), events.end(), [](const detail::UserEvent& a, const detail::UserEvent& b) {
                if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
                if (a.point.lon != b.point.lon) return a.point.lon < b.point.lon;
                return a.point.lat < b.point.lat;
            });

            buf.clear();
            const std::string uname = detail::user_name(ui);
            for (const auto& ev : events) {
                std::string line;
                PositioningRecord rec{uname, ev.point, ev.timestamp};
                serialize_positioning(line, rec);
                buf += pos_corrupt.apply(++line_no, std::move(line));
            }
            out << buf;
        }
        truth.positioning_lines = line_no;
        if (!out) throw std::runtime_error("write failed: " + out_dir + "/positioning.ndjson");
    }

    // ---- planted trends + query events ----------------------------------------
    detail::Corruptor q_corrupt{cfg.seed, kTagCorruptQueries, cfg.corruption_rate, true, &truth.corrupt_queries,
                                window.end + 1};
    {
        std::ofstream out(out_dir + "/queries.ndjson", std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + out_dir + "/queries.ndjson");
        std::size_t line_no = 0;
        const std::uint64_t user_count = cfg.n_users > 0 ? std::uint64_t(cfg.n_users) : 1;

        for (const auto& cat : trend_categories()) {
            const auto& cat_pois = pois_by_category[cat.path];
            if (cat_pois.empty() || cfg.trend_monthly_base <= 0 || cfg.n_users <= 0) continue;
            TrendCurve curve;
            curve.category = cat.path;
            curve.normalized = cat.normalized;
            auto rng = substream(cfg.seed, kTagTrendEvents, std::uint64_t(std::hash<std::string>{}(cat.path)));
            std::string buf;
            for (int m = 0; m < n_months; ++m) {
                const MonthId month = truth.months[static_cast<std::size_t>(m)];
                const long want = detail::trend_curve_value(cat.path, m, month.month, cfg.trend_monthly_base);
                const std::int64_t month_first = days_from_civil(month.year, month.month, 1);
                const int month_len = days_in_month(month.year, month.month);
                std::set<std::tuple<std::uint64_t, std::uint32_t, int>> combos;  // (user, poi, day)
                long emitted = 0;
                int guard = 0;
                buf.clear();
                while (emitted < want && guard++ < want * 40 + 1000) {
                    const std::uint64_t user = rng.below(user_count);
                    const std::uint32_t poi = static_cast<std::uint32_t>(rng.below(cat_pois.size()));
                    const int day = static_cast<int>(rng.below(std::uint64_t(month_len)));
                    if (!combos.emplace(user, poi, day).second) continue;
                    MapQueryRecord rec;
                    rec.user_id = detail::user_name(static_cast<int>(user));
                    rec.poi_id = cat_pois[poi];
                    if (rng.bernoulli(0.1)) rec.keyword = rec.poi_id;
                    rec.timestamp = day_start_timestamp(month_first + day) + 8 * 3600 +
                                    static_cast<std::int64_t>(rng.below(14 * 3600));
                    std::string line;
                    serialize_query(line, rec);
                    buf += q_corrupt.apply(++line_no, std::move(line));
                    ++emitted;
                }
                curve.monthly.push_back(emitted);
                out << buf;
            }
            truth.trends.push_back(std::move(curve));
        }
        truth.query_lines = line_no;
        if (!out) throw std::runtime_error("write failed: " + out_dir + "/queries.ndjson");
    }

    // ---- venue panel -----------------------------------------------------------
    if (cfg.n_venues_suspected + cfg.n_venues_control + cfg.n_venue_malls > 0) {
        VenuePanel panel = generate_venue_panel(cfg, &truth);
        std::string csv = "venue_id,date,visitors,queries,revenue\n";
        for (const auto& id : panel.venue_ids) {
            const auto& vis = panel.visitors.at(id);
            const auto& q = panel.queries.at(id);
            const auto& rev = panel.revenue.at(id);
            for (std::size_t t = 0; t < vis.size(); ++t) {
                csv += id;
                csv += ',';
                csv += format_date(vis.day_at(t));
                csv += ',';
                csv += format_double(vis.values[t]);
                csv += ',';
                csv += format_double(q.values[t]);
                csv += ',';
                csv += format_double(rev.values[t]);
                csv += '\n';
            }
        }
        write_file(out_dir + "/venues_daily.csv", csv);

        std::string pcsv = "date,total_queries\n";
        for (std::size_t t = 0; t < panel.platform_total.size(); ++t) {
            pcsv += format_date(panel.platform_total.day_at(t));
            pcsv += ',';
            pcsv += format_double(panel.platform_total.values[t]);
            pcsv += '\n';
        }
        write_file(out_dir + "/platform_daily.csv", pcsv);
    }

    // ---- truth files -------------------------------------------------------------
    write_truth_files(cfg, truth, out_dir);
    write_run_config(cfg, out_dir);
    return truth;
}

inline void write_truth_files(const WorldConfig& cfg, const WorldTruth& truth, const std::string& out_dir) {
    using json = nlohmann::ordered_json;

    json months = json::array();
    for (const auto& m : truth.months) months.push_back(m.to_string());

    {
        json doc;
        doc["months"] = months;
        json arr = json::array();
        for (const auto& p : truth.industrial) {
            json item;
            item["aoi_id"] = p.aoi_id;
            item["kind"] = to_string(p.kind);
            item["staff_first"] = p.staff_first;
            item["staff_cap"] = p.staff_cap;
            item["headcount"] = p.headcount;
            arr.push_back(std::move(item));
        }
        doc["aois"] = std::move(arr);
        write_file(out_dir + "/truth/employment.json", doc.dump(1) + "\n");
    }
    {
        json doc;
        doc["months"] = months;
        json arr = json::array();
        for (const auto& p : truth.malls) {
            json item;
            item["aoi_id"] = p.aoi_id;
            item["staff_first"] = p.staff_first;
            item["staff_count"] = p.staff_count;
            item["visitors"] = p.visitors;
            arr.push_back(std::move(item));
        }
        doc["aois"] = std::move(arr);
        write_file(out_dir + "/truth/consumers.json", doc.dump(1) + "\n");
    }
    {
        json doc;
        for (const auto& [user, gaps] : truth.churn_gaps) doc[user] = gaps;
        write_file(out_dir + "/truth/churners.json", doc.dump(1) + "\n");
    }
    {
        json doc;
        doc["months"] = months;
        json arr = json::array();
        for (const auto& c : truth.trends) {
            json item;
            item["category"] = c.category;
            item["normalized"] = c.normalized;
            item["monthly"] = c.monthly;
            arr.push_back(std::move(item));
        }
        doc["categories"] = std::move(arr);
        write_file(out_dir + "/truth/trends.json", doc.dump(1) + "\n");
    }
    if (cfg.n_venues_suspected + cfg.n_venues_control + cfg.n_venue_malls > 0) {
        json doc;
        doc["suspected"] = truth.suspected_venues;
        doc["control"] = truth.control_venues;
        doc["malls"] = truth.mall_venues;
        doc["fraud_enabled"] = truth.fraud_enabled;
        if (truth.fraud_enabled) {
            doc["fraud_start"] = format_date(truth.fraud_window.start);
            doc["fraud_end"] = format_date(truth.fraud_window.end);
            doc["fraud_magnitude_sd"] = truth.fraud_magnitude_sd;
            doc["suspected_group_revenue_sd"] = truth.suspected_group_revenue_sd;
        }
        json arr = json::array();
        for (const auto& v : truth.venues) {
            json item;
            item["venue_id"] = v.venue_id;
            item["base"] = v.base;
            item["clean_query_sd"] = v.clean_query_sd;
            arr.push_back(std::move(item));
        }
        doc["venues"] = std::move(arr);
        write_file(out_dir + "/truth/venues.json", doc.dump(1) + "\n");
    }
    {
        json doc;
        auto corrupt = [](const std::vector<RejectEntry>& entries) {
            json arr = json::array();
            for (const auto& e : entries) arr.push_back({{"line", e.line}, {"reason", e.reason}});
            return arr;
        };
        doc["positioning_lines"] = truth.positioning_lines;
        doc["positioning_corrupt"] = truth.corrupt_positioning.size();
        doc["query_lines"] = truth.query_lines;
        doc["query_corrupt"] = truth.corrupt_queries.size();
        doc["positioning_entries"] = corrupt(truth.corrupt_positioning);
        doc["query_entries"] = corrupt(truth.corrupt_queries);
        write_file(out_dir + "/truth/corruption.json", doc.dump(1) + "\n");
    }
}

inline void write_run_config(const WorldConfig& cfg, const std::string& out_dir) {
    std::string s;
    s += "# pipeline run configuration (paths are relative to this file)\n";
    s += "window_start = " + format_date(cfg.window_start_day) + "\n";
    s += "window_end = " + format_date(cfg.window_end_day) + "\n";
    s += "base_year = " + std::to_string(cfg.base_year) + "\n";
    if (cfg.n_users > 0) {
        s += "positioning = positioning.ndjson\n";
        s += "queries = queries.ndjson\n";
        s += "pois = pois.csv\n";
        s += "aois = aois.json\n";
        s += "employee_day_threshold = " + std::to_string(cfg.employee_day_threshold) + "\n";
        s += "work_start_hour = " + std::to_string(cfg.work_start_hour) + "\n";
        s += "work_end_hour = " + std::to_string(cfg.work_end_hour) + "\n";
        s += "cell_size_deg = " + format_double(cfg.cell_size_deg) + "\n";
        std::string norm, raw;
        for (const auto& cat : trend_categories()) {
            std::string& dst = cat.normalized ? norm : raw;
            if (!dst.empty()) dst += ", ";
            dst += cat.path;
        }
        if (!norm.empty()) s += "trend_categories = " + norm + "\n";
        if (!raw.empty()) s += "trend_categories_raw = " + raw + "\n";
    }
    if (cfg.n_venues_suspected + cfg.n_venues_control + cfg.n_venue_malls > 0) {
        s += "venues_daily = venues_daily.csv\n";
        s += "platform_daily = platform_daily.csv\n";
        s += "normalize_queries = true\n";
        s += "nowcast_start = " + format_date(cfg.nowcast_start_day) + "\n";
        auto id_list = [](const char* prefix, int n) {
            std::string out;
            for (int i = 0; i < n; ++i) {
                char buf[16];
                std::snprintf(buf, sizeof(buf), "%s%03d", prefix, i + 1);
                if (!out.empty()) out += ", ";
                out += buf;
            }
            return out;
        };
        if (cfg.n_venues_suspected > 0) s += "suspected_venues = " + id_list("s", cfg.n_venues_suspected) + "\n";
        if (cfg.n_venues_control > 0) s += "control_venues = " + id_list("c", cfg.n_venues_control) + "\n";
        s += "detect_train_start = " + format_date(cfg.window_start_day) + "\n";
        s += "detect_train_end = " + format_date(cfg.nowcast_start_day - 1) + "\n";
        s += "z_threshold = " + format_double(cfg.z_threshold) + "\n";
        s += "min_run = " + std::to_string(cfg.min_run) + "\n";
    }
    write_file(out_dir + "/run.cfg", s);
}

}  // namespace mobimetrics::synth
