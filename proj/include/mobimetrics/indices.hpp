#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "mobimetrics/calendar.hpp"
#include "mobimetrics/io.hpp"
#include "mobimetrics/records.hpp"
#include "mobimetrics/util.hpp"

namespace mobimetrics {

// Year-over-year period. January and February are merged into one period per
// year to neutralize the movable Spring Festival, so `month` is 3..12 for a
// single month or kJanFeb for the merged pair.
struct YoyPeriod {
    static constexpr int kJanFeb = 2;

    int year = 0;
    int month = kJanFeb;

    bool merged() const { return month == kJanFeb; }
    std::string to_string() const {
        if (merged()) return std::to_string(year) + "-JanFeb";
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
        return buf;
    }
    friend constexpr auto operator<=>(const YoyPeriod&, const YoyPeriod&) = default;
};

// A monthly economic index: raw counts, base-100 values (mean of the base
// year's 12 months = 100), and year-over-year growth. When `normalized` is
// false (the finance & investment exception) values are the raw counts.
struct IndexSeries {
    std::string label;
    int base_year = 0;
    bool normalized = true;
    std::map<MonthId, double> monthly;  // raw counts
    std::map<MonthId, double> values;
    std::map<YoyPeriod, double> yoy;  // percent
};

// Percent growth of `period` versus the same period one year earlier,
// computed on raw counts. Merged Jan+Feb compares the two-month sums.
inline double yoy_growth(const IndexSeries& series, const YoyPeriod& period) {
    auto raw = [&](int year, int month) -> double {
        auto it = series.monthly.find(MonthId{year, month});
        if (it == series.monthly.end())
            throw std::runtime_error("yoy_growth: missing month " + MonthId{year, month}.to_string());
        return it->second;
    };
    double cur, prior;
    if (period.merged()) {
        cur = raw(period.year, 1) + raw(period.year, 2);
        prior = raw(period.year - 1, 1) + raw(period.year - 1, 2);
    } else {
        if (period.month < 3 || period.month > 12)
            throw std::runtime_error("yoy_growth: single-month periods are Mar-Dec; Jan/Feb are merged");
        cur = raw(period.year, period.month);
        prior = raw(period.year - 1, period.month);
    }
    if (prior == 0.0) throw std::runtime_error("yoy_growth: zero denominator for " + period.to_string());
    return 100.0 * (cur - prior) / prior;
}

namespace detail {

inline void fill_yoy(IndexSeries& s) {
    std::set<int> years;
    for (const auto& [m, _] : s.monthly) years.insert(m.year);
    for (int y : years) {
        auto have = [&](int year, int month) { return s.monthly.count(MonthId{year, month}) != 0; };
        if (have(y, 1) && have(y, 2) && have(y - 1, 1) && have(y - 1, 2)) {
            YoyPeriod p{y, YoyPeriod::kJanFeb};
            double prior = s.monthly.at(MonthId{y - 1, 1}) + s.monthly.at(MonthId{y - 1, 2});
            if (prior != 0.0) s.yoy[p] = yoy_growth(s, p);
        }
        for (int m = 3; m <= 12; ++m) {
            if (have(y, m) && have(y - 1, m) && s.monthly.at(MonthId{y - 1, m}) != 0.0) {
                YoyPeriod p{y, m};
                s.yoy[p] = yoy_growth(s, p);
            }
        }
    }
}

}  // namespace detail

// Normalizes monthly counts so the base year's mean is exactly 100. Requires
// all 12 base-year months with a positive total.
inline IndexSeries build_index_series(const std::map<MonthId, double>& counts, int base_year,
                                      const std::string& label, bool normalize = true) {
    IndexSeries s;
    s.label = label;
    s.base_year = base_year;
    s.normalized = normalize;
    for (const auto& [m, v] : counts) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::runtime_error("index '" + label + "': negative or non-finite count at " + m.to_string());
        s.monthly.emplace(m, v);
    }
    if (normalize) {
        double base_total = 0.0;
        for (int m = 1; m <= 12; ++m) {
            auto it = s.monthly.find(MonthId{base_year, m});
            if (it == s.monthly.end())
                throw std::runtime_error("index '" + label + "': missing base-year month " +
                                         MonthId{base_year, m}.to_string());
            base_total += it->second;
        }
        if (base_total <= 0.0)
            throw std::runtime_error("index '" + label + "': base year " + std::to_string(base_year) +
                                     " has zero mean");
        const double base_mean = base_total / 12.0;
        for (const auto& [m, v] : s.monthly) s.values[m] = 100.0 * v / base_mean;
    } else {
        s.values = s.monthly;
    }
    detail::fill_yoy(s);
    return s;
}

// The three Employment Index series: all industrial parks, traditional only,
// high-tech only. Input is per-AOI monthly employee counts.
struct EmploymentIndices {
    IndexSeries all;
    IndexSeries traditional;
    IndexSeries hightech;
};

inline EmploymentIndices employment_index(
    const std::map<std::pair<std::uint32_t, std::int32_t>, long>& employee_counts, const AoiCatalog& catalog,
    int base_year) {
    std::map<MonthId, double> all, trad, tech;
    for (const auto& [key, count] : employee_counts) {
        const Aoi& aoi = catalog.at(key.first);
        if (aoi.kind == AoiKind::Commercial) continue;
        MonthId m = MonthId::from_index(key.second);
        all[m] += double(count);
        if (aoi.kind == AoiKind::IndustrialTraditional) trad[m] += double(count);
        else tech[m] += double(count);
    }
    // months observed anywhere must exist in every group so the partition
    // check (all = traditional + hightech) holds month by month
    for (const auto& [m, _] : all) {
        trad.try_emplace(m, 0.0);
        tech.try_emplace(m, 0.0);
    }
    EmploymentIndices out;
    out.all = build_index_series(all, base_year, "employment_all");
    out.traditional = build_index_series(trad, base_year, "employment_traditional");
    out.hightech = build_index_series(tech, base_year, "employment_hightech");
    return out;
}

inline IndexSeries consumer_index(const std::map<std::pair<std::uint32_t, std::int32_t>, long>& consumer_counts,
                                  const AoiCatalog& catalog, int base_year) {
    std::map<MonthId, double> totals;
    for (const auto& [key, count] : consumer_counts) {
        if (catalog.at(key.first).kind != AoiKind::Commercial) continue;
        totals[MonthId::from_index(key.second)] += double(count);
    }
    return build_index_series(totals, base_year, "consumer");
}

inline bool category_matches(const std::vector<std::string>& path, const std::vector<std::string>& prefix) {
    if (prefix.empty() || prefix.size() > path.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i)
        if (path[i] != prefix[i]) return false;
    return true;
}

// Consumption Trends Index for one POI category: the monthly number of
// distinct (user, poi, local day) query events whose POI category path starts
// with the prefix. Same-day repeat searches for one POI collapse to a single
// visit intent. Queries whose poi_id does not resolve go to the reject log.
inline IndexSeries consumption_trends(const std::vector<MapQueryRecord>& queries, const PoiCatalog& catalog,
                                      const std::string& category_prefix, int base_year, RejectLog& rejects,
                                      bool normalize = true) {
    const auto prefix = split_trimmed(category_prefix, '/');
    bool any_poi = false;
    for (const auto& p : catalog.all())
        if (category_matches(p.category_path, prefix)) {
            any_poi = true;
            break;
        }
    if (!any_poi) throw std::runtime_error("unknown category: '" + category_prefix + "' matches no POI");

    std::map<MonthId, double> counts;
    std::set<std::tuple<std::string, std::string, std::int64_t>> seen;  // (user, poi, local day)
    std::size_t line = 0;
    for (const auto& q : queries) {
        ++line;
        const Poi* poi = catalog.find(q.poi_id);
        if (!poi) {
            rejects.add(line, "unresolvable poi_id '" + q.poi_id + "'");
            continue;
        }
        if (!category_matches(poi->category_path, prefix)) continue;
        const std::int64_t day = local_day_of(q.timestamp);
        if (!seen.emplace(q.user_id, q.poi_id, day).second) continue;
        counts[month_of_day(day)] += 1.0;
    }
    std::string label = "trends_";
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (i) label += '_';
        label += prefix[i];
    }
    return build_index_series(counts, base_year, label, normalize);
}

// CSV rows: year,month,raw,value,yoy. Jan and Feb rows carry the merged
// Jan+Feb growth; months without a prior-year comparison leave yoy empty.
inline std::string index_to_csv(const IndexSeries& s) {
    std::string out = "year,month,raw,value,yoy\n";
    for (const auto& [m, raw] : s.monthly) {
        out += std::to_string(m.year);
        out += ',';
        out += std::to_string(m.month);
        out += ',';
        out += format_double(raw);
        out += ',';
        auto vit = s.values.find(m);
        if (vit != s.values.end()) out += format_double(vit->second);
        out += ',';
        YoyPeriod p{m.year, m.month <= 2 ? YoyPeriod::kJanFeb : m.month};
        auto yit = s.yoy.find(p);
        if (yit != s.yoy.end()) out += format_double(yit->second);
        out += '\n';
    }
    return out;
}

}  // namespace mobimetrics
