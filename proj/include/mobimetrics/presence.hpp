#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mobimetrics/calendar.hpp"
#include "mobimetrics/records.hpp"
#include "mobimetrics/spatial.hpp"
#include "mobimetrics/util.hpp"

namespace mobimetrics {

// Work-hour bounds, local UTC+8. A point counts as work-hour presence when its
// local time-of-day lies in [start_hour, end_hour).
struct WorkHours {
    int start_hour = 9;
    int end_hour = 18;

    bool covers_seconds(int seconds_of_day) const {
        return seconds_of_day >= start_hour * 3600 && seconds_of_day < end_hour * 3600;
    }
};

struct PresenceStats {
    std::uint32_t active_day_mask = 0;    // bit d-1 set: >= 1 point on local day d of the month
    std::uint32_t workday_mask = 0;       // bit d-1 set: weekday with >= 1 work-hour point

    int active_days() const { return __builtin_popcount(active_day_mask); }
    int workhour_weekdays() const { return __builtin_popcount(workday_mask); }
};

// Per (user, AOI, month) activity statistics for cohort users. Keys are
// interned; exports are sorted by (user_id, aoi_id, month) so files are
// reproducible regardless of hash-map iteration order.
class PresenceMatrix {
public:
    struct Key {
        std::uint32_t user = 0;
        std::uint32_t aoi = 0;
        std::int32_t month = 0;  // MonthId::index

        friend bool operator==(const Key&, const Key&) = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            std::uint64_t h = (std::uint64_t(k.user) << 32) ^ (std::uint64_t(k.aoi) << 12) ^
                              std::uint64_t(std::uint32_t(k.month));
            h ^= h >> 33;
            h *= 0xFF51AFD7ED558CCDULL;
            h ^= h >> 33;
            return static_cast<std::size_t>(h);
        }
    };

    std::uint32_t intern_user(const std::string& user) {
        auto it = user_ids_.find(user);
        if (it != user_ids_.end()) return it->second;
        std::uint32_t idx = static_cast<std::uint32_t>(user_names_.size());
        user_names_.push_back(user);
        user_ids_.emplace(user, idx);
        return idx;
    }

    const std::string& user_name(std::uint32_t idx) const { return user_names_.at(idx); }

    void record_point(std::uint32_t user, std::uint32_t aoi, MonthId month, int day_of_month, bool workhour_weekday) {
        PresenceStats& st = cells_[Key{user, aoi, month.index()}];
        st.active_day_mask |= 1u << (day_of_month - 1);
        if (workhour_weekday) st.workday_mask |= 1u << (day_of_month - 1);
    }

    const PresenceStats* find(const std::string& user, std::uint32_t aoi, MonthId month) const {
        auto uit = user_ids_.find(user);
        if (uit == user_ids_.end()) return nullptr;
        auto it = cells_.find(Key{uit->second, aoi, month.index()});
        return it == cells_.end() ? nullptr : &it->second;
    }

    const std::unordered_map<Key, PresenceStats, KeyHash>& cells() const { return cells_; }
    std::size_t size() const { return cells_.size(); }

    // CSV audit export: user_id,aoi_id,year,month,active_days,workhour_weekdays
    std::string to_csv(const AoiCatalog& catalog) const {
        std::vector<const std::pair<const Key, PresenceStats>*> rows;
        rows.reserve(cells_.size());
        for (const auto& kv : cells_) rows.push_back(&kv);
        std::sort(rows.begin(), rows.end(), [&](auto* a, auto* b) {
            const std::string& ua = user_names_[a->first.user];
            const std::string& ub = user_names_[b->first.user];
            if (ua != ub) return ua < ub;
            const std::string& aa = catalog.at(a->first.aoi).aoi_id;
            const std::string& ab = catalog.at(b->first.aoi).aoi_id;
            if (aa != ab) return aa < ab;
            return a->first.month < b->first.month;
        });
        std::string out = "user_id,aoi_id,year,month,active_days,workhour_weekdays\n";
        for (auto* kv : rows) {
            MonthId m = MonthId::from_index(kv->first.month);
            out += user_names_[kv->first.user];
            out += ',';
            out += catalog.at(kv->first.aoi).aoi_id;
            out += ',';
            out += std::to_string(m.year);
            out += ',';
            out += std::to_string(m.month);
            out += ',';
            out += std::to_string(kv->second.active_days());
            out += ',';
            out += std::to_string(kv->second.workhour_weekdays());
            out += '\n';
        }
        return out;
    }

private:
    std::unordered_map<std::string, std::uint32_t> user_ids_;
    std::vector<std::string> user_names_;
    std::unordered_map<Key, PresenceStats, KeyHash> cells_;
};

namespace detail {

// Cohort membership lookup per report month index.
struct MonthlyCohorts {
    std::unordered_map<std::string, std::vector<std::int32_t>> months_by_user;

    static MonthlyCohorts from_sets(const std::map<MonthId, std::set<std::string>>& cohorts) {
        MonthlyCohorts mc;
        for (const auto& [month, users] : cohorts)
            for (const auto& u : users) mc.months_by_user[u].push_back(month.index());
        return mc;
    }

    bool member(const std::string& user, std::int32_t month_idx) const {
        auto it = months_by_user.find(user);
        if (it == months_by_user.end()) return false;
        return std::find(it->second.begin(), it->second.end(), month_idx) != it->second.end();
    }
};

}  // namespace detail

// Streams positioning records through the spatial index and accumulates the
// presence matrix for the given per-month cohorts. Records from users outside
// the month's cohort are ignored. The spatial assignment pass may run on
// several threads; accumulation order is record order either way, so the
// result does not depend on the thread count.
inline PresenceMatrix build_presence(const std::vector<PositioningRecord>& records,
                                     const std::map<MonthId, std::set<std::string>>& cohorts_by_month,
                                     const AoiIndex& index, const WorkHours& hours = {}, unsigned n_threads = 1) {
    auto cohorts = detail::MonthlyCohorts::from_sets(cohorts_by_month);

    std::vector<GeoPoint> points;
    points.reserve(records.size());
    for (const auto& r : records) points.push_back(r.point);
    const std::vector<std::uint32_t> matches = assign_stream(points, index, n_threads);

    PresenceMatrix matrix;
    std::size_t cursor = 0;
    for (const auto& r : records) {
        const std::uint32_t n_matches = matches[cursor++];
        const std::size_t match_at = cursor;
        cursor += n_matches;
        if (n_matches == 0) continue;
        const std::int64_t day = local_day_of(r.timestamp);
        const CivilDate civil = civil_from_days(day);
        const std::int32_t month_idx = MonthId{civil.year, civil.month}.index();
        if (!cohorts.member(r.user_id, month_idx)) continue;
        const int dow = weekday_from_days(day);
        const bool workhour_weekday = dow < 5 && hours.covers_seconds(local_seconds_of_day(r.timestamp));
        const std::uint32_t user = matrix.intern_user(r.user_id);
        for (std::uint32_t k = 0; k < n_matches; ++k)
            matrix.record_point(user, matches[match_at + k], MonthId{civil.year, civil.month}, civil.day,
                                workhour_weekday);
    }
    return matrix;
}

// Single-cohort convenience: the same user set applies to every month.
inline PresenceMatrix build_presence(const std::vector<PositioningRecord>& records,
                                     const std::set<std::string>& cohort, const AoiIndex& index,
                                     MonthId first_month, MonthId last_month, const WorkHours& hours = {}) {
    std::map<MonthId, std::set<std::string>> cohorts;
    for (int m = first_month.index(); m <= last_month.index(); ++m) cohorts[MonthId::from_index(m)] = cohort;
    return build_presence(records, cohorts, index, hours);
}

// Number of cohort users with >= K work-hour weekdays at the AOI that month.
// K is the recurrence threshold separating staff from visitors.
inline int count_employees(const PresenceMatrix& matrix, const AoiCatalog& catalog, const std::string& aoi_id,
                           MonthId month, int k = 10) {
    if (k < 1) throw std::invalid_argument("employee day threshold K must be >= 1");
    auto aoi_idx = catalog.index_of(aoi_id);
    if (!aoi_idx) throw std::runtime_error("unknown aoi_id: '" + aoi_id + "'");
    int count = 0;
    for (const auto& [key, stats] : matrix.cells())
        if (key.aoi == *aoi_idx && key.month == month.index() && stats.workhour_weekdays() >= k) ++count;
    return count;
}

// Number of cohort users present at the commercial AOI that month who do not
// meet the staff rule (any presence minus staff).
inline int count_consumers(const PresenceMatrix& matrix, const AoiCatalog& catalog, const std::string& aoi_id,
                           MonthId month, int k = 10) {
    if (k < 1) throw std::invalid_argument("employee day threshold K must be >= 1");
    auto aoi_idx = catalog.index_of(aoi_id);
    if (!aoi_idx) throw std::runtime_error("unknown aoi_id: '" + aoi_id + "'");
    if (catalog.at(*aoi_idx).kind != AoiKind::Commercial)
        throw std::runtime_error("kind mismatch: aoi '" + aoi_id + "' is not Commercial");
    int count = 0;
    for (const auto& [key, stats] : matrix.cells())
        if (key.aoi == *aoi_idx && key.month == month.index() && stats.active_days() >= 1 &&
            stats.workhour_weekdays() < k)
            ++count;
    return count;
}

// Bulk per-(aoi, month) counts in one sweep; used by the index stages.
struct AoiMonthCounts {
    // (aoi index, month index) -> count
    std::map<std::pair<std::uint32_t, std::int32_t>, long> employees;
    std::map<std::pair<std::uint32_t, std::int32_t>, long> consumers;
};

inline AoiMonthCounts count_all(const PresenceMatrix& matrix, const AoiCatalog& catalog, int k = 10) {
    if (k < 1) throw std::invalid_argument("employee day threshold K must be >= 1");
    AoiMonthCounts out;
    for (const auto& [key, stats] : matrix.cells()) {
        const bool staff = stats.workhour_weekdays() >= k;
        if (staff) ++out.employees[{key.aoi, key.month}];
        if (catalog.at(key.aoi).kind == AoiKind::Commercial && !staff && stats.active_days() >= 1)
            ++out.consumers[{key.aoi, key.month}];
    }
    return out;
}

}  // namespace mobimetrics
