#pragma once

#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "mobimetrics/calendar.hpp"
#include "mobimetrics/records.hpp"

namespace mobimetrics {

// Which calendar months each user produced at least one positioning record
// in. The aggregation is commutative and associative, so shards built on
// record subsets merge cleanly.
struct ActivityCalendar {
    std::unordered_map<std::string, std::set<int>> months_by_user;  // MonthId::index values

    bool active(const std::string& user, MonthId m) const {
        auto it = months_by_user.find(user);
        return it != months_by_user.end() && it->second.count(m.index()) != 0;
    }

    void merge(const ActivityCalendar& other) {
        for (const auto& [user, months] : other.months_by_user)
            months_by_user[user].insert(months.begin(), months.end());
    }
};

inline ActivityCalendar monthly_activity(const std::vector<PositioningRecord>& records) {
    ActivityCalendar cal;
    for (const auto& r : records) cal.months_by_user[r.user_id].insert(month_of(r.timestamp).index());
    return cal;
}

// The sampling rule: a user belongs to the cohort of `report_month` when they
// have at least one positioning record in every one of the 13 calendar months
// from report_month-12 through report_month. The 13-month span guarantees the
// same calendar month one year earlier is inside the window, so year-over-year
// comparisons are computed on a single cohort.
inline std::set<std::string> continuous_users(const ActivityCalendar& calendar, MonthId report_month,
                                              MonthId window_start) {
    if (report_month.index() - window_start.index() < 12)
        throw std::runtime_error("insufficient history: report month " + report_month.to_string() +
                                 " needs 12 predecessor months inside the data window (window starts " +
                                 window_start.to_string() + ")");
    const int first = report_month.index() - 12;
    const int last = report_month.index();
    std::set<std::string> out;
    for (const auto& [user, months] : calendar.months_by_user) {
        bool all = true;
        for (int m = first; m <= last && all; ++m) all = months.count(m) != 0;
        if (all) out.insert(user);
    }
    return out;
}

}  // namespace mobimetrics
