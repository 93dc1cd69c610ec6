#include <doctest.h>

#include "mobimetrics/cohort.hpp"
#include "mobimetrics/oracles.hpp"
#include "mobimetrics/rng.hpp"

using namespace mobimetrics;

namespace {

std::int64_t ts_of(int year, int month, int day) {
    return day_start_timestamp(days_from_civil(year, month, day)) + 12 * 3600;
}

PositioningRecord rec(const std::string& user, int year, int month, int day = 5) {
    return {user, {121.0, 31.0}, ts_of(year, month, day)};
}

}  // namespace

TEST_CASE("monthly_activity groups by user and month") {
    std::vector<PositioningRecord> records{rec("a", 2015, 1, 3), rec("a", 2015, 1, 9), rec("a", 2015, 1, 20)};
    ActivityCalendar cal = monthly_activity(records);
    REQUIRE(cal.months_by_user.count("a") == 1);
    CHECK(cal.months_by_user["a"].size() == 1);
    CHECK(cal.active("a", MonthId{2015, 1}));
    CHECK(!cal.active("a", MonthId{2015, 2}));

    ActivityCalendar empty = monthly_activity({});
    CHECK(empty.months_by_user.empty());
}

TEST_CASE("monthly_activity is order independent and mergeable") {
    auto rng = substream(420, 1);
    std::vector<PositioningRecord> records;
    for (int i = 0; i < 2000; ++i)
        records.push_back(rec("u" + std::to_string(rng.below(50)), 2014, 1 + static_cast<int>(rng.below(12)),
                              1 + static_cast<int>(rng.below(28))));
    ActivityCalendar forward = monthly_activity(records);
    std::vector<PositioningRecord> reversed(records.rbegin(), records.rend());
    ActivityCalendar backward = monthly_activity(reversed);
    CHECK(forward.months_by_user == backward.months_by_user);

    // naive nested-loop group-by gives the same calendar
    std::unordered_map<std::string, std::set<int>> naive;
    for (const auto& r : records) naive[r.user_id].insert(month_of(r.timestamp).index());
    CHECK(forward.months_by_user == naive);

    // shard and merge
    std::vector<PositioningRecord> left(records.begin(), records.begin() + 1000);
    std::vector<PositioningRecord> right(records.begin() + 1000, records.end());
    ActivityCalendar merged = monthly_activity(left);
    merged.merge(monthly_activity(right));
    CHECK(merged.months_by_user == forward.months_by_user);
}

TEST_CASE("continuous_users requires all 13 months") {
    std::vector<PositioningRecord> records;
    for (int m = 0; m <= 12; ++m) {
        MonthId month = MonthId{2014, 12}.minus_months(12 - m);
        records.push_back(rec("full", month.year, month.month));
        if (month != MonthId{2014, 3}) records.push_back(rec("gappy", month.year, month.month));
    }
    ActivityCalendar cal = monthly_activity(records);
    auto cohort = continuous_users(cal, MonthId{2014, 12}, MonthId{2013, 12});
    CHECK(cohort.count("full") == 1);
    CHECK(cohort.count("gappy") == 0);
}

TEST_CASE("continuous_users errors when history is short") {
    ActivityCalendar cal;
    CHECK_THROWS_WITH_AS(continuous_users(cal, MonthId{2014, 6}, MonthId{2014, 1}),
                         doctest::Contains("insufficient history"), std::runtime_error);
    CHECK_NOTHROW(continuous_users(cal, MonthId{2015, 1}, MonthId{2014, 1}));
}

TEST_CASE("13-month window spans the same calendar month a year earlier") {
    // a user in the cohort of (2015, 12) has activity in both 2015-12 and 2014-12
    std::vector<PositioningRecord> records;
    for (int m = 0; m <= 12; ++m) {
        MonthId month = MonthId{2015, 12}.minus_months(m);
        records.push_back(rec("u", month.year, month.month));
    }
    ActivityCalendar cal = monthly_activity(records);
    auto cohort = continuous_users(cal, MonthId{2015, 12}, MonthId{2014, 1});
    REQUIRE(cohort.count("u") == 1);
    CHECK(cal.active("u", MonthId{2014, 12}));
    CHECK(cal.active("u", MonthId{2015, 12}));
}

TEST_CASE("random churn schedules agree with the per-user oracle") {
    for (int world = 0; world < 10; ++world) {
        auto rng = substream(777, 2, static_cast<std::uint64_t>(world));
        std::vector<PositioningRecord> records;
        for (int u = 0; u < 120; ++u) {
            for (int m = 0; m < 20; ++m) {
                if (rng.bernoulli(0.85))
                    records.push_back(rec("u" + std::to_string(u), 2014 + m / 12, 1 + m % 12));
            }
        }
        ActivityCalendar cal = monthly_activity(records);
        for (MonthId report : {MonthId{2015, 1}, MonthId{2015, 6}}) {
            auto fast = continuous_users(cal, report, MonthId{2014, 1});
            auto slow = oracle::oracle_cohort(records, report);
            CHECK(fast == slow);
        }
    }
}

TEST_CASE("monotonicity: adding records never shrinks the cohort") {
    auto rng = substream(31337, 3);
    std::vector<PositioningRecord> records;
    for (int u = 0; u < 60; ++u)
        for (int m = 0; m < 13; ++m)
            if (rng.bernoulli(0.9)) records.push_back(rec("u" + std::to_string(u), 2014 + m / 12, 1 + m % 12));
    ActivityCalendar cal = monthly_activity(records);
    auto before = continuous_users(cal, MonthId{2015, 1}, MonthId{2014, 1});

    // fill in every gap
    for (int u = 0; u < 60; ++u)
        for (int m = 0; m < 13; ++m) records.push_back(rec("u" + std::to_string(u), 2014 + m / 12, 1 + m % 12));
    ActivityCalendar cal2 = monthly_activity(records);
    auto after = continuous_users(cal2, MonthId{2015, 1}, MonthId{2014, 1});
    for (const auto& u : before) CHECK(after.count(u) == 1);
    CHECK(after.size() == 60);
}
