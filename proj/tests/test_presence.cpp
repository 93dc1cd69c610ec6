#include <doctest.h>

#include <map>

#include "mobimetrics/presence.hpp"
#include "mobimetrics/rng.hpp"

using namespace mobimetrics;

namespace {

AoiCatalog two_aois() {
    std::vector<Aoi> aois;
    aois.push_back({"factory", "f", AoiKind::IndustrialTraditional, {{0, 0}, {1, 0}, {1, 1}, {0, 1}}});
    aois.push_back({"mall", "m", AoiKind::Commercial, {{5, 5}, {6, 5}, {6, 6}, {5, 6}}});
    return AoiCatalog(std::move(aois));
}

std::int64_t ts_at(int year, int month, int day, int hour, int minute = 0) {
    return day_start_timestamp(days_from_civil(year, month, day)) + hour * 3600 + minute * 60;
}

}  // namespace

TEST_CASE("presence counts distinct days and work-hour weekdays") {
    AoiCatalog catalog = two_aois();
    AoiIndex index = build_aoi_index(catalog, 0.5);
    // 2015-06: day 1 is a Monday
    std::vector<PositioningRecord> records{
        {"w", {0.5, 0.5}, ts_at(2015, 6, 1, 10)},       // Monday 10:00, work hour
        {"w", {0.5, 0.5}, ts_at(2015, 6, 1, 11)},       // same day, dedup
        {"w", {0.5, 0.5}, ts_at(2015, 6, 2, 14)},       // Tuesday 14:00, work hour
        {"w", {0.5, 0.5}, ts_at(2015, 6, 6, 12)},       // Saturday, not a weekday
        {"x", {0.5, 0.5}, ts_at(2015, 6, 1, 10)},       // non-cohort user
        {"w", {8.0, 8.0}, ts_at(2015, 6, 3, 10)},       // outside any AOI
    };
    PresenceMatrix matrix =
        build_presence(records, std::set<std::string>{"w"}, index, MonthId{2015, 6}, MonthId{2015, 6});
    auto aoi = catalog.index_of("factory");
    REQUIRE(aoi);
    const PresenceStats* st = matrix.find("w", *aoi, MonthId{2015, 6});
    REQUIRE(st);
    CHECK(st->active_days() == 3);
    CHECK(st->workhour_weekdays() == 2);
    CHECK(matrix.find("x", *aoi, MonthId{2015, 6}) == nullptr);
}

TEST_CASE("work hour boundary is [start, end) local") {
    AoiCatalog catalog = two_aois();
    AoiIndex index = build_aoi_index(catalog, 0.5);
    std::vector<PositioningRecord> records{
        {"a", {0.5, 0.5}, ts_at(2015, 6, 1, 9, 0)},    // exactly 09:00 counts
        {"b", {0.5, 0.5}, ts_at(2015, 6, 1, 18, 0)},   // exactly 18:00 does not
        {"c", {0.5, 0.5}, ts_at(2015, 6, 1, 8, 59)},
    };
    std::set<std::string> cohort{"a", "b", "c"};
    PresenceMatrix m = build_presence(records, cohort, index, MonthId{2015, 6}, MonthId{2015, 6});
    auto aoi = *catalog.index_of("factory");
    CHECK(m.find("a", aoi, MonthId{2015, 6})->workhour_weekdays() == 1);
    CHECK(m.find("b", aoi, MonthId{2015, 6})->workhour_weekdays() == 0);
    CHECK(m.find("c", aoi, MonthId{2015, 6})->workhour_weekdays() == 0);
}

TEST_CASE("count_employees and count_consumers behave per the staff rule") {
    AoiCatalog catalog = two_aois();
    AoiIndex index = build_aoi_index(catalog, 0.5);
    std::vector<PositioningRecord> records;
    std::set<std::string> cohort;
    // five staffers: 12 distinct work-hour weekdays at the factory
    for (int s = 0; s < 5; ++s) {
        std::string u = "staff" + std::to_string(s);
        cohort.insert(u);
        int added = 0;
        for (int d = 1; d <= 30 && added < 12; ++d) {
            if (weekday_from_days(days_from_civil(2015, 6, d)) >= 5) continue;
            records.push_back({u, {0.5, 0.5}, ts_at(2015, 6, d, 10)});
            ++added;
        }
    }
    // a mall clerk: 20 weekdays at the mall
    cohort.insert("clerk");
    {
        int added = 0;
        for (int d = 1; d <= 30 && added < 20; ++d) {
            if (weekday_from_days(days_from_civil(2015, 6, d)) >= 5) continue;
            records.push_back({"clerk", {5.5, 5.5}, ts_at(2015, 6, d, 11)});
            ++added;
        }
    }
    // a weekend shopper: two Saturdays at the mall
    cohort.insert("shopper");
    records.push_back({"shopper", {5.5, 5.5}, ts_at(2015, 6, 6, 15)});
    records.push_back({"shopper", {5.5, 5.5}, ts_at(2015, 6, 13, 15)});

    PresenceMatrix m = build_presence(records, cohort, index, MonthId{2015, 6}, MonthId{2015, 6});
    CHECK(count_employees(m, catalog, "factory", MonthId{2015, 6}, 10) == 5);
    CHECK(count_employees(m, catalog, "factory", MonthId{2015, 6}, 13) == 0);
    CHECK(count_employees(m, catalog, "mall", MonthId{2015, 6}, 10) == 1);

    CHECK(count_consumers(m, catalog, "mall", MonthId{2015, 6}, 10) == 1);  // shopper yes, clerk no
    CHECK_THROWS_WITH_AS(count_consumers(m, catalog, "factory", MonthId{2015, 6}, 10),
                         doctest::Contains("kind mismatch"), std::runtime_error);
    CHECK_THROWS_AS(count_employees(m, catalog, "factory", MonthId{2015, 6}, 0), std::invalid_argument);
}

TEST_CASE("count monotonicity in K and duplication invariance") {
    AoiCatalog catalog = two_aois();
    AoiIndex index = build_aoi_index(catalog, 0.5);
    auto rng = substream(5150, 4);
    std::vector<PositioningRecord> records;
    std::set<std::string> cohort;
    for (int u = 0; u < 40; ++u) {
        std::string name = "u" + std::to_string(u);
        cohort.insert(name);
        for (int d = 1; d <= 30; ++d) {
            if (!rng.bernoulli(0.5)) continue;
            const bool mall = rng.bernoulli(0.4);
            records.push_back({name,
                               mall ? GeoPoint{5.5, 5.5} : GeoPoint{0.5, 0.5},
                               ts_at(2015, 6, d, 8 + static_cast<int>(rng.below(12)))});
        }
    }
    PresenceMatrix m = build_presence(records, cohort, index, MonthId{2015, 6}, MonthId{2015, 6});
    int prev_emp = count_employees(m, catalog, "factory", MonthId{2015, 6}, 1);
    int prev_con = count_consumers(m, catalog, "mall", MonthId{2015, 6}, 1);
    for (int k = 2; k <= 15; ++k) {
        const int emp = count_employees(m, catalog, "factory", MonthId{2015, 6}, k);
        const int con = count_consumers(m, catalog, "mall", MonthId{2015, 6}, k);
        CHECK(emp <= prev_emp);
        CHECK(con >= prev_con);
        prev_emp = emp;
        prev_con = con;
    }

    // at K=1 employees and consumers partition the users present at the mall
    {
        std::set<std::string> present;
        auto mall = *catalog.index_of("mall");
        for (const auto& [key, stats] : m.cells())
            if (key.aoi == mall && stats.active_days() >= 1) present.insert(m.user_name(key.user));
        CHECK(count_employees(m, catalog, "mall", MonthId{2015, 6}, 1) +
                  count_consumers(m, catalog, "mall", MonthId{2015, 6}, 1) ==
              static_cast<int>(present.size()));
    }

    // uniform duplication of every record changes nothing (day-level dedup)
    std::vector<PositioningRecord> doubled = records;
    doubled.insert(doubled.end(), records.begin(), records.end());
    PresenceMatrix m2 = build_presence(doubled, cohort, index, MonthId{2015, 6}, MonthId{2015, 6});
    for (int k = 1; k <= 15; ++k) {
        CHECK(count_employees(m2, catalog, "factory", MonthId{2015, 6}, k) ==
              count_employees(m, catalog, "factory", MonthId{2015, 6}, k));
        CHECK(count_consumers(m2, catalog, "mall", MonthId{2015, 6}, k) ==
              count_consumers(m, catalog, "mall", MonthId{2015, 6}, k));
    }
}

TEST_CASE("matrix equals a brute-force recount on random traces") {
    AoiCatalog catalog = two_aois();
    AoiIndex index = build_aoi_index(catalog, 0.5);
    auto rng = substream(99, 5);
    std::vector<PositioningRecord> records;
    std::set<std::string> cohort;
    for (int u = 0; u < 25; ++u) {
        std::string name = "u" + std::to_string(u);
        if (u % 5 != 0) cohort.insert(name);
        for (int i = 0; i < 40; ++i) {
            const int month = 1 + static_cast<int>(rng.below(3));
            const int day = 1 + static_cast<int>(rng.below(28));
            GeoPoint p{rng.uniform(-0.5, 6.5), rng.uniform(-0.5, 6.5)};
            records.push_back({name, p, ts_at(2015, month, day, static_cast<int>(rng.below(24)))});
        }
    }
    PresenceMatrix m = build_presence(records, cohort, index, MonthId{2015, 1}, MonthId{2015, 3});

    // naive recount
    std::map<std::tuple<std::string, std::string, int>, std::pair<std::set<int>, std::set<int>>> naive;
    for (const auto& r : records) {
        if (!cohort.count(r.user_id)) continue;
        for (std::uint32_t a = 0; a < catalog.size(); ++a) {
            if (!contains(catalog.at(a).polygon, r.point)) continue;
            const std::int64_t day = local_day_of(r.timestamp);
            const CivilDate c = civil_from_days(day);
            auto& cell = naive[{r.user_id, catalog.at(a).aoi_id, MonthId{c.year, c.month}.index()}];
            cell.first.insert(c.day);
            const int sec = local_seconds_of_day(r.timestamp);
            if (weekday_from_days(day) < 5 && sec >= 9 * 3600 && sec < 18 * 3600) cell.second.insert(c.day);
        }
    }
    std::size_t matched = 0;
    for (const auto& [key, days] : naive) {
        auto aoi = *catalog.index_of(std::get<1>(key));
        const PresenceStats* st = m.find(std::get<0>(key), aoi, MonthId::from_index(std::get<2>(key)));
        REQUIRE(st);
        CHECK(st->active_days() == static_cast<int>(days.first.size()));
        CHECK(st->workhour_weekdays() == static_cast<int>(days.second.size()));
        ++matched;
    }
    CHECK(matched == m.size());
}

TEST_CASE("audit CSV is sorted and well formed") {
    AoiCatalog catalog = two_aois();
    AoiIndex index = build_aoi_index(catalog, 0.5);
    std::vector<PositioningRecord> records{
        {"zeta", {0.5, 0.5}, ts_at(2015, 6, 1, 10)},
        {"alpha", {5.5, 5.5}, ts_at(2015, 6, 6, 12)},
    };
    PresenceMatrix m =
        build_presence(records, std::set<std::string>{"zeta", "alpha"}, index, MonthId{2015, 6}, MonthId{2015, 6});
    const std::string csv = m.to_csv(catalog);
    CHECK(csv == "user_id,aoi_id,year,month,active_days,workhour_weekdays\n"
                 "alpha,mall,2015,6,1,0\n"
                 "zeta,factory,2015,6,1,1\n");
}
