#pragma once

#include <compare>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

#include "mobimetrics/util.hpp"

namespace mobimetrics {

// All calendar bucketing runs in fixed UTC+8 local time. China has a single
// civil timezone and no DST, so a constant offset is exact.
inline constexpr std::int64_t kLocalUtcOffset = 8 * 3600;
inline constexpr std::int64_t kSecondsPerDay = 86400;

struct CivilDate {
    int year = 1970;
    int month = 1;
    int day = 1;
};

// Howard Hinnant's proleptic Gregorian algorithms.
constexpr std::int64_t days_from_civil(int y, int m, int d) noexcept {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

constexpr CivilDate civil_from_days(std::int64_t z) noexcept {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return CivilDate{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

// 0 = Monday .. 6 = Sunday.
constexpr int weekday_from_days(std::int64_t z) noexcept {
    return static_cast<int>(z >= -3 ? (z + 3) % 7 : (z + 3) % 7 + 7);
}

constexpr bool is_leap_year(int y) noexcept { return y % 4 == 0 && (y % 100 != 0 || y % 400 == 0); }

constexpr int days_in_month(int year, int month) noexcept {
    constexpr int lengths[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2 && is_leap_year(year)) return 29;
    return lengths[month - 1];
}

constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) noexcept {
    return a >= 0 ? a / b : -((-a + b - 1) / b);
}

// A calendar month with total ordering and arithmetic across year boundaries.
struct MonthId {
    int year = 0;
    int month = 0;  // 1..12

    constexpr int index() const noexcept { return year * 12 + (month - 1); }
    static constexpr MonthId from_index(int idx) noexcept {
        int y = idx >= 0 ? idx / 12 : -((-idx + 11) / 12);
        return MonthId{y, idx - y * 12 + 1};
    }
    constexpr MonthId next() const noexcept { return from_index(index() + 1); }
    constexpr MonthId prev() const noexcept { return from_index(index() - 1); }
    constexpr MonthId minus_months(int n) const noexcept { return from_index(index() - n); }

    friend constexpr auto operator<=>(const MonthId&, const MonthId&) = default;

    std::string to_string() const {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
        return buf;
    }
};

// Local (UTC+8) calendar day index of a timestamp.
inline std::int64_t local_day_of(std::int64_t timestamp) noexcept {
    return floor_div(timestamp + kLocalUtcOffset, kSecondsPerDay);
}

inline int local_seconds_of_day(std::int64_t timestamp) noexcept {
    return static_cast<int>(timestamp + kLocalUtcOffset - local_day_of(timestamp) * kSecondsPerDay);
}

// Calendar month of a timestamp under the fixed UTC+8 offset.
inline MonthId month_of(std::int64_t timestamp) noexcept {
    const CivilDate c = civil_from_days(local_day_of(timestamp));
    return MonthId{c.year, c.month};
}

inline MonthId month_of_day(std::int64_t day) noexcept {
    const CivilDate c = civil_from_days(day);
    return MonthId{c.year, c.month};
}

inline std::string format_date(std::int64_t day) {
    const CivilDate c = civil_from_days(day);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", c.year, c.month, c.day);
    return buf;
}

inline std::int64_t parse_date(std::string_view s) {
    auto parts = split(s, '-');
    if (parts.size() != 3) throw std::runtime_error("invalid date (expected YYYY-MM-DD): '" + std::string(s) + "'");
    int y = static_cast<int>(parse_int(parts[0], "year"));
    int m = static_cast<int>(parse_int(parts[1], "month"));
    int d = static_cast<int>(parse_int(parts[2], "day"));
    if (m < 1 || m > 12 || d < 1 || d > days_in_month(y, m))
        throw std::runtime_error("invalid date: '" + std::string(s) + "'");
    return days_from_civil(y, m, d);
}

inline MonthId parse_month(std::string_view s) {
    auto parts = split(s, '-');
    if (parts.size() != 2) throw std::runtime_error("invalid month (expected YYYY-MM): '" + std::string(s) + "'");
    int y = static_cast<int>(parse_int(parts[0], "year"));
    int m = static_cast<int>(parse_int(parts[1], "month"));
    if (m < 1 || m > 12) throw std::runtime_error("invalid month: '" + std::string(s) + "'");
    return MonthId{y, m};
}

// UTC timestamp of local (UTC+8) midnight opening the given day index.
inline std::int64_t day_start_timestamp(std::int64_t day) noexcept {
    return day * kSecondsPerDay - kLocalUtcOffset;
}

}  // namespace mobimetrics
