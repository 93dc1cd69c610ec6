#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mobimetrics/calendar.hpp"
#include "mobimetrics/econometrics.hpp"

namespace mobimetrics {

// Per-date sum of a venue panel over a venue set. All member series must
// cover the same date range.
inline DailySeries group_series(const std::map<std::string, DailySeries>& per_venue,
                                const std::set<std::string>& venues) {
    if (venues.empty()) throw std::invalid_argument("group_series: empty venue set");
    DailySeries out;
    bool first = true;
    for (const auto& id : venues) {
        auto it = per_venue.find(id);
        if (it == per_venue.end()) throw std::runtime_error("group_series: unknown venue '" + id + "'");
        if (first) {
            out = it->second;
            first = false;
        } else {
            if (!out.aligned_with(it->second))
                throw std::runtime_error("group_series: venue '" + id + "' has a misaligned date range");
            for (std::size_t i = 0; i < out.size(); ++i) out.values[i] += it->second.values[i];
        }
    }
    return out;
}

struct DateWindow {
    std::int64_t start = 0;
    std::int64_t end = 0;  // inclusive

    std::int64_t length() const { return end - start + 1; }
};

struct AnomalyReport {
    std::vector<DateWindow> flagged_windows;
    std::vector<std::int64_t> scan_days;
    std::vector<double> z_suspected;
    std::vector<double> z_control;
    double z_threshold = 3.0;
    int min_run = 5;
    DateWindow train_window;
};

namespace detail {

struct GroupModel {
    std::vector<double> beta;
    double train_residual_sd = 0.0;
};

inline GroupModel fit_group(const DailySeries& y, const DailySeries& q, const DateWindow& train) {
    const std::size_t off = static_cast<std::size_t>(train.start - y.start_day);
    const std::size_t len = static_cast<std::size_t>(train.length());
    DailySeries y_train{train.start, std::vector<double>(y.values.begin() + off, y.values.begin() + off + len)};
    DailySeries q_train{train.start, std::vector<double>(q.values.begin() + off, q.values.begin() + off + len)};
    if (y_train.size() < 8 || y_train.size() - 7 < 30)
        throw std::runtime_error("detect: training window too short (need >= 37 days)");
    RegressionFit fit = fit_model(y_train, q_train, RegressionSpec::QueryAugmented);
    if (fit.residual_sd <= 0.0) throw std::runtime_error("detect: training residuals have zero deviation");
    return {fit.coefficients, fit.residual_sd};
}

inline double predict(const GroupModel& m, const DailySeries& y, const DailySeries& q, std::int64_t d) {
    const std::size_t i = static_cast<std::size_t>(d - y.start_day);
    return m.beta[0] + m.beta[1] * y.values[i - 1] + m.beta[2] * y.values[i - 7] + m.beta[3] * q.values[i];
}

}  // namespace detail

// Box-office fraud detector. Fits the query-augmented model per group on the
// training window, standardizes each group's out-of-sample residuals by its
// own training residual deviation (so groups of different sizes compare), and
// flags maximal runs of >= min_run consecutive days where the suspected group
// exceeds the z threshold. The control gate -- the control group must stay
// below the threshold on >= 80% of the run's days -- separates venue-specific
// fraud from market-wide demand shocks, which hit both groups alike.
inline AnomalyReport detect(const DailySeries& suspected, const DailySeries& suspected_q,
                            const DailySeries& control, const DailySeries& control_q, const DateWindow& train,
                            double z_threshold = 3.0, int min_run = 5) {
    if (!suspected.aligned_with(suspected_q) || !suspected.aligned_with(control) ||
        !suspected.aligned_with(control_q))
        throw std::runtime_error("detect: non-overlapping or misaligned date ranges");
    if (train.start < suspected.start_day || train.end >= suspected.end_day() || train.start > train.end)
        throw std::runtime_error("detect: training window must precede the scan range inside the data");

    const auto m_sus = detail::fit_group(suspected, suspected_q, train);
    const auto m_ctl = detail::fit_group(control, control_q, train);

    AnomalyReport report;
    report.z_threshold = z_threshold;
    report.min_run = min_run;
    report.train_window = train;

    for (std::int64_t d = train.end + 1; d <= suspected.end_day(); ++d) {
        const std::size_t i = static_cast<std::size_t>(d - suspected.start_day);
        report.scan_days.push_back(d);
        report.z_suspected.push_back(
            (suspected.values[i] - detail::predict(m_sus, suspected, suspected_q, d)) / m_sus.train_residual_sd);
        report.z_control.push_back(
            (control.values[i] - detail::predict(m_ctl, control, control_q, d)) / m_ctl.train_residual_sd);
    }

    const std::size_t n = report.scan_days.size();
    std::size_t i = 0;
    while (i < n) {
        if (report.z_suspected[i] <= z_threshold) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < n && report.z_suspected[j + 1] > z_threshold) ++j;
        const std::size_t run_len = j - i + 1;
        if (run_len >= static_cast<std::size_t>(min_run)) {
            std::size_t control_quiet = 0;
            for (std::size_t t = i; t <= j; ++t)
                if (report.z_control[t] <= z_threshold) ++control_quiet;
            if (double(control_quiet) >= 0.8 * double(run_len))
                report.flagged_windows.push_back({report.scan_days[i], report.scan_days[j]});
        }
        i = j + 1;
    }
    return report;
}

// Intersection-over-union of two date windows; evaluation helper.
inline double window_iou(const DateWindow& a, const DateWindow& b) {
    const std::int64_t inter_start = std::max(a.start, b.start);
    const std::int64_t inter_end = std::min(a.end, b.end);
    const std::int64_t inter = inter_end >= inter_start ? inter_end - inter_start + 1 : 0;
    const std::int64_t uni = a.length() + b.length() - inter;
    return uni > 0 ? double(inter) / double(uni) : 0.0;
}

}  // namespace mobimetrics
