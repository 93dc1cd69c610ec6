#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mobimetrics/calendar.hpp"
#include "mobimetrics/linalg.hpp"

namespace mobimetrics {

// A contiguous daily series: value per civil day, no gaps.
struct DailySeries {
    std::int64_t start_day = 0;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    std::int64_t day_at(std::size_t i) const { return start_day + static_cast<std::int64_t>(i); }
    std::int64_t end_day() const { return start_day + static_cast<std::int64_t>(values.size()) - 1; }

    double at_day(std::int64_t day) const {
        const std::int64_t off = day - start_day;
        if (off < 0 || off >= static_cast<std::int64_t>(values.size()))
            throw std::out_of_range("DailySeries: day " + format_date(day) + " outside range");
        return values[static_cast<std::size_t>(off)];
    }

    bool aligned_with(const DailySeries& o) const {
        return start_day == o.start_day && values.size() == o.values.size();
    }

    void validate(const char* what) const {
        for (double v : values)
            if (!std::isfinite(v) || v < 0.0)
                throw std::runtime_error(std::string(what) + ": values must be finite and >= 0");
    }
};

// The three regression specifications. Baseline is the seasonal AR on lags 1
// and 7 (day-before and same-weekday-last-week); QueryAugmented adds the
// same-day query volume; QueryOnly regresses on the query volume alone. All
// three drop the first 7 days so every spec fits on identical rows.
enum class RegressionSpec { Baseline, QueryAugmented, QueryOnly };

inline const char* to_string(RegressionSpec s) {
    switch (s) {
        case RegressionSpec::Baseline: return "Baseline";
        case RegressionSpec::QueryAugmented: return "QueryAugmented";
        case RegressionSpec::QueryOnly: return "QueryOnly";
    }
    return "?";
}

struct Design {
    std::vector<double> target;
    Matrix regressors;
    std::vector<std::string> column_names;
    std::int64_t first_target_day = 0;
};

inline bool spec_uses_queries(RegressionSpec spec) { return spec != RegressionSpec::Baseline; }

// Builds the target vector and regressor matrix for rows t = 8..L (1-based):
// rows where y_{t-1} and y_{t-7} exist. Column order: [1, y_{t-1}, y_{t-7},
// q_t] with lag columns absent for QueryOnly.
inline Design build_design(const DailySeries& y, const std::optional<DailySeries>& q, RegressionSpec spec) {
    if (spec_uses_queries(spec)) {
        if (!q) throw std::invalid_argument("build_design: spec requires a query series");
        if (!y.aligned_with(*q)) throw std::runtime_error("build_design: misaligned date ranges");
    }
    const std::size_t len = y.size();
    if (len < 8) throw std::runtime_error("build_design: series too short for lag 7 (need >= 8 days)");
    const std::size_t n = len - 7;

    Design d;
    d.first_target_day = y.start_day + 7;
    d.column_names = {"intercept"};
    if (spec != RegressionSpec::QueryOnly) {
        d.column_names.push_back("y_lag1");
        d.column_names.push_back("y_lag7");
    }
    if (spec_uses_queries(spec)) d.column_names.push_back("query");

    d.target.resize(n);
    d.regressors = Matrix(n, d.column_names.size());
    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t t = r + 7;
        d.target[r] = y.values[t];
        std::size_t c = 0;
        d.regressors(r, c++) = 1.0;
        if (spec != RegressionSpec::QueryOnly) {
            d.regressors(r, c++) = y.values[t - 1];
            d.regressors(r, c++) = y.values[t - 7];
        }
        if (spec_uses_queries(spec)) d.regressors(r, c++) = q->values[t];
    }
    return d;
}

struct RegressionFit {
    RegressionSpec spec = RegressionSpec::Baseline;
    std::vector<std::string> column_names;
    std::vector<double> coefficients;
    std::vector<double> std_errors;
    std::vector<double> residuals;
    double r_squared = 0.0;
    double residual_sd = 0.0;  // sqrt(SSR / (n - k))
    std::size_t n_observations = 0;
};

// Ordinary least squares via Householder QR. R^2 = 1 - SSR/SST; standard
// errors use the unbiased variance estimator s^2 (X'X)^-1.
inline RegressionFit ols(const std::vector<double>& target, const Matrix& regressors,
                         const std::vector<std::string>& column_names = {}) {
    const std::size_t n = regressors.rows, k = regressors.cols;
    if (n < k) throw std::runtime_error("ols: fewer observations than coefficients");
    QrResult qr = qr_least_squares(regressors, target, column_names);

    RegressionFit fit;
    fit.column_names = column_names;
    fit.coefficients = qr.beta;
    fit.n_observations = n;
    fit.residuals.resize(n);
    double ssr = 0.0, mean = 0.0;
    for (double v : target) mean += v;
    mean /= double(n);
    double sst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double pred = 0.0;
        for (std::size_t j = 0; j < k; ++j) pred += regressors(i, j) * qr.beta[j];
        fit.residuals[i] = target[i] - pred;
        ssr += fit.residuals[i] * fit.residuals[i];
        sst += (target[i] - mean) * (target[i] - mean);
    }
    if (sst <= 0.0) throw std::runtime_error("ols: target has zero variance");
    fit.r_squared = std::min(1.0, std::max(0.0, 1.0 - ssr / sst));
    const double dof = double(n - k);
    const double s2 = dof > 0 ? ssr / dof : 0.0;
    fit.residual_sd = std::sqrt(s2);
    fit.std_errors.resize(k);
    for (std::size_t j = 0; j < k; ++j) fit.std_errors[j] = std::sqrt(s2 * qr.xtx_inv_diag[j]);
    return fit;
}

inline RegressionFit fit_model(const DailySeries& y, const std::optional<DailySeries>& q, RegressionSpec spec) {
    Design d = build_design(y, q, spec);
    RegressionFit fit = ols(d.target, d.regressors, d.column_names);
    fit.spec = spec;
    return fit;
}

struct ForecastRecord {
    std::int64_t date = 0;
    double actual = 0.0;
    double predicted = 0.0;
    double abs_error = 0.0;
};

inline constexpr int kMinTrainingDays = 30;

// Rolling out-of-sample forecast: for each date d >= start_date the model is
// refit on all data strictly before d and evaluated with realized regressors
// at d (lags from actuals; q_d is known same-day -- that is what makes this a
// nowcast). A constant training target short-circuits to predicting that
// constant, since the lag columns would otherwise be exactly collinear.
inline std::vector<ForecastRecord> rolling_forecast(const DailySeries& y, const std::optional<DailySeries>& q,
                                                    RegressionSpec spec, std::int64_t start_date) {
    if (spec_uses_queries(spec)) {
        if (!q) throw std::invalid_argument("rolling_forecast: spec requires a query series");
        if (!y.aligned_with(*q)) throw std::runtime_error("rolling_forecast: misaligned date ranges");
    }
    if (start_date - y.start_day < kMinTrainingDays)
        throw std::runtime_error("rolling_forecast: insufficient training data (need >= " +
                                 std::to_string(kMinTrainingDays) + " days before the start date)");
    if (start_date > y.end_day()) throw std::runtime_error("rolling_forecast: start date beyond series end");

    std::vector<ForecastRecord> out;
    for (std::int64_t d = start_date; d <= y.end_day(); ++d) {
        const std::size_t i = static_cast<std::size_t>(d - y.start_day);
        DailySeries y_train{y.start_day, std::vector<double>(y.values.begin(), y.values.begin() + i)};
        std::optional<DailySeries> q_train;
        if (spec_uses_queries(spec))
            q_train = DailySeries{q->start_day, std::vector<double>(q->values.begin(), q->values.begin() + i)};

        double pred;
        const double first = y_train.values.front();
        bool constant = true;
        for (double v : y_train.values)
            if (v != first) {
                constant = false;
                break;
            }
        if (constant) {
            pred = first;
        } else {
            Design design = build_design(y_train, q_train, spec);
            RegressionFit fit = ols(design.target, design.regressors, design.column_names);
            std::size_t c = 0;
            pred = fit.coefficients[c++];
            if (spec != RegressionSpec::QueryOnly) {
                pred += fit.coefficients[c++] * y.values[i - 1];
                pred += fit.coefficients[c++] * y.values[i - 7];
            }
            if (spec_uses_queries(spec)) pred += fit.coefficients[c++] * q->values[i];
        }
        out.push_back({d, y.values[i], pred, std::abs(y.values[i] - pred)});
    }
    return out;
}

inline double mae(const std::vector<ForecastRecord>& records) {
    if (records.empty()) throw std::invalid_argument("mae: empty input");
    double acc = 0.0;
    for (const auto& r : records) acc += r.abs_error;
    return acc / double(records.size());
}

namespace detail {

// Regularized incomplete beta I_x(a, b) by Lentz continued fraction; standard
// construction, accurate to ~1e-12 for the t-distribution arguments used here.
inline double beta_cont_fraction(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double eps = 3e-14, fpmin = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::abs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return h;
}

inline double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                            b * std::log(1.0 - x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cont_fraction(a, b, x) / a;
    return 1.0 - front * beta_cont_fraction(b, a, 1.0 - x) / b;
}

}  // namespace detail

// Two-sided p-value of a t statistic with `df` degrees of freedom.
inline double student_t_two_sided_p(double t, double df) {
    const double x = df / (df + t * t);
    return detail::incomplete_beta(df / 2.0, 0.5, x);
}

struct PearsonResult {
    double r = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
};

// Sample Pearson correlation with a two-sided p-value from the t-distribution
// with n-2 degrees of freedom.
inline PearsonResult pearson(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("pearson: length mismatch");
    const std::size_t n = a.size();
    if (n < 3) throw std::invalid_argument("pearson: need length >= 3");
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= double(n);
    mb /= double(n);
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) throw std::runtime_error("pearson: zero variance input");
    PearsonResult out;
    out.n = n;
    out.r = sab / std::sqrt(saa * sbb);
    if (out.r >= 1.0 || out.r <= -1.0) {
        out.r = out.r >= 1.0 ? 1.0 : -1.0;
        out.p_value = 0.0;
        return out;
    }
    const double df = double(n - 2);
    const double t = out.r * std::sqrt(df / (1.0 - out.r * out.r));
    out.p_value = student_t_two_sided_p(t, df);
    return out;
}

// Divides a query series by the platform-wide daily total and rescales by the
// mean total, removing platform-level search-trend drift while keeping the
// magnitude interpretable.
inline DailySeries normalize_queries(const DailySeries& q, const DailySeries& platform_total) {
    if (!q.aligned_with(platform_total)) throw std::runtime_error("normalize_queries: misaligned date ranges");
    double mean = 0.0;
    for (std::size_t i = 0; i < platform_total.size(); ++i) {
        if (!(platform_total.values[i] > 0.0))
            throw std::runtime_error("normalize_queries: platform volume not positive on " +
                                     format_date(platform_total.day_at(i)));
        mean += platform_total.values[i];
    }
    mean /= double(platform_total.size());
    DailySeries out{q.start_day, std::vector<double>(q.size())};
    for (std::size_t i = 0; i < q.size(); ++i) out.values[i] = q.values[i] / platform_total.values[i] * mean;
    return out;
}

}  // namespace mobimetrics
