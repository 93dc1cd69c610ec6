#include <doctest.h>

#include <cmath>

#include "mobimetrics/econometrics.hpp"
#include "mobimetrics/oracles.hpp"
#include "mobimetrics/rng.hpp"
#include "mobimetrics/synth.hpp"

using namespace mobimetrics;

namespace {

const std::int64_t kDay0 = days_from_civil(2015, 1, 1);

DailySeries series_of(std::vector<double> v) { return {kDay0, std::move(v)}; }

}  // namespace

TEST_CASE("build_design: lag arithmetic and column layout") {
    DailySeries y = series_of({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    Design d = build_design(y, std::nullopt, RegressionSpec::Baseline);
    CHECK(d.target.size() == 3);  // rows for days 8, 9, 10
    CHECK(d.regressors.cols == 3);
    CHECK(d.column_names == std::vector<std::string>{"intercept", "y_lag1", "y_lag7"});
    // hand-built lag table: row 0 targets day 8 with lags y7=7, y1=1
    CHECK(d.target[0] == 8);
    CHECK(d.regressors(0, 0) == 1.0);
    CHECK(d.regressors(0, 1) == 7.0);
    CHECK(d.regressors(0, 2) == 1.0);
    CHECK(d.target[2] == 10);
    CHECK(d.regressors(2, 1) == 9.0);
    CHECK(d.regressors(2, 2) == 3.0);

    DailySeries q = series_of({10, 20, 30, 40, 50, 60, 70, 80, 90, 100});
    Design d2 = build_design(y, q, RegressionSpec::QueryAugmented);
    CHECK(d2.regressors.cols == 4);
    CHECK(d2.regressors(0, 3) == 80.0);
    Design d3 = build_design(y, q, RegressionSpec::QueryOnly);
    CHECK(d3.regressors.cols == 2);
    CHECK(d3.target.size() == 3);  // identical rows across specs

    CHECK_THROWS_WITH_AS(build_design(series_of({1, 2, 3}), std::nullopt, RegressionSpec::Baseline),
                         doctest::Contains("too short"), std::runtime_error);
    DailySeries misaligned{kDay0 + 1, std::vector<double>(10, 1.0)};
    CHECK_THROWS_WITH_AS(build_design(y, misaligned, RegressionSpec::QueryAugmented),
                         doctest::Contains("misaligned"), std::runtime_error);
}

TEST_CASE("build_design matches a naive lag loop on random series") {
    auto rng = substream(11, 9);
    std::vector<double> yv(60), qv(60);
    for (auto& v : yv) v = rng.uniform(1.0, 100.0);
    for (auto& v : qv) v = rng.uniform(1.0, 100.0);
    DailySeries y = series_of(yv), q = series_of(qv);
    Design d = build_design(y, q, RegressionSpec::QueryAugmented);
    REQUIRE(d.target.size() == 53);
    for (std::size_t t = 7; t < 60; ++t) {
        const std::size_t r = t - 7;
        CHECK(d.target[r] == yv[t]);
        CHECK(d.regressors(r, 1) == yv[t - 1]);
        CHECK(d.regressors(r, 2) == yv[t - 7]);
        CHECK(d.regressors(r, 3) == qv[t]);
    }
}

TEST_CASE("ols: exact fit, zero-slope fit, oracle agreement") {
    // y = 3 + 2x exactly
    Matrix x(20, 2);
    std::vector<double> y(20);
    for (int i = 0; i < 20; ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = i;
        y[i] = 3.0 + 2.0 * i;
    }
    RegressionFit fit = ols(y, x, {"intercept", "x"});
    CHECK(fit.coefficients[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(fit.coefficients[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    for (double r : fit.residuals) CHECK(std::abs(r) < 1e-9);

    // y orthogonal to x: slope ~ 0, R^2 ~ 0
    Matrix x2(4, 2);
    std::vector<double> y2{1, -1, 1, -1};
    const double xs[4] = {1, 1, -1, -1};
    for (int i = 0; i < 4; ++i) {
        x2(i, 0) = 1.0;
        x2(i, 1) = xs[i];
    }
    RegressionFit fit2 = ols(y2, x2, {"intercept", "x"});
    CHECK(fit2.r_squared == doctest::Approx(0.0).epsilon(1e-12));

    // random instances against the normal-equations oracle
    auto rng = substream(300, 10);
    for (int trial = 0; trial < 25; ++trial) {
        Matrix xr(50, 3);
        std::vector<double> yr(50);
        for (int i = 0; i < 50; ++i) {
            xr(i, 0) = 1.0;
            xr(i, 1) = rng.uniform(-5, 5);
            xr(i, 2) = rng.uniform(-5, 5);
            yr[i] = 2 + 0.5 * xr(i, 1) - 1.5 * xr(i, 2) + rng.normal(0, 0.3);
        }
        RegressionFit f = ols(yr, xr);
        auto beta = oracle::oracle_ols(xr, yr);
        for (int j = 0; j < 3; ++j) {
            const double rel = std::abs(f.coefficients[j] - beta[j]) / std::max(1e-12, std::abs(beta[j]));
            CHECK(rel < 1e-9);
        }
        // orthogonality: X' e ~ 0
        for (int j = 0; j < 3; ++j) {
            double dot = 0, scale = 0;
            for (int i = 0; i < 50; ++i) {
                dot += xr(i, j) * f.residuals[i];
                scale += std::abs(xr(i, j) * yr[i]);
            }
            CHECK(std::abs(dot) < 1e-8 * std::max(1.0, scale));
        }
        // residuals sum to ~0 with an intercept
        double sum = 0;
        for (double r : f.residuals) sum += r;
        CHECK(std::abs(sum) < 1e-8);
    }
}

TEST_CASE("ols rejects rank-deficient designs naming the column") {
    Matrix x(10, 3);
    std::vector<double> y(10);
    for (int i = 0; i < 10; ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = i;
        x(i, 2) = 2.0 * i;  // collinear with column 1
        y[i] = i;
    }
    CHECK_THROWS_WITH_AS(ols(y, x, {"intercept", "a", "b"}), doctest::Contains("collinear"),
                         std::runtime_error);
}

TEST_CASE("fit_model: query-coupled world recovers the planted coefficient") {
    synth::WorldConfig cfg;
    cfg.seed = 99;
    cfg.n_users = 0;
    cfg.n_venues_suspected = 0;
    cfg.n_venues_control = 0;
    cfg.n_venue_malls = 1;
    cfg.window_start_day = days_from_civil(2015, 1, 1);
    cfg.window_end_day = days_from_civil(2015, 12, 31);
    cfg.query_noise_frac = 0.10;
    cfg.platform_growth = 0.0;
    synth::VenuePanel panel = synth::generate_venue_panel(cfg);
    const DailySeries& y = panel.visitors.at("mall_1");
    const DailySeries& q = panel.queries.at("mall_1");

    RegressionFit base = fit_model(y, std::nullopt, RegressionSpec::Baseline);
    RegressionFit aug = fit_model(y, q, RegressionSpec::QueryAugmented);
    RegressionFit qonly = fit_model(y, q, RegressionSpec::QueryOnly);

    CHECK(base.n_observations == y.size() - 7);
    CHECK(aug.n_observations == base.n_observations);
    // adding a regressor never lowers in-sample R^2, and here it helps a lot
    CHECK(aug.r_squared >= base.r_squared - 1e-12);
    CHECK(aug.r_squared > base.r_squared);
    CHECK(qonly.r_squared > 0.8);
    const double beta_q = aug.coefficients[3];
    CHECK(std::abs(beta_q - 2.6) / 2.6 < 0.05);
}

TEST_CASE("pure AR series: baseline beats an unrelated query series") {
    auto rng = substream(12, 11);
    std::vector<double> yv(200), qv(200);
    yv[0] = 50;
    for (std::size_t t = 1; t < 200; ++t) yv[t] = 10 + 0.8 * yv[t - 1] + rng.normal(0, 1.0);
    for (auto& v : qv) v = rng.uniform(10.0, 20.0);  // independent noise
    RegressionFit base = fit_model(series_of(yv), std::nullopt, RegressionSpec::Baseline);
    RegressionFit qonly = fit_model(series_of(yv), series_of(qv), RegressionSpec::QueryOnly);
    CHECK(base.r_squared > qonly.r_squared);
}

TEST_CASE("rolling_forecast: constant series predicts the constant") {
    DailySeries y = series_of(std::vector<double>(60, 42.0));
    auto records = rolling_forecast(y, std::nullopt, RegressionSpec::Baseline, kDay0 + 40);
    REQUIRE(records.size() == 20);
    for (const auto& r : records) {
        CHECK(r.predicted == 42.0);
        CHECK(r.abs_error == 0.0);
    }
}

TEST_CASE("rolling_forecast is causal") {
    auto rng = substream(13, 12);
    std::vector<double> yv(120), qv(120);
    for (std::size_t t = 0; t < 120; ++t) {
        qv[t] = rng.uniform(5.0, 15.0);
        yv[t] = 3.0 * qv[t] + rng.normal(0, 0.5) + 20.0;
    }
    DailySeries y = series_of(yv), q = series_of(qv);
    auto full = rolling_forecast(y, q, RegressionSpec::QueryAugmented, kDay0 + 60);

    // truncate everything after day 90: records before day 90 are unchanged
    DailySeries y2{kDay0, std::vector<double>(yv.begin(), yv.begin() + 90)};
    DailySeries q2{kDay0, std::vector<double>(qv.begin(), qv.begin() + 90)};
    auto cut = rolling_forecast(y2, q2, RegressionSpec::QueryAugmented, kDay0 + 60);
    REQUIRE(cut.size() == 30);
    for (std::size_t i = 0; i < cut.size(); ++i) {
        CHECK(cut[i].date == full[i].date);
        CHECK(cut[i].predicted == full[i].predicted);
    }
}

TEST_CASE("rolling_forecast requires 30 training days") {
    DailySeries y = series_of(std::vector<double>(60, 1.0));
    CHECK_THROWS_WITH_AS(rolling_forecast(y, std::nullopt, RegressionSpec::Baseline, kDay0 + 29),
                         doctest::Contains("insufficient training"), std::runtime_error);
    CHECK_NOTHROW(rolling_forecast(y, std::nullopt, RegressionSpec::Baseline, kDay0 + 30));
}

TEST_CASE("mae") {
    std::vector<ForecastRecord> r{{0, 0, 0, 1}, {1, 0, 0, 2}, {2, 0, 0, 3}};
    CHECK(mae(r) == doctest::Approx(2.0));
    std::vector<ForecastRecord> zeros{{0, 5, 5, 0}, {1, 5, 5, 0}};
    CHECK(mae(zeros) == 0.0);
    CHECK_THROWS_AS(mae(std::vector<ForecastRecord>{}), std::invalid_argument);

    auto rng = substream(14, 13);
    std::vector<ForecastRecord> rand;
    double acc = 0;
    for (int i = 0; i < 100; ++i) {
        double e = rng.uniform(0.0, 9.0);
        rand.push_back({i, 0, 0, e});
        acc += e;
    }
    CHECK(mae(rand) == doctest::Approx(acc / 100.0).epsilon(1e-12));
}

TEST_CASE("pearson: limits, oracle agreement, affine invariance, p-values") {
    std::vector<double> a{1, 2, 3, 4, 5, 7};
    std::vector<double> neg;
    for (double v : a) neg.push_back(-v);
    CHECK(pearson(a, a).r == doctest::Approx(1.0));
    CHECK(pearson(a, neg).r == doctest::Approx(-1.0));
    CHECK(pearson(a, a).p_value == doctest::Approx(0.0).epsilon(1e-9));

    auto rng = substream(15, 14);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x(20), y(20);
        for (int i = 0; i < 20; ++i) {
            x[i] = rng.normal(0, 1);
            y[i] = 0.6 * x[i] + rng.normal(0, 1);
        }
        PearsonResult p = pearson(x, y);
        // direct covariance formula
        double mx = 0, my = 0;
        for (int i = 0; i < 20; ++i) {
            mx += x[i];
            my += y[i];
        }
        mx /= 20;
        my /= 20;
        double sxy = 0, sxx = 0, syy = 0;
        for (int i = 0; i < 20; ++i) {
            sxy += (x[i] - mx) * (y[i] - my);
            sxx += (x[i] - mx) * (x[i] - mx);
            syy += (y[i] - my) * (y[i] - my);
        }
        CHECK(std::abs(p.r - sxy / std::sqrt(sxx * syy)) < 1e-12);

        // invariance under positive affine transforms
        std::vector<double> ax(20), by(20);
        for (int i = 0; i < 20; ++i) {
            ax[i] = 3.5 * x[i] + 11.0;
            by[i] = 0.25 * y[i] - 2.0;
        }
        CHECK(pearson(ax, by).r == doctest::Approx(p.r).epsilon(1e-12));
    }

    CHECK_THROWS_WITH_AS(pearson({1, 1, 1}, {1, 2, 3}), doctest::Contains("zero variance"),
                         std::runtime_error);
    CHECK_THROWS_AS(pearson({1, 2}, {1, 2}), std::invalid_argument);

    // frozen p-value checks against the classic two-sided t critical values
    CHECK(student_t_two_sided_p(2.086, 20) == doctest::Approx(0.05).epsilon(1e-3));
    CHECK(student_t_two_sided_p(2.571, 5) == doctest::Approx(0.05).epsilon(1e-3));
    CHECK(student_t_two_sided_p(12.706, 1) == doctest::Approx(0.05).epsilon(1e-3));
}

TEST_CASE("normalize_queries: ratio semantics and planted-ramp recovery") {
    // constant platform: output proportional to input (here: equal)
    DailySeries q = series_of({10, 20, 30, 40, 50, 60, 70, 80, 90, 100});
    DailySeries flat = series_of(std::vector<double>(10, 500.0));
    DailySeries out = normalize_queries(q, flat);
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out.values[i] == doctest::Approx(q.values[i]));

    // doubling both q and the platform changes nothing
    DailySeries q2 = q, p2 = flat;
    for (auto& v : q2.values) v *= 2;
    for (auto& v : p2.values) v *= 2;
    DailySeries out2 = normalize_queries(q2, p2);
    for (std::size_t i = 0; i < out.size(); ++i)
        CHECK(out2.values[i] == doctest::Approx(2.0 * out.values[i]).epsilon(1e-12));

    DailySeries zero = flat;
    zero.values[3] = 0.0;
    CHECK_THROWS_WITH_AS(normalize_queries(q, zero), doctest::Contains("not positive"), std::runtime_error);

    // planted platform growth: a flat signal inflated by a ramp is recovered
    const std::size_t n = 365;
    std::vector<double> signal(n, 80.0), inflated(n), platform(n);
    auto rng = substream(17, 16);
    for (std::size_t t = 0; t < n; ++t) {
        const double ramp = 1.0 + 0.3 * (double(t) / double(n - 1) - 0.5);
        inflated[t] = signal[t] * ramp;
        platform[t] = 1e6 * ramp * (1.0 + rng.normal(0, 0.005));
    }
    DailySeries rec = normalize_queries({kDay0, inflated}, {kDay0, platform});
    double rms = 0;
    for (std::size_t t = 0; t < n; ++t) rms += (rec.values[t] - 80.0) * (rec.values[t] - 80.0);
    rms = std::sqrt(rms / double(n)) / 80.0;
    CHECK(rms < 0.02);
}
