#pragma once

#include <cmath>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mobimetrics/cohort.hpp"
#include "mobimetrics/geo.hpp"
#include "mobimetrics/linalg.hpp"

// Brute-force reference implementations used by the test suites to verify the
// production paths. Deliberately slow and simple; nothing in the pipeline may
// call these.
namespace mobimetrics::oracle {

// Solves the normal equations X'X b = X'y by Gaussian elimination with
// partial pivoting. Independent of the QR route in linalg.hpp.
inline std::vector<double> oracle_ols(const Matrix& x, const std::vector<double>& y) {
    const std::size_t n = x.rows, k = x.cols;
    if (y.size() != n) throw std::invalid_argument("oracle_ols: row mismatch");
    Matrix a(k, k);
    std::vector<double> rhs(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            double s = 0.0;
            for (std::size_t r = 0; r < n; ++r) s += x(r, i) * x(r, j);
            a(i, j) = s;
        }
        double s = 0.0;
        for (std::size_t r = 0; r < n; ++r) s += x(r, i) * y[r];
        rhs[i] = s;
    }
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < k; ++r)
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
        if (a(pivot, col) == 0.0) throw std::runtime_error("oracle_ols: singular normal matrix");
        if (pivot != col) {
            for (std::size_t c = 0; c < k; ++c) std::swap(a(pivot, c), a(col, c));
            std::swap(rhs[pivot], rhs[col]);
        }
        for (std::size_t r = col + 1; r < k; ++r) {
            const double f = a(r, col) / a(col, col);
            for (std::size_t c = col; c < k; ++c) a(r, c) -= f * a(col, c);
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<double> beta(k, 0.0);
    for (std::size_t r = k; r-- > 0;) {
        double s = rhs[r];
        for (std::size_t c = r + 1; c < k; ++c) s -= a(r, c) * beta[c];
        beta[r] = s / a(r, r);
    }
    return beta;
}

// Winding-number point-in-polygon; same boundary convention as the
// production ray caster (edge and vertex points count inside) but a different
// algorithm.
inline bool oracle_pip(const Polygon& poly, const GeoPoint& p) {
    const std::size_t n = poly.size();
    int winding = 0;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const GeoPoint& a = poly[j];
        const GeoPoint& b = poly[i];
        if (on_segment(a, b, p)) return true;
        if (a.lat <= p.lat) {
            if (b.lat > p.lat && orient(a, b, p) > 0) ++winding;
        } else {
            if (b.lat <= p.lat && orient(a, b, p) < 0) --winding;
        }
    }
    return winding != 0;
}

// Naive 13-iteration cohort check, one user at a time.
inline std::set<std::string> oracle_cohort(const std::vector<PositioningRecord>& records, MonthId report_month) {
    std::set<std::string> users;
    for (const auto& r : records) users.insert(r.user_id);
    std::set<std::string> out;
    for (const auto& u : users) {
        bool all = true;
        for (int back = 0; back <= 12 && all; ++back) {
            const MonthId want = report_month.minus_months(back);
            bool found = false;
            for (const auto& r : records) {
                if (r.user_id == u && month_of(r.timestamp) == want) {
                    found = true;
                    break;
                }
            }
            all = found;
        }
        if (all) out.insert(u);
    }
    return out;
}

}  // namespace mobimetrics::oracle
