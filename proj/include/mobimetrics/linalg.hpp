#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace mobimetrics {

// Row-major dense matrix, just large enough for small regression designs.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return a[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
};

struct QrResult {
    std::vector<double> beta;        // least-squares solution
    std::vector<double> r_diag;      // diagonal of R (rank / conditioning diagnostics)
    std::vector<double> xtx_inv_diag;  // diag of (X'X)^-1, for standard errors
};

// Householder QR least squares. Destroys local copies only. Throws when the
// effective condition of R (max|r_ii| / min|r_ii|) exceeds `cond_limit`,
// naming the offending column.
inline QrResult qr_least_squares(const Matrix& x, const std::vector<double>& y,
                                 const std::vector<std::string>& col_names = {}, double cond_limit = 1e12) {
    const std::size_t n = x.rows, k = x.cols;
    if (y.size() != n) throw std::invalid_argument("qr_least_squares: row mismatch");
    if (n < k) throw std::invalid_argument("qr_least_squares: fewer rows than columns");

    Matrix r = x;
    std::vector<double> qty = y;

    for (std::size_t j = 0; j < k; ++j) {
        double norm = 0.0;
        for (std::size_t i = j; i < n; ++i) norm += r(i, j) * r(i, j);
        norm = std::sqrt(norm);
        if (norm == 0.0) {
            std::string col = col_names.size() > j ? col_names[j] : ("column " + std::to_string(j));
            throw std::runtime_error("rank-deficient design: " + col + " is collinear (zero pivot)");
        }
        double alpha = r(j, j) > 0 ? -norm : norm;
        std::vector<double> v(n - j);
        v[0] = r(j, j) - alpha;
        for (std::size_t i = j + 1; i < n; ++i) v[i - j] = r(i, j);
        double vnorm2 = 0.0;
        for (double t : v) vnorm2 += t * t;
        r(j, j) = alpha;
        for (std::size_t i = j + 1; i < n; ++i) r(i, j) = 0.0;
        if (vnorm2 > 0.0) {
            for (std::size_t c = j + 1; c < k; ++c) {
                double dot = 0.0;
                for (std::size_t i = j; i < n; ++i) dot += v[i - j] * r(i, c);
                double f = 2.0 * dot / vnorm2;
                for (std::size_t i = j; i < n; ++i) r(i, c) -= f * v[i - j];
            }
            double dot = 0.0;
            for (std::size_t i = j; i < n; ++i) dot += v[i - j] * qty[i];
            double f = 2.0 * dot / vnorm2;
            for (std::size_t i = j; i < n; ++i) qty[i] -= f * v[i - j];
        }
    }

    double max_d = 0.0, min_d = std::numeric_limits<double>::infinity();
    std::size_t min_col = 0;
    for (std::size_t j = 0; j < k; ++j) {
        double d = std::abs(r(j, j));
        if (d > max_d) max_d = d;
        if (d < min_d) {
            min_d = d;
            min_col = j;
        }
    }
    if (min_d == 0.0 || max_d / min_d > cond_limit) {
        std::string col = col_names.size() > min_col ? col_names[min_col] : ("column " + std::to_string(min_col));
        throw std::runtime_error("rank-deficient design: " + col + " is collinear or near-degenerate (condition > " +
                                 std::to_string(cond_limit) + ")");
    }

    QrResult out;
    out.beta.assign(k, 0.0);
    for (std::size_t jj = k; jj-- > 0;) {
        double s = qty[jj];
        for (std::size_t c = jj + 1; c < k; ++c) s -= r(jj, c) * out.beta[c];
        out.beta[jj] = s / r(jj, jj);
    }
    out.r_diag.resize(k);
    for (std::size_t j = 0; j < k; ++j) out.r_diag[j] = r(j, j);

    // (X'X)^-1 = R^-1 R^-T: invert the k x k upper triangle, then row norms.
    Matrix rinv(k, k);
    for (std::size_t j = 0; j < k; ++j) {
        rinv(j, j) = 1.0 / r(j, j);
        for (std::size_t i = j; i-- > 0;) {
            double s = 0.0;
            for (std::size_t m = i + 1; m <= j; ++m) s += r(i, m) * rinv(m, j);
            rinv(i, j) = -s / r(i, i);
        }
    }
    out.xtx_inv_diag.assign(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        double s = 0.0;
        for (std::size_t j = i; j < k; ++j) s += rinv(i, j) * rinv(i, j);
        out.xtx_inv_diag[i] = s;
    }
    return out;
}

}  // namespace mobimetrics
