#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

// Brute-force reference computations. They share no code with the
// estimators they check: OLS here is explicit normal equations in long
// double, the long-run variances are direct double sums over all pairs.
namespace rtoi::synth::oracle {

// Solves (X'X) b = X'y by Gauss-Jordan elimination with partial pivoting in
// long double. Returns nothing when a pivot vanishes.
inline std::optional<std::vector<long double>> ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    const std::size_t n = static_cast<std::size_t>(X.rows()), p = static_cast<std::size_t>(X.cols());
    std::vector<std::vector<long double>> A(p, std::vector<long double>(p + 1, 0.0L));
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            long double s = 0;
            for (std::size_t t = 0; t < n; ++t) {
                s += static_cast<long double>(X(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i))) *
                     static_cast<long double>(X(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)));
            }
            A[i][j] = s;
        }
        long double s = 0;
        for (std::size_t t = 0; t < n; ++t) {
            s += static_cast<long double>(X(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i))) *
                 static_cast<long double>(y(static_cast<Eigen::Index>(t)));
        }
        A[i][p] = s;
    }
    for (std::size_t c = 0; c < p; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < p; ++r) {
            if (std::fabs(A[r][c]) > std::fabs(A[piv][c])) piv = r;
        }
        if (A[piv][c] == 0.0L) return std::nullopt;
        std::swap(A[c], A[piv]);
        for (std::size_t r = 0; r < p; ++r) {
            if (r == c) continue;
            const long double f = A[r][c] / A[c][c];
            for (std::size_t k = c; k <= p; ++k) A[r][k] -= f * A[c][k];
        }
    }
    std::vector<long double> b(p);
    for (std::size_t i = 0; i < p; ++i) b[i] = A[i][p] / A[i][i];
    return b;
}

// (1/T^2) sum_t sum_s w(|t-s|) d_t d_s with d the demeaned series.
template <class Weight>
long double long_run_var(const std::vector<double>& c, int lags, Weight w) {
    const std::size_t T = c.size();
    long double mean = 0;
    for (double x : c) mean += x;
    mean /= static_cast<long double>(T);
    long double s = 0;
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t u = 0; u < T; ++u) {
            const long l = std::labs(static_cast<long>(t) - static_cast<long>(u));
            if (l > lags) continue;
            s += w(l) * (c[t] - mean) * (c[u] - mean);
        }
    }
    return s / (static_cast<long double>(T) * static_cast<long double>(T));
}

inline long double newey_west(const std::vector<double>& c, int lags) {
    return long_run_var(c, lags, [lags](long l) { return 1.0L - static_cast<long double>(l) / (lags + 1); });
}

inline long double hansen_hodrick(const std::vector<double>& c, int lags) {
    return long_run_var(c, lags, [](long) { return 1.0L; });
}

// Product of (1 + r) over a range, minus one; nothing if any value is missing.
inline std::optional<long double> compound(const std::vector<std::optional<double>>& r, std::size_t first,
                                           std::size_t last) {
    long double g = 1;
    for (std::size_t i = first; i <= last; ++i) {
        if (!r[i]) return std::nullopt;
        g *= 1.0L + *r[i];
    }
    return g - 1.0L;
}

}  // namespace rtoi::synth::oracle
