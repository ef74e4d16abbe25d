#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rtoi/core/error.hpp"
#include "rtoi/core/parallel.hpp"

namespace rtoi::econ {

inline void require_periods(std::size_t T, int lags) {
    if (lags < 0) throw ConfigError("InvalidValue", "lag count must be >= 0");
    if (T < static_cast<std::size_t>(lags) + 2) {
        throw NumericalError("TooFewPeriods", std::to_string(T) + " periods is too few for " + std::to_string(lags) +
                                                  " lags (need at least " + std::to_string(lags + 2) + ")");
    }
}

// Lag-l autocovariances about the sample mean, all divided by T.
inline std::vector<double> autocovariances(const std::vector<double>& c, int max_lag) {
    const std::size_t T = c.size();
    CompensatedSum s;
    for (double x : c) s.add(x);
    const double mean = s.value() / static_cast<double>(T);
    std::vector<double> d(T);
    for (std::size_t t = 0; t < T; ++t) d[t] = c[t] - mean;
    std::vector<double> g(static_cast<std::size_t>(max_lag) + 1);
    for (int l = 0; l <= max_lag; ++l) {
        CompensatedSum acc;
        for (std::size_t t = static_cast<std::size_t>(l); t < T; ++t) acc.add(d[t] * d[t - static_cast<std::size_t>(l)]);
        g[static_cast<std::size_t>(l)] = acc.value() / static_cast<double>(T);
    }
    return g;
}

// Variance of the sample mean with Bartlett weights 1 - l/(L+1).
inline double newey_west_var(const std::vector<double>& c, int lags) {
    require_periods(c.size(), lags);
    auto g = autocovariances(c, lags);
    double v = g[0];
    for (int l = 1; l <= lags; ++l) {
        v += 2.0 * (1.0 - static_cast<double>(l) / static_cast<double>(lags + 1)) * g[static_cast<std::size_t>(l)];
    }
    return v / static_cast<double>(c.size());
}

struct HacVariance {
    double var = 0;
    bool fallback = false;  // unit-weight estimate was not positive; Bartlett used
};

// Unit weights. Not guaranteed positive, so a non-positive estimate falls back
// to the Bartlett value with the flag set.
inline HacVariance hansen_hodrick_var(const std::vector<double>& c, int lags) {
    require_periods(c.size(), lags);
    auto g = autocovariances(c, lags);
    double v = g[0];
    for (int l = 1; l <= lags; ++l) v += 2.0 * g[static_cast<std::size_t>(l)];
    v /= static_cast<double>(c.size());
    if (v > 0 || lags == 0) return {v, false};
    return {newey_west_var(c, lags), true};
}

enum class Kernel { Bartlett, Uniform };

struct HacRegression {
    Eigen::VectorXd coef;
    Eigen::VectorXd se;
    Eigen::VectorXd t;
    bool fallback = false;
};

namespace detail {

inline Eigen::MatrixXd hac_sandwich(const Eigen::MatrixXd& X, const Eigen::VectorXd& u, const Eigen::MatrixXd& bread,
                                    int lags, Kernel k) {
    const Eigen::Index T = X.rows();
    Eigen::MatrixXd scores = X.array().colwise() * u.array();  // row t = x_t u_t
    Eigen::MatrixXd S = scores.transpose() * scores;
    for (int l = 1; l <= lags; ++l) {
        const double w = k == Kernel::Bartlett ? 1.0 - static_cast<double>(l) / (lags + 1) : 1.0;
        Eigen::MatrixXd G = scores.bottomRows(T - l).transpose() * scores.topRows(T - l);
        S += w * (G + G.transpose());
    }
    return bread * S * bread;
}

}  // namespace detail

// Time-series OLS with a HAC covariance. The unit kernel falls back to
// Bartlett when any implied coefficient variance is not positive.
inline HacRegression hac_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int lags, Kernel kernel) {
    require_periods(static_cast<std::size_t>(X.rows()), lags);
    if (X.rows() <= X.cols()) throw NumericalError("TooFewObservations", "time-series regression is underdetermined");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < X.cols()) throw NumericalError("Singular", "time-series design matrix is rank deficient");
    HacRegression out;
    out.coef = qr.solve(y);
    const Eigen::VectorXd u = y - X * out.coef;
    const Eigen::MatrixXd bread = (X.transpose() * X).inverse();
    Eigen::MatrixXd V = detail::hac_sandwich(X, u, bread, lags, kernel);
    if (kernel == Kernel::Uniform && (V.diagonal().array() <= 0).any()) {
        V = detail::hac_sandwich(X, u, bread, lags, Kernel::Bartlett);
        out.fallback = true;
    }
    out.se = V.diagonal().array().max(0.0).sqrt();
    out.t = out.coef.array() / out.se.array();
    return out;
}

}  // namespace rtoi::econ
