#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rtoi/core/error.hpp"

namespace rtoi::econ {

struct OlsFit {
    Eigen::VectorXd coef;
    Eigen::VectorXd residuals;
    double r2 = 0;
    double adj_r2 = 0;
    std::size_t n = 0;
    std::size_t p = 0;  // columns of X, intercept included
};

inline constexpr double kRankThreshold = 1e-10;

// Least squares by column-pivoted Householder QR. X carries its own
// intercept column. A rank-deficient design is an error naming the first
// column the decomposition drops.
inline OlsFit ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<std::string>& names = {}) {
    const auto n = static_cast<std::size_t>(X.rows());
    const auto p = static_cast<std::size_t>(X.cols());
    if (static_cast<std::size_t>(y.size()) != n) throw NumericalError("Shape", "X and y row counts differ");
    if (n <= p) {
        throw NumericalError("TooFewObservations",
                             std::to_string(n) + " observations for " + std::to_string(p) + " coefficients");
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(kRankThreshold);
    const auto rank = static_cast<std::size_t>(qr.rank());
    if (rank < p) {
        const auto col = static_cast<std::size_t>(qr.colsPermutation().indices()(static_cast<Eigen::Index>(rank)));
        std::string name = col < names.size() ? names[col] : "column " + std::to_string(col);
        throw NumericalError("Singular", "design matrix is rank deficient; " + name + " is collinear with the rest");
    }
    OlsFit fit;
    fit.n = n;
    fit.p = p;
    fit.coef = qr.solve(y);
    fit.residuals = y - X * fit.coef;
    const double ssr = fit.residuals.squaredNorm();
    const double mean = y.mean();
    const double sst = (y.array() - mean).square().sum();
    if (sst > 0) {
        fit.r2 = 1.0 - ssr / sst;
        fit.adj_r2 = 1.0 - (1.0 - fit.r2) * static_cast<double>(n - 1) / static_cast<double>(n - p);
    } else {
        fit.r2 = fit.adj_r2 = std::numeric_limits<double>::quiet_NaN();
    }
    return fit;
}

}  // namespace rtoi::econ
