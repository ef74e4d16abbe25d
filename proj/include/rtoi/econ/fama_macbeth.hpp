#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rtoi/core/error.hpp"
#include "rtoi/core/parallel.hpp"
#include "rtoi/econ/hac.hpp"
#include "rtoi/econ/ols.hpp"

namespace rtoi::econ {

// One period's cross-section. X includes the intercept column; NaN marks a
// missing value and drops the row.
struct CrossSection {
    std::int64_t period = 0;
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
};

struct FMResult {
    std::vector<std::string> names;
    std::vector<std::int64_t> periods;       // usable periods, ascending
    std::vector<Eigen::VectorXd> per_period;  // stage-1 coefficients, aligned with periods
    std::vector<double> adj_r2;
    Eigen::VectorXd mean;
    Eigen::VectorXd se;
    Eigen::VectorXd t;
    std::vector<bool> infinite_t;  // zero standard error
    double mean_adj_r2 = 0;
    int lags = 0;
    std::size_t skipped = 0;  // periods dropped for too few rows or a singular design
    std::size_t observations = 0;

    std::size_t T() const { return periods.size(); }

    std::size_t index_of(const std::string& name) const {
        auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) throw ConfigError("UnknownVariable", "no coefficient named " + name);
        return static_cast<std::size_t>(it - names.begin());
    }

    // Coefficient series of one regressor across periods.
    std::vector<double> series(std::size_t j) const {
        std::vector<double> s;
        s.reserve(per_period.size());
        for (const auto& b : per_period) s.push_back(b(static_cast<Eigen::Index>(j)));
        return s;
    }
};

// Listwise drop of rows with any NaN in X or y.
inline CrossSection complete_cases(const CrossSection& cs) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < cs.X.rows(); ++i) {
        if (std::isnan(cs.y(i)) || cs.X.row(i).array().isNaN().any()) continue;
        keep.push_back(i);
    }
    CrossSection out;
    out.period = cs.period;
    out.X.resize(static_cast<Eigen::Index>(keep.size()), cs.X.cols());
    out.y.resize(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
        out.X.row(static_cast<Eigen::Index>(k)) = cs.X.row(keep[k]);
        out.y(static_cast<Eigen::Index>(k)) = cs.y(keep[k]);
    }
    return out;
}

// Stage 1: OLS per period. Stage 2: time-series mean of each coefficient
// with a Newey-West standard error. Periods are processed in ascending order
// whatever order they arrive in.
inline FMResult fama_macbeth(std::vector<CrossSection> sections, const std::vector<std::string>& names, int lags,
                             unsigned threads = 1) {
    std::sort(sections.begin(), sections.end(), [](const auto& a, const auto& b) { return a.period < b.period; });
    for (std::size_t i = 1; i < sections.size(); ++i) {
        if (sections[i].period == sections[i - 1].period) {
            throw ConfigError("Duplicate", "period " + std::to_string(sections[i].period) + " appears twice");
        }
    }
    const Eigen::Index p = static_cast<Eigen::Index>(names.size());
    for (const auto& s : sections) {
        if (s.X.cols() != p) throw ConfigError("Shape", "cross-section column count does not match names");
    }
    std::vector<std::optional<OlsFit>> fits(sections.size());
    parallel_for(sections.size(), threads, [&](std::size_t i) {
        CrossSection cs = complete_cases(sections[i]);
        if (cs.X.rows() <= p) return;
        try {
            fits[i] = ols(cs.X, cs.y, names);
        } catch (const NumericalError& e) {
            if (e.code() != "Singular") throw;
        }
    });

    FMResult r;
    r.names = names;
    r.lags = lags;
    for (std::size_t i = 0; i < sections.size(); ++i) {
        if (!fits[i]) {
            ++r.skipped;
            continue;
        }
        r.periods.push_back(sections[i].period);
        r.per_period.push_back(fits[i]->coef);
        r.adj_r2.push_back(fits[i]->adj_r2);
        r.observations += fits[i]->n;
    }
    require_periods(r.T(), lags);

    r.mean.resize(p);
    r.se.resize(p);
    r.t.resize(p);
    r.infinite_t.assign(static_cast<std::size_t>(p), false);
    for (Eigen::Index j = 0; j < p; ++j) {
        auto s = r.series(static_cast<std::size_t>(j));
        CompensatedSum acc;
        for (double x : s) acc.add(x);
        const double mean = acc.value() / static_cast<double>(s.size());
        const double var = newey_west_var(s, lags);
        const double se = std::sqrt(std::max(var, 0.0));
        r.mean(j) = mean;
        r.se(j) = se;
        if (se > 0) {
            r.t(j) = mean / se;
        } else {
            r.infinite_t[static_cast<std::size_t>(j)] = true;
            r.t(j) = mean > 0   ? std::numeric_limits<double>::infinity()
                     : mean < 0 ? -std::numeric_limits<double>::infinity()
                                : std::numeric_limits<double>::quiet_NaN();
        }
    }
    CompensatedSum r2;
    std::size_t n_r2 = 0;
    for (double a : r.adj_r2) {
        if (!std::isnan(a)) r2.add(a), ++n_r2;
    }
    r.mean_adj_r2 = n_r2 ? r2.value() / static_cast<double>(n_r2) : std::numeric_limits<double>::quiet_NaN();
    return r;
}

}  // namespace rtoi::econ
