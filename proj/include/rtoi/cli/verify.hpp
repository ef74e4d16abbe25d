#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rtoi/classify/classify.hpp"
#include "rtoi/core/csv.hpp"
#include "rtoi/econ/hac.hpp"
#include "rtoi/econ/magnitude.hpp"
#include "rtoi/econ/ols.hpp"
#include "rtoi/studies/regressions.hpp"
#include "rtoi/synth/market.hpp"
#include "rtoi/synth/oracles.hpp"
#include "rtoi/synth/panel_gen.hpp"
#include "rtoi/synth/rng.hpp"

// Self-check run by `rtoi verify`: each estimator against its brute-force
// reference plus the classifier rules on enumerated prices.
namespace rtoi::cli {

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

namespace detail {

inline double rel_err(long double got, long double want) {
    const long double scale = std::max(1.0L, std::fabs(want));
    return static_cast<double>(std::fabs(got - want) / scale);
}

inline Check ols_check(std::uint64_t seed, int systems) {
    synth::Rng rng(seed);
    double worst = 0;
    for (int s = 0; s < systems; ++s) {
        const int n = static_cast<int>(rng.integer(20, 200)), p = static_cast<int>(rng.integer(2, 10));
        Eigen::MatrixXd X(n, p);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) {
            X(i, 0) = 1.0;
            for (int j = 1; j < p; ++j) X(i, j) = rng.normal();
            y(i) = rng.normal();
        }
        auto fit = econ::ols(X, y);
        auto ref = synth::oracle::ols(X, y);
        if (!ref) return {"ols_oracle", false, "oracle singular"};
        for (int j = 0; j < p; ++j) worst = std::max(worst, rel_err(fit.coef(j), (*ref)[static_cast<std::size_t>(j)]));
    }
    return {"ols_oracle", worst <= 1e-10, "max relative error " + csv::format_double(worst)};
}

inline Check hac_check(std::uint64_t seed, int series) {
    const std::vector<double> worked{1, 2, 3, 4};
    const double nw = econ::newey_west_var(worked, 1);
    const double hh = econ::hansen_hodrick_var(worked, 1).var;
    bool ok = std::fabs(nw - 0.390625) <= 1e-12 && std::fabs(hh - 0.46875) <= 1e-12;
    synth::Rng rng(seed);
    double worst = 0;
    for (int s = 0; s < series; ++s) {
        const int T = static_cast<int>(rng.integer(10, 150)), L = static_cast<int>(rng.integer(0, 8));
        std::vector<double> c(static_cast<std::size_t>(T));
        for (auto& x : c) x = rng.normal(0.01, 0.05);
        worst = std::max(worst, static_cast<double>(std::fabs(econ::newey_west_var(c, L) -
                                                               synth::oracle::newey_west(c, L))));
        // A non-positive unit-weight sum must come back as the Bartlett value.
        const auto hh_lib = econ::hansen_hodrick_var(c, L);
        const long double hh_ref = synth::oracle::hansen_hodrick(c, L);
        const long double want = hh_lib.fallback ? synth::oracle::newey_west(c, L) : hh_ref;
        if (hh_lib.fallback != (L > 0 && hh_ref <= 0)) ok = false;
        worst = std::max(worst, static_cast<double>(std::fabs(hh_lib.var - want)));
    }
    ok = ok && worst <= 1e-12;
    return {"hac_oracle", ok,
            "nw=" + csv::format_double(nw) + " hh=" + csv::format_double(hh) + " max abs error " +
                csv::format_double(worst)};
}

// Every subpenny price between a one-cent bid and ask: the fraction rule
// and the quote-midpoint rule must agree outside the band and both stay
// silent inside it.
inline Check penny_rules_check() {
    const Price bid = Price::parse("20.00"), ask = Price::parse("20.01");
    const Nbbo q{bid, ask};
    for (int h = 1; h < 100; ++h) {
        TradeRecord t;
        t.symbol = "X";
        t.exchange = 'D';
        t.price = Price{bid.ticks + h};
        auto b = classify_bjzz(t);
        auto m = classify_qmp(t, q);
        const bool in_band = h >= 40 && h <= 60;
        if (in_band) {
            if (b || m.signed_trade) return {"penny_rules", false, "signed inside the band at " + t.price.to_string()};
            continue;
        }
        const Side want = h > 60 ? Side::Buy : Side::Sell;
        if (!b || !m.signed_trade || b->side != want || m.signed_trade->side != want) {
            return {"penny_rules", false, "disagreement at " + t.price.to_string()};
        }
    }
    TradeRecord lit;
    lit.exchange = 'N';
    lit.price = Price::parse("20.0070");
    if (classify_bjzz(lit)) return {"penny_rules", false, "signed an exchange print"};
    return {"penny_rules", true, "99 prices"};
}

inline Check market_check(std::uint64_t seed) {
    synth::MarketScenario sc;
    sc.seed = seed;
    sc.symbols = 5;
    sc.days = 3;
    sc.events_per_day = 200;
    auto md = synth::gen_market(sc);
    auto days = classify_days(md.trades, md.quotes);
    auto bj = synth::confusion(md.truth, signed_stream(days, Method::Bjzz));
    auto qm = synth::confusion(md.truth, signed_stream(days, Method::Qmp));
    const bool ok = bj.signed_wrong == 0 && bj.false_positive == 0 && qm.signed_wrong == 0 &&
                    signed_stream(days, Method::Bjzz).size() == signed_stream(days, Method::Qmp).size();
    return {"penny_market", ok,
            "retail " + std::to_string(bj.retail) + ", signed " + std::to_string(bj.signed_correct) + ", wrong " +
                std::to_string(bj.signed_wrong + qm.signed_wrong)};
}

inline Check additivity_check(std::uint64_t seed) {
    synth::PanelScenario sc;
    sc.seed = seed;
    sc.firms = 60;
    sc.weeks = 40;
    auto sp = synth::gen_panel(sc);
    studies::StudySpec spec;
    auto d = studies::decompose(sp.panel, spec);
    double worst = 0;
    for (const auto& r : d.rows) worst = std::max(worst, std::fabs(r.pers + r.cont + r.other - r.mroib));
    return {"decomposition_additivity", worst <= 1e-10, "max residual " + csv::format_double(worst)};
}

inline Check magnitude_check() {
    auto m = econ::economic_magnitude(0.000934, 1.1950);
    const bool ok = csv::format_fixed(m.weekly_pct, 4) == "0.1116" && csv::format_fixed(m.annual_pct, 1) == "5.8";
    return {"magnitude", ok,
            csv::format_fixed(m.weekly_pct, 4) + "% weekly, " + csv::format_fixed(m.annual_pct, 1) + "% annual"};
}

}  // namespace detail

inline std::vector<Check> verify_all(std::uint64_t seed = 20240101) {
    return {detail::ols_check(seed, 200),       detail::hac_check(seed + 1, 200),  detail::penny_rules_check(),
            detail::market_check(seed + 2),     detail::additivity_check(seed + 3), detail::magnitude_check()};
}

}  // namespace rtoi::cli
