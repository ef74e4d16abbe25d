#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rtoi/core/csv.hpp"
#include "rtoi/core/date.hpp"
#include "rtoi/core/error.hpp"
#include "rtoi/mdio/records.hpp"
#include "rtoi/panel/panel.hpp"
#include "rtoi/synth/rng.hpp"

namespace rtoi::synth {

inline constexpr std::size_t kControlCount = 6;  // Ret(m-1), Ret(m-7,m-2), Lmto, Lvol, Size, Lbm

// Firm-week processes. Imbalance, shaped like the determinants regression:
//   m(w) = a + phi m(w-1) + b Ret(w-1) + delta'x + sigma_m u
// Return, shaped like the prediction regression:
//   r(w) = c0 + sum_j c1 h^(j-1) m(w-j) + c_ret Ret(w-1) + gamma'x
//          + beta_i'f(w) + alpha [top imbalance quintile at w-1] + sigma_r e
// x are the six monthly controls, drawn per firm-month.
struct PanelScenario {
    std::uint64_t seed = 1;
    int firms = 500;
    int weeks = 120;
    int burn_in = 20;
    Date start = Date::from_ymd(2010, 1, 4);  // a Monday

    double a = 0.01, phi = 0.2, b = 0.3;
    std::array<double, kControlCount> delta{0.02, 0.01, 0.002, 0.5, -0.003, 0.01};
    double sigma_m = 0.3;

    double c0 = 0.001, c1 = 0.002, h = 1.0;
    int signal_lags = 1;  // number of lagged imbalances driving returns
    double c_ret = -0.02;
    std::array<double, kControlCount> gamma{0.001, 0.002, 0.0001, -0.05, -0.0003, 0.001};
    double sigma_r = 0.04;

    bool factors = false;  // add a three-factor component to returns
    double alpha = 0.0;    // weekly premium on last week's top-quintile names
};

// Every slope zero: imbalances and returns are noise.
inline PanelScenario zero_signal(PanelScenario s) {
    s.phi = s.b = 0;
    s.delta.fill(0);
    s.c1 = s.c_ret = 0;
    s.gamma.fill(0);
    return s;
}

// Independent imbalances; returns load on twelve geometrically decaying lags,
// so the k-week-ahead slope on m(w-1) is c1 h^(k-1).
inline PanelScenario horizon_scenario(PanelScenario s, double c1 = 0.004, double h = 0.7) {
    s = zero_signal(s);
    s.c1 = c1;
    s.h = h;
    s.signal_lags = 12;
    return s;
}

// Factor-spanned returns with no imbalance signal; alpha as given.
inline PanelScenario factor_scenario(PanelScenario s, double alpha) {
    s = zero_signal(s);
    s.factors = true;
    s.alpha = alpha;
    return s;
}

struct SyntheticPanel {
    Panel panel;
    std::vector<FactorRecord> factors;  // one record per week, dated at the week start
};

// Planted coefficients in regression column order (intercept first).
inline std::vector<double> planted_determinants(const PanelScenario& s) {
    return {s.a, s.phi, s.b, s.delta[0], s.delta[1], s.delta[2], s.delta[3], s.delta[4], s.delta[5]};
}
inline std::vector<double> planted_prediction(const PanelScenario& s) {
    return {s.c0, s.c1, s.c_ret, s.gamma[0], s.gamma[1], s.gamma[2], s.gamma[3], s.gamma[4], s.gamma[5]};
}
inline double planted_horizon_slope(const PanelScenario& s, int k) {
    return k <= s.signal_lags ? s.c1 * std::pow(s.h, k - 1) : 0.0;
}

inline std::string firm_name(int i) {
    std::string d = std::to_string(i);
    return "F" + std::string(d.size() < 4 ? 4 - d.size() : 0, '0') + d;
}

inline SyntheticPanel gen_panel(const PanelScenario& sc) {
    if (sc.firms < 1 || sc.weeks < 1 || sc.burn_in < 0 || sc.signal_lags < 1) {
        throw ConfigError("InvalidValue", "panel scenario needs firms, weeks, signal lags >= 1");
    }
    Rng rng(sc.seed);
    const int total = sc.burn_in + sc.weeks;
    const auto nf = static_cast<std::size_t>(sc.firms);
    const auto nt = static_cast<std::size_t>(total);

    // Common factors per week.
    std::vector<std::array<double, 3>> f(nt, {0, 0, 0});
    if (sc.factors) {
        for (auto& x : f) x = {rng.normal(0.001, 0.02), rng.normal(0, 0.01), rng.normal(0, 0.01)};
    }
    std::vector<std::array<double, 3>> beta(nf, {0, 0, 0});
    if (sc.factors) {
        for (auto& bi : beta) bi = {rng.normal(1.0, 0.3), rng.normal(0, 0.5), rng.normal(0, 0.5)};
    }

    // Week dates and month index per simulated week; burn-in weeks precede start.
    std::vector<Date> starts(nt);
    for (int t = 0; t < total; ++t) starts[static_cast<std::size_t>(t)] = sc.start.plus_days(7 * (t - sc.burn_in));
    std::map<int, std::size_t> month_slot;
    for (auto d : starts) month_slot.emplace(YearMonth::of(d).index(), month_slot.size());

    struct Controls {
        std::array<double, kControlCount> x;
        double price;
    };
    // controls[firm][month slot]
    std::vector<std::vector<Controls>> controls(nf, std::vector<Controls>(month_slot.size()));
    for (auto& firm : controls) {
        for (auto& c : firm) {
            c.x = {rng.normal(0.01, 0.1), rng.normal(0.06, 0.3), rng.normal(5, 2),
                   rng.normal(0.02, 0.01), rng.normal(20, 1.5), rng.normal(-0.5, 0.7)};
            c.price = std::exp(rng.normal(3, 0.8));
        }
    }

    std::vector<std::vector<double>> m(nf, std::vector<double>(nt)), mt(nf, std::vector<double>(nt)),
        md(nf, std::vector<double>(nt)), mtd(nf, std::vector<double>(nt)), r(nf, std::vector<double>(nt));
    std::vector<std::uint8_t> top(nf);
    for (std::size_t t = 0; t < nt; ++t) {
        const std::size_t slot = month_slot.at(YearMonth::of(starts[t]).index());
        for (std::size_t i = 0; i < nf; ++i) {
            const auto& x = controls[i][slot].x;
            double dx = 0, gx = 0;
            for (std::size_t j = 0; j < kControlCount; ++j) dx += sc.delta[j] * x[j], gx += sc.gamma[j] * x[j];
            const double m_prev = t ? m[i][t - 1] : 0.0, mt_prev = t ? mt[i][t - 1] : 0.0;
            const double r_prev = t ? r[i][t - 1] : 0.0;
            m[i][t] = sc.a + sc.phi * m_prev + sc.b * r_prev + dx + sc.sigma_m * rng.normal();
            mt[i][t] = sc.a + sc.phi * mt_prev + sc.b * r_prev + dx + sc.sigma_m * rng.normal();
            md[i][t] = m[i][t] + 0.05 * rng.normal();
            mtd[i][t] = mt[i][t] + 0.05 * rng.normal();

            double signal = 0;
            for (int j = 1; j <= sc.signal_lags && static_cast<int>(t) - j >= 0; ++j) {
                signal += sc.c1 * std::pow(sc.h, j - 1) * m[i][t - static_cast<std::size_t>(j)];
            }
            double fx = 0;
            for (int k = 0; k < 3; ++k) fx += beta[i][static_cast<std::size_t>(k)] * f[t][static_cast<std::size_t>(k)];
            r[i][t] = sc.c0 + signal + sc.c_ret * r_prev + gx + fx + (top[i] ? sc.alpha : 0.0) +
                      sc.sigma_r * rng.normal();
        }
        // Top quintile of this week's daily-mean imbalance, ranked as the
        // portfolio sort ranks (ascending, ties by name), earns alpha next week.
        if (sc.alpha != 0.0) {
            std::vector<std::pair<double, std::size_t>> ranked;
            for (std::size_t i = 0; i < nf; ++i) ranked.emplace_back(md[i][t], i);
            std::sort(ranked.begin(), ranked.end());
            std::fill(top.begin(), top.end(), 0);
            for (std::size_t k = 0; k < nf; ++k) {
                if (k * 5 / nf == 4) top[ranked[k].second] = 1;
            }
        }
    }

    SyntheticPanel out;
    std::vector<PanelObservation> rows;
    std::map<std::string, Series> weekly;
    const auto first = static_cast<std::size_t>(sc.burn_in);
    for (std::size_t i = 0; i < nf; ++i) {
        const std::string name = firm_name(static_cast<int>(i));
        Series& ws = weekly[name];
        ws.resize(static_cast<std::size_t>(sc.weeks));
        for (std::size_t t = first; t < nt; ++t) {
            const std::size_t w = t - first;
            ws[w] = r[i][t];
            const std::size_t slot = month_slot.at(YearMonth::of(starts[t]).index());
            const auto& c = controls[i][slot];
            PanelObservation o;
            o.symbol = name;
            o.week = w;
            o.week_start = starts[t];
            o.month = YearMonth::of(starts[t]);
            o.ret = r[i][t];
            auto lag = [t](const std::vector<double>& v, std::size_t l) -> std::optional<double> {
                if (t < l) return std::nullopt;
                return v[t - l];
            };
            o.ret_lag1 = lag(r[i], 1);
            o.ret_lag2 = lag(r[i], 2);
            o.mroibvol = m[i][t];
            o.mroibvol_lag1 = lag(m[i], 1);
            o.mroibvol_lag2 = lag(m[i], 2);
            o.mroibtrd = mt[i][t];
            o.mroibtrd_lag1 = lag(mt[i], 1);
            o.mroibtrd_lag2 = lag(mt[i], 2);
            o.mroibvol_dmean = md[i][t];
            o.mroibtrd_dmean = mtd[i][t];
            o.ret_m1 = c.x[0];
            o.ret_m7_m2 = c.x[1];
            o.lmto = c.x[2];
            o.lvol = c.x[3];
            o.size = c.x[4];
            o.lbm = c.x[5];
            o.mv_prev = std::exp(c.x[4]);
            o.price_prev = c.price;
            rows.push_back(std::move(o));
        }
    }
    out.panel = Panel(std::move(rows), std::move(weekly), static_cast<std::size_t>(sc.weeks));
    for (std::size_t t = first; t < nt; ++t) {
        out.factors.push_back({starts[t], f[t][0], f[t][1], f[t][2], 0.0});
    }
    return out;
}

// key=value record of the planted parameters.
inline void write_manifest(std::ostream& out, const PanelScenario& s) {
    auto arr = [](const std::array<double, kControlCount>& a) {
        std::string v;
        for (std::size_t i = 0; i < a.size(); ++i) v += (i ? "," : "") + csv::format_double(a[i]);
        return v;
    };
    out << "seed=" << s.seed << "\nfirms=" << s.firms << "\nweeks=" << s.weeks << "\nburn_in=" << s.burn_in
        << "\nstart=" << s.start.to_string() << "\na=" << csv::format_double(s.a)
        << "\nphi=" << csv::format_double(s.phi) << "\nb=" << csv::format_double(s.b) << "\ndelta=" << arr(s.delta)
        << "\nsigma_m=" << csv::format_double(s.sigma_m) << "\nc0=" << csv::format_double(s.c0)
        << "\nc1=" << csv::format_double(s.c1) << "\nh=" << csv::format_double(s.h)
        << "\nsignal_lags=" << s.signal_lags << "\nc_ret=" << csv::format_double(s.c_ret)
        << "\ngamma=" << arr(s.gamma) << "\nsigma_r=" << csv::format_double(s.sigma_r)
        << "\nfactors=" << (s.factors ? 1 : 0) << "\nalpha=" << csv::format_double(s.alpha) << '\n';
}

}  // namespace rtoi::synth
