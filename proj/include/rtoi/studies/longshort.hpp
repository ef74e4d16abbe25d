#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rtoi/econ/hac.hpp"
#include "rtoi/mdio/calendar.hpp"
#include "rtoi/mdio/records.hpp"
#include "rtoi/panel/panel.hpp"
#include "rtoi/studies/regressions.hpp"
#include "rtoi/studies/spec.hpp"

namespace rtoi::studies {

// Excess market, SMB, HML for one calendar week.
struct WeeklyFactors {
    double mkt_rf = 0;
    double smb = 0;
    double hml = 0;
    double rf = 0;
};

// Maps factor records onto weeks: a record belongs to the latest week
// starting on or before its date. Several records in a week (daily factors)
// are compounded. Records before the first week are ignored.
inline std::vector<std::optional<WeeklyFactors>> weekly_factors(const std::vector<FactorRecord>& records,
                                                                const std::vector<Date>& week_starts) {
    std::vector<std::optional<WeeklyFactors>> out(week_starts.size());
    for (const auto& r : records) {
        auto it = std::upper_bound(week_starts.begin(), week_starts.end(), r.date);
        if (it == week_starts.begin()) continue;
        auto& slot = out[static_cast<std::size_t>(it - week_starts.begin()) - 1];
        if (!slot) {
            slot = WeeklyFactors{r.mkt_rf, r.smb, r.hml, r.rf};
            continue;
        }
        slot->mkt_rf = (1 + slot->mkt_rf) * (1 + r.mkt_rf) - 1;
        slot->smb = (1 + slot->smb) * (1 + r.smb) - 1;
        slot->hml = (1 + slot->hml) * (1 + r.hml) - 1;
        slot->rf = (1 + slot->rf) * (1 + r.rf) - 1;
    }
    return out;
}

inline std::vector<std::optional<WeeklyFactors>> weekly_factors(const std::vector<FactorRecord>& records,
                                                                const TradingCalendar& cal) {
    std::vector<Date> starts;
    for (std::size_t w = 0; w < cal.week_count(); ++w) starts.push_back(cal.week_first_date(w));
    return weekly_factors(records, starts);
}

// Week start dates recovered from panel rows. A week with no rows is placed
// seven days after the previous one.
inline std::vector<Date> panel_week_starts(const Panel& panel) {
    std::vector<Date> out;
    for (std::size_t w = 0; w < panel.week_count(); ++w) {
        auto [a, b] = panel.week_rows(w);
        if (a < b) out.push_back(panel.rows()[a].week_start);
        else out.push_back(out.empty() ? Date(0) : out.back().plus_days(7));
    }
    return out;
}

// How k weekly factor returns become one regressor per k-week holding period.
enum class FactorAggregation { Compound, Sum };

inline FactorAggregation parse_factor_aggregation(std::string_view s) {
    if (s == "compound") return FactorAggregation::Compound;
    if (s == "sum") return FactorAggregation::Sum;
    throw ConfigError("InvalidValue", "factor aggregation must be compound or sum, got '" + std::string(s) + "'");
}

// Which weekly imbalance the portfolios are sorted on.
enum class SortVariable { DailyMean, Weekly };

inline SortVariable parse_sort_variable(std::string_view s) {
    if (s == "dmean") return SortVariable::DailyMean;
    if (s == "weekly") return SortVariable::Weekly;
    throw ConfigError("InvalidValue", "sort variable must be dmean or weekly, got '" + std::string(s) + "'");
}

inline constexpr int kQuintiles = 5;
inline constexpr std::size_t kMinPerQuintile = 5;

struct LongShortConfig {
    std::vector<int> horizons = default_horizons();
    FactorAggregation aggregation = FactorAggregation::Compound;
    SortVariable sort = SortVariable::DailyMean;
};

struct Holding {
    std::string symbol;
    double weight = 0;
};

// One week's sort. quintile[i] is the bucket of candidates[i].
struct Formation {
    std::size_t week = 0;
    std::vector<std::string> candidates;
    std::vector<int> quintile;
    std::vector<Holding> long_leg;   // top quintile
    std::vector<Holding> short_leg;  // bottom quintile
};

inline Getter sort_getter(Measure m, SortVariable s) {
    if (s == SortVariable::Weekly) return imbalance_now(m);
    return m == Measure::Vol ? Getter([](const PanelObservation& o) { return o.mroibvol_dmean; })
                             : Getter([](const PanelObservation& o) { return o.mroibtrd_dmean; });
}

namespace detail {

inline std::vector<Holding> value_weights(const std::vector<std::pair<std::string, double>>& caps) {
    double total = 0;
    for (const auto& c : caps) total += c.second;
    std::vector<Holding> out;
    for (const auto& [s, mv] : caps) out.push_back({s, mv / total});
    return out;
}

}  // namespace detail

// Quintile sort of the given rows (one week). Rows need the sort value and a
// positive previous month-end market value. Ranks ascend with ties broken by
// symbol. Returns nothing when any quintile would hold fewer than five names.
inline std::optional<Formation> form_portfolios(const std::vector<const PanelObservation*>& rows, const Getter& sort_by) {
    std::vector<std::pair<double, const PanelObservation*>> ranked;
    for (const auto* o : rows) {
        auto v = sort_by(*o);
        if (!v || !o->mv_prev || !(*o->mv_prev > 0)) continue;
        ranked.emplace_back(*v, o);
    }
    const std::size_t n = ranked.size();
    if (n < kMinPerQuintile * kQuintiles) return std::nullopt;
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first < b.first : a.second->symbol < b.second->symbol;
    });
    Formation f;
    f.week = ranked.front().second->week;
    std::vector<std::pair<std::string, double>> lo, hi;
    for (std::size_t i = 0; i < n; ++i) {
        const int q = static_cast<int>(i * kQuintiles / n);
        const auto* o = ranked[i].second;
        f.candidates.push_back(o->symbol);
        f.quintile.push_back(q);
        if (q == 0) lo.emplace_back(o->symbol, *o->mv_prev);
        if (q == kQuintiles - 1) hi.emplace_back(o->symbol, *o->mv_prev);
    }
    f.long_leg = detail::value_weights(hi);
    f.short_leg = detail::value_weights(lo);
    return f;
}

// Value-weighted compounded return of a leg over weeks w+1..w+k. Names with
// any missing week are dropped and the remaining weights rescaled.
inline std::optional<double> leg_return(const Panel& panel, const std::vector<Holding>& leg, std::size_t week, int k) {
    double num = 0, den = 0;
    for (const auto& h : leg) {
        double growth = 1;
        bool ok = true;
        for (int j = 1; j <= k && ok; ++j) {
            auto r = panel.weekly_return(h.symbol, week + static_cast<std::size_t>(j));
            if (r) growth *= 1 + *r;
            else ok = false;
        }
        if (!ok) continue;
        num += h.weight * (growth - 1);
        den += h.weight;
    }
    if (!(den > 0)) return std::nullopt;
    return num / den;
}

enum class SizeSample { All, Small, Medium, Big };

inline const char* to_string(SizeSample u) {
    switch (u) {
        case SizeSample::All: return "All Stocks";
        case SizeSample::Small: return "Small";
        case SizeSample::Medium: return "Medium";
        case SizeSample::Big: return "Big";
    }
    return "";
}

inline constexpr SizeSample kSizeSamples[] = {SizeSample::All, SizeSample::Small, SizeSample::Medium, SizeSample::Big};

struct PortfolioSeries {
    int horizon = 1;
    SizeSample universe = SizeSample::All;
    std::vector<std::size_t> weeks;  // formation weeks kept
    std::vector<double> long_short;  // aligned with weeks
    std::vector<Formation> formations;
    std::size_t skipped = 0;  // formations with too few names or no holding return
    double mean = kNaN, mean_t = kNaN;
    double alpha = kNaN, alpha_t = kNaN;
    bool mean_fallback = false;   // Hansen-Hodrick variance replaced by Bartlett
    bool alpha_fallback = false;
    std::string flag;
};

namespace detail {

inline std::optional<std::array<double, 3>> horizon_factors(const std::vector<std::optional<WeeklyFactors>>& f,
                                                            std::size_t week, int k, FactorAggregation agg) {
    std::array<double, 3> acc = agg == FactorAggregation::Compound ? std::array<double, 3>{1, 1, 1}
                                                                   : std::array<double, 3>{0, 0, 0};
    for (int j = 1; j <= k; ++j) {
        const std::size_t w = week + static_cast<std::size_t>(j);
        if (w >= f.size() || !f[w]) return std::nullopt;
        const std::array<double, 3> x = {f[w]->mkt_rf, f[w]->smb, f[w]->hml};
        for (int i = 0; i < 3; ++i) {
            if (agg == FactorAggregation::Compound) acc[static_cast<std::size_t>(i)] *= 1 + x[static_cast<std::size_t>(i)];
            else acc[static_cast<std::size_t>(i)] += x[static_cast<std::size_t>(i)];
        }
    }
    if (agg == FactorAggregation::Compound) {
        for (auto& a : acc) a -= 1;
    }
    return acc;
}

}  // namespace detail

// Weekly quintile long-short at one horizon, for one universe. factors is
// indexed by panel week. The mean uses a Hansen-Hodrick variance and the
// alpha a unit-kernel HAC regression on the three factors, both with k-1
// lags. Statistics that cannot be estimated leave the cell flagged.
inline PortfolioSeries longshort_series(const Panel& panel, const std::vector<std::optional<WeeklyFactors>>& factors,
                                        const StudySpec& spec, int k, SizeSample universe,
                                        const LongShortConfig& cfg = {}) {
    if (k < 1) throw ConfigError("InvalidValue", "horizons must be >= 1");
    PortfolioSeries s;
    s.horizon = k;
    s.universe = universe;
    const Getter sort_by = sort_getter(spec.measure, cfg.sort);
    const int group = universe == SizeSample::All ? -1 : static_cast<int>(universe) - 1;
    std::vector<std::array<double, 3>> fx;
    bool factors_complete = true;
    for (std::size_t w = 0; w < panel.week_count(); ++w) {
        if (w + static_cast<std::size_t>(k) >= panel.week_count()) break;
        auto [a, b] = panel.week_rows(w);
        std::vector<const PanelObservation*> rows;
        for (std::size_t i = a; i < b; ++i) {
            const auto& o = panel.rows()[i];
            if (!in_period(o, spec.period)) continue;
            if (group >= 0 && o.group(Characteristic::Cap) != group) continue;
            rows.push_back(&o);
        }
        if (rows.empty()) continue;
        auto f = form_portfolios(rows, sort_by);
        if (!f) {
            ++s.skipped;
            continue;
        }
        auto lr = leg_return(panel, f->long_leg, w, k);
        auto sr = leg_return(panel, f->short_leg, w, k);
        if (!lr || !sr) {
            ++s.skipped;
            continue;
        }
        s.weeks.push_back(w);
        s.long_short.push_back(*lr - *sr);
        s.formations.push_back(std::move(*f));
        auto hf = detail::horizon_factors(factors, w, k, cfg.aggregation);
        if (hf) fx.push_back(*hf);
        else factors_complete = false;
    }

    const int lags = spec.lags >= 0 ? spec.lags : k - 1;
    try {
        CompensatedSum acc;
        for (double x : s.long_short) acc.add(x);
        econ::require_periods(s.long_short.size(), lags);
        s.mean = acc.value() / static_cast<double>(s.long_short.size());
        auto v = econ::hansen_hodrick_var(s.long_short, lags);
        s.mean_fallback = v.fallback;
        s.mean_t = s.mean / std::sqrt(std::max(v.var, 0.0));
    } catch (const NumericalError& e) {
        s.flag = e.code();
        return s;
    }
    if (!factors_complete) {
        s.flag = "FactorGap";
        return s;
    }
    const Eigen::Index T = static_cast<Eigen::Index>(s.long_short.size());
    Eigen::MatrixXd X(T, 4);
    Eigen::VectorXd y(T);
    for (Eigen::Index t = 0; t < T; ++t) {
        const auto& f = fx[static_cast<std::size_t>(t)];
        X.row(t) << 1.0, f[0], f[1], f[2];
        y(t) = s.long_short[static_cast<std::size_t>(t)];
    }
    try {
        auto fit = econ::hac_ols(X, y, lags, econ::Kernel::Uniform);
        s.alpha = fit.coef(0);
        s.alpha_t = fit.t(0);
        s.alpha_fallback = fit.fallback;
    } catch (const NumericalError& e) {
        s.flag = e.code();
    }
    if (s.flag.empty() && (s.mean_fallback || s.alpha_fallback)) s.flag = "HHFallback";
    return s;
}

// Every horizon crossed with the full sample and the three size terciles.
inline std::vector<PortfolioSeries> longshort(const Panel& panel,
                                              const std::vector<std::optional<WeeklyFactors>>& factors,
                                              const StudySpec& spec, const LongShortConfig& cfg = {}) {
    Panel labeled = panel;
    std::string size_flag;
    try {
        assign_subgroups(labeled, Characteristic::Cap, kSubgroupCount);
    } catch (const DataError& e) {
        size_flag = e.code();  // the full-sample series is still produced
    }
    std::vector<PortfolioSeries> out;
    for (int k : cfg.horizons) {
        for (auto u : kSizeSamples) {
            if (u != SizeSample::All && !size_flag.empty()) {
                PortfolioSeries s;
                s.horizon = k;
                s.universe = u;
                s.flag = size_flag;
                out.push_back(std::move(s));
                continue;
            }
            out.push_back(longshort_series(labeled, factors, spec, k, u, cfg));
        }
    }
    return out;
}

}  // namespace rtoi::studies
