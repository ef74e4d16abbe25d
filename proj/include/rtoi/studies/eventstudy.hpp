#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rtoi/econ/hac.hpp"
#include "rtoi/mdio/calendar.hpp"
#include "rtoi/panel/panel.hpp"
#include "rtoi/studies/regressions.hpp"
#include "rtoi/studies/spec.hpp"

namespace rtoi::studies {

enum class FlowGroup { IntenseSelling, Selling, Buying, IntenseBuying };

inline constexpr FlowGroup kFlowGroups[] = {FlowGroup::IntenseSelling, FlowGroup::Selling, FlowGroup::Buying,
                                            FlowGroup::IntenseBuying};

inline const char* to_string(FlowGroup g) {
    switch (g) {
        case FlowGroup::IntenseSelling: return "Intense Selling";
        case FlowGroup::Selling: return "Selling";
        case FlowGroup::Buying: return "Buying";
        case FlowGroup::IntenseBuying: return "Intense Buying";
    }
    return "";
}

enum class ReturnType { Cumulative, Weekly };

inline const char* to_string(ReturnType r) { return r == ReturnType::Cumulative ? "cumulative" : "weekly"; }

// Star column from two-sided normal critical values.
inline std::string stars(double t) {
    if (std::isnan(t)) return "";
    const double a = std::fabs(t);
    if (a >= 2.576) return "**";
    if (a >= 1.96) return "*";
    return "";
}

inline constexpr int kDeciles = 10;
inline constexpr int kWeeklyWindow = 5;

struct EventStudyConfig {
    std::vector<int> offsets = default_event_offsets();
    // Decile boundaries: deciles below cut[0] are intense selling, below
    // cut[1] selling, below cut[2] buying, the rest intense buying.
    std::array<int, 3> cutoffs{1, 5, 9};
};

inline FlowGroup decile_group(int decile, const std::array<int, 3>& cut) {
    if (decile < cut[0]) return FlowGroup::IntenseSelling;
    if (decile < cut[1]) return FlowGroup::Selling;
    if (decile < cut[2]) return FlowGroup::Buying;
    return FlowGroup::IntenseBuying;
}

// Inclusive day range for offset k around a formation week spanning days
// [s, e]. Negative offsets run up to the day before the week, positive ones
// start the day after it, zero is the week itself. Weekly windows are the
// five days ending at k (or starting at k before the week).
inline std::pair<long, long> event_window(ReturnType type, int k, long s, long e) {
    if (k == 0) return {s, e};
    if (type == ReturnType::Cumulative) return k < 0 ? std::pair{s + k, s - 1} : std::pair{e + 1, e + k};
    return k < 0 ? std::pair{s + k, s + k + kWeeklyWindow - 1} : std::pair{e + k - kWeeklyWindow + 1, e + k};
}

// Stock compounded return minus market compounded return over [a, b].
inline std::optional<double> market_adjusted(const Series& stock, const Series& market, long a, long b) {
    if (a < 0 || b < a || static_cast<std::size_t>(b) >= stock.size() || static_cast<std::size_t>(b) >= market.size()) {
        return std::nullopt;
    }
    double gs = 1, gm = 1;
    for (long d = a; d <= b; ++d) {
        const auto& rs = stock[static_cast<std::size_t>(d)];
        const auto& rm = market[static_cast<std::size_t>(d)];
        if (!rs || !rm) return std::nullopt;
        gs *= 1 + *rs;
        gm *= 1 + *rm;
    }
    return gs - gm;
}

struct EventCell {
    ReturnType type = ReturnType::Cumulative;
    int offset = 0;
    FlowGroup group = FlowGroup::IntenseSelling;
    double mean = kNaN;
    double t = kNaN;
    std::string stars;
    std::size_t weeks = 0;  // formation weeks contributing
    std::string flag;
};

struct EventStudyResult {
    std::vector<EventCell> cells;  // type, offset, group order
    std::size_t formations = 0;
    std::size_t skipped = 0;  // weeks with fewer than ten ranked stocks
};

// Each formation week, stocks with that week's imbalance are sorted into
// deciles and the deciles pooled into four groups. Market-adjusted returns
// are averaged over stocks within the week, then over weeks, with a
// Newey-West t-statistic.
inline EventStudyResult eventstudy(const Panel& panel, const TradingCalendar& cal, const DailyReturns& daily,
                                   const StudySpec& spec, const EventStudyConfig& cfg = {}) {
    const Getter value = imbalance_now(spec.measure);
    const std::size_t nk = cfg.offsets.size();
    // series[type][offset][group] -> one average per contributing week
    std::vector<std::vector<std::array<std::vector<double>, 4>>> series(
        2, std::vector<std::array<std::vector<double>, 4>>(nk));
    EventStudyResult res;
    for (std::size_t w = 0; w < panel.week_count() && w < cal.week_count(); ++w) {
        auto [a, b] = panel.week_rows(w);
        std::vector<std::pair<double, const PanelObservation*>> ranked;
        for (std::size_t i = a; i < b; ++i) {
            const auto& o = panel.rows()[i];
            if (!in_period(o, spec.period)) continue;
            if (auto v = value(o)) ranked.emplace_back(*v, &o);
        }
        if (ranked.empty()) continue;
        if (ranked.size() < static_cast<std::size_t>(kDeciles)) {
            ++res.skipped;
            continue;
        }
        ++res.formations;
        std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
            return x.first != y.first ? x.first < y.first : x.second->symbol < y.second->symbol;
        });
        const std::size_t n = ranked.size();
        auto [d0, d1] = cal.week_days(w);
        const long s = static_cast<long>(d0), e = static_cast<long>(d1) - 1;
        for (int ti = 0; ti < 2; ++ti) {
            const auto type = static_cast<ReturnType>(ti);
            for (std::size_t ki = 0; ki < nk; ++ki) {
                auto [lo, hi] = event_window(type, cfg.offsets[ki], s, e);
                std::array<CompensatedSum, 4> sum;
                std::array<std::size_t, 4> cnt{};
                for (std::size_t i = 0; i < n; ++i) {
                    const int decile = static_cast<int>(i * kDeciles / n);
                    const auto g = static_cast<std::size_t>(decile_group(decile, cfg.cutoffs));
                    auto it = daily.by_symbol.find(ranked[i].second->symbol);
                    if (it == daily.by_symbol.end()) continue;
                    if (auto r = market_adjusted(it->second, daily.market, lo, hi)) {
                        sum[g].add(*r);
                        ++cnt[g];
                    }
                }
                for (std::size_t g = 0; g < 4; ++g) {
                    if (cnt[g]) series[static_cast<std::size_t>(ti)][ki][g].push_back(sum[g].value() / static_cast<double>(cnt[g]));
                }
            }
        }
    }

    const int lags = spec.lags_or(kEventStudyLags);
    for (int ti = 0; ti < 2; ++ti) {
        for (std::size_t ki = 0; ki < nk; ++ki) {
            for (std::size_t g = 0; g < 4; ++g) {
                const auto& x = series[static_cast<std::size_t>(ti)][ki][g];
                EventCell c;
                c.type = static_cast<ReturnType>(ti);
                c.offset = cfg.offsets[ki];
                c.group = static_cast<FlowGroup>(g);
                c.weeks = x.size();
                try {
                    const double var = econ::newey_west_var(x, lags);
                    CompensatedSum acc;
                    for (double v : x) acc.add(v);
                    c.mean = acc.value() / static_cast<double>(x.size());
                    const double se = std::sqrt(std::max(var, 0.0));
                    c.t = se > 0 ? c.mean / se : kNaN;
                    if (!(se > 0)) c.flag = "ZeroVariance";
                    c.stars = stars(c.t);
                } catch (const NumericalError& e) {
                    c.flag = e.code();
                }
                res.cells.push_back(std::move(c));
            }
        }
    }
    return res;
}

}  // namespace rtoi::studies
