#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "rtoi/classify/classify.hpp"
#include "rtoi/core/csv.hpp"
#include "rtoi/core/error.hpp"
#include "rtoi/core/parallel.hpp"
#include "rtoi/mdio/calendar.hpp"

namespace rtoi {

inline std::optional<double> imbalance(std::int64_t buy, std::int64_t sell) {
    const std::int64_t total = buy + sell;
    if (total <= 0) return std::nullopt;
    return static_cast<double>(buy - sell) / static_cast<double>(total);
}

struct DailyFlow {
    std::string symbol;
    Date date;
    Method method = Method::Bjzz;
    std::int64_t mrbvol = 0;
    std::int64_t mrsvol = 0;
    std::int64_t mrbtrd = 0;
    std::int64_t mrstrd = 0;

    std::optional<double> mroibvol() const { return imbalance(mrbvol, mrsvol); }
    std::optional<double> mroibtrd() const { return imbalance(mrbtrd, mrstrd); }

    bool operator==(const DailyFlow&) const = default;
};

inline DailyFlow accumulate_daily(const std::string& symbol, Date date, Method method,
                                  const std::vector<SignedRetailTrade>& trades) {
    DailyFlow f{symbol, date, method};
    for (const auto& s : trades) {
        if (s.trade.symbol != symbol || s.trade.date != date || s.method != method) {
            throw DataError("Mismatch", "trade " + s.trade.symbol + " " + s.trade.date.to_string() +
                                            " does not belong to " + symbol + " " + date.to_string());
        }
        if (s.side == Side::Buy) {
            f.mrbvol += s.trade.size;
            ++f.mrbtrd;
        } else {
            f.mrsvol += s.trade.size;
            ++f.mrstrd;
        }
    }
    return f;
}

// One flow per (symbol, date) present in the stream, ordered by symbol then
// date. Stock-days with no signed trades have no flow.
inline std::vector<DailyFlow> accumulate_flows(const std::vector<SignedRetailTrade>& trades, Method method,
                                               unsigned threads = 1) {
    std::map<std::pair<std::string, Date>, std::vector<SignedRetailTrade>> groups;
    for (const auto& s : trades) {
        if (s.method != method) continue;
        groups[{s.trade.symbol, s.trade.date}].push_back(s);
    }
    std::vector<const decltype(groups)::value_type*> keys;
    for (const auto& kv : groups) keys.push_back(&kv);
    std::vector<DailyFlow> out(keys.size());
    parallel_for(keys.size(), threads, [&](std::size_t i) {
        out[i] = accumulate_daily(keys[i]->first.first, keys[i]->first.second, method, keys[i]->second);
    });
    return out;
}

// Week-level imbalance of one stock. The ratio-of-sums fields feed the
// regressions; the mean-of-dailies fields feed the portfolio sorts.
struct WeeklyImbalance {
    std::optional<double> vol;
    std::optional<double> trd;
    std::optional<double> vol_dmean;
    std::optional<double> trd_dmean;
    std::int64_t buy_vol = 0, sell_vol = 0, buy_trd = 0, sell_trd = 0;
    int active_days = 0;
};

// Flows of one symbol; they need not be sorted.
inline WeeklyImbalance weekly_mroib(const std::vector<DailyFlow>& flows, const TradingCalendar& cal,
                                    std::size_t week) {
    if (week >= cal.week_count()) throw DataError("CalendarGap", "week index out of range");
    const Date first = cal.week_first_date(week);
    const Date last = cal.week_last_date(week);
    WeeklyImbalance w;
    double sum_vol = 0, sum_trd = 0;
    int n_vol = 0, n_trd = 0;
    for (const auto& f : flows) {
        if (f.date < first || last < f.date) continue;
        w.buy_vol += f.mrbvol;
        w.sell_vol += f.mrsvol;
        w.buy_trd += f.mrbtrd;
        w.sell_trd += f.mrstrd;
        ++w.active_days;
        if (auto v = f.mroibvol()) sum_vol += *v, ++n_vol;
        if (auto v = f.mroibtrd()) sum_trd += *v, ++n_trd;
    }
    w.vol = imbalance(w.buy_vol, w.sell_vol);
    w.trd = imbalance(w.buy_trd, w.sell_trd);
    if (n_vol) w.vol_dmean = sum_vol / n_vol;
    if (n_trd) w.trd_dmean = sum_trd / n_trd;
    return w;
}

// Weekly imbalances for every symbol, indexed by calendar week. A flow dated
// off the calendar is an error: alignment must be total.
inline std::map<std::string, std::vector<WeeklyImbalance>> weekly_imbalances(const std::vector<DailyFlow>& flows,
                                                                            const TradingCalendar& cal) {
    std::map<std::string, std::vector<WeeklyImbalance>> out;
    std::map<std::string, std::vector<std::vector<double>>> daily_vol, daily_trd;
    for (const auto& f : flows) {
        auto day = cal.index_of(f.date);
        if (!day) throw DataError("CalendarGap", "flow date " + f.date.to_string() + " not in trading calendar");
        auto& weeks = out[f.symbol];
        if (weeks.empty()) {
            weeks.resize(cal.week_count());
            daily_vol[f.symbol].resize(cal.week_count());
            daily_trd[f.symbol].resize(cal.week_count());
        }
        const std::size_t wk = cal.week_of(*day);
        auto& w = weeks[wk];
        w.buy_vol += f.mrbvol;
        w.sell_vol += f.mrsvol;
        w.buy_trd += f.mrbtrd;
        w.sell_trd += f.mrstrd;
        ++w.active_days;
        if (auto v = f.mroibvol()) daily_vol[f.symbol][wk].push_back(*v);
        if (auto v = f.mroibtrd()) daily_trd[f.symbol][wk].push_back(*v);
    }
    for (auto& [sym, weeks] : out) {
        for (std::size_t k = 0; k < weeks.size(); ++k) {
            auto& w = weeks[k];
            w.vol = imbalance(w.buy_vol, w.sell_vol);
            w.trd = imbalance(w.buy_trd, w.sell_trd);
            // Summed in date order, same as weekly_mroib on sorted input.
            const auto& dv = daily_vol[sym][k];
            const auto& dt = daily_trd[sym][k];
            if (!dv.empty()) {
                double s = 0;
                for (double x : dv) s += x;
                w.vol_dmean = s / static_cast<double>(dv.size());
            }
            if (!dt.empty()) {
                double s = 0;
                for (double x : dt) s += x;
                w.trd_dmean = s / static_cast<double>(dt.size());
            }
        }
    }
    return out;
}

struct SummaryStats {
    std::size_t n = 0;
    double mean = 0, std = 0, median = 0, q1 = 0, q3 = 0;
};

// Type-7 quantile (linear interpolation between order statistics) of sorted data.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw DataError("EmptySeries", "quantile of an empty series");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double quantile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    return quantile_sorted(v, p);
}

inline double iqr(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return quantile_sorted(v, 0.75) - quantile_sorted(v, 0.25);
}

// std is the n-1 sample deviation; with a single value it is NaN.
inline SummaryStats summarize(std::vector<double> v) {
    if (v.empty()) throw DataError("EmptySeries", "summary of an empty series");
    SummaryStats s;
    s.n = v.size();
    CompensatedSum sum;
    for (double x : v) sum.add(x);
    s.mean = sum.value() / static_cast<double>(s.n);
    CompensatedSum ss;
    for (double x : v) ss.add((x - s.mean) * (x - s.mean));
    s.std = s.n > 1 ? std::sqrt(ss.value() / static_cast<double>(s.n - 1)) : std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    s.median = quantile_sorted(v, 0.5);
    s.q1 = quantile_sorted(v, 0.25);
    s.q3 = quantile_sorted(v, 0.75);
    return s;
}

enum class FlowVariable { Mrbvol, Mrsvol, Mrbtrd, Mrstrd, Mroibvol, Mroibtrd };

inline constexpr FlowVariable kFlowVariables[] = {FlowVariable::Mrbvol,   FlowVariable::Mrsvol,
                                                  FlowVariable::Mrbtrd,   FlowVariable::Mrstrd,
                                                  FlowVariable::Mroibvol, FlowVariable::Mroibtrd};

inline const char* to_string(FlowVariable v) {
    switch (v) {
        case FlowVariable::Mrbvol: return "Mrbvol";
        case FlowVariable::Mrsvol: return "Mrsvol";
        case FlowVariable::Mrbtrd: return "Mrbtrd";
        case FlowVariable::Mrstrd: return "Mrstrd";
        case FlowVariable::Mroibvol: return "Mroibvol";
        case FlowVariable::Mroibtrd: return "Mroibtrd";
    }
    return "?";
}

inline std::optional<double> value_of(const DailyFlow& f, FlowVariable v) {
    switch (v) {
        case FlowVariable::Mrbvol: return static_cast<double>(f.mrbvol);
        case FlowVariable::Mrsvol: return static_cast<double>(f.mrsvol);
        case FlowVariable::Mrbtrd: return static_cast<double>(f.mrbtrd);
        case FlowVariable::Mrstrd: return static_cast<double>(f.mrstrd);
        case FlowVariable::Mroibvol: return f.mroibvol();
        case FlowVariable::Mroibtrd: return f.mroibtrd();
    }
    return std::nullopt;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw NumericalError("Degenerate", "correlation needs at least 2 pairs");
    const double n = static_cast<double>(x.size());
    CompensatedSum sx, sy;
    for (std::size_t i = 0; i < x.size(); ++i) sx.add(x[i]), sy.add(y[i]);
    const double mx = sx.value() / n, my = sy.value() / n;
    CompensatedSum cxy, cxx, cyy;
    for (std::size_t i = 0; i < x.size(); ++i) {
        cxy.add((x[i] - mx) * (y[i] - my));
        cxx.add((x[i] - mx) * (x[i] - mx));
        cyy.add((y[i] - my) * (y[i] - my));
    }
    if (cxx.value() <= 0 || cyy.value() <= 0) throw NumericalError("Degenerate", "correlation of a constant series");
    return std::clamp(cxy.value() / std::sqrt(cxx.value() * cyy.value()), -1.0, 1.0);
}

// Pooled stock-day correlation between the two methods' values of one variable.
inline double method_correlation(const std::vector<DailyFlow>& a, const std::vector<DailyFlow>& b, FlowVariable v) {
    std::map<std::pair<std::string, Date>, double> left;
    for (const auto& f : a) {
        if (auto x = value_of(f, v)) left[{f.symbol, f.date}] = *x;
    }
    std::vector<std::tuple<std::string, Date, double, double>> pairs;
    for (const auto& f : b) {
        auto y = value_of(f, v);
        if (!y) continue;
        auto it = left.find({f.symbol, f.date});
        if (it != left.end()) pairs.emplace_back(f.symbol, f.date, it->second, *y);
    }
    std::sort(pairs.begin(), pairs.end());
    std::vector<double> x, y;
    for (const auto& [s, d, l, r] : pairs) x.push_back(l), y.push_back(r);
    return pearson(x, y);
}

struct Period {
    std::string label;  // e.g. "2010-2015"
    Date first;
    Date last;

    bool contains(Date d) const { return !(d < first) && !(last < d); }
};

// "YYYY:YYYY" -> whole calendar years.
inline Period parse_period(std::string_view s) {
    auto colon = s.find(':');
    if (colon == std::string_view::npos || colon != 4 || s.size() != 9) {
        throw ConfigError("InvalidValue", "period must look like 2016:2021, got '" + std::string(s) + "'");
    }
    int y1 = 0, y2 = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i])) || !std::isdigit(static_cast<unsigned char>(s[5 + i]))) {
            throw ConfigError("InvalidValue", "period must look like 2016:2021, got '" + std::string(s) + "'");
        }
        y1 = y1 * 10 + (s[i] - '0');
        y2 = y2 * 10 + (s[5 + i] - '0');
    }
    if (y2 < y1) throw ConfigError("InvalidValue", "period end precedes start");
    return Period{std::to_string(y1) + "-" + std::to_string(y2), Date::from_ymd(y1, 1, 1), Date::from_ymd(y2, 12, 31)};
}

struct SummaryRow {
    FlowVariable variable;
    std::string period;
    Method method;
    SummaryStats stats;
    std::optional<double> corr;
};

inline std::vector<DailyFlow> in_period(const std::vector<DailyFlow>& flows, const Period& p) {
    std::vector<DailyFlow> out;
    for (const auto& f : flows) {
        if (p.contains(f.date)) out.push_back(f);
    }
    return out;
}

// Summary rows for both methods over one period. The correlation is left
// empty when it is undefined (fewer than two joined pairs or no variation).
inline std::vector<SummaryRow> summary_table(const std::vector<DailyFlow>& bjzz, const std::vector<DailyFlow>& qmp,
                                             const Period& period) {
    auto a = in_period(bjzz, period);
    auto b = in_period(qmp, period);
    std::vector<SummaryRow> rows;
    for (Method m : {Method::Bjzz, Method::Qmp}) {
        const auto& flows = m == Method::Bjzz ? a : b;
        for (FlowVariable v : kFlowVariables) {
            std::vector<double> xs;
            for (const auto& f : flows) {
                if (auto x = value_of(f, v)) xs.push_back(*x);
            }
            if (xs.empty()) continue;
            SummaryRow r{v, period.label, m, summarize(xs), std::nullopt};
            try {
                r.corr = method_correlation(a, b, v);
            } catch (const NumericalError&) {
            }
            rows.push_back(r);
        }
    }
    return rows;
}

inline void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows) {
    out << "variable,period,method,n,mean,std,median,q1,q3,corr\n";
    for (const auto& r : rows) {
        csv::write_row(out, {to_string(r.variable), r.period, to_string(r.method), std::to_string(r.stats.n),
                             csv::format_double(r.stats.mean), csv::format_double(r.stats.std),
                             csv::format_double(r.stats.median), csv::format_double(r.stats.q1),
                             csv::format_double(r.stats.q3), csv::format_double(r.corr)});
    }
}

// dailyflow: symbol,date,method,mrbvol,mrsvol,mrbtrd,mrstrd,mroibvol,mroibtrd
inline void write_flows(std::ostream& out, const std::vector<DailyFlow>& flows) {
    out << "symbol,date,method,mrbvol,mrsvol,mrbtrd,mrstrd,mroibvol,mroibtrd\n";
    for (const auto& f : flows) {
        csv::write_row(out, {f.symbol, f.date.to_string(), to_string(f.method), std::to_string(f.mrbvol),
                             std::to_string(f.mrsvol), std::to_string(f.mrbtrd), std::to_string(f.mrstrd),
                             csv::format_double(f.mroibvol()), csv::format_double(f.mroibtrd())});
    }
}

// The imbalance columns are derived, so only the counts are read back.
inline std::vector<DailyFlow> read_flows(std::istream& in) {
    std::vector<DailyFlow> out;
    csv::Reader r(in);
    if (r.empty_input()) return out;
    std::size_t i_sym = r.require("symbol"), i_date = r.require("date"), i_m = r.require("method"),
                i_bv = r.require("mrbvol"), i_sv = r.require("mrsvol"), i_bt = r.require("mrbtrd"),
                i_st = r.require("mrstrd");
    std::vector<std::string_view> f;
    while (r.next(f)) {
        const std::size_t line = r.line();
        DailyFlow d;
        d.symbol = std::string(f[i_sym]);
        try {
            d.date = Date::parse(f[i_date]);
            d.method = parse_method(f[i_m]);
        } catch (const DataError& e) {
            throw DataError(e.code(), e.what(), line);
        }
        d.mrbvol = csv::parse_int(f[i_bv], line, "mrbvol");
        d.mrsvol = csv::parse_int(f[i_sv], line, "mrsvol");
        d.mrbtrd = csv::parse_int(f[i_bt], line, "mrbtrd");
        d.mrstrd = csv::parse_int(f[i_st], line, "mrstrd");
        if (d.mrbvol < 0 || d.mrsvol < 0 || d.mrbtrd < 0 || d.mrstrd < 0) {
            throw DataError("Malformed", "negative flow", line);
        }
        out.push_back(std::move(d));
    }
    return out;
}

}  // namespace rtoi
