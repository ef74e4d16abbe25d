#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "rtoi/aggregate/aggregate.hpp"
#include "rtoi/core/csv.hpp"
#include "rtoi/core/error.hpp"
#include "rtoi/core/parallel.hpp"
#include "rtoi/mdio/calendar.hpp"
#include "rtoi/mdio/universe.hpp"

namespace rtoi {

enum class ReturnMode { BidAsk, Close };

inline const char* to_string(ReturnMode m) { return m == ReturnMode::BidAsk ? "bidask" : "close"; }

inline ReturnMode parse_return_mode(std::string_view s) {
    if (s == "bidask" || s == "BidAsk") return ReturnMode::BidAsk;
    if (s == "close" || s == "Close") return ReturnMode::Close;
    throw ConfigError("InvalidValue", "return mode must be bidask or close, got '" + std::string(s) + "'");
}

using Series = std::vector<std::optional<double>>;

// Price used for returns, in dollars. Bid-ask mode uses the midpoint.
inline std::optional<double> return_price(const DailySecurityRecord& r, ReturnMode mode) {
    if (mode == ReturnMode::Close) {
        if (!r.close || r.close->ticks <= 0) return std::nullopt;
        return r.close->to_double();
    }
    if (!r.bid || !r.ask) return std::nullopt;
    const std::int64_t twice_mid = r.bid->ticks + r.ask->ticks;
    if (twice_mid <= 0) return std::nullopt;
    return static_cast<double>(twice_mid) / (2.0 * Price::kScale);
}

// Calendar-indexed daily returns of one symbol (records sorted by date). A
// return needs valid prices on two consecutive trading days.
inline Series daily_returns(const std::vector<DailySecurityRecord>& rows, const TradingCalendar& cal,
                            ReturnMode mode) {
    Series price(cal.size());
    for (const auto& r : rows) {
        auto d = cal.index_of(r.date);
        if (!d) {
            throw DataError("CalendarGap", r.symbol + " has a record on " + r.date.to_string() +
                                               " which is not a trading day in the calendar");
        }
        price[*d] = return_price(r, mode);
    }
    Series out(cal.size());
    for (std::size_t d = 1; d < cal.size(); ++d) {
        if (price[d] && price[d - 1]) out[d] = *price[d] / *price[d - 1] - 1.0;
    }
    return out;
}

inline std::optional<double> compound(const Series& daily, std::size_t first, std::size_t last) {
    double g = 1.0;
    bool any = false;
    for (std::size_t d = first; d < last; ++d) {
        if (daily[d]) {
            g *= 1.0 + *daily[d];
            any = true;
        }
    }
    if (!any) return std::nullopt;
    return g - 1.0;
}

// Compounded over the week's days; missing only if every day is missing.
inline std::optional<double> weekly_return(const Series& daily, const TradingCalendar& cal, std::size_t week) {
    auto [first, last] = cal.week_days(week);
    return compound(daily, first, last);
}

inline std::optional<double> month_return(const Series& daily, const TradingCalendar& cal, YearMonth m) {
    auto range = cal.month_days(m);
    if (!range) return std::nullopt;
    return compound(daily, range->first, range->second);
}

struct MonthlyControls {
    std::optional<double> lmto;   // percent of shares outstanding
    std::optional<double> lvol;   // sample std of daily returns
    std::optional<double> size;   // ln market value
    std::optional<double> lbm;    // ln book-to-market
    std::optional<double> market_value;
    std::optional<double> price;  // month-end close
};

inline constexpr int kMinVolDays = 5;

// Controls measured over `month` for one symbol. `rows` are the symbol's
// records sorted by date, `daily` its calendar-indexed returns.
inline MonthlyControls monthly_controls(const std::vector<DailySecurityRecord>& rows, const Series& daily,
                                        const TradingCalendar& cal, YearMonth month) {
    MonthlyControls c;
    const DailySecurityRecord* end = nullptr;
    std::int64_t volume = 0;
    for (const auto& r : rows) {
        if (YearMonth::of(r.date) != month) continue;
        volume += r.volume;
        end = &r;
    }
    if (!end || end->shares_outstanding <= 0) return c;
    const double shrout = static_cast<double>(end->shares_outstanding);
    c.lmto = static_cast<double>(volume) / shrout * 100.0;
    if (auto range = cal.month_days(month)) {
        std::vector<double> rs;
        for (std::size_t d = range->first; d < range->second; ++d) {
            if (daily[d]) rs.push_back(*daily[d]);
        }
        if (static_cast<int>(rs.size()) >= kMinVolDays) {
            double mean = 0;
            for (double x : rs) mean += x;
            mean /= static_cast<double>(rs.size());
            double ss = 0;
            for (double x : rs) ss += (x - mean) * (x - mean);
            c.lvol = std::sqrt(ss / static_cast<double>(rs.size() - 1));
        }
    }
    if (end->close) {
        const double mv = end->close->to_double() * shrout;
        c.price = end->close->to_double();
        c.market_value = mv;
        c.size = std::log(mv);
        if (end->book_equity && *end->book_equity > 0) c.lbm = std::log(*end->book_equity / mv);
    }
    return c;
}

struct RetWindows {
    std::optional<double> ret_m1;     // month m-1
    std::optional<double> ret_m7_m2;  // months m-7 .. m-2
};

inline RetWindows ret_windows(const Series& daily, const TradingCalendar& cal, YearMonth m) {
    RetWindows w;
    w.ret_m1 = month_return(daily, cal, m.plus(-1));
    double g = 1.0;
    for (int k = 7; k >= 2; --k) {
        auto r = month_return(daily, cal, m.plus(-k));
        if (!r) return w;
        g *= 1.0 + *r;
    }
    w.ret_m7_m2 = g - 1.0;
    return w;
}

enum class Characteristic { Cap = 0, Price = 1, Turnover = 2 };

inline const char* to_string(Characteristic c) {
    switch (c) {
        case Characteristic::Cap: return "cap";
        case Characteristic::Price: return "price";
        case Characteristic::Turnover: return "turnover";
    }
    return "?";
}

// One eligible firm-week. Regressor fields dated w-1 and w-2 are looked up
// from the symbol's own series, so a lag exists even if that earlier week was
// not itself an eligible row.
struct PanelObservation {
    std::string symbol;
    std::size_t week = 0;
    Date week_start;
    YearMonth month;  // formation month: month of the week's first day

    std::optional<double> ret, ret_lag1, ret_lag2;
    std::optional<double> mroibvol, mroibvol_lag1, mroibvol_lag2;
    std::optional<double> mroibtrd, mroibtrd_lag1, mroibtrd_lag2;
    std::optional<double> mroibvol_dmean, mroibtrd_dmean;  // mean of daily imbalances in week w
    std::optional<double> ret_m1, ret_m7_m2;
    std::optional<double> lmto, lvol, size, lbm;
    std::optional<double> mv_prev, price_prev;  // previous month-end
    std::array<std::int8_t, 3> groups{-1, -1, -1};  // indexed by Characteristic; -1 = unassigned

    std::int8_t group(Characteristic c) const { return groups[static_cast<int>(c)]; }

    std::optional<double> characteristic(Characteristic c) const {
        switch (c) {
            case Characteristic::Cap: return mv_prev;
            case Characteristic::Price: return price_prev;
            case Characteristic::Turnover: return lmto;
        }
        return std::nullopt;
    }

    bool operator==(const PanelObservation&) const = default;
};

// Rows sorted by (week, symbol), plus every symbol's full weekly return
// series so that studies can look ahead for dependent variables.
class Panel {
public:
    Panel() = default;

    Panel(std::vector<PanelObservation> rows, std::map<std::string, Series> weekly_returns, std::size_t weeks)
        : rows_(std::move(rows)), weekly_returns_(std::move(weekly_returns)), weeks_(weeks) {
        std::sort(rows_.begin(), rows_.end(), [](const auto& a, const auto& b) {
            return std::tie(a.week, a.symbol) < std::tie(b.week, b.symbol);
        });
        for (std::size_t i = 1; i < rows_.size(); ++i) {
            if (rows_[i].week == rows_[i - 1].week && rows_[i].symbol == rows_[i - 1].symbol) {
                throw DataError("Duplicate", "two panel rows for " + rows_[i].symbol + " in week " +
                                                 std::to_string(rows_[i].week));
            }
        }
        for (const auto& r : rows_) weeks_ = std::max(weeks_, r.week + 1);
        for (auto& [s, v] : weekly_returns_) {
            if (v.size() < weeks_) v.resize(weeks_);
        }
        reindex();
    }

    // Builds a panel from rows alone (e.g. read back from CSV); the weekly
    // return series is recovered from the ret and lag columns.
    static Panel from_rows(std::vector<PanelObservation> rows) {
        std::size_t weeks = 0;
        for (const auto& r : rows) weeks = std::max(weeks, r.week + 1);
        std::map<std::string, Series> wr;
        for (const auto& r : rows) {
            auto& s = wr[r.symbol];
            s.resize(weeks);
            if (r.week >= 1 && r.ret_lag1 && !s[r.week - 1]) s[r.week - 1] = r.ret_lag1;
            if (r.week >= 2 && r.ret_lag2 && !s[r.week - 2]) s[r.week - 2] = r.ret_lag2;
        }
        for (const auto& r : rows) {
            if (r.ret) wr[r.symbol][r.week] = r.ret;
        }
        return Panel(std::move(rows), std::move(wr), weeks);
    }

    const std::vector<PanelObservation>& rows() const { return rows_; }
    std::vector<PanelObservation>& mutable_rows() { return rows_; }
    std::size_t size() const { return rows_.size(); }
    std::size_t week_count() const { return weeks_; }

    // Half-open row range of one week.
    std::pair<std::size_t, std::size_t> week_rows(std::size_t week) const {
        if (week >= weeks_) return {rows_.size(), rows_.size()};
        return {week_first_[week], week_first_[week + 1]};
    }

    const PanelObservation* find(const std::string& symbol, std::size_t week) const {
        auto [a, b] = week_rows(week);
        auto it = std::lower_bound(rows_.begin() + static_cast<std::ptrdiff_t>(a),
                                   rows_.begin() + static_cast<std::ptrdiff_t>(b), symbol,
                                   [](const PanelObservation& r, const std::string& s) { return r.symbol < s; });
        if (it == rows_.begin() + static_cast<std::ptrdiff_t>(b) || it->symbol != symbol) return nullptr;
        return &*it;
    }

    std::optional<double> weekly_return(const std::string& symbol, std::size_t week) const {
        auto it = weekly_returns_.find(symbol);
        if (it == weekly_returns_.end() || week >= it->second.size()) return std::nullopt;
        return it->second[week];
    }

    const std::map<std::string, Series>& weekly_returns() const { return weekly_returns_; }

private:
    void reindex() {
        week_first_.assign(weeks_ + 1, rows_.size());
        std::size_t i = 0;
        for (std::size_t w = 0; w <= weeks_; ++w) {
            while (i < rows_.size() && rows_[i].week < w) ++i;
            week_first_[w] = i;
        }
    }

    std::vector<PanelObservation> rows_;
    std::map<std::string, Series> weekly_returns_;
    std::size_t weeks_ = 0;
    std::vector<std::size_t> week_first_;
};

// Daily return panel kept alongside the weekly panel for the event study.
struct DailyReturns {
    std::map<std::string, Series> by_symbol;
    Series market;  // value-weighted across the eligible universe
};

struct PanelBuild {
    Panel panel;
    DailyReturns daily;
};

namespace detail {

struct SymbolWork {
    std::vector<PanelObservation> rows;
    Series daily;
    Series weekly;
    std::map<int, MonthlyControls> controls;  // keyed by month index
};

}  // namespace detail

// Joins imbalances, returns and monthly controls into firm-week rows. A row
// exists for (symbol, week) when the symbol is eligible in the week's month
// (or, with no universe, merely has records that month). Controls come from
// the previous month-end; return windows end with the previous month.
inline PanelBuild assemble_panel(const SecurityHistory& history, const TradingCalendar& cal,
                                 const std::map<std::string, std::vector<WeeklyImbalance>>& imbalances,
                                 const Universe* universe, ReturnMode mode, unsigned threads = 1) {
    for (const auto& [sym, weeks] : imbalances) {
        if (weeks.size() != cal.week_count()) {
            throw DataError("CalendarGap", "imbalance series for " + sym + " does not match the calendar");
        }
    }
    std::vector<const std::pair<const std::string, std::vector<DailySecurityRecord>>*> symbols;
    for (const auto& kv : history.symbols()) symbols.push_back(&kv);
    const std::vector<YearMonth> months = cal.months();
    std::vector<detail::SymbolWork> work(symbols.size());

    parallel_for(symbols.size(), threads, [&](std::size_t i) {
        const std::string& sym = symbols[i]->first;
        const auto& recs = symbols[i]->second;
        auto& w = work[i];
        w.daily = daily_returns(recs, cal, mode);
        w.weekly.resize(cal.week_count());
        for (std::size_t k = 0; k < cal.week_count(); ++k) w.weekly[k] = weekly_return(w.daily, cal, k);
        for (YearMonth m : months) w.controls[m.index()] = monthly_controls(recs, w.daily, cal, m);

        const std::vector<WeeklyImbalance>* imb = nullptr;
        if (auto it = imbalances.find(sym); it != imbalances.end()) imb = &it->second;
        auto imb_at = [&](std::size_t k, bool vol) -> std::optional<double> {
            if (!imb) return std::nullopt;
            return vol ? (*imb)[k].vol : (*imb)[k].trd;
        };

        std::map<int, RetWindows> windows;
        for (std::size_t k = 0; k < cal.week_count(); ++k) {
            const YearMonth m = cal.week_month(k);
            const bool ok = universe ? universe->eligible(sym, m) : history.has_month(sym, m);
            if (!ok) continue;
            PanelObservation o;
            o.symbol = sym;
            o.week = k;
            o.week_start = cal.week_first_date(k);
            o.month = m;
            o.ret = w.weekly[k];
            if (k >= 1) o.ret_lag1 = w.weekly[k - 1];
            if (k >= 2) o.ret_lag2 = w.weekly[k - 2];
            o.mroibvol = imb_at(k, true);
            o.mroibtrd = imb_at(k, false);
            if (k >= 1) o.mroibvol_lag1 = imb_at(k - 1, true), o.mroibtrd_lag1 = imb_at(k - 1, false);
            if (k >= 2) o.mroibvol_lag2 = imb_at(k - 2, true), o.mroibtrd_lag2 = imb_at(k - 2, false);
            if (imb) o.mroibvol_dmean = (*imb)[k].vol_dmean, o.mroibtrd_dmean = (*imb)[k].trd_dmean;
            auto wit = windows.find(m.index());
            if (wit == windows.end()) wit = windows.emplace(m.index(), ret_windows(w.daily, cal, m)).first;
            o.ret_m1 = wit->second.ret_m1;
            o.ret_m7_m2 = wit->second.ret_m7_m2;
            if (auto cit = w.controls.find(m.prev().index()); cit != w.controls.end()) {
                const auto& c = cit->second;
                o.lmto = c.lmto;
                o.lvol = c.lvol;
                o.size = c.size;
                o.lbm = c.lbm;
                o.mv_prev = c.market_value;
                o.price_prev = c.price;
            }
            w.rows.push_back(std::move(o));
        }
    });

    std::vector<PanelObservation> rows;
    std::map<std::string, Series> weekly;
    DailyReturns daily;
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        const std::string& sym = symbols[i]->first;
        for (auto& r : work[i].rows) rows.push_back(std::move(r));
        weekly[sym] = work[i].weekly;
        daily.by_symbol[sym] = work[i].daily;
    }

    // Value-weighted market by previous month-end capitalization, over the
    // same set of symbols that can form rows in that month.
    daily.market.assign(cal.size(), std::nullopt);
    for (std::size_t d = 0; d < cal.size(); ++d) {
        const YearMonth m = YearMonth::of(cal.date(d));
        double num = 0, den = 0;
        for (std::size_t i = 0; i < symbols.size(); ++i) {
            const std::string& sym = symbols[i]->first;
            const auto& r = work[i].daily[d];
            if (!r) continue;
            if (universe ? !universe->eligible(sym, m) : !history.has_month(sym, m)) continue;
            auto cit = work[i].controls.find(m.prev().index());
            if (cit == work[i].controls.end() || !cit->second.market_value) continue;
            num += *cit->second.market_value * *r;
            den += *cit->second.market_value;
        }
        if (den > 0) daily.market[d] = num / den;
    }
    return PanelBuild{Panel(std::move(rows), std::move(weekly), cal.week_count()), std::move(daily)};
}

// Labels each row with its group (0..k-1) by the characteristic, ranked
// within the formation month; ties go to the lexicographically smaller
// symbol first. Rows missing the characteristic stay unlabeled.
inline void assign_subgroups(Panel& panel, Characteristic c, int k) {
    if (k < 1) throw ConfigError("InvalidValue", "group count must be positive");
    std::map<int, std::map<std::string, double>> by_month;
    for (const auto& r : panel.rows()) {
        auto v = r.characteristic(c);
        if (!v) continue;
        auto& m = by_month[r.month.index()];
        // First week of the month wins; the characteristic is a previous
        // month-end value so every week of the month carries the same one.
        m.emplace(r.symbol, *v);
    }
    std::map<int, std::map<std::string, std::int8_t>> labels;
    for (const auto& [month, vals] : by_month) {
        const std::size_t n = vals.size();
        if (n < static_cast<std::size_t>(k)) {
            throw DataError("TooFewSymbols", "month " + YearMonth::from_index(month).to_string() + " has " +
                                                 std::to_string(n) + " symbols for " + std::to_string(k) +
                                                 " groups");
        }
        std::vector<std::pair<double, std::string>> ranked;
        for (const auto& [s, v] : vals) ranked.emplace_back(v, s);
        std::sort(ranked.begin(), ranked.end());
        auto& lab = labels[month];
        for (std::size_t i = 0; i < n; ++i) {
            lab[ranked[i].second] = static_cast<std::int8_t>(i * static_cast<std::size_t>(k) / n);
        }
    }
    for (auto& r : panel.mutable_rows()) {
        auto& g = r.groups[static_cast<int>(c)];
        g = -1;
        auto mit = labels.find(r.month.index());
        if (mit == labels.end()) continue;
        auto sit = mit->second.find(r.symbol);
        if (sit != mit->second.end()) g = sit->second;
    }
}

inline const std::vector<std::string>& panel_columns() {
    static const std::vector<std::string> cols = {
        "symbol",        "week",          "week_start",     "month",          "ret",        "ret_lag1",
        "ret_lag2",      "mroibvol",      "mroibvol_lag1",  "mroibvol_lag2",  "mroibtrd",   "mroibtrd_lag1",
        "mroibtrd_lag2", "mroibvol_dmean", "mroibtrd_dmean", "ret_m1",        "ret_m7_m2",  "lmto",
        "lvol",          "size",          "lbm",            "mv_prev",        "price_prev", "cap_group",
        "price_group",   "turnover_group"};
    return cols;
}

namespace detail {

inline std::vector<std::optional<double> PanelObservation::*> panel_value_fields() {
    return {&PanelObservation::ret,           &PanelObservation::ret_lag1,       &PanelObservation::ret_lag2,
            &PanelObservation::mroibvol,      &PanelObservation::mroibvol_lag1,  &PanelObservation::mroibvol_lag2,
            &PanelObservation::mroibtrd,      &PanelObservation::mroibtrd_lag1,  &PanelObservation::mroibtrd_lag2,
            &PanelObservation::mroibvol_dmean, &PanelObservation::mroibtrd_dmean, &PanelObservation::ret_m1,
            &PanelObservation::ret_m7_m2,     &PanelObservation::lmto,           &PanelObservation::lvol,
            &PanelObservation::size,          &PanelObservation::lbm,            &PanelObservation::mv_prev,
            &PanelObservation::price_prev};
}

}  // namespace detail

inline void write_panel(std::ostream& out, const Panel& panel) {
    csv::write_row(out, panel_columns());
    const auto fields = detail::panel_value_fields();
    std::vector<std::string> cells;
    for (const auto& r : panel.rows()) {
        cells.clear();
        cells.push_back(r.symbol);
        cells.push_back(std::to_string(r.week));
        cells.push_back(r.week_start.to_string());
        cells.push_back(r.month.to_string());
        for (auto f : fields) cells.push_back(csv::format_double(r.*f));
        for (auto g : r.groups) cells.push_back(g < 0 ? std::string() : std::to_string(g));
        csv::write_row(out, cells);
    }
}

inline Panel read_panel(std::istream& in) {
    csv::Reader r(in);
    std::vector<PanelObservation> rows;
    if (r.empty_input()) return Panel::from_rows(std::move(rows));
    const auto& cols = panel_columns();
    std::vector<std::size_t> idx;
    for (const auto& c : cols) idx.push_back(r.require(c));
    const auto fields = detail::panel_value_fields();
    std::vector<std::string_view> f;
    while (r.next(f)) {
        const std::size_t line = r.line();
        PanelObservation o;
        o.symbol = std::string(f[idx[0]]);
        o.week = static_cast<std::size_t>(csv::parse_int(f[idx[1]], line, "week"));
        try {
            o.week_start = Date::parse(f[idx[2]]);
            o.month = YearMonth::parse(f[idx[3]]);
        } catch (const DataError& e) {
            throw DataError(e.code(), e.what(), line);
        }
        for (std::size_t j = 0; j < fields.size(); ++j) {
            o.*fields[j] = csv::parse_optional_double(f[idx[4 + j]], line, cols[4 + j].c_str());
        }
        for (std::size_t g = 0; g < 3; ++g) {
            auto cell = f[idx[4 + fields.size() + g]];
            o.groups[g] = cell.empty() ? -1 : static_cast<std::int8_t>(csv::parse_int(cell, line, "group"));
        }
        rows.push_back(std::move(o));
    }
    return Panel::from_rows(std::move(rows));
}

}  // namespace rtoi
