#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rtoi/core/date.hpp"
#include "rtoi/core/error.hpp"
#include "rtoi/mdio/records.hpp"

namespace rtoi {

// Daily records grouped by symbol, each group sorted by date. Symbols iterate
// in lexicographic order, which is the merge order used everywhere.
class SecurityHistory {
public:
    SecurityHistory() = default;

    explicit SecurityHistory(std::vector<DailySecurityRecord> records) {
        for (auto& r : records) by_symbol_[r.symbol].push_back(std::move(r));
        for (auto& [sym, rows] : by_symbol_) {
            std::stable_sort(rows.begin(), rows.end(),
                             [](const auto& a, const auto& b) { return a.date < b.date; });
            for (std::size_t i = 1; i < rows.size(); ++i) {
                if (rows[i].date == rows[i - 1].date) {
                    throw DataError("Duplicate", "two daily records for " + sym + " on " + rows[i].date.to_string());
                }
            }
        }
    }

    const std::map<std::string, std::vector<DailySecurityRecord>>& symbols() const { return by_symbol_; }

    const std::vector<DailySecurityRecord>* find(const std::string& symbol) const {
        auto it = by_symbol_.find(symbol);
        return it == by_symbol_.end() ? nullptr : &it->second;
    }

    // The symbol's last record dated inside month m, if any.
    const DailySecurityRecord* month_end(const std::string& symbol, YearMonth m) const {
        const auto* rows = find(symbol);
        if (!rows) return nullptr;
        Date next_first = Date::from_ymd(m.plus(1).year(), m.plus(1).month(), 1);
        auto it = std::lower_bound(rows->begin(), rows->end(), next_first,
                                   [](const auto& r, const Date& d) { return r.date < d; });
        if (it == rows->begin()) return nullptr;
        --it;
        return YearMonth::of(it->date) == m ? &*it : nullptr;
    }

    bool has_month(const std::string& symbol, YearMonth m) const {
        const auto* rows = find(symbol);
        if (!rows) return false;
        Date first = Date::from_ymd(m.year(), m.month(), 1);
        auto it = std::lower_bound(rows->begin(), rows->end(), first,
                                   [](const auto& r, const Date& d) { return r.date < d; });
        return it != rows->end() && YearMonth::of(it->date) == m;
    }

    std::set<YearMonth> months() const {
        std::set<YearMonth> out;
        for (const auto& [sym, rows] : by_symbol_) {
            for (const auto& r : rows) out.insert(YearMonth::of(r.date));
        }
        return out;
    }

private:
    std::map<std::string, std::vector<DailySecurityRecord>> by_symbol_;
};

enum class Exclusion { MissingPrevMonthEnd, ShareCode, MissingClose, BelowOneDollar, TickSizePilot };

inline const char* to_string(Exclusion e) {
    switch (e) {
        case Exclusion::MissingPrevMonthEnd: return "MissingPrevMonthEnd";
        case Exclusion::ShareCode: return "ShareCode";
        case Exclusion::MissingClose: return "MissingClose";
        case Exclusion::BelowOneDollar: return "BelowOneDollar";
        case Exclusion::TickSizePilot: return "TickSizePilot";
    }
    return "?";
}

struct UniverseMonth {
    std::set<std::string> eligible;
    std::vector<std::pair<std::string, Exclusion>> excluded;  // symbol order
};

inline constexpr YearMonth kTickPilotFirst{2016, 10};
inline constexpr YearMonth kTickPilotLast{2018, 10};
inline constexpr std::int64_t kMinPriceTicks = 1 * Price::kScale;

// Reason a symbol is ineligible for month m judged from its month-end record
// of m-1, or nothing if it passes. Exposed so tests can probe single records.
inline std::optional<Exclusion> screen(const DailySecurityRecord* prev_month_end, YearMonth m) {
    if (!prev_month_end) return Exclusion::MissingPrevMonthEnd;
    const auto& r = *prev_month_end;
    if (r.share_code != 10 && r.share_code != 11) return Exclusion::ShareCode;
    if (!r.close) return Exclusion::MissingClose;
    if (r.close->ticks < kMinPriceTicks) return Exclusion::BelowOneDollar;
    bool in_pilot_window = kTickPilotFirst <= m && m <= kTickPilotLast;
    if (in_pilot_window && (r.pilot == TickPilotGroup::G2 || r.pilot == TickPilotGroup::G3)) {
        return Exclusion::TickSizePilot;
    }
    return std::nullopt;
}

// Candidates are the symbols with at least one record in month m. Eligibility
// is decided once per month from the previous month-end record.
inline UniverseMonth apply_universe_filters(const SecurityHistory& history, YearMonth m) {
    UniverseMonth out;
    for (const auto& [sym, rows] : history.symbols()) {
        if (!history.has_month(sym, m)) continue;
        if (auto why = screen(history.month_end(sym, m.prev()), m)) {
            out.excluded.emplace_back(sym, *why);
        } else {
            out.eligible.insert(sym);
        }
    }
    return out;
}

// Eligible symbols for every month present in the data.
class Universe {
public:
    Universe() = default;

    static Universe build(const SecurityHistory& history) {
        Universe u;
        for (YearMonth m : history.months()) u.months_[m.index()] = apply_universe_filters(history, m);
        return u;
    }

    bool eligible(const std::string& symbol, YearMonth m) const {
        auto it = months_.find(m.index());
        return it != months_.end() && it->second.eligible.count(symbol) > 0;
    }

    const UniverseMonth* month(YearMonth m) const {
        auto it = months_.find(m.index());
        return it == months_.end() ? nullptr : &it->second;
    }

    const std::map<int, UniverseMonth>& months() const { return months_; }

private:
    std::map<int, UniverseMonth> months_;
};

}  // namespace rtoi
