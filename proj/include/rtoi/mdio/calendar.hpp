#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "rtoi/core/date.hpp"
#include "rtoi/core/error.hpp"

namespace rtoi {

enum class WeekRule {
    CalendarWeek,    // Monday-Friday calendar weeks
    RollingFiveDay,  // consecutive bins of five trading days
};

// Ordered trading dates partitioned into weeks. Weeks are dense indices
// 0..week_count()-1, disjoint, ordered, and hold 1-5 trading days each.
class TradingCalendar {
public:
    TradingCalendar() = default;

    // Builds from explicit (date, week id) pairs in file order. Week ids need
    // only be contiguous runs; they are renumbered densely.
    static TradingCalendar from_week_ids(const std::vector<std::pair<Date, std::int64_t>>& rows) {
        TradingCalendar cal;
        std::optional<std::int64_t> current;
        std::map<std::int64_t, bool> seen;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& [d, id] = rows[i];
            if (!cal.dates_.empty() && !(cal.dates_.back() < d)) {
                throw DataError("CalendarOrder", "calendar dates must be strictly increasing at " + d.to_string());
            }
            if (!current || *current != id) {
                if (seen.count(id)) {
                    throw DataError("CalendarOrder", "week id " + std::to_string(id) + " is not contiguous");
                }
                seen[id] = true;
                current = id;
                cal.week_start_.push_back(cal.dates_.size());
            }
            cal.dates_.push_back(d);
        }
        cal.finish();
        return cal;
    }

    static TradingCalendar from_dates(std::vector<Date> dates, WeekRule rule = WeekRule::CalendarWeek) {
        std::vector<std::pair<Date, std::int64_t>> rows;
        rows.reserve(dates.size());
        for (std::size_t i = 0; i < dates.size(); ++i) {
            std::int64_t id = 0;
            if (rule == WeekRule::CalendarWeek) {
                // Monday of the date's week identifies it.
                id = dates[i].days() - static_cast<std::int32_t>(dates[i].weekday());
            } else {
                id = static_cast<std::int64_t>(i / 5);
            }
            rows.emplace_back(dates[i], id);
        }
        return from_week_ids(rows);
    }

    std::size_t size() const { return dates_.size(); }
    bool empty() const { return dates_.empty(); }
    const std::vector<Date>& dates() const { return dates_; }
    Date date(std::size_t day) const { return dates_.at(day); }

    std::optional<std::size_t> index_of(Date d) const {
        auto it = std::lower_bound(dates_.begin(), dates_.end(), d);
        if (it == dates_.end() || *it != d) return std::nullopt;
        return static_cast<std::size_t>(it - dates_.begin());
    }

    std::size_t week_count() const { return week_start_.size(); }
    std::size_t week_of(std::size_t day) const { return day_week_.at(day); }

    // Half-open day-index range [first, last) of a week.
    std::pair<std::size_t, std::size_t> week_days(std::size_t week) const {
        std::size_t first = week_start_.at(week);
        std::size_t last = week + 1 < week_start_.size() ? week_start_[week + 1] : dates_.size();
        return {first, last};
    }

    Date week_first_date(std::size_t week) const { return dates_[week_days(week).first]; }
    Date week_last_date(std::size_t week) const { return dates_[week_days(week).second - 1]; }

    // A week belongs to the month of its first trading day.
    YearMonth week_month(std::size_t week) const { return YearMonth::of(week_first_date(week)); }

    // Half-open day-index range of a calendar month, if any trading day falls in it.
    std::optional<std::pair<std::size_t, std::size_t>> month_days(YearMonth m) const {
        auto it = month_range_.find(m.index());
        if (it == month_range_.end()) return std::nullopt;
        return it->second;
    }

    std::vector<YearMonth> months() const {
        std::vector<YearMonth> out;
        for (const auto& [idx, range] : month_range_) out.push_back(YearMonth::from_index(idx));
        return out;
    }

private:
    void finish() {
        day_week_.assign(dates_.size(), 0);
        for (std::size_t w = 0; w < week_start_.size(); ++w) {
            auto [first, last] = week_days(w);
            if (last - first > 5) {
                throw DataError("CalendarWeek", "week starting " + dates_[first].to_string() + " has more than 5 days");
            }
            for (std::size_t d = first; d < last; ++d) day_week_[d] = w;
        }
        for (std::size_t d = 0; d < dates_.size(); ++d) {
            int m = YearMonth::of(dates_[d]).index();
            auto it = month_range_.find(m);
            if (it == month_range_.end()) {
                month_range_[m] = {d, d + 1};
            } else {
                it->second.second = d + 1;
            }
        }
    }

    std::vector<Date> dates_;
    std::vector<std::size_t> week_start_;
    std::vector<std::size_t> day_week_;
    std::map<int, std::pair<std::size_t, std::size_t>> month_range_;
};

}  // namespace rtoi
