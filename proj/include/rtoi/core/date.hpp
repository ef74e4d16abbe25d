#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "rtoi/core/error.hpp"

namespace rtoi {

// Calendar date stored as days since 1970-01-01. Value type.
class Date {
public:
    constexpr Date() = default;
    constexpr explicit Date(std::int32_t days_since_epoch) : days_(days_since_epoch) {}

    static Date from_ymd(int y, unsigned m, unsigned d) {
        std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
        if (!ymd.ok()) {
            throw DataError("Malformed", "invalid calendar date " + std::to_string(y) + "-" +
                                             std::to_string(m) + "-" + std::to_string(d));
        }
        return Date(static_cast<std::int32_t>(std::chrono::sys_days{ymd}.time_since_epoch().count()));
    }

    // Accepts "YYYY-MM-DD" or "YYYYMMDD".
    static Date parse(std::string_view s) {
        auto digits = [&](std::size_t pos, std::size_t len) -> int {
            int v = 0;
            for (std::size_t i = pos; i < pos + len; ++i) {
                if (s[i] < '0' || s[i] > '9') {
                    throw DataError("Malformed", "invalid date '" + std::string(s) + "'");
                }
                v = v * 10 + (s[i] - '0');
            }
            return v;
        };
        if (s.size() == 10 && s[4] == '-' && s[7] == '-') {
            return from_ymd(digits(0, 4), static_cast<unsigned>(digits(5, 2)), static_cast<unsigned>(digits(8, 2)));
        }
        if (s.size() == 8) {
            return from_ymd(digits(0, 4), static_cast<unsigned>(digits(4, 2)), static_cast<unsigned>(digits(6, 2)));
        }
        throw DataError("Malformed", "invalid date '" + std::string(s) + "'");
    }

    constexpr std::int32_t days() const { return days_; }

    std::chrono::year_month_day ymd() const {
        return std::chrono::year_month_day{std::chrono::sys_days{std::chrono::days{days_}}};
    }
    int year() const { return static_cast<int>(ymd().year()); }
    unsigned month() const { return static_cast<unsigned>(ymd().month()); }
    unsigned day() const { return static_cast<unsigned>(ymd().day()); }

    // 0 = Monday ... 6 = Sunday.
    unsigned weekday() const {
        return std::chrono::weekday{std::chrono::sys_days{std::chrono::days{days_}}}.iso_encoding() - 1;
    }

    Date plus_days(std::int32_t n) const { return Date(days_ + n); }

    std::string to_string() const {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", year(), month(), day());
        return buf;
    }

    constexpr auto operator<=>(const Date&) const = default;

private:
    std::int32_t days_ = 0;
};

// Calendar month as a dense index (year * 12 + month - 1).
class YearMonth {
public:
    constexpr YearMonth() = default;
    constexpr YearMonth(int year, unsigned month) : index_(year * 12 + static_cast<int>(month) - 1) {}
    static YearMonth of(const Date& d) { return YearMonth(d.year(), d.month()); }
    static constexpr YearMonth from_index(int index) {
        YearMonth ym;
        ym.index_ = index;
        return ym;
    }

    // Accepts "YYYY-MM".
    static YearMonth parse(std::string_view s) {
        if (s.size() != 7 || s[4] != '-') {
            throw DataError("Malformed", "invalid month '" + std::string(s) + "'");
        }
        int y = 0;
        unsigned m = 0;
        for (std::size_t i = 0; i < 4; ++i) {
            if (s[i] < '0' || s[i] > '9') throw DataError("Malformed", "invalid month '" + std::string(s) + "'");
            y = y * 10 + (s[i] - '0');
        }
        for (std::size_t i = 5; i < 7; ++i) {
            if (s[i] < '0' || s[i] > '9') throw DataError("Malformed", "invalid month '" + std::string(s) + "'");
            m = m * 10 + static_cast<unsigned>(s[i] - '0');
        }
        if (m < 1 || m > 12) throw DataError("Malformed", "invalid month '" + std::string(s) + "'");
        return YearMonth(y, m);
    }

    constexpr int index() const { return index_; }
    constexpr int year() const { return index_ >= 0 ? index_ / 12 : (index_ - 11) / 12; }
    constexpr unsigned month() const { return static_cast<unsigned>(index_ - year() * 12 + 1); }
    constexpr YearMonth plus(int months) const { return from_index(index_ + months); }
    constexpr YearMonth prev() const { return plus(-1); }

    std::string to_string() const {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d-%02u", year(), month());
        return buf;
    }

    constexpr auto operator<=>(const YearMonth&) const = default;

private:
    int index_ = 0;
};

}  // namespace rtoi
