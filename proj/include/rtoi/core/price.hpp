#pragma once

#include <compare>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "rtoi/core/error.hpp"

namespace rtoi {

// Dollar amount in integer ten-thousandths. The subpenny digits (third and
// fourth decimal) carry the retail signal, so prices never pass through
// binary floating point on the way in or out.
struct Price {
    static constexpr std::int64_t kScale = 10000;

    std::int64_t ticks = 0;

    static constexpr Price from_ticks(std::int64_t t) { return Price{t}; }

    // Parses a decimal string. More than four decimals is an error unless
    // the extra digits are all zero (no precision would be lost).
    static Price parse(std::string_view s) {
        if (s.empty()) throw DataError("Malformed", "empty price");
        bool negative = false;
        std::size_t i = 0;
        if (s[0] == '-' || s[0] == '+') {
            negative = s[0] == '-';
            ++i;
        }
        std::int64_t whole = 0;
        std::size_t int_digits = 0;
        for (; i < s.size() && s[i] != '.'; ++i) {
            if (s[i] < '0' || s[i] > '9') throw DataError("Malformed", "invalid price '" + std::string(s) + "'");
            if (whole > 100'000'000'000LL) throw DataError("Malformed", "price out of range '" + std::string(s) + "'");
            whole = whole * 10 + (s[i] - '0');
            ++int_digits;
        }
        std::int64_t frac = 0;
        std::size_t frac_digits = 0;
        if (i < s.size()) {
            ++i;  // '.'
            for (; i < s.size(); ++i) {
                if (s[i] < '0' || s[i] > '9') throw DataError("Malformed", "invalid price '" + std::string(s) + "'");
                if (frac_digits < 4) {
                    frac = frac * 10 + (s[i] - '0');
                } else if (s[i] != '0') {
                    throw DataError("PrecisionExceeded",
                                    "price '" + std::string(s) + "' has more than 4 decimal digits");
                }
                ++frac_digits;
            }
        }
        if (int_digits == 0 && frac_digits == 0) throw DataError("Malformed", "invalid price '" + std::string(s) + "'");
        for (std::size_t d = frac_digits; d < 4; ++d) frac *= 10;
        std::int64_t t = whole * kScale + frac;
        return Price{negative ? -t : t};
    }

    double to_double() const { return static_cast<double>(ticks) / static_cast<double>(kScale); }

    // Always four decimals, e.g. "20.0070".
    std::string to_string() const {
        std::int64_t a = ticks < 0 ? -ticks : ticks;
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%s%lld.%04lld", ticks < 0 ? "-" : "",
                      static_cast<long long>(a / kScale), static_cast<long long>(a % kScale));
        return buf;
    }

    constexpr auto operator<=>(const Price&) const = default;
};

}  // namespace rtoi
