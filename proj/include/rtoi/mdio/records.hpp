#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "rtoi/core/date.hpp"
#include "rtoi/core/error.hpp"
#include "rtoi/core/price.hpp"

namespace rtoi {

inline constexpr std::int64_t kNanosPerDay = 86'400'000'000'000LL;

// One printed transaction. `seq` is the 0-based row position in the source
// file and doubles as the trade id used to join against ground truth.
struct TradeRecord {
    std::string symbol;
    Date date;
    std::int64_t ts_ns = 0;  // nanoseconds since midnight, exchange-local
    Price price;
    std::int64_t size = 0;
    char exchange = ' ';  // 'D' = FINRA TRF (off-exchange)
    std::uint64_t seq = 0;

    bool operator==(const TradeRecord&) const = default;
};

struct QuoteRecord {
    std::string symbol;
    Date date;
    std::int64_t ts_ns = 0;
    Price bid;
    Price ask;
    std::int64_t bid_size = 0;
    std::int64_t ask_size = 0;
    std::uint64_t seq = 0;

    // Locked (bid == ask) counts as crossed: the midpoint is degenerate.
    bool crossed() const { return bid >= ask; }

    bool operator==(const QuoteRecord&) const = default;
};

enum class TickPilotGroup { None, G1, G2, G3 };

inline TickPilotGroup parse_pilot_group(std::string_view s, std::size_t line = 0) {
    if (s.empty() || s == "none" || s == "NONE" || s == "0") return TickPilotGroup::None;
    if (s == "G1" || s == "g1") return TickPilotGroup::G1;
    if (s == "G2" || s == "g2") return TickPilotGroup::G2;
    if (s == "G3" || s == "g3") return TickPilotGroup::G3;
    throw DataError("Malformed", "invalid tick pilot group '" + std::string(s) + "'",
                    line ? std::optional<std::size_t>(line) : std::nullopt);
}

inline const char* to_string(TickPilotGroup g) {
    switch (g) {
        case TickPilotGroup::None: return "none";
        case TickPilotGroup::G1: return "G1";
        case TickPilotGroup::G2: return "G2";
        case TickPilotGroup::G3: return "G3";
    }
    return "none";
}

// End-of-day security record. `volume` is that day's share volume; monthly
// turnover sums it over the month.
struct DailySecurityRecord {
    std::string symbol;
    Date date;
    std::optional<Price> close;
    std::optional<Price> bid;
    std::optional<Price> ask;
    std::int64_t shares_outstanding = 0;
    int share_code = 0;
    std::optional<double> book_equity;
    std::int64_t volume = 0;
    TickPilotGroup pilot = TickPilotGroup::None;

    bool operator==(const DailySecurityRecord&) const = default;
};

// Factor returns as decimal fractions over the record's period (a day or a
// week; weekly aggregation compounds whatever falls inside a week).
struct FactorRecord {
    Date date;
    double mkt_rf = 0.0;
    double smb = 0.0;
    double hml = 0.0;
    double rf = 0.0;

    bool operator==(const FactorRecord&) const = default;
};

}  // namespace rtoi
