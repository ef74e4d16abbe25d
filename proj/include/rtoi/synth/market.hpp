#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "rtoi/classify/classify.hpp"
#include "rtoi/core/csv.hpp"
#include "rtoi/core/date.hpp"
#include "rtoi/core/error.hpp"
#include "rtoi/mdio/calendar.hpp"
#include "rtoi/mdio/records.hpp"
#include "rtoi/synth/rng.hpp"

namespace rtoi::synth {

enum class SpreadMode { Penny, Wide };

struct MarketScenario {
    std::uint64_t seed = 1;
    int symbols = 10;
    Date start = Date::from_ymd(2019, 1, 2);
    int days = 5;                 // trading days (weekdays)
    int events_per_day = 100;     // quote updates per symbol-day, each followed by one trade
    SpreadMode spread = SpreadMode::Penny;
    int wide_min_cents = 2;
    int wide_max_cents = 10;
    double retail_share = 0.5;    // probability a trade is a retail print
    double band_share = 0.1;      // retail prints whose improvement lands in [0.40, 0.60] of a cent
    // Improvement outside the band: false keeps it under 0.40 of a cent (the
    // subpenny rule then signs every such print correctly); true draws it
    // anywhere in (0, 1) cent.
    bool full_improvement = false;
    double midpoint_cross_share = 0.05;  // institutional off-exchange prints at the midpoint
};

// Ground truth for one trade, keyed by its row position in the trade file.
struct TruthRecord {
    std::uint64_t trade_id = 0;
    std::string symbol;
    Date date;
    std::int64_t ts_ns = 0;
    Side true_side = Side::Buy;
    bool is_retail = false;

    bool operator==(const TruthRecord&) const = default;
};

struct MarketData {
    std::vector<TradeRecord> trades;
    std::vector<QuoteRecord> quotes;
    std::vector<DailySecurityRecord> daily;
    std::vector<FactorRecord> factors;
    TradingCalendar calendar;
    std::vector<TruthRecord> truth;
};

inline std::string symbol_name(int i) {
    std::string s = "S";
    std::string d = std::to_string(i);
    s.append(d.size() < 3 ? 3 - d.size() : 0, '0');
    return s + d;
}

inline std::vector<Date> weekdays_from(Date start, int n) {
    std::vector<Date> out;
    for (Date d = start; static_cast<int>(out.size()) < n; d = d.plus_days(1)) {
        if (d.weekday() < 5) out.push_back(d);
    }
    return out;
}

inline constexpr std::int64_t kOpenNs = 34'200'000'000'000LL;   // 09:30
inline constexpr std::int64_t kCloseNs = 57'600'000'000'000LL;  // 16:00

// Quotes on a whole-cent grid, one trade after each quote update. Retail
// prints go off-exchange ("D") at the ask less a subpenny improvement for
// buys, or the bid plus one for sells. Institutional trades print on an
// exchange at the quote, or off-exchange at a round penny or the midpoint.
inline MarketData gen_market(const MarketScenario& sc) {
    if (sc.symbols < 1 || sc.days < 1 || sc.events_per_day < 1) {
        throw ConfigError("InvalidValue", "market scenario needs symbols, days and events >= 1");
    }
    if (sc.wide_min_cents < 2 || sc.wide_max_cents < sc.wide_min_cents) {
        throw ConfigError("InvalidValue", "wide spreads must satisfy 2 <= min <= max cents");
    }
    MarketData md;
    const auto dates = weekdays_from(sc.start, sc.days);
    md.calendar = TradingCalendar::from_dates(dates);
    Rng rng(sc.seed);

    struct SymbolState {
        std::string name;
        std::int64_t mid_cents;
        std::int64_t shrout;
        int share_code;
        double bm;
    };
    std::vector<SymbolState> syms;
    for (int i = 0; i < sc.symbols; ++i) {
        syms.push_back({symbol_name(i), rng.integer(1000, 8000), rng.integer(10, 200) * 1'000'000,
                        rng.bernoulli(0.5) ? 10 : 11, rng.uniform(0.3, 1.5)});
    }
    const std::int64_t gap = (kCloseNs - kOpenNs) / sc.events_per_day;
    const char venues[] = {'N', 'Q', 'P', 'Z'};

    for (Date day : dates) {
        for (auto& s : syms) {
            std::int64_t volume = 0;
            Price last_bid, last_ask;
            for (int e = 0; e < sc.events_per_day; ++e) {
                s.mid_cents = std::max<std::int64_t>(100, s.mid_cents + rng.integer(-1, 1));
                const std::int64_t spread =
                    sc.spread == SpreadMode::Penny ? 1 : rng.integer(sc.wide_min_cents, sc.wide_max_cents);
                const std::int64_t bid_c = s.mid_cents - spread / 2;
                const Price bid{bid_c * 100}, ask{(bid_c + spread) * 100};
                const std::int64_t tq = kOpenNs + e * gap;
                md.quotes.push_back({s.name, day, tq, bid, ask, rng.integer(1, 50) * 100, rng.integer(1, 50) * 100,
                                     md.quotes.size()});
                last_bid = bid;
                last_ask = ask;

                TradeRecord t;
                t.symbol = s.name;
                t.date = day;
                t.ts_ns = tq + gap / 2;
                t.seq = md.trades.size();
                TruthRecord truth{t.seq, s.name, day, t.ts_ns, rng.bernoulli(0.5) ? Side::Buy : Side::Sell, false};
                if (rng.bernoulli(sc.retail_share)) {
                    truth.is_retail = true;
                    std::int64_t delta;  // improvement in ten-thousandths of a dollar
                    if (rng.bernoulli(sc.band_share)) delta = rng.integer(40, 60);
                    else if (!sc.full_improvement) delta = rng.integer(1, 39);
                    else {
                        delta = rng.integer(1, 78);
                        if (delta >= 40) delta += 21;  // skip the band: 40..78 -> 61..99
                    }
                    t.price = truth.true_side == Side::Buy ? Price{ask.ticks - delta} : Price{bid.ticks + delta};
                    t.exchange = 'D';
                    t.size = rng.integer(1, 500);
                } else {
                    t.size = rng.integer(1, 50) * 100;
                    if (rng.bernoulli(sc.midpoint_cross_share)) {
                        t.price = Price{(bid.ticks + ask.ticks) / 2};
                        t.exchange = 'D';
                    } else if (rng.bernoulli(0.2)) {
                        t.price = truth.true_side == Side::Buy ? ask : bid;
                        t.exchange = 'D';
                    } else {
                        t.price = truth.true_side == Side::Buy ? ask : bid;
                        t.exchange = venues[rng.integer(0, 3)];
                    }
                }
                volume += t.size;
                md.trades.push_back(t);
                md.truth.push_back(truth);
            }
            DailySecurityRecord d;
            d.symbol = s.name;
            d.date = day;
            d.bid = last_bid;
            d.ask = last_ask;
            d.close = Price{s.mid_cents * 100};
            d.shares_outstanding = s.shrout;
            d.share_code = s.share_code;
            d.book_equity = s.bm * static_cast<double>(s.mid_cents) / 100.0 * static_cast<double>(s.shrout);
            d.volume = volume;
            md.daily.push_back(d);
        }
        md.factors.push_back({day, rng.normal(0.0004, 0.01), rng.normal(0, 0.005), rng.normal(0, 0.005), 0.0001});
    }
    return md;
}

inline void write_truth(std::ostream& out, const std::vector<TruthRecord>& rows) {
    out << "trade_id,symbol,date,ts,true_side,is_retail\n";
    for (const auto& r : rows) {
        out << r.trade_id << ',' << r.symbol << ',' << r.date.to_string() << ',' << r.ts_ns << ','
            << to_string(r.true_side) << ',' << (r.is_retail ? 1 : 0) << '\n';
    }
}

inline std::vector<TruthRecord> read_truth(std::istream& in) {
    csv::Reader rd(in);
    std::vector<TruthRecord> out;
    if (rd.empty_input()) return out;
    const auto i_id = rd.require("trade_id"), i_sym = rd.require("symbol"), i_date = rd.require("date"),
               i_ts = rd.require("ts"), i_side = rd.require("true_side"), i_ret = rd.require("is_retail");
    std::vector<std::string_view> f;
    while (rd.next(f)) {
        const auto line = rd.line();
        TruthRecord r;
        r.trade_id = static_cast<std::uint64_t>(csv::parse_int(f[i_id], line, "trade id"));
        r.symbol = std::string(f[i_sym]);
        r.date = Date::parse(f[i_date]);
        r.ts_ns = csv::parse_int(f[i_ts], line, "timestamp");
        r.true_side = parse_side(f[i_side]);
        r.is_retail = csv::parse_int(f[i_ret], line, "is_retail") != 0;
        out.push_back(std::move(r));
    }
    return out;
}

struct Confusion {
    std::size_t retail = 0;
    std::size_t signed_correct = 0;
    std::size_t signed_wrong = 0;
    std::size_t unsigned_retail = 0;
    std::size_t false_positive = 0;  // signed but not retail

    double identification_rate() const {
        return retail ? static_cast<double>(signed_correct + signed_wrong) / static_cast<double>(retail) : 0.0;
    }
    double sign_accuracy() const {
        const auto s = signed_correct + signed_wrong;
        return s ? static_cast<double>(signed_correct) / static_cast<double>(s) : 0.0;
    }
    double unsigned_rate() const {
        return retail ? static_cast<double>(unsigned_retail) / static_cast<double>(retail) : 0.0;
    }
};

// Scores one method's signed output against the truth, joined on trade id.
inline Confusion confusion(const std::vector<TruthRecord>& truth, const std::vector<SignedRetailTrade>& signed_trades) {
    std::map<std::uint64_t, const TruthRecord*> by_id;
    for (const auto& t : truth) by_id.emplace(t.trade_id, &t);
    std::map<std::uint64_t, Side> called;
    for (const auto& s : signed_trades) {
        auto it = by_id.find(s.trade.seq);
        if (it == by_id.end() || it->second->symbol != s.trade.symbol || it->second->ts_ns != s.trade.ts_ns) {
            throw DataError("IdMismatch", "signed trade " + std::to_string(s.trade.seq) + " (" + s.trade.symbol +
                                              ") has no matching truth record");
        }
        called[s.trade.seq] = s.side;
    }
    Confusion c;
    for (const auto& t : truth) {
        auto it = called.find(t.trade_id);
        if (!t.is_retail) {
            if (it != called.end()) ++c.false_positive;
            continue;
        }
        ++c.retail;
        if (it == called.end()) ++c.unsigned_retail;
        else if (it->second == t.true_side) ++c.signed_correct;
        else ++c.signed_wrong;
    }
    return c;
}

}  // namespace rtoi::synth
