#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "rtoi/core/csv.hpp"
#include "rtoi/core/error.hpp"
#include "rtoi/core/parallel.hpp"
#include "rtoi/core/price.hpp"
#include "rtoi/mdio/records.hpp"

namespace rtoi {

enum class Method { Bjzz, Qmp };
enum class Side { Buy, Sell };

inline const char* to_string(Method m) { return m == Method::Bjzz ? "bjzz" : "qmp"; }
inline const char* to_string(Side s) { return s == Side::Buy ? "buy" : "sell"; }

inline Method parse_method(std::string_view s) {
    if (s == "bjzz" || s == "BJZZ") return Method::Bjzz;
    if (s == "qmp" || s == "QMP") return Method::Qmp;
    throw DataError("Malformed", "unknown method '" + std::string(s) + "'");
}

inline Side parse_side(std::string_view s) {
    if (s == "buy" || s == "Buy" || s == "B") return Side::Buy;
    if (s == "sell" || s == "Sell" || s == "S") return Side::Sell;
    throw DataError("Malformed", "unknown direction '" + std::string(s) + "'");
}

struct ClassifyConfig {
    std::int64_t delay_ns = 0;
    double band_low = 0.4;
    double band_high = 0.6;
    double bjzz_buy_low = 0.6;
    double bjzz_sell_high = 0.4;
    // Extra trade-condition screen applied before identification (e.g.
    // regular-way only). Empty means every trade passes.
    std::function<bool(const TradeRecord&)> trade_filter;

    void validate() const {
        if (delay_ns < 0) throw ConfigError("InvalidValue", "qmp.delay_ns must be >= 0");
        if (!(0.0 <= band_low && band_low <= band_high && band_high <= 1.0)) {
            throw ConfigError("InvalidValue", "qmp band must satisfy 0 <= band_low <= band_high <= 1");
        }
        if (!(0.0 <= bjzz_sell_high && bjzz_sell_high <= bjzz_buy_low && bjzz_buy_low <= 1.0)) {
            throw ConfigError("InvalidValue", "bjzz thresholds must satisfy 0 <= sell_high <= buy_low <= 1");
        }
    }

    // Thresholds in thousandths of a cent (or of the spread), so every
    // comparison below is on integers.
    std::int64_t milli(double x) const { return std::llround(x * 1000.0); }
};

// Fractional cent of a price in hundredths: 20.0070 -> 70.
inline int subpenny_hundredths(Price p) {
    std::int64_t r = p.ticks % 100;
    if (r < 0) r += 100;
    return static_cast<int>(r);
}

inline double subpenny_fraction(Price p) { return subpenny_hundredths(p) / 100.0; }

struct Nbbo {
    Price bid;
    Price ask;
    bool operator==(const Nbbo&) const = default;
};

struct SignedRetailTrade {
    TradeRecord trade;
    Method method = Method::Bjzz;
    Side side = Side::Buy;
    int fraction_hundredths = 0;
    std::optional<Price> bid;  // QMP only
    std::optional<Price> ask;

    double fraction() const { return fraction_hundredths / 100.0; }
    bool operator==(const SignedRetailTrade&) const = default;
};

// Shared identification step: off-exchange print with a nonzero fractional cent.
inline bool is_retail_candidate(const TradeRecord& t, const ClassifyConfig& cfg = {}) {
    if (t.exchange != 'D') return false;
    if (subpenny_hundredths(t.price) == 0) return false;
    if (cfg.trade_filter && !cfg.trade_filter(t)) return false;
    return true;
}

inline std::optional<SignedRetailTrade> classify_bjzz(const TradeRecord& t, const ClassifyConfig& cfg = {}) {
    if (!is_retail_candidate(t, cfg)) return std::nullopt;
    const int h = subpenny_hundredths(t.price);
    const std::int64_t frac_milli = h * 10;
    std::optional<Side> side;
    if (frac_milli > cfg.milli(cfg.bjzz_buy_low)) {
        side = Side::Buy;
    } else if (frac_milli < cfg.milli(cfg.bjzz_sell_high)) {
        side = Side::Sell;
    }
    if (!side) return std::nullopt;
    return SignedRetailTrade{t, Method::Bjzz, *side, h, std::nullopt, std::nullopt};
}

enum class QmpReason { Signed, NotRetail, NoQuote, InsideBand };

inline const char* to_string(QmpReason r) {
    switch (r) {
        case QmpReason::Signed: return "Signed";
        case QmpReason::NotRetail: return "NotRetail";
        case QmpReason::NoQuote: return "NoQuote";
        case QmpReason::InsideBand: return "InsideBand";
    }
    return "?";
}

struct QmpOutcome {
    std::optional<SignedRetailTrade> signed_trade;
    QmpReason reason = QmpReason::NotRetail;
};

inline QmpOutcome classify_qmp(const TradeRecord& t, const std::optional<Nbbo>& nbbo, const ClassifyConfig& cfg = {}) {
    if (!is_retail_candidate(t, cfg)) return {std::nullopt, QmpReason::NotRetail};
    if (!nbbo || nbbo->bid >= nbbo->ask) return {std::nullopt, QmpReason::NoQuote};
    const std::int64_t bid = nbbo->bid.ticks;
    const std::int64_t ask = nbbo->ask.ticks;
    const std::int64_t p = t.price.ticks;
    const std::int64_t spread = ask - bid;
    const std::int64_t pos = 1000 * (p - bid);  // position in the spread, thousandths
    if (pos >= cfg.milli(cfg.band_low) * spread && pos <= cfg.milli(cfg.band_high) * spread) {
        return {std::nullopt, QmpReason::InsideBand};
    }
    const std::int64_t twice = 2 * p;
    if (twice == bid + ask) return {std::nullopt, QmpReason::InsideBand};
    Side side = twice > bid + ask ? Side::Buy : Side::Sell;
    return {SignedRetailTrade{t, Method::Qmp, side, subpenny_hundredths(t.price), nbbo->bid, nbbo->ask},
            QmpReason::Signed};
}

// Per-symbol quotes in time order with as-of lookup. Records sharing a
// timestamp keep file order, so the last of them prevails.
class QuoteTape {
public:
    QuoteTape() = default;

    static QuoteTape build(std::vector<QuoteRecord> quotes) {
        QuoteTape tape;
        for (auto& q : quotes) {
            if (!tape.date_) tape.date_ = q.date;
            else if (*tape.date_ != q.date) {
                throw DataError("DateMismatch", "quote tape spans more than one date (" + tape.date_->to_string() +
                                                    ", " + q.date.to_string() + ")");
            }
            tape.by_symbol_[q.symbol].push_back(std::move(q));
        }
        for (auto& [sym, rows] : tape.by_symbol_) {
            std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.ts_ns < b.ts_ns; });
        }
        return tape;
    }

    const std::optional<Date>& date() const { return date_; }

    // Quote in force at ts - delay. A crossed or locked prevailing quote
    // yields nothing; earlier quotes are not consulted.
    std::optional<Nbbo> prevailing(const std::string& symbol, std::int64_t ts_ns, std::int64_t delay_ns = 0) const {
        auto it = by_symbol_.find(symbol);
        if (it == by_symbol_.end()) return std::nullopt;
        const auto& rows = it->second;
        const std::int64_t cutoff = ts_ns - delay_ns;
        auto ub = std::upper_bound(rows.begin(), rows.end(), cutoff,
                                   [](std::int64_t t, const QuoteRecord& q) { return t < q.ts_ns; });
        if (ub == rows.begin()) return std::nullopt;
        const QuoteRecord& q = *(ub - 1);
        if (q.crossed()) return std::nullopt;
        return Nbbo{q.bid, q.ask};
    }

private:
    std::unordered_map<std::string, std::vector<QuoteRecord>> by_symbol_;
    std::optional<Date> date_;
};

inline std::optional<Nbbo> prevailing_nbbo(const QuoteTape& tape, const std::string& symbol, std::int64_t ts_ns,
                                           std::int64_t delay_ns = 0) {
    if (delay_ns < 0) throw ConfigError("InvalidValue", "quote delay must be >= 0");
    return tape.prevailing(symbol, ts_ns, delay_ns);
}

struct SymbolDay {
    std::string symbol;
    Date date;
    std::vector<SignedRetailTrade> bjzz;
    std::vector<SignedRetailTrade> qmp;
    std::size_t trades = 0;
    std::size_t identified = 0;      // passed the shared gate
    std::size_t bjzz_unsigned = 0;   // identified, fraction in the exclusion zone
    std::size_t qmp_unsigned = 0;    // identified, inside the band
    std::size_t qmp_no_quote = 0;    // identified, no usable quote

    bool operator==(const SymbolDay&) const = default;
};

// Classifies one day's trades under both methods. Output is in symbol order;
// within a symbol, trades keep file order.
inline std::vector<SymbolDay> classify_day(const std::vector<TradeRecord>& trades, const QuoteTape& tape,
                                           const ClassifyConfig& cfg = {}, unsigned threads = 1) {
    cfg.validate();
    std::map<std::string, std::vector<const TradeRecord*>> by_symbol;
    std::optional<Date> date;
    for (const auto& t : trades) {
        if (!date) date = t.date;
        else if (*date != t.date) throw DataError("DateMismatch", "trades span more than one date");
        by_symbol[t.symbol].push_back(&t);
    }
    if (date && tape.date() && *tape.date() != *date) {
        throw DataError("DateMismatch",
                        "trades dated " + date->to_string() + " but quotes dated " + tape.date()->to_string());
    }
    std::vector<const std::pair<const std::string, std::vector<const TradeRecord*>>*> parts;
    for (const auto& kv : by_symbol) parts.push_back(&kv);
    std::vector<SymbolDay> out(parts.size());
    parallel_for(parts.size(), threads, [&](std::size_t i) {
        SymbolDay& day = out[i];
        day.symbol = parts[i]->first;
        day.date = *date;
        for (const TradeRecord* t : parts[i]->second) {
            ++day.trades;
            if (!is_retail_candidate(*t, cfg)) continue;
            ++day.identified;
            if (auto s = classify_bjzz(*t, cfg)) day.bjzz.push_back(std::move(*s));
            else ++day.bjzz_unsigned;
            auto q = classify_qmp(*t, tape.prevailing(t->symbol, t->ts_ns, cfg.delay_ns), cfg);
            if (q.signed_trade) day.qmp.push_back(std::move(*q.signed_trade));
            else if (q.reason == QmpReason::NoQuote) ++day.qmp_no_quote;
            else ++day.qmp_unsigned;
        }
    });
    return out;
}

// Multi-day input: trades and quotes are split by date and each day is
// classified against its own tape. Days come out in date order.
inline std::vector<SymbolDay> classify_days(const std::vector<TradeRecord>& trades,
                                            const std::vector<QuoteRecord>& quotes, const ClassifyConfig& cfg = {},
                                            unsigned threads = 1) {
    std::map<Date, std::vector<TradeRecord>> trade_days;
    std::map<Date, std::vector<QuoteRecord>> quote_days;
    for (const auto& t : trades) trade_days[t.date].push_back(t);
    for (const auto& q : quotes) quote_days[q.date].push_back(q);
    std::vector<SymbolDay> out;
    for (auto& [d, ts] : trade_days) {
        auto qit = quote_days.find(d);
        QuoteTape tape = qit == quote_days.end() ? QuoteTape{} : QuoteTape::build(std::move(qit->second));
        auto day = classify_day(ts, tape, cfg, threads);
        for (auto& s : day) out.push_back(std::move(s));
    }
    return out;
}

// Flattens one method's stream in (date, symbol, file) order.
inline std::vector<SignedRetailTrade> signed_stream(const std::vector<SymbolDay>& days, Method m) {
    std::vector<SignedRetailTrade> out;
    for (const auto& d : days) {
        const auto& v = m == Method::Bjzz ? d.bjzz : d.qmp;
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

inline std::string format_fraction(int hundredths) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "0.%02d", hundredths);
    return buf;
}

// signed: symbol,date,ts,price,size,method,direction,fraction,bid,ask,trade_id
inline void write_signed(std::ostream& out, const std::vector<SignedRetailTrade>& rows) {
    out << "symbol,date,ts,price,size,method,direction,fraction,bid,ask,trade_id\n";
    for (const auto& s : rows) {
        out << s.trade.symbol << ',' << s.trade.date.to_string() << ',' << s.trade.ts_ns << ','
            << s.trade.price.to_string() << ',' << s.trade.size << ',' << to_string(s.method) << ','
            << to_string(s.side) << ',' << format_fraction(s.fraction_hundredths) << ','
            << (s.bid ? s.bid->to_string() : "") << ',' << (s.ask ? s.ask->to_string() : "") << ',' << s.trade.seq
            << '\n';
    }
}

inline std::vector<SignedRetailTrade> read_signed(std::istream& in) {
    std::vector<SignedRetailTrade> out;
    csv::Reader r(in);
    if (r.empty_input()) return out;
    std::size_t i_sym = r.require("symbol"), i_date = r.require("date"), i_ts = r.require("ts"),
                i_px = r.require("price"), i_sz = r.require("size"), i_m = r.require("method"),
                i_dir = r.require("direction"), i_bid = r.require("bid"), i_ask = r.require("ask");
    auto i_id = r.find("trade_id");
    std::vector<std::string_view> f;
    auto price_at = [&](std::string_view s) {
        try {
            return Price::parse(s);
        } catch (const DataError& e) {
            throw DataError(e.code(), e.what(), r.line());
        }
    };
    while (r.next(f)) {
        const std::size_t line = r.line();
        SignedRetailTrade s;
        s.trade.symbol = std::string(f[i_sym]);
        try {
            s.trade.date = Date::parse(f[i_date]);
            s.method = parse_method(f[i_m]);
            s.side = parse_side(f[i_dir]);
        } catch (const DataError& e) {
            throw DataError(e.code(), e.what(), line);
        }
        s.trade.ts_ns = csv::parse_int(f[i_ts], line, "timestamp");
        s.trade.price = price_at(f[i_px]);
        s.trade.size = csv::parse_int(f[i_sz], line, "size");
        s.trade.exchange = 'D';
        s.trade.seq = i_id ? static_cast<std::uint64_t>(csv::parse_int(f[*i_id], line, "trade id")) : out.size();
        s.fraction_hundredths = subpenny_hundredths(s.trade.price);
        if (!f[i_bid].empty()) s.bid = price_at(f[i_bid]);
        if (!f[i_ask].empty()) s.ask = price_at(f[i_ask]);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace rtoi
