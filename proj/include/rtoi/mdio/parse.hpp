#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "rtoi/core/csv.hpp"
#include "rtoi/core/date.hpp"
#include "rtoi/core/error.hpp"
#include "rtoi/core/price.hpp"
#include "rtoi/mdio/calendar.hpp"
#include "rtoi/mdio/records.hpp"

namespace rtoi {

// Column mapping plus the date to attach to tick rows when the file has no
// date column (one file per trading day is the usual layout).
struct TickSchema {
    csv::Schema columns;
    std::optional<Date> default_date;
};

namespace detail {

inline Price parse_price_at(std::string_view s, std::size_t line) {
    try {
        return Price::parse(s);
    } catch (const DataError& e) {
        throw DataError(e.code(), e.what(), line);
    }
}

inline std::optional<Price> parse_optional_price_at(std::string_view s, std::size_t line) {
    if (s.empty() || s == "NA") return std::nullopt;
    return parse_price_at(s, line);
}

inline Date parse_date_at(std::string_view s, std::size_t line) {
    try {
        return Date::parse(s);
    } catch (const DataError& e) {
        throw DataError(e.code(), e.what(), line);
    }
}

inline Date tick_date(const std::optional<std::size_t>& col, const std::vector<std::string_view>& f,
                      const TickSchema& schema, std::size_t line) {
    if (col) return parse_date_at(f[*col], line);
    if (schema.default_date) return *schema.default_date;
    throw DataError("MissingColumn", "no date column and no default date configured", line);
}

inline std::int64_t parse_timestamp_at(std::string_view s, std::size_t line) {
    std::int64_t ts = csv::parse_int(s, line, "timestamp");
    if (ts < 0 || ts >= kNanosPerDay) throw DataError("Malformed", "timestamp outside the trading day", line);
    return ts;
}

}  // namespace detail

// trades: symbol,ts,price,size,ex[,date]
inline std::vector<TradeRecord> parse_trades(std::istream& in, const TickSchema& schema = {}) {
    std::vector<TradeRecord> out;
    csv::Reader r(in);
    if (r.empty_input()) return out;
    const auto& c = schema.columns;
    std::size_t i_sym = r.require(c.column("symbol"));
    std::size_t i_ts = r.require(c.column("ts"));
    std::size_t i_px = r.require(c.column("price"));
    std::size_t i_sz = r.require(c.column("size"));
    std::size_t i_ex = r.require(c.column("ex"));
    auto i_date = r.find(c.column("date"));

    std::vector<std::string_view> f;
    while (r.next(f)) {
        const std::size_t line = r.line();
        TradeRecord t;
        t.symbol = std::string(f[i_sym]);
        if (t.symbol.empty()) throw DataError("Malformed", "empty symbol", line);
        t.date = detail::tick_date(i_date, f, schema, line);
        t.ts_ns = detail::parse_timestamp_at(f[i_ts], line);
        t.price = detail::parse_price_at(f[i_px], line);
        if (t.price.ticks <= 0) throw DataError("Malformed", "price must be positive", line);
        t.size = csv::parse_int(f[i_sz], line, "size");
        if (t.size <= 0) throw DataError("Malformed", "size must be positive", line);
        if (f[i_ex].size() != 1) throw DataError("Malformed", "exchange code must be one character", line);
        t.exchange = f[i_ex][0];
        t.seq = out.size();
        out.push_back(std::move(t));
    }
    return out;
}

// quotes: symbol,ts,bid,ask,bsz,asz[,date]. Crossed and locked quotes are
// kept; QuoteRecord::crossed() flags them.
inline std::vector<QuoteRecord> parse_quotes(std::istream& in, const TickSchema& schema = {}) {
    std::vector<QuoteRecord> out;
    csv::Reader r(in);
    if (r.empty_input()) return out;
    const auto& c = schema.columns;
    std::size_t i_sym = r.require(c.column("symbol"));
    std::size_t i_ts = r.require(c.column("ts"));
    std::size_t i_bid = r.require(c.column("bid"));
    std::size_t i_ask = r.require(c.column("ask"));
    std::size_t i_bsz = r.require(c.column("bsz"));
    std::size_t i_asz = r.require(c.column("asz"));
    auto i_date = r.find(c.column("date"));

    std::vector<std::string_view> f;
    while (r.next(f)) {
        const std::size_t line = r.line();
        QuoteRecord q;
        q.symbol = std::string(f[i_sym]);
        if (q.symbol.empty()) throw DataError("Malformed", "empty symbol", line);
        q.date = detail::tick_date(i_date, f, schema, line);
        q.ts_ns = detail::parse_timestamp_at(f[i_ts], line);
        q.bid = detail::parse_price_at(f[i_bid], line);
        q.ask = detail::parse_price_at(f[i_ask], line);
        if (q.bid.ticks <= 0 || q.ask.ticks <= 0) throw DataError("Malformed", "bid and ask must be positive", line);
        q.bid_size = csv::parse_int(f[i_bsz], line, "bid size");
        q.ask_size = csv::parse_int(f[i_asz], line, "ask size");
        if (q.bid_size < 0 || q.ask_size < 0) throw DataError("Malformed", "negative quote size", line);
        q.seq = out.size();
        out.push_back(std::move(q));
    }
    return out;
}

// daily: symbol,date,close,bid,ask,shrout,shrcd,be,vol,pilot. close/bid/ask/be
// may be empty; pilot may be omitted entirely.
inline std::vector<DailySecurityRecord> parse_daily(std::istream& in, const csv::Schema& c = {}) {
    std::vector<DailySecurityRecord> out;
    csv::Reader r(in);
    if (r.empty_input()) return out;
    std::size_t i_sym = r.require(c.column("symbol"));
    std::size_t i_date = r.require(c.column("date"));
    std::size_t i_close = r.require(c.column("close"));
    std::size_t i_bid = r.require(c.column("bid"));
    std::size_t i_ask = r.require(c.column("ask"));
    std::size_t i_shrout = r.require(c.column("shrout"));
    std::size_t i_shrcd = r.require(c.column("shrcd"));
    std::size_t i_be = r.require(c.column("be"));
    std::size_t i_vol = r.require(c.column("vol"));
    auto i_pilot = r.find(c.column("pilot"));

    std::vector<std::string_view> f;
    while (r.next(f)) {
        const std::size_t line = r.line();
        DailySecurityRecord d;
        d.symbol = std::string(f[i_sym]);
        if (d.symbol.empty()) throw DataError("Malformed", "empty symbol", line);
        d.date = detail::parse_date_at(f[i_date], line);
        d.close = detail::parse_optional_price_at(f[i_close], line);
        if (d.close && d.close->ticks <= 0) throw DataError("Malformed", "close must be positive", line);
        d.bid = detail::parse_optional_price_at(f[i_bid], line);
        d.ask = detail::parse_optional_price_at(f[i_ask], line);
        d.shares_outstanding = csv::parse_int(f[i_shrout], line, "shares outstanding");
        if (d.shares_outstanding < 0) throw DataError("Malformed", "negative shares outstanding", line);
        d.share_code = static_cast<int>(csv::parse_int(f[i_shrcd], line, "share code"));
        d.book_equity = csv::parse_optional_double(f[i_be], line, "book equity");
        d.volume = csv::parse_int(f[i_vol], line, "volume");
        if (d.volume < 0) throw DataError("Malformed", "negative volume", line);
        if (i_pilot) d.pilot = parse_pilot_group(f[*i_pilot], line);
        out.push_back(std::move(d));
    }
    return out;
}

// factors: date,mkt_rf,smb,hml,rf with strictly increasing dates.
inline std::vector<FactorRecord> parse_factors(std::istream& in, const csv::Schema& c = {}) {
    std::vector<FactorRecord> out;
    csv::Reader r(in);
    if (r.empty_input()) return out;
    std::size_t i_date = r.require(c.column("date"));
    std::size_t i_mkt = r.require(c.column("mkt_rf"));
    std::size_t i_smb = r.require(c.column("smb"));
    std::size_t i_hml = r.require(c.column("hml"));
    std::size_t i_rf = r.require(c.column("rf"));

    std::vector<std::string_view> f;
    while (r.next(f)) {
        const std::size_t line = r.line();
        FactorRecord x;
        x.date = detail::parse_date_at(f[i_date], line);
        if (!out.empty() && !(out.back().date < x.date)) {
            throw DataError("Malformed", "factor dates must be strictly increasing", line);
        }
        x.mkt_rf = csv::parse_double(f[i_mkt], line, "mkt_rf");
        x.smb = csv::parse_double(f[i_smb], line, "smb");
        x.hml = csv::parse_double(f[i_hml], line, "hml");
        x.rf = csv::parse_double(f[i_rf], line, "rf");
        out.push_back(x);
    }
    return out;
}

// calendar: date,week_id
inline TradingCalendar parse_calendar(std::istream& in, const csv::Schema& c = {}) {
    csv::Reader r(in);
    if (r.empty_input()) return {};
    std::size_t i_date = r.require(c.column("date"));
    std::size_t i_week = r.require(c.column("week_id"));
    std::vector<std::pair<Date, std::int64_t>> rows;
    std::vector<std::string_view> f;
    while (r.next(f)) {
        const std::size_t line = r.line();
        rows.emplace_back(detail::parse_date_at(f[i_date], line), csv::parse_int(f[i_week], line, "week id"));
    }
    return TradingCalendar::from_week_ids(rows);
}

// Writers emit the canonical headers; output re-parses to identical records.

inline void write_trades(std::ostream& out, const std::vector<TradeRecord>& rows) {
    out << "symbol,date,ts,price,size,ex\n";
    for (const auto& t : rows) {
        out << t.symbol << ',' << t.date.to_string() << ',' << t.ts_ns << ',' << t.price.to_string() << ','
            << t.size << ',' << t.exchange << '\n';
    }
}

inline void write_quotes(std::ostream& out, const std::vector<QuoteRecord>& rows) {
    out << "symbol,date,ts,bid,ask,bsz,asz\n";
    for (const auto& q : rows) {
        out << q.symbol << ',' << q.date.to_string() << ',' << q.ts_ns << ',' << q.bid.to_string() << ','
            << q.ask.to_string() << ',' << q.bid_size << ',' << q.ask_size << '\n';
    }
}

inline void write_daily(std::ostream& out, const std::vector<DailySecurityRecord>& rows) {
    auto opt_price = [](const std::optional<Price>& p) { return p ? p->to_string() : std::string(); };
    out << "symbol,date,close,bid,ask,shrout,shrcd,be,vol,pilot\n";
    for (const auto& d : rows) {
        out << d.symbol << ',' << d.date.to_string() << ',' << opt_price(d.close) << ',' << opt_price(d.bid) << ','
            << opt_price(d.ask) << ',' << d.shares_outstanding << ',' << d.share_code << ','
            << csv::format_double(d.book_equity) << ',' << d.volume << ',' << to_string(d.pilot) << '\n';
    }
}

inline void write_factors(std::ostream& out, const std::vector<FactorRecord>& rows) {
    out << "date,mkt_rf,smb,hml,rf\n";
    for (const auto& x : rows) {
        out << x.date.to_string() << ',' << csv::format_double(x.mkt_rf) << ',' << csv::format_double(x.smb) << ','
            << csv::format_double(x.hml) << ',' << csv::format_double(x.rf) << '\n';
    }
}

inline void write_calendar(std::ostream& out, const TradingCalendar& cal) {
    out << "date,week_id\n";
    for (std::size_t d = 0; d < cal.size(); ++d) out << cal.date(d).to_string() << ',' << cal.week_of(d) << '\n';
}

}  // namespace rtoi
