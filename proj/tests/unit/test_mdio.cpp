#include <catch_amalgamated.hpp>

#include <sstream>

#include "rtoi/mdio/calendar.hpp"
#include "rtoi/mdio/parse.hpp"
#include "rtoi/mdio/universe.hpp"
#include "rtoi/synth/market.hpp"

using namespace rtoi;

namespace {

template <class Fn>
std::string text(Fn&& fn) {
    std::ostringstream o;
    fn(o);
    return o.str();
}

DailySecurityRecord month_end(const std::string& sym, const char* date, const char* close, int shrcd = 10,
                              TickPilotGroup pilot = TickPilotGroup::None) {
    DailySecurityRecord r;
    r.symbol = sym;
    r.date = Date::parse(date);
    if (close) r.close = Price::parse(close);
    r.shares_outstanding = 1000;
    r.share_code = shrcd;
    r.pilot = pilot;
    return r;
}

}  // namespace

TEST_CASE("writers and parsers round-trip generated records") {
    synth::MarketScenario sc;
    sc.symbols = 3;
    sc.days = 4;
    sc.events_per_day = 20;
    auto md = synth::gen_market(sc);

    std::istringstream ti(text([&](std::ostream& o) { write_trades(o, md.trades); }));
    CHECK(parse_trades(ti) == md.trades);
    std::istringstream qi(text([&](std::ostream& o) { write_quotes(o, md.quotes); }));
    CHECK(parse_quotes(qi) == md.quotes);
    std::istringstream di(text([&](std::ostream& o) { write_daily(o, md.daily); }));
    CHECK(parse_daily(di) == md.daily);
    std::istringstream fi(text([&](std::ostream& o) { write_factors(o, md.factors); }));
    CHECK(parse_factors(fi) == md.factors);
    std::istringstream ci(text([&](std::ostream& o) { write_calendar(o, md.calendar); }));
    auto cal = parse_calendar(ci);
    CHECK(cal.dates() == md.calendar.dates());
    CHECK(cal.week_count() == md.calendar.week_count());
}

TEST_CASE("tick files without a date column take the default date") {
    std::istringstream in("symbol,ts,price,size,ex\nAAA,34200000000000,10.0070,100,D\n");
    TickSchema s;
    s.default_date = Date::parse("2020-03-02");
    auto t = parse_trades(in, s);
    REQUIRE(t.size() == 1);
    CHECK(t[0].date == Date::parse("2020-03-02"));
    CHECK(t[0].seq == 0u);

    std::istringstream again("symbol,ts,price,size,ex\nAAA,34200000000000,10.0070,100,D\n");
    CHECK_THROWS_AS(parse_trades(again), DataError);
}

TEST_CASE("schema renames map file headers onto canonical columns") {
    std::istringstream in("SYM,TIME,PX,QTY,VENUE,DATE\nAAA,1,10.01,5,N,2020-03-02\n");
    TickSchema s;
    s.columns.rename = {{"symbol", "SYM"}, {"ts", "TIME"}, {"price", "PX"},
                        {"size", "QTY"},   {"ex", "VENUE"}, {"date", "DATE"}};
    auto t = parse_trades(in, s);
    REQUIRE(t.size() == 1);
    CHECK(t[0].exchange == 'N');
}

TEST_CASE("malformed tick rows carry their line number") {
    std::istringstream in("symbol,date,ts,price,size,ex\nAAA,2020-03-02,1,10.01,5,N\nAAA,2020-03-02,1,10.00001,5,N\n");
    try {
        parse_trades(in);
        FAIL("expected an error");
    } catch (const DataError& e) {
        CHECK(e.code() == "PrecisionExceeded");
        REQUIRE(e.line());
        CHECK(*e.line() == 3u);
    }
}

TEST_CASE("crossed quotes parse and are flagged") {
    std::istringstream in("symbol,date,ts,bid,ask,bsz,asz\nAAA,2020-03-02,1,10.02,10.01,1,1\n");
    auto q = parse_quotes(in);
    REQUIRE(q.size() == 1);
    CHECK(q[0].crossed());
}

TEST_CASE("calendar weeks partition trading days in order") {
    auto dates = synth::weekdays_from(Date::parse("2019-12-30"), 30);
    dates.erase(dates.begin() + 2);  // New Year holiday
    for (auto rule : {WeekRule::CalendarWeek, WeekRule::RollingFiveDay}) {
        auto cal = TradingCalendar::from_dates(dates, rule);
        std::size_t covered = 0;
        for (std::size_t w = 0; w < cal.week_count(); ++w) {
            auto [a, b] = cal.week_days(w);
            CHECK(a == covered);
            CHECK(b > a);
            CHECK(b - a <= 5);
            covered = b;
        }
        CHECK(covered == cal.size());
    }
    auto cal = TradingCalendar::from_dates(dates);
    CHECK(cal.week_days(0).second == 4u);  // four trading days in the holiday week
    CHECK(cal.week_month(0) == YearMonth(2019, 12));
}

TEST_CASE("non-contiguous week ids are rejected") {
    std::vector<std::pair<Date, std::int64_t>> rows = {
        {Date::parse("2020-01-06"), 1}, {Date::parse("2020-01-07"), 2}, {Date::parse("2020-01-08"), 1}};
    CHECK_THROWS_AS(TradingCalendar::from_week_ids(rows), DataError);
}

TEST_CASE("universe screens use the previous month-end record") {
    const YearMonth m(2017, 1);
    CHECK(screen(nullptr, m) == Exclusion::MissingPrevMonthEnd);
    auto ok = month_end("A", "2016-12-30", "5.00");
    CHECK_FALSE(screen(&ok, m).has_value());
    auto etf = month_end("A", "2016-12-30", "5.00", 73);
    CHECK(screen(&etf, m) == Exclusion::ShareCode);
    auto cheap = month_end("A", "2016-12-30", "0.9999");
    CHECK(screen(&cheap, m) == Exclusion::BelowOneDollar);
    auto dollar = month_end("A", "2016-12-30", "1.00");
    CHECK_FALSE(screen(&dollar, m).has_value());
    auto noclose = month_end("A", "2016-12-30", nullptr);
    CHECK(screen(&noclose, m) == Exclusion::MissingClose);
    auto g2 = month_end("A", "2016-12-30", "5.00", 10, TickPilotGroup::G2);
    CHECK(screen(&g2, m) == Exclusion::TickSizePilot);
    auto g1 = month_end("A", "2016-12-30", "5.00", 10, TickPilotGroup::G1);
    CHECK_FALSE(screen(&g1, m).has_value());
    CHECK_FALSE(screen(&g2, YearMonth(2018, 11)).has_value());  // pilot over
}

TEST_CASE("a stock that drops below a dollar re-enters the next month it recovers") {
    std::vector<DailySecurityRecord> rows = {
        month_end("A", "2019-01-31", "2.00"), month_end("A", "2019-02-28", "0.50"),
        month_end("A", "2019-03-29", "1.50"), month_end("A", "2019-04-30", "1.50"),
    };
    auto u = Universe::build(SecurityHistory(rows));
    CHECK_FALSE(u.eligible("A", YearMonth(2019, 1)));  // no December record
    CHECK(u.eligible("A", YearMonth(2019, 2)));
    CHECK_FALSE(u.eligible("A", YearMonth(2019, 3)));
    CHECK(u.eligible("A", YearMonth(2019, 4)));
}

TEST_CASE("month-end is the last record inside the month") {
    std::vector<DailySecurityRecord> rows = {month_end("A", "2019-01-30", "2.00"),
                                             month_end("A", "2019-01-31", "3.00"),
                                             month_end("A", "2019-02-01", "4.00")};
    SecurityHistory h(rows);
    const auto* e = h.month_end("A", YearMonth(2019, 1));
    REQUIRE(e);
    CHECK(e->close->to_string() == "3.0000");
    CHECK(h.month_end("A", YearMonth(2018, 12)) == nullptr);
    CHECK_THROWS_AS(SecurityHistory({rows[0], rows[0]}), DataError);
}
