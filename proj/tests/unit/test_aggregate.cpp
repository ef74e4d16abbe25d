#include <catch_amalgamated.hpp>

#include <sstream>

#include "rtoi/aggregate/aggregate.hpp"
#include "rtoi/synth/market.hpp"

using namespace rtoi;
using Catch::Approx;

namespace {

SignedRetailTrade signed_trade(const char* sym, const char* date, Side side, std::int64_t size) {
    SignedRetailTrade s;
    s.trade.symbol = sym;
    s.trade.date = Date::parse(date);
    s.trade.size = size;
    s.side = side;
    return s;
}

DailyFlow flow(const char* date, std::int64_t bv, std::int64_t sv, std::int64_t bt, std::int64_t st) {
    return DailyFlow{"AAA", Date::parse(date), Method::Bjzz, bv, sv, bt, st};
}

}  // namespace

TEST_CASE("imbalance is (buy - sell) / (buy + sell) and undefined with no flow") {
    CHECK(*imbalance(300, 100) == Approx(0.5));
    CHECK(*imbalance(0, 100) == -1.0);
    CHECK_FALSE(imbalance(0, 0));
}

TEST_CASE("daily flows sum signed volume and counts") {
    std::vector<SignedRetailTrade> t = {signed_trade("AAA", "2020-03-02", Side::Buy, 100),
                                        signed_trade("AAA", "2020-03-02", Side::Buy, 50),
                                        signed_trade("AAA", "2020-03-02", Side::Sell, 30),
                                        signed_trade("BBB", "2020-03-02", Side::Sell, 10)};
    auto f = accumulate_flows(t, Method::Bjzz);
    REQUIRE(f.size() == 2);
    CHECK(f[0].symbol == "AAA");
    CHECK(f[0].mrbvol == 150);
    CHECK(f[0].mrsvol == 30);
    CHECK(f[0].mrbtrd == 2);
    CHECK(f[0].mrstrd == 1);
    CHECK(*f[0].mroibvol() == Approx(120.0 / 180.0));
    CHECK(*f[1].mroibvol() == -1.0);
}

TEST_CASE("weekly imbalance is a ratio of sums, the daily mean is kept apart") {
    auto cal = TradingCalendar::from_dates(synth::weekdays_from(Date::parse("2020-03-02"), 10));
    std::vector<DailyFlow> f = {flow("2020-03-02", 100, 0, 1, 0), flow("2020-03-03", 0, 300, 0, 1)};
    auto w = weekly_mroib(f, cal, 0);
    CHECK(*w.vol == Approx(-0.5));
    CHECK(*w.vol_dmean == Approx(0.0));
    CHECK(*w.trd == Approx(0.0));
    CHECK(w.active_days == 2);
    CHECK_FALSE(weekly_mroib(f, cal, 1).vol);
}

TEST_CASE("bulk weekly imbalances match the one-stock routine") {
    synth::MarketScenario sc;
    sc.symbols = 6;
    sc.days = 25;
    sc.events_per_day = 40;
    sc.spread = synth::SpreadMode::Wide;
    auto md = synth::gen_market(sc);
    auto days = classify_days(md.trades, md.quotes);
    auto flows = accumulate_flows(signed_stream(days, Method::Qmp), Method::Qmp);
    auto bulk = weekly_imbalances(flows, md.calendar);
    for (const auto& [sym, weeks] : bulk) {
        std::vector<DailyFlow> mine;
        for (const auto& f : flows) {
            if (f.symbol == sym) mine.push_back(f);
        }
        for (std::size_t w = 0; w < weeks.size(); ++w) {
            auto one = weekly_mroib(mine, md.calendar, w);
            CHECK(one.vol == weeks[w].vol);
            CHECK(one.trd == weeks[w].trd);
            CHECK(one.vol_dmean == weeks[w].vol_dmean);
            if (weeks[w].vol) {
                CHECK(*weeks[w].vol >= -1.0);
                CHECK(*weeks[w].vol <= 1.0);
            }
        }
    }
}

TEST_CASE("flows dated off the calendar are rejected") {
    auto cal = TradingCalendar::from_dates(synth::weekdays_from(Date::parse("2020-03-02"), 5));
    CHECK_THROWS_AS(weekly_imbalances({flow("2020-03-07", 1, 0, 1, 0)}, cal), DataError);
}

TEST_CASE("summary statistics use type-7 quantiles and the n-1 deviation") {
    auto s = summarize({1, 2, 3, 4});
    CHECK(s.n == 4u);
    CHECK(s.mean == 2.5);
    CHECK(s.median == 2.5);
    CHECK(s.q1 == 1.75);
    CHECK(s.q3 == 3.25);
    CHECK(s.std == Approx(std::sqrt(5.0 / 3.0)));
    CHECK(iqr({1, 2, 3, 4}) == 1.5);
    CHECK(std::isnan(summarize({7}).std));
    CHECK_THROWS_AS(summarize({}), DataError);
}

TEST_CASE("method correlation joins on stock-day") {
    std::vector<DailyFlow> a = {flow("2020-03-02", 1, 0, 1, 0), flow("2020-03-03", 0, 1, 0, 1),
                                flow("2020-03-04", 1, 1, 1, 1)};
    std::vector<DailyFlow> b = a;
    b.pop_back();
    CHECK(method_correlation(a, b, FlowVariable::Mroibvol) == Approx(1.0));
    CHECK_THROWS_AS(method_correlation(a, {}, FlowVariable::Mroibvol), NumericalError);
}

TEST_CASE("periods are whole calendar years") {
    auto p = parse_period("2016:2021");
    CHECK(p.label == "2016-2021");
    CHECK(p.contains(Date::parse("2016-01-01")));
    CHECK(p.contains(Date::parse("2021-12-31")));
    CHECK_FALSE(p.contains(Date::parse("2022-01-01")));
    CHECK_THROWS_AS(parse_period("2021:2016"), ConfigError);
    CHECK_THROWS_AS(parse_period("16:21"), ConfigError);
}

TEST_CASE("summary table has one row per variable and method") {
    std::vector<DailyFlow> a = {flow("2020-03-02", 5, 1, 2, 1), flow("2020-03-03", 1, 4, 1, 3),
                                flow("2020-03-04", 2, 2, 3, 1)};
    std::vector<DailyFlow> b = a;
    for (auto& f : b) f.method = Method::Qmp, f.mrbvol += 1;
    auto rows = summary_table(a, b, parse_period("2020:2020"));
    CHECK(rows.size() == 12u);
    CHECK(rows.front().variable == FlowVariable::Mrbvol);
    CHECK(rows.front().method == Method::Bjzz);
    CHECK(rows.back().method == Method::Qmp);
    CHECK(summary_table(a, b, parse_period("2010:2011")).empty());
}

TEST_CASE("flow files round-trip") {
    std::vector<DailyFlow> a = {flow("2020-03-02", 5, 1, 2, 1), flow("2020-03-03", 0, 0, 0, 0)};
    std::ostringstream out;
    write_flows(out, a);
    std::istringstream in(out.str());
    CHECK(read_flows(in) == a);
}
