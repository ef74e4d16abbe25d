#include <catch_amalgamated.hpp>

#include <sstream>

#include "rtoi/cli/manifest.hpp"
#include "rtoi/cli/pipeline.hpp"
#include "rtoi/cli/run_config.hpp"
#include "rtoi/cli/verify.hpp"
#include "rtoi/synth/market.hpp"
#include "rtoi/synth/panel_gen.hpp"

using namespace rtoi;
using namespace rtoi::cli;

namespace {

struct MarketFiles {
    std::string trades, quotes, daily, factors, calendar;
};

const MarketFiles& market_files() {
    static const MarketFiles f = [] {
        synth::MarketScenario sc;
        sc.seed = 21;
        sc.symbols = 6;
        sc.days = 70;
        sc.events_per_day = 15;
        sc.spread = synth::SpreadMode::Wide;
        auto md = synth::gen_market(sc);
        MarketFiles m;
        m.trades = render([&](std::ostream& o) { write_trades(o, md.trades); });
        m.quotes = render([&](std::ostream& o) { write_quotes(o, md.quotes); });
        m.daily = render([&](std::ostream& o) { write_daily(o, md.daily); });
        m.factors = render([&](std::ostream& o) { write_factors(o, md.factors); });
        m.calendar = render([&](std::ostream& o) { write_calendar(o, md.calendar); });
        return m;
    }();
    return f;
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

std::vector<std::string> values(const Files& f) {
    std::vector<std::string> v;
    for (const auto& [k, text] : f) v.push_back(text);
    return v;
}

}  // namespace

TEST_CASE("config keys are validated as they are set") {
    RunConfig c;
    CHECK(c.classify.band_low == 0.4);
    c.set("qmp.delay_ns", "5000");
    CHECK(c.classify.delay_ns == 5000);
    c.set("calendar.week_rule", "rolling5");
    CHECK(c.week_rule == WeekRule::RollingFiveDay);
    c.set("eventstudy.cutoffs", "2, 5, 8");
    CHECK(c.event.cutoffs == std::array<int, 3>{2, 5, 8});
    CHECK_THROWS_AS(c.set("qmp.bandlow", "0.3"), ConfigError);
    CHECK_THROWS_AS(c.set("qmp.delay_ns", "soon"), ConfigError);
    CHECK_THROWS_AS(c.set("panel.universe", "maybe"), ConfigError);
    CHECK_THROWS_AS(c.set("eventstudy.cutoffs", "5,1,9"), ConfigError);
    CHECK_THROWS_AS(c.apply("novalue"), ConfigError);
}

TEST_CASE("cross-key checks run after every assignment") {
    RunConfig c;
    c.apply("qmp.band_low=0.7");
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.apply("qmp.band_high = 0.8");
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("config files load with comments and canonicalize") {
    std::istringstream in("# run settings\n\npanel.return_mode = close\nschema.close=PRC\n");
    RunConfig c;
    c.load(in);
    CHECK(c.mode == ReturnMode::Close);
    CHECK(c.schema.rename.at("close") == "PRC");
    const auto text = c.canonical();
    CHECK(text.find("panel.return_mode=close\n") != std::string::npos);
    CHECK(text.find("qmp.band_low=0.4\n") != std::string::npos);
    RunConfig d;
    d.apply("schema.close=PRC");
    d.apply("panel.return_mode=close");
    CHECK(d.canonical() == text);  // order of assignment does not matter
    std::istringstream bad("justakey\n");
    CHECK_THROWS_AS(RunConfig().load(bad), ConfigError);
}

TEST_CASE("schema renames reach the daily parser") {
    auto daily = market_files().daily;
    daily.replace(daily.find("close"), 5, "PRC");
    RunConfig c;
    PanelInputs in{daily, {}, market_files().calendar};
    CHECK_THROWS_AS(build_panels(in, c, 1), DataError);
    c.apply("schema.close=PRC");
    CHECK_NOTHROW(build_panels(in, c, 1));
}

TEST_CASE("the stages chain from ticks to tables") {
    const auto& m = market_files();
    RunConfig cfg;
    auto signed_files = classify_stage(m.trades, m.quotes, {Method::Bjzz, Method::Qmp}, cfg, 1);
    REQUIRE(signed_files.count("signed_bjzz.csv"));
    REQUIRE(signed_files.count("signed_qmp.csv"));
    CHECK(lines(signed_files.at("classify_report.csv")) == 1 + 6 * 70);

    auto agg = aggregate_stage({signed_files.at("signed_bjzz.csv"), signed_files.at("signed_qmp.csv")}, {}, 1);
    REQUIRE(agg.count("table1.csv"));
    CHECK(lines(agg.at("table1.csv")) == 1 + 12);
    CHECK(agg.at("table1.csv").find("2019-2019") != std::string::npos);

    PanelInputs pin{m.daily, {agg.at("dailyflow_bjzz.csv"), agg.at("dailyflow_qmp.csv")}, m.calendar};
    auto panels = panel_stage(pin, cfg, 1);
    CHECK(panels.count("panel_bjzz_bidask.csv"));
    CHECK(panels.count("panel_qmp_bidask.csv"));

    StudyRequest req;
    req.inputs = pin;
    req.factors_csv = m.factors;
    auto tables = study_stage(req, cfg, 1);
    CHECK(tables.size() == 7u);
    // Six symbols cannot carry the cross-sections, yet every table keeps its layout.
    CHECK(lines(tables.at("table2.csv")) == 1 + 2 * 2 * 10);
    CHECK(tables.at("table2.csv").find("TooFew") != std::string::npos);
}

TEST_CASE("only one method's signed file yields flows but no summary table") {
    const auto& m = market_files();
    auto s = classify_stage(m.trades, m.quotes, {Method::Qmp}, RunConfig{}, 1);
    CHECK_FALSE(s.count("signed_bjzz.csv"));
    auto agg = aggregate_stage({s.at("signed_qmp.csv")}, {}, 1);
    CHECK(agg.count("dailyflow_qmp.csv"));
    CHECK_FALSE(agg.count("table1.csv"));
}

TEST_CASE("stage outputs do not depend on the thread count") {
    const auto& m = market_files();
    RunConfig cfg;
    auto a = classify_stage(m.trades, m.quotes, {Method::Bjzz, Method::Qmp}, cfg, 1);
    auto b = classify_stage(m.trades, m.quotes, {Method::Bjzz, Method::Qmp}, cfg, 4);
    CHECK(values(a) == values(b));
    auto fa = aggregate_stage({a.at("signed_bjzz.csv"), a.at("signed_qmp.csv")}, {}, 1);
    auto fb = aggregate_stage({a.at("signed_bjzz.csv"), a.at("signed_qmp.csv")}, {}, 4);
    CHECK(values(fa) == values(fb));
    PanelInputs pin{m.daily, {fa.at("dailyflow_qmp.csv")}, std::nullopt};
    CHECK(values(panel_stage(pin, cfg, 1)) == values(panel_stage(pin, cfg, 4)));
}

TEST_CASE("study requests are checked before any work") {
    RunConfig cfg;
    StudyRequest none;
    CHECK_THROWS_AS(study_stage(none, cfg, 1), ConfigError);

    StudyRequest nine;
    nine.panel_csv = "";
    nine.tables = {9};
    CHECK_THROWS_AS(study_stage(nine, cfg, 1), ConfigError);

    synth::PanelScenario sc;
    sc.firms = 60;
    sc.weeks = 30;
    auto sp = synth::gen_panel(sc);
    StudyRequest two;
    two.panel_csv = render([&](std::ostream& o) { write_panel(o, sp.panel); });
    CHECK_THROWS_AS(study_stage(two, cfg, 1), ConfigError);  // both methods on one panel
    two.methods = {Method::Qmp};
    two.tables = {8};
    CHECK_THROWS_AS(study_stage(two, cfg, 1), ConfigError);  // no daily returns
    two.tables = {6};
    CHECK_THROWS_AS(study_stage(two, cfg, 1), ConfigError);  // no factors
    two.tables = {2, 3};
    two.measures = {studies::Measure::Vol};
    auto out = study_stage(two, cfg, 1);
    CHECK(out.at("table2.csv").find("QMP 2010-2010") != std::string::npos);
    CHECK(out.at("table2.csv").find("TooFew") == std::string::npos);
}

TEST_CASE("market overrides read by date") {
    auto cal = TradingCalendar::from_dates(synth::weekdays_from(Date::parse("2020-03-02"), 3));
    auto s = read_market("date,ret\n2020-03-03,0.01\n2021-01-01,0.5\n", cal);
    REQUIRE(s.size() == 3u);
    CHECK_FALSE(s[0]);
    CHECK(*s[1] == 0.01);
}

TEST_CASE("digests and manifests are deterministic") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    Manifest m;
    m.command = "classify";
    m.args = {"--trades=t.csv"};
    RunConfig c;
    m.config = c.values;
    m.config_text = c.canonical();
    m.inputs["t.csv"] = sha256_hex("x");
    m.outputs["signed_qmp.csv"] = sha256_hex("y");
    const auto j = m.to_json();
    CHECK(j == m.to_json());
    CHECK(j.find("\"config_hash\": \"" + sha256_hex(c.canonical()) + "\"") != std::string::npos);
    CHECK(j.find("\"command\"") < j.find("\"outputs\""));
    CHECK(j.back() == '\n');
}

TEST_CASE("the built-in self-check passes") {
    for (const auto& c : verify_all()) {
        INFO(c.name << ": " << c.detail);
        CHECK(c.pass);
    }
}
