#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rtoi/studies/eventstudy.hpp"
#include "rtoi/studies/longshort.hpp"
#include "rtoi/studies/regressions.hpp"
#include "rtoi/studies/tables.hpp"
#include "rtoi/synth/market.hpp"
#include "rtoi/synth/oracles.hpp"
#include "rtoi/synth/panel_gen.hpp"

using namespace rtoi;
using namespace rtoi::studies;
using Catch::Approx;

namespace {

synth::SyntheticPanel planted(int firms = 200, int weeks = 80, std::uint64_t seed = 5) {
    synth::PanelScenario sc;
    sc.seed = seed;
    sc.firms = firms;
    sc.weeks = weeks;
    return synth::gen_panel(sc);
}

// Linear-interpolation quantile on sorted data.
double quantile7(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

PanelObservation row(const std::string& sym, std::size_t week, double mroib, double mv) {
    PanelObservation o;
    o.symbol = sym;
    o.week = week;
    o.week_start = Date::from_ymd(2020, 1, 6).plus_days(7 * static_cast<int>(week));
    o.month = YearMonth::of(o.week_start);
    o.mroibvol = mroib;
    o.mroibvol_dmean = mroib;
    o.mv_prev = mv;
    return o;
}

}  // namespace

TEST_CASE("regression column names follow the table layout") {
    CHECK(weekly_names() == std::vector<std::string>{"Intercept", "Mroib(w-1)", "Ret(w-1)", "Ret(m-1)",
                                                     "Ret(m-7,m-2)", "Lmto", "Lvol", "Size", "Lbm"});
    CHECK(first_stage_names().size() == 5u);
    CHECK(second_stage_names().size() == 11u);
    StudySpec spec;
    spec.method = Method::Qmp;
    spec.period = parse_period("2010:2015");
    CHECK(spec.panel_label() == "QMP 2010-2015");
}

TEST_CASE("design rows carry missing values as NaN and only complete rows pool") {
    auto sp = planted(20, 6);
    auto rows = sp.panel.rows();
    rows[0].ret_m1.reset();
    Panel p(rows, sp.panel.weekly_returns(), 6);
    auto d = build_design(p, StudySpec{}.period, imbalance_now(Measure::Vol), weekly_regressors(Measure::Vol));
    REQUIRE(d.sections.size() == 6u);
    CHECK(d.sections[0].X.rows() == 20);
    CHECK(std::isnan(d.sections[0].X(0, 3)));
    CHECK(d.complete[0].size() == 19u);
    CHECK(d.complete[1].size() == 20u);
}

TEST_CASE("determinants recover planted coefficients") {
    auto sp = planted(400, 100);
    synth::PanelScenario sc;
    auto fm = determinants(sp.panel, StudySpec{});
    auto want = synth::planted_determinants(sc);
    REQUIRE(fm.T() == 100u);
    for (std::size_t j = 0; j < want.size(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        INFO(fm.names[j]);
        CHECK(std::fabs(fm.mean(jj) - want[j]) <= 4 * fm.se(jj));
    }
}

TEST_CASE("prediction reports the pooled imbalance IQR and its magnitude") {
    auto sp = planted(150, 60);
    auto r = prediction(sp.panel, StudySpec{});
    std::vector<double> lag;
    for (const auto& o : sp.panel.rows()) lag.push_back(*o.mroibvol_lag1);
    const double want = quantile7(lag, 0.75) - quantile7(lag, 0.25);
    CHECK(r.iqr == Approx(want).epsilon(1e-12));
    CHECK(r.magnitude.weekly_pct == Approx(r.fm.mean(1) * want * 100).epsilon(1e-12));
}

TEST_CASE("the first horizon is the predictive regression") {
    auto sp = planted(120, 50);
    auto pred = prediction(sp.panel, StudySpec{});
    auto h = horizon_prediction(sp.panel, StudySpec{}, {1, 3});
    REQUIRE(h.size() == 2u);
    REQUIRE(h[0].fm);
    CHECK(h[0].fm->mean == pred.fm.mean);
    CHECK(h[0].fm->t == pred.fm.t);
    REQUIRE(h[1].fm);
    CHECK(h[1].fm->T() < h[0].fm->T());  // the last weeks have no return two weeks on
    CHECK_THROWS_AS(horizon_prediction(sp.panel, StudySpec{}, {0}), ConfigError);
}

TEST_CASE("horizon slopes follow the planted decay") {
    synth::PanelScenario sc = synth::horizon_scenario({});
    sc.firms = 400;
    sc.weeks = 100;
    auto sp = synth::gen_panel(sc);
    auto h = horizon_prediction(sp.panel, StudySpec{}, {1, 2, 4});
    for (const auto& c : h) {
        REQUIRE(c.fm);
        const double want = synth::planted_horizon_slope(sc, c.horizon);
        INFO("horizon " << c.horizon);
        CHECK(std::fabs(c.fm->mean(1) - want) <= 4 * c.fm->se(1));
    }
}

TEST_CASE("decomposition components add back and use each week's persistence slope") {
    auto sp = planted(100, 40);
    auto d = decompose(sp.panel, StudySpec{});
    REQUIRE_FALSE(d.rows.empty());
    for (const auto& c : d.rows) CHECK(std::fabs(c.pers + c.cont + c.other - c.mroib) <= 1e-12);

    // Week 3 first stage by the normal-equation reference.
    const std::size_t w = 3;
    auto [a, b] = sp.panel.week_rows(w);
    const auto n = static_cast<Eigen::Index>(b - a);
    Eigen::MatrixXd X(n, 5);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& o = sp.panel.rows()[a + static_cast<std::size_t>(i)];
        X.row(i) << 1.0, *o.mroibvol_lag2, *o.ret_lag2, *o.ret_m1, *o.ret_m7_m2;
        y(i) = *o.mroibvol_lag1;
    }
    auto ref = *synth::oracle::ols(X, y);
    const auto& first = sp.panel.rows()[a];
    auto it = std::find_if(d.rows.begin(), d.rows.end(),
                           [&](const Components& c) { return c.week == w && c.symbol == first.symbol; });
    REQUIRE(it != d.rows.end());
    CHECK(it->pers == Approx(static_cast<double>(ref[1]) * *first.mroibvol_lag2).epsilon(1e-9));
    CHECK(d.second.names == second_stage_names());
    CHECK(d.magnitude[0].weekly_pct == Approx(d.second.mean(1) * d.iqr[0] * 100));
}

TEST_CASE("subgroup cells split the sample") {
    auto sp = planted(150, 30);
    auto full = prediction(sp.panel, StudySpec{});
    auto cells = subgroup_prediction(sp.panel, StudySpec{}, Characteristic::Price);
    REQUIRE(cells.size() == 3u);
    CHECK(cells[0].label == std::string(group_labels(Characteristic::Price)[0]));
    std::size_t obs = 0;
    for (const auto& c : cells) {
        REQUIRE(c.result);
        obs += c.result->fm.observations;
    }
    CHECK(obs == full.fm.observations);
}

TEST_CASE("portfolio formation sorts into value-weighted quintiles") {
    std::vector<PanelObservation> rows;
    for (int i = 0; i < 25; ++i) rows.push_back(row(synth::firm_name(i), 0, 0.01 * i, 100.0 + i));
    rows[3].mroibvol_dmean = rows[4].mroibvol_dmean;  // tie, broken by name
    std::vector<const PanelObservation*> ptr;
    for (const auto& r : rows) ptr.push_back(&r);
    auto f = form_portfolios(ptr, sort_getter(Measure::Vol, SortVariable::DailyMean));
    REQUIRE(f);
    CHECK(f->candidates[3] == "F0003");
    CHECK(f->long_leg.size() == 5u);
    CHECK(f->short_leg.size() == 5u);
    double total = 0;
    for (const auto& h : f->long_leg) total += h.weight;
    CHECK(total == Approx(1.0));
    CHECK(f->long_leg[0].symbol == "F0020");
    CHECK(f->long_leg[0].weight == Approx(120.0 / (120 + 121 + 122 + 123 + 124)));

    ptr.pop_back();
    CHECK_FALSE(form_portfolios(ptr, sort_getter(Measure::Vol, SortVariable::DailyMean)));
}

TEST_CASE("leg returns compound and drop names with gaps") {
    std::map<std::string, Series> wr;
    wr["A"] = {0.0, 0.1, 0.1};
    wr["B"] = {0.0, 0.2, std::nullopt};
    Panel p({}, wr, 3);
    std::vector<Holding> leg = {{"A", 0.5}, {"B", 0.5}};
    CHECK(*leg_return(p, leg, 0, 1) == Approx(0.15));
    CHECK(*leg_return(p, leg, 0, 2) == Approx(0.21));  // B dropped, A's weight rescaled
    CHECK_FALSE(leg_return(p, {{"B", 1.0}}, 0, 2));
}

TEST_CASE("factor records map onto weeks and compound within one") {
    std::vector<Date> starts = {Date::parse("2020-01-06"), Date::parse("2020-01-13")};
    std::vector<FactorRecord> rec = {{Date::parse("2020-01-03"), 0.5, 0, 0, 0},
                                     {Date::parse("2020-01-06"), 0.01, 0.0, 0.0, 0.0},
                                     {Date::parse("2020-01-07"), 0.02, 0.0, 0.0, 0.0},
                                     {Date::parse("2020-01-20"), -0.01, 0.01, 0.0, 0.0}};
    auto f = weekly_factors(rec, starts);
    REQUIRE(f[0]);
    CHECK(f[0]->mkt_rf == Approx(1.01 * 1.02 - 1));
    REQUIRE(f[1]);
    CHECK(f[1]->smb == Approx(0.01));
    CHECK(parse_factor_aggregation("sum") == FactorAggregation::Sum);
    CHECK_THROWS_AS(parse_sort_variable("median"), ConfigError);
}

TEST_CASE("long-short series match an independent recomputation") {
    auto sp = planted(100, 40);
    auto factors = weekly_factors(sp.factors, panel_week_starts(sp.panel));
    auto all = longshort(sp.panel, factors, StudySpec{}, LongShortConfig{{1, 2}});
    REQUIRE(all.size() == 8u);
    const auto& s = all[0];
    CHECK(s.universe == SizeSample::All);
    REQUIRE(s.weeks.size() == 39u);
    double m = 0;
    for (double x : s.long_short) m += x;
    CHECK(s.mean == Approx(m / 39));

    // Week 0 by hand: rank by daily-mean imbalance, top and bottom 20 names.
    auto [a, b] = sp.panel.week_rows(0);
    std::vector<const PanelObservation*> rows;
    for (std::size_t i = a; i < b; ++i) rows.push_back(&sp.panel.rows()[i]);
    std::sort(rows.begin(), rows.end(), [](auto* x, auto* y) { return *x->mroibvol_dmean < *y->mroibvol_dmean; });
    auto leg = [&](std::size_t from) {
        double num = 0, den = 0;
        for (std::size_t i = from; i < from + 20; ++i) {
            num += *rows[i]->mv_prev * *sp.panel.weekly_return(rows[i]->symbol, 1);
            den += *rows[i]->mv_prev;
        }
        return num / den;
    };
    CHECK(s.long_short[0] == Approx(leg(80) - leg(0)).epsilon(1e-12));
    for (const auto& x : all) {
        if (x.universe != SizeSample::All) CHECK(x.long_short.size() <= s.long_short.size());
    }
}

TEST_CASE("missing factors flag the alpha but keep the mean") {
    auto sp = planted(50, 20);
    std::vector<std::optional<WeeklyFactors>> none(20);
    auto s = longshort_series(sp.panel, none, StudySpec{}, 1, SizeSample::All);
    CHECK(s.flag == "FactorGap");
    CHECK_FALSE(std::isnan(s.mean));
    CHECK(std::isnan(s.alpha));
}

TEST_CASE("event windows sit around the formation week") {
    CHECK(event_window(ReturnType::Cumulative, 0, 10, 14) == std::pair<long, long>{10, 14});
    CHECK(event_window(ReturnType::Cumulative, -5, 10, 14) == std::pair<long, long>{5, 9});
    CHECK(event_window(ReturnType::Cumulative, 10, 10, 14) == std::pair<long, long>{15, 24});
    CHECK(event_window(ReturnType::Weekly, -10, 10, 14) == std::pair<long, long>{0, 4});
    CHECK(event_window(ReturnType::Weekly, 10, 10, 14) == std::pair<long, long>{20, 24});
}

TEST_CASE("market-adjusted returns, groups and stars") {
    Series s = {0.1, 0.1, std::nullopt}, mkt = {0.0, 0.05, 0.0};
    CHECK(*market_adjusted(s, mkt, 0, 1) == Approx(1.21 - 1.05));
    CHECK_FALSE(market_adjusted(s, mkt, 0, 2));
    CHECK_FALSE(market_adjusted(s, mkt, -1, 1));
    const std::array<int, 3> cut{1, 5, 9};
    CHECK(decile_group(0, cut) == FlowGroup::IntenseSelling);
    CHECK(decile_group(4, cut) == FlowGroup::Selling);
    CHECK(decile_group(8, cut) == FlowGroup::Buying);
    CHECK(decile_group(9, cut) == FlowGroup::IntenseBuying);
    CHECK(stars(2.0) == "*");
    CHECK(stars(-3.0) == "**");
    CHECK(stars(1.5).empty());
}

TEST_CASE("event study averages group returns over formation weeks") {
    // Ten stocks, eight five-day weeks. Stock i earns 0.001 (i+1) a day, the
    // market nothing, and its imbalance ranks it i-th every week.
    const std::size_t weeks = 8;
    auto cal = TradingCalendar::from_dates(synth::weekdays_from(Date::parse("2020-01-06"), 5 * weeks));
    DailyReturns daily;
    daily.market.assign(cal.size(), 0.0);
    std::vector<PanelObservation> rows;
    for (int i = 0; i < 10; ++i) {
        const auto sym = synth::firm_name(i);
        daily.by_symbol[sym].assign(cal.size(), 0.001 * (i + 1));
        for (std::size_t w = 0; w < weeks; ++w) rows.push_back(row(sym, w, 0.1 * i, 1.0));
    }
    Panel p(rows, {}, weeks);
    auto r = eventstudy(p, cal, daily, StudySpec{});
    CHECK(r.formations == weeks);
    REQUIRE(r.cells.size() == 2u * 9u * 4u);
    auto cell = [&](ReturnType t, int k, FlowGroup g) {
        auto it = std::find_if(r.cells.begin(), r.cells.end(), [&](const EventCell& c) {
            return c.type == t && c.offset == k && c.group == g;
        });
        REQUIRE(it != r.cells.end());
        return *it;
    };
    auto c0 = cell(ReturnType::Cumulative, 0, FlowGroup::IntenseSelling);
    CHECK(c0.mean == Approx(std::pow(1.001, 5) - 1));
    CHECK(c0.weeks == weeks);
    CHECK(c0.flag == "ZeroVariance");
    double buying = 0;
    for (int i = 5; i < 9; ++i) buying += std::pow(1 + 0.001 * (i + 1), 5) - 1;
    CHECK(cell(ReturnType::Cumulative, 0, FlowGroup::Buying).mean == Approx(buying / 4));
    CHECK(cell(ReturnType::Cumulative, -5, FlowGroup::IntenseBuying).weeks == weeks - 1);
    CHECK(cell(ReturnType::Cumulative, 10, FlowGroup::IntenseBuying).weeks == weeks - 2);
    CHECK(cell(ReturnType::Weekly, 10, FlowGroup::IntenseBuying).mean == Approx(std::pow(1.01, 5) - 1));
}

TEST_CASE("tables keep their row structure when a block is flagged") {
    StudySpec spec;
    Tagged<econ::FMResult> flagged{spec.panel_label(), Measure::Vol, std::nullopt, "TooFewPeriods"};
    std::ostringstream t2;
    write_table2(t2, {flagged});
    CHECK(line_count(t2.str()) == 1 + weekly_names().size() + 1);
    CHECK(t2.str().find("TooFewPeriods") != std::string::npos);

    Tagged<DecompResult> d{spec.panel_label(), Measure::Trd, std::nullopt, "Singular"};
    std::ostringstream t7;
    write_table7(t7, {d});
    CHECK(line_count(t7.str()) == 1 + first_stage_names().size() + 1 + second_stage_names().size() + 1 + 3);

    Tagged<std::vector<SubgroupBlock>> g{spec.panel_label(), Measure::Vol, std::nullopt, "X"};
    std::ostringstream t4;
    write_table4(t4, {g});
    CHECK(line_count(t4.str()) == 1 + 9);
}

TEST_CASE("tagged turns numerical failures into flags but lets other errors through") {
    StudySpec spec;
    auto t = tagged(spec, []() -> int { throw NumericalError("Singular", "x"); });
    CHECK_FALSE(t.result);
    CHECK(t.flag == "Singular");
    CHECK_THROWS_AS(tagged(spec, []() -> int { throw DataError("Io", "x"); }), DataError);
}
