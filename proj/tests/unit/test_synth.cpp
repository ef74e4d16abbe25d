#include <catch_amalgamated.hpp>

#include <sstream>

#include "rtoi/classify/classify.hpp"
#include "rtoi/synth/market.hpp"
#include "rtoi/synth/panel_gen.hpp"

using namespace rtoi;

namespace {

synth::MarketScenario small(synth::SpreadMode spread, bool full = false) {
    synth::MarketScenario sc;
    sc.symbols = 4;
    sc.days = 3;
    sc.events_per_day = 250;
    sc.spread = spread;
    sc.full_improvement = full;
    return sc;
}

}  // namespace

TEST_CASE("market generation is a function of the seed") {
    auto sc = small(synth::SpreadMode::Wide);
    auto a = synth::gen_market(sc), b = synth::gen_market(sc);
    CHECK(a.trades == b.trades);
    CHECK(a.quotes == b.quotes);
    CHECK(a.truth == b.truth);
    sc.seed = 2;
    CHECK_FALSE(synth::gen_market(sc).trades == a.trades);
}

TEST_CASE("generated markets are well formed") {
    auto md = synth::gen_market(small(synth::SpreadMode::Wide));
    CHECK(md.trades.size() == 4u * 3u * 250u);
    CHECK(md.truth.size() == md.trades.size());
    CHECK(md.daily.size() == 12u);
    CHECK(md.factors.size() == 3u);
    for (const auto& q : md.quotes) {
        CHECK(q.bid < q.ask);
        CHECK_FALSE(q.crossed());
    }
    for (std::size_t i = 0; i < md.trades.size(); ++i) {
        CHECK(md.trades[i].seq == i);
        CHECK(md.truth[i].trade_id == i);
        if (md.truth[i].is_retail) {
            CHECK(md.trades[i].exchange == 'D');
            CHECK(md.trades[i].price.ticks % 100 != 0);
        }
    }
    CHECK_THROWS_AS(synth::gen_market(synth::MarketScenario{.symbols = 0}), ConfigError);
}

TEST_CASE("penny spreads leave exactly the band prints unsigned") {
    auto md = synth::gen_market(small(synth::SpreadMode::Penny));
    auto days = classify_days(md.trades, md.quotes);
    auto c = synth::confusion(md.truth, signed_stream(days, Method::Bjzz));
    std::size_t band = 0;
    for (std::size_t i = 0; i < md.trades.size(); ++i) {
        const auto h = md.trades[i].price.ticks % 100;
        if (md.truth[i].is_retail && h >= 40 && h <= 60) ++band;
    }
    CHECK(c.signed_wrong == 0u);
    CHECK(c.unsigned_retail == band);
    CHECK(c.retail == c.signed_correct + band);
    CHECK(band > 0u);
}

TEST_CASE("wide spreads with deep improvement fool the subpenny rule") {
    auto md = synth::gen_market(small(synth::SpreadMode::Wide, true));
    auto days = classify_days(md.trades, md.quotes);
    auto bj = synth::confusion(md.truth, signed_stream(days, Method::Bjzz));
    auto qm = synth::confusion(md.truth, signed_stream(days, Method::Qmp));
    CHECK(bj.signed_wrong > 0u);
    CHECK(qm.sign_accuracy() > bj.sign_accuracy());
}

TEST_CASE("truth files round-trip and mismatched ids are caught") {
    auto md = synth::gen_market(small(synth::SpreadMode::Penny));
    std::ostringstream out;
    synth::write_truth(out, md.truth);
    std::istringstream in(out.str());
    CHECK(synth::read_truth(in) == md.truth);

    auto s = signed_stream(classify_days(md.trades, md.quotes), Method::Bjzz);
    REQUIRE_FALSE(s.empty());
    s[0].trade.ts_ns += 1;
    CHECK_THROWS_AS(synth::confusion(md.truth, s), DataError);
}

TEST_CASE("confusion rates") {
    synth::Confusion c{10, 6, 2, 2, 1};
    CHECK(c.identification_rate() == Catch::Approx(0.8));
    CHECK(c.sign_accuracy() == Catch::Approx(0.75));
    CHECK(c.unsigned_rate() == Catch::Approx(0.2));
    CHECK(synth::Confusion{}.sign_accuracy() == 0.0);
}

TEST_CASE("synthetic panels are deterministic and complete") {
    synth::PanelScenario sc;
    sc.firms = 30;
    sc.weeks = 12;
    auto a = synth::gen_panel(sc), b = synth::gen_panel(sc);
    CHECK(a.panel.rows() == b.panel.rows());
    CHECK(a.panel.size() == 360u);
    CHECK(a.panel.week_count() == 12u);
    CHECK(a.factors.size() == 12u);
    CHECK(a.panel.rows().front().week_start == sc.start);
    for (const auto& o : a.panel.rows()) {
        CHECK(o.ret_lag1 == a.panel.weekly_return(o.symbol, o.week - 1).value_or(*o.ret_lag1));
        CHECK(o.mroibvol_lag1.has_value());
        CHECK(*o.size == Catch::Approx(std::log(*o.mv_prev)));
    }
    CHECK(synth::firm_name(7) == "F0007");
    CHECK_THROWS_AS(synth::gen_panel(synth::PanelScenario{.firms = 0}), ConfigError);
}

TEST_CASE("scenario builders plant what they claim") {
    auto z = synth::zero_signal({});
    auto pz = synth::planted_prediction(z);
    for (std::size_t j = 1; j < pz.size(); ++j) CHECK(pz[j] == 0.0);
    auto h = synth::horizon_scenario({}, 0.004, 0.5);
    CHECK(synth::planted_horizon_slope(h, 1) == 0.004);
    CHECK(synth::planted_horizon_slope(h, 3) == Catch::Approx(0.001));
    CHECK(synth::planted_horizon_slope(h, 13) == 0.0);
    auto f = synth::factor_scenario({}, 0.001);
    CHECK(f.factors);
    CHECK(f.alpha == 0.001);
    CHECK(f.c1 == 0.0);
}

TEST_CASE("panel scenario manifest lists the planted parameters") {
    std::ostringstream out;
    synth::write_manifest(out, synth::PanelScenario{});
    const auto s = out.str();
    CHECK(s.find("seed=1\n") != std::string::npos);
    CHECK(s.find("phi=0.2\n") != std::string::npos);
    CHECK(s.find("gamma=0.001,0.002,1e-04,-0.05,-3e-04,0.001\n") != std::string::npos);
    CHECK(s.find("alpha=0\n") != std::string::npos);
}
