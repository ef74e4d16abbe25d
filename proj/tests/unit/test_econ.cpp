#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "rtoi/core/csv.hpp"
#include "rtoi/econ/fama_macbeth.hpp"
#include "rtoi/econ/hac.hpp"
#include "rtoi/econ/magnitude.hpp"
#include "rtoi/econ/ols.hpp"
#include "rtoi/synth/oracles.hpp"
#include "rtoi/synth/rng.hpp"

using namespace rtoi;
using Catch::Approx;

namespace {

Eigen::MatrixXd design(synth::Rng& rng, int n, int p) {
    Eigen::MatrixXd X(n, p);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        for (int j = 1; j < p; ++j) X(i, j) = rng.normal();
    }
    return X;
}

std::vector<double> series(synth::Rng& rng, int T) {
    std::vector<double> c(static_cast<std::size_t>(T));
    for (auto& x : c) x = rng.normal(0.01, 0.05);
    return c;
}

// Sandwich by explicit pair sums over time.
Eigen::MatrixXd sandwich_by_pairs(const Eigen::MatrixXd& X, const Eigen::VectorXd& u, int lags, bool bartlett) {
    const Eigen::Index T = X.rows(), p = X.cols();
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index t = 0; t < T; ++t) {
        for (Eigen::Index s = 0; s < T; ++s) {
            const auto l = std::abs(t - s);
            if (l > lags) continue;
            const double w = bartlett ? 1.0 - static_cast<double>(l) / (lags + 1) : 1.0;
            S += w * u(t) * u(s) * X.row(t).transpose() * X.row(s);
        }
    }
    const Eigen::MatrixXd B = (X.transpose() * X).inverse();
    return B * S * B;
}

}  // namespace

TEST_CASE("ols matches the normal-equation reference") {
    synth::Rng rng(101);
    for (int s = 0; s < 100; ++s) {
        const int n = static_cast<int>(rng.integer(15, 120)), p = static_cast<int>(rng.integer(2, 8));
        auto X = design(rng, n, p);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) y(i) = rng.normal();
        auto fit = econ::ols(X, y);
        auto ref = synth::oracle::ols(X, y);
        REQUIRE(ref);
        for (int j = 0; j < p; ++j) {
            const long double want = (*ref)[static_cast<std::size_t>(j)];
            CHECK(std::fabs(fit.coef(j) - want) <= 1e-10L * std::max(1.0L, std::fabs(want)));
        }
        CHECK(fit.residuals.norm() <= y.norm());
    }
}

TEST_CASE("ols recovers an exact linear relation") {
    synth::Rng rng(3);
    auto X = design(rng, 30, 3);
    Eigen::Vector3d b(0.5, -2.0, 3.0);
    Eigen::VectorXd y = X * b;
    auto fit = econ::ols(X, y);
    CHECK((fit.coef - b).norm() < 1e-12);
    CHECK(fit.r2 == Approx(1.0));
}

TEST_CASE("ols refuses underdetermined and collinear designs") {
    synth::Rng rng(4);
    auto X = design(rng, 3, 3);
    CHECK_THROWS_AS(econ::ols(X, Eigen::VectorXd::Zero(3)), NumericalError);

    auto Y = design(rng, 20, 3);
    Y.col(2) = 2.0 * Y.col(1);
    try {
        econ::ols(Y, Eigen::VectorXd::Ones(20), {"const", "a", "b"});
        FAIL("expected an error");
    } catch (const NumericalError& e) {
        CHECK(e.code() == "Singular");
        const std::string what = e.what();
        CHECK((what.find(" a ") != std::string::npos || what.find(" b ") != std::string::npos));
    }
}

TEST_CASE("long-run variances on a worked series") {
    const std::vector<double> c{1, 2, 3, 4};
    // mean 2.5, gamma0 = 1.25, gamma1 = 0.9375 after dividing by T
    CHECK(econ::newey_west_var(c, 1) == Approx(0.390625).margin(1e-15));
    auto hh = econ::hansen_hodrick_var(c, 1);
    CHECK(hh.var == Approx(0.46875).margin(1e-15));
    CHECK_FALSE(hh.fallback);
    CHECK(econ::newey_west_var(c, 0) == Approx(1.25 / 4));
}

TEST_CASE("a negative unit-weight variance falls back to Bartlett") {
    const std::vector<double> c{1, -1, 1, -1};
    auto hh = econ::hansen_hodrick_var(c, 1);
    CHECK(hh.fallback);
    CHECK(hh.var == Approx(0.0625));
    CHECK(synth::oracle::hansen_hodrick(c, 1) < 0);
}

TEST_CASE("long-run variances match pair sums") {
    synth::Rng rng(77);
    for (int s = 0; s < 150; ++s) {
        const int T = static_cast<int>(rng.integer(10, 120)), L = static_cast<int>(rng.integer(0, 8));
        auto c = series(rng, T);
        CHECK(std::fabs(econ::newey_west_var(c, L) - synth::oracle::newey_west(c, L)) <= 1e-12L);
        auto hh = econ::hansen_hodrick_var(c, L);
        const long double ref = synth::oracle::hansen_hodrick(c, L);
        CHECK(hh.fallback == (L > 0 && ref <= 0));
        if (!hh.fallback) CHECK(std::fabs(hh.var - ref) <= 1e-12L);
    }
}

TEST_CASE("too few periods for the lag count") {
    CHECK_THROWS_AS(econ::newey_west_var({1.0, 2.0, 3.0}, 2), NumericalError);
    CHECK_NOTHROW(econ::newey_west_var({1.0, 2.0, 3.0, 4.0}, 2));
    CHECK_THROWS_AS(econ::newey_west_var({1.0, 2.0, 3.0}, -1), ConfigError);
}

TEST_CASE("time-series HAC regression matches the pair-sum sandwich") {
    synth::Rng rng(12);
    for (int s = 0; s < 20; ++s) {
        const int T = static_cast<int>(rng.integer(30, 90)), L = static_cast<int>(rng.integer(0, 6));
        auto X = design(rng, T, 3);
        Eigen::VectorXd y(T);
        for (int t = 0; t < T; ++t) y(t) = 0.01 + 0.5 * X(t, 1) + rng.normal(0, 0.1);
        auto r = econ::hac_ols(X, y, L, econ::Kernel::Bartlett);
        const Eigen::VectorXd u = y - X * r.coef;
        auto V = sandwich_by_pairs(X, u, L, true);
        for (int j = 0; j < 3; ++j) CHECK(r.se(j) == Approx(std::sqrt(V(j, j))).epsilon(1e-9));

        auto h = econ::hac_ols(X, y, L, econ::Kernel::Uniform);
        auto W = sandwich_by_pairs(X, u, L, !!h.fallback);
        for (int j = 0; j < 3; ++j) CHECK(h.se(j) == Approx(std::sqrt(W(j, j))).epsilon(1e-9));
        if (h.fallback) CHECK((sandwich_by_pairs(X, u, L, false).diagonal().array() <= 0).any());
    }
}

TEST_CASE("Fama-MacBeth averages period slopes") {
    synth::Rng rng(8);
    std::vector<econ::CrossSection> cs;
    std::vector<std::vector<double>> slopes(2);
    for (int t = 9; t >= 0; --t) {  // arrive out of order
        econ::CrossSection s;
        s.period = t;
        s.X = design(rng, 40, 2);
        s.y.resize(40);
        for (int i = 0; i < 40; ++i) s.y(i) = 0.1 * t + 0.3 * s.X(i, 1) + rng.normal(0, 0.2);
        cs.push_back(s);
    }
    // Reference slopes, in period order.
    std::vector<econ::CrossSection> sorted(cs.rbegin(), cs.rend());
    for (const auto& s : sorted) {
        auto b = *synth::oracle::ols(s.X, s.y);
        slopes[0].push_back(static_cast<double>(b[0]));
        slopes[1].push_back(static_cast<double>(b[1]));
    }
    auto r = econ::fama_macbeth(cs, {"const", "x"}, 2);
    REQUIRE(r.T() == 10u);
    CHECK(r.periods.front() == 0);
    CHECK(r.observations == 400u);
    for (int j = 0; j < 2; ++j) {
        double m = 0;
        for (double v : slopes[static_cast<std::size_t>(j)]) m += v;
        m /= 10;
        CHECK(r.mean(j) == Approx(m).epsilon(1e-10));
        const double se = std::sqrt(static_cast<double>(synth::oracle::newey_west(slopes[static_cast<std::size_t>(j)], 2)));
        CHECK(r.se(j) == Approx(se).epsilon(1e-9));
        CHECK(r.t(j) == Approx(m / se).epsilon(1e-9));
    }
    CHECK(r.index_of("x") == 1u);
    CHECK_THROWS_AS(r.index_of("y"), ConfigError);
}

TEST_CASE("Fama-MacBeth drops incomplete rows and skips unusable periods") {
    synth::Rng rng(9);
    std::vector<econ::CrossSection> cs;
    for (int t = 0; t < 6; ++t) {
        econ::CrossSection s;
        s.period = t;
        s.X = design(rng, 12, 2);
        s.y = Eigen::VectorXd::Ones(12) + s.X.col(1);
        cs.push_back(s);
    }
    cs[0].X(0, 1) = std::numeric_limits<double>::quiet_NaN();
    cs[1].y.head(10).setConstant(std::numeric_limits<double>::quiet_NaN());  // two rows left
    cs[2].X.col(1).setConstant(1.0);                                         // singular
    auto r = econ::fama_macbeth(cs, {"const", "x"}, 1);
    CHECK(r.skipped == 2u);
    CHECK(r.T() == 4u);
    CHECK(r.observations == 11u + 12u * 3);
    CHECK(r.mean(1) == Approx(1.0));
}

TEST_CASE("identical periods give a zero standard error and an infinite t") {
    synth::Rng rng(19);
    econ::CrossSection s;
    s.X = design(rng, 12, 2);
    s.y = Eigen::VectorXd::Ones(12) + 2.0 * s.X.col(1) + 0.1 * design(rng, 12, 2).col(1);
    std::vector<econ::CrossSection> cs(4, s);
    for (int t = 0; t < 4; ++t) cs[static_cast<std::size_t>(t)].period = t;
    auto r = econ::fama_macbeth(cs, {"const", "x"}, 1);
    CHECK(r.se(1) == 0.0);
    CHECK(r.infinite_t[1]);
    CHECK(r.t(1) == std::numeric_limits<double>::infinity());
}

TEST_CASE("Fama-MacBeth rejects duplicate periods and too short histories") {
    synth::Rng rng(10);
    econ::CrossSection s;
    s.X = design(rng, 10, 2);
    s.y = Eigen::VectorXd::Ones(10);
    CHECK_THROWS_AS(econ::fama_macbeth({s, s}, {"const", "x"}, 0), ConfigError);
    auto t = s;
    t.period = 1;
    CHECK_THROWS_AS(econ::fama_macbeth({s, t}, {"const", "x"}, 1), NumericalError);
    CHECK_THROWS_AS(econ::fama_macbeth({s}, {"const"}, 0), ConfigError);
}

TEST_CASE("Fama-MacBeth does not depend on the thread count") {
    synth::Rng rng(11);
    std::vector<econ::CrossSection> cs;
    for (int t = 0; t < 30; ++t) {
        econ::CrossSection s;
        s.period = t;
        s.X = design(rng, 50, 4);
        s.y.resize(50);
        for (int i = 0; i < 50; ++i) s.y(i) = rng.normal();
        cs.push_back(s);
    }
    auto a = econ::fama_macbeth(cs, {"c", "a", "b", "d"}, 4, 1);
    auto b = econ::fama_macbeth(cs, {"c", "a", "b", "d"}, 4, 4);
    CHECK(a.mean == b.mean);
    CHECK(a.se == b.se);
}

TEST_CASE("economic magnitude scales a coefficient by the interquartile range") {
    auto m = econ::economic_magnitude(0.000934, 1.1950);
    CHECK(csv::format_fixed(m.weekly_pct, 4) == "0.1116");
    CHECK(csv::format_fixed(m.annual_pct, 1) == "5.8");
    CHECK(m.annual_pct == Approx(m.weekly_pct * 52));
}
