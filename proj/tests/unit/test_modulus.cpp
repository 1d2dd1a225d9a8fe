#include "bsdelab/error.hpp"
#include "bsdelab/modulus.hpp"

#include "oracles.hpp"

#include <catch2/catch.hpp>

#include <cmath>
#include <limits>

using namespace bsde;

TEST_CASE("closed-form families evaluate their formulas", "[modulus]") {
    const auto lin = ModulusFn::linear(2.5);
    CHECK(lin(0.0) == 0.0);
    CHECK(lin(3.0) == 7.5);

    const auto pw = ModulusFn::power(0.5, 3.0);
    CHECK(pw(4.0) == Approx(6.0));
    CHECK(pw.concave_verified());
    CHECK_FALSE(ModulusFn::power(1.5).concave_verified());

    const double delta = 0.1;
    const auto lo = ModulusFn::log_osgood(1.0, delta);
    CHECK(lo(0.0) == 0.0);
    CHECK(lo(0.01) == Approx(0.01 * std::log(100.0)));
    const double slope = std::abs(std::log(delta)) - 1.0;
    CHECK(lo(0.5) == Approx(delta * std::abs(std::log(delta)) + slope * (0.5 - delta)));
    CHECK(lo.concave_verified());
}

TEST_CASE("constructors reject invalid parameters", "[modulus]") {
    CHECK_THROWS_AS(ModulusFn::linear(-1.0), InvalidArgument);
    CHECK_THROWS_AS(ModulusFn::power(0.0), InvalidArgument);
    CHECK_THROWS_AS(ModulusFn::log_osgood(1.0, 0.5), InvalidArgument);  // above e^-1
    CHECK_NOTHROW(ModulusFn::log_osgood(1.0, std::exp(-1.0)));
    CHECK_THROWS_AS(ModulusFn::tabulated({1.0, 0.5}, {1.0, 2.0}), InvalidArgument);
    CHECK_THROWS_AS(eval(ModulusFn::linear(1.0), -1.0), InvalidArgument);
}

TEST_CASE("tabulated moduli interpolate through the origin", "[modulus]") {
    const auto t = ModulusFn::tabulated({1.0, 2.0, 4.0}, {2.0, 3.0, 4.0});
    CHECK(t(0.5) == Approx(1.0));
    CHECK(t(1.5) == Approx(2.5));
    CHECK(t(3.0) == Approx(3.5));
    CHECK(t(10.0) == Approx(4.0));
    CHECK(t.concave_verified());
    CHECK_FALSE(ModulusFn::tabulated({1.0, 2.0}, {1.0, 3.0}).concave_verified());
}

TEST_CASE("log grid hits its endpoints", "[modulus]") {
    const auto g = log_grid(1e-6, 10.0, 50);
    REQUIRE(g.size() == 50);
    CHECK(g.front() == 1e-6);
    CHECK(g.back() == 10.0);
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
}

TEST_CASE("monotone-chain hull agrees with the brute-force oracle", "[modulus][property]") {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        std::vector<double> x, f;
        oracle::star_shaped(seed, 40, x, f);
        const auto fast = upper_hull_values(x, f);
        const auto slow = oracle::upper_hull(x, f);
        for (std::size_t i = 0; i < x.size(); ++i) REQUIRE(fast[i] == Approx(slow[i]).epsilon(1e-12));
    }
}

TEST_CASE("concave majorant sandwich f <= p <= 2f", "[modulus][property]") {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        std::vector<double> x, f;
        oracle::star_shaped(seed, 60, x, f);
        const auto m = concave_majorant(x, f);
        REQUIRE(m.concave_verified());
        for (std::size_t i = 0; i < x.size(); ++i) {
            REQUIRE(m(x[i]) >= f[i]);
            REQUIRE(m(x[i]) <= 2.0 * f[i] * (1.0 + 1e-15));
        }
    }
}

TEST_CASE("concave majorant rejects non-star-shaped tables with the offending point", "[modulus]") {
    try {
        concave_majorant({1.0, 2.0, 3.0}, {1.0, 1.5, 5.0});
        FAIL("expected PreconditionError");
    } catch (const PreconditionError& e) {
        CHECK_THAT(e.what(), Catch::Contains("x = 3"));
    }
    CHECK_THROWS_AS(concave_majorant({1.0, 2.0}, {2.0, 1.0}), PreconditionError);
}

TEST_CASE("transformations produce concave moduli", "[modulus][property]") {
    const ModulusFn inputs[] = {ModulusFn::linear(1.5), ModulusFn::power(0.5, 2.0), ModulusFn::log_osgood(0.5, 0.2),
                                ModulusFn::log_osgood(1.0, 0.3)};
    for (const auto& rho : inputs) {
        for (double p : {1.0, 1.5, 2.0, 3.0}) {
            const auto a = mao_to_constantin(rho, p);
            const auto b = constantin_to_mao(rho, p);
            CHECK(a.concave_verified());
            CHECK(b.concave_verified());
            CHECK(slopes_nonincreasing(a.nodes(), a.values()));
            CHECK(slopes_nonincreasing(b.nodes(), b.values()));
            const auto c = lift_order(rho, p, p + 1.0);
            CHECK(c.concave_verified());
            CHECK(slopes_nonincreasing(c.nodes(), c.values()));
            // the lifted modulus dominates the pointwise definition at its nodes
            const double e = p / (p + 1.0);
            for (std::size_t i = 0; i < c.nodes().size(); ++i) {
                const double x = c.nodes()[i];
                REQUIRE(c.values()[i] >= std::pow(x, 1.0 - e) * rho(std::pow(x, e)) * (1.0 - 1e-12));
            }
        }
    }
    CHECK_THROWS_AS(lift_order(ModulusFn::linear(1.0), 2.0, 2.0), InvalidArgument);
    CHECK_THROWS_AS(mao_to_constantin(ModulusFn::power(1.5), 2.0), PreconditionError);
}

TEST_CASE("linear round trip is exact nodewise", "[modulus]") {
    for (double mu : {0.25, 1.0, 3.0}) {
        for (double p : {1.0, 2.0, 2.5}) {
            const auto back = constantin_to_mao(mao_to_constantin(ModulusFn::linear(mu), p), p);
            for (std::size_t i = 0; i < back.nodes().size(); ++i) {
                REQUIRE(back.values()[i] == Approx(mu * back.nodes()[i]).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("growth bounds dominate the modulus", "[modulus][property]") {
    const ModulusFn inputs[] = {ModulusFn::linear(2.0), ModulusFn::power(0.5), ModulusFn::log_osgood(1.0, 0.2)};
    for (const auto& rho : inputs) {
        const double A = linear_growth_bound(rho);
        for (double m : {1.0, 2.0}) {
            const auto sb = split_growth_bound(rho, m);
            CHECK(sb.slope == Approx(m + 2.0 * A));
            for (double x : log_grid(1e-8, 100.0, 200)) {
                CHECK(rho(x) <= A * (x + 1.0) * (1.0 + 1e-12));
                CHECK(rho(x) <= (sb.slope * x + sb.offset) * (1.0 + 1e-12));
            }
        }
    }
    CHECK(linear_growth_bound(ModulusFn::power(0.5)) == Approx(0.5));
    CHECK_THROWS_AS(split_growth_bound(ModulusFn::linear(1.0), 0.5), InvalidArgument);
}

TEST_CASE("sub-additive minorant matches the recursive definition", "[modulus]") {
    const std::vector<double> f = {1.0, 3.0, 3.5, 7.0, 7.2};
    const auto F = subadditive_minorant(f);
    CHECK(F == std::vector<double>{1.0, 2.0, 3.0, 4.0, 5.0});
    for (std::size_t i = 0; i < F.size(); ++i) {
        for (std::size_t j = 0; j + 1 <= i; ++j) CHECK(F[i] <= F[j] + F[i - 1 - j] + 1e-15);
    }
    const auto kappa = subadditive_envelope(ModulusFn::power(0.5));
    CHECK(kappa.concave_verified());
    for (double x : {0.1, 1.0, 5.0}) CHECK(kappa(x) >= x);
}

TEST_CASE("classifier verdicts on analytic families", "[modulus]") {
    struct Case {
        ModulusFn rho;
        double p;
        OsgoodVariant variant;
        Verdict expect;
    };
    const double pbar = 2.0;
    const double hdelta = 0.5 * std::exp(-1.0 - 1.0 / pbar);
    const Case cases[] = {
        {ModulusFn::linear(1.0), 1.0, OsgoodVariant::osgood, Verdict::diverges},
        {ModulusFn::power(0.5), 1.0, OsgoodVariant::osgood, Verdict::converges},
        {ModulusFn::log_osgood(1.0, 0.2), 1.0, OsgoodVariant::osgood, Verdict::diverges},
        {ModulusFn::log_osgood(2.0, 0.1), 1.0, OsgoodVariant::osgood, Verdict::converges},
        {ModulusFn::log_osgood(1.0 / pbar, hdelta), pbar, OsgoodVariant::constantin_p, Verdict::diverges},
        {ModulusFn::power(1.5), 1.0, OsgoodVariant::osgood, Verdict::diverges},
    };
    for (const auto& c : cases) {
        const auto v = osgood_classifier(c.rho, c.p, c.variant);
        INFO(c.rho.describe());
        CHECK(v.verdict == c.expect);
        CHECK(v.analytic);
        REQUIRE_FALSE(v.partial_integrals.empty());
        for (std::size_t i = 1; i < v.partial_integrals.size(); ++i) {
            CHECK(v.partial_integrals[i].first < v.partial_integrals[i - 1].first);
            CHECK(v.partial_integrals[i].second >= v.partial_integrals[i - 1].second);
        }
        // the numeric ladder never contradicts the closed form
        const auto n = osgood_classifier(c.rho, c.p, c.variant, true);
        CHECK(n.verdict != (c.expect == Verdict::diverges ? Verdict::converges : Verdict::diverges));
    }
}

TEST_CASE("partial integrals match closed forms for power moduli", "[modulus]") {
    for (double alpha : {0.5, 1.0, 1.5}) {
        const auto v = osgood_classifier(ModulusFn::power(alpha), 1.0, OsgoodVariant::osgood);
        for (const auto& [eps, val] : v.partial_integrals) {
            CHECK(val == Approx(oracle::power_integral(alpha, eps)).epsilon(1e-6));
        }
    }
}

TEST_CASE("tabulated moduli classify numerically", "[modulus]") {
    std::vector<double> x = log_grid(1e-12, 1.0, 200), v(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) v[i] = std::sqrt(x[i]);
    CHECK(osgood_classifier(ModulusFn::tabulated(x, v), 1.0, OsgoodVariant::osgood).verdict != Verdict::diverges);
    CHECK(osgood_classifier(ModulusFn::tabulated(x, x), 1.0, OsgoodVariant::osgood).verdict == Verdict::diverges);
}

TEST_CASE("Bihari bound reduces to Gronwall for linear moduli", "[modulus]") {
    for (double a : {1e-3, 0.5, 2.0}) {
        for (double mu : {0.1, 1.0, 3.0}) {
            for (double T : {0.25, 1.0, 2.0}) {
                CHECK(bihari_bound(a, ModulusFn::linear(mu), T, 1.0) ==
                      Approx(oracle::gronwall(a, mu, T)).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("Bihari bound: zero start, monotonicity, blow-up", "[modulus][property]") {
    const ModulusFn divergent[] = {ModulusFn::linear(2.0), ModulusFn::log_osgood(1.0, 0.2)};
    for (const auto& rho : divergent) CHECK(bihari_bound(0.0, rho, 1.0, 1.0) == 0.0);
    const auto rho = ModulusFn::log_osgood(1.0, 0.2);
    double prev = 0.0;
    for (double a : {1e-6, 1e-4, 1e-2, 0.1, 1.0}) {
        const double v = bihari_bound(a, rho, 1.0, 1.0);
        CHECK(v >= a);
        CHECK(v >= prev);
        prev = v;
    }
    prev = 0.0;
    for (double T : {0.0, 0.1, 0.5, 1.0, 4.0}) {
        const double v = bihari_bound(0.01, rho, T, 1.0);
        CHECK(v >= prev);
        prev = v;
    }
    CHECK(bihari_bound(0.01, rho, 0.0, 1.0) == Approx(0.01));
    // u' = sqrt(u), u(0) = a has u(T) = (sqrt(a) + T / 2)^2
    CHECK(bihari_bound(0.1, ModulusFn::power(0.5), 1.0, 1.0) == Approx(std::pow(std::sqrt(0.1) + 0.5, 2.0)).epsilon(1e-8));
    CHECK_THROWS_AS(bihari_bound(1.0, ModulusFn::power(1.5), 10.0, 1.0), PreconditionError);
}
