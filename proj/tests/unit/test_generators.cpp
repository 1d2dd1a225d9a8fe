#include "bsdelab/brownian.hpp"
#include "bsdelab/error.hpp"
#include "bsdelab/generators.hpp"

#include <catch2/catch.hpp>

#include <cmath>

using namespace bsde;

namespace {

std::vector<double> eval(const GeneratorSpec& g, double t, std::vector<double> b, std::vector<double> y,
                         std::vector<double> z) {
    std::vector<double> out(g.k);
    g.evaluate(t, b, y, z, out);
    return out;
}

double h_ref(double x, double pbar, double delta) {
    if (x == 0.0) return 0.0;
    const double r = 1.0 / pbar;
    if (x <= delta) return x * std::pow(-std::log(x), r);
    const double L = -std::log(delta);
    const double slope = std::pow(L, r) - r * std::pow(L, r - 1.0);
    return delta * std::pow(L, r) + slope * (x - delta);
}

}  // namespace

TEST_CASE("h function follows its definition on both sides of the splice", "[generators]") {
    HFunctionParams p;
    p.pbar = 2.0;
    const double delta = p.resolved_delta();
    CHECK(delta == Approx(0.5 * std::exp(-1.5)));
    for (double x : {0.0, 1e-9, 1e-3, 0.05, delta, 0.2, 3.0}) CHECK(h_function(x, p) == Approx(h_ref(x, 2.0, delta)));
    p.sign = SignConvention::paper_negative;
    CHECK(h_function(0.05, p) == Approx(-h_ref(0.05, 2.0, delta)));
    CHECK_THROWS_AS(h_function(-1.0, p), InvalidArgument);

    HFunctionParams bad;
    bad.pbar = 0.5;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad.pbar = 2.0;
    bad.delta = 0.9;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("example 1 matches its formula and passes its claims", "[generators]") {
    HFunctionParams p;
    p.pbar = 1.5;
    const auto g = make_example1(p);
    CHECK(g.k == 1);
    CHECK(g.lipschitz_z == 1.0);
    CHECK(g.order == 1.5);
    REQUIRE(g.singular_forcing);
    const double t = 0.3, b = -0.7, y = 0.4, z = 1.2;
    const double expect = h_ref(y, 1.5, p.resolved_delta()) - std::exp(0.7 * y) + std::exp(-y) * z + 1.0 / std::cbrt(t);
    CHECK(eval(g, t, {b}, {y}, {z})[0] == Approx(expect));
    // negative y: min(e^{-y}, 1) = 1
    CHECK(eval(g, t, {b}, {-0.5}, {z})[0] ==
          Approx(h_ref(0.5, 1.5, p.resolved_delta()) - std::exp(-0.35) + z + 1.0 / std::cbrt(t)));
    std::vector<double> cell(1);
    g.singular_forcing->cell_integral(0.0, 0.125, cell);
    CHECK(cell[0] == Approx(1.5 * 0.25));

    SamplerSpec s;
    s.count = 10000;
    for (const auto& r : check_claims(g, s)) {
        INFO(r.condition_id);
        CHECK(r.passed);
    }
}

TEST_CASE("example 2 matches its formula and passes its claims", "[generators]") {
    HFunctionParams p;
    p.pbar = 2.0;
    const auto g = make_example2(2, p);
    CHECK(g.k == 2);
    CHECK(*g.lipschitz_z == Approx(std::sqrt(2.0)));
    const std::vector<double> y = {0.03, -0.04};
    const auto out = eval(g, 0.5, {1.5}, y, {0.3, 0.4});
    const double common = h_ref(0.05, 2.0, p.resolved_delta()) + std::sin(0.5) + 1.5;
    CHECK(out[0] == Approx(std::exp(-0.03) + common));
    CHECK(out[1] == Approx(std::exp(0.04) + common));

    SamplerSpec s;
    s.count = 10000;
    for (const auto& r : check_claims(g, s)) {
        INFO(r.condition_id);
        CHECK(r.passed);
    }
}

TEST_CASE("affine metadata uses operator norms", "[generators]") {
    // k = 2, d = 1
    const auto g = make_affine(2, 1, {0.0, 2.0, 0.0, 0.0}, {3.0, 0.0, 0.0, 4.0}, {1.0, -1.0});
    CHECK(g.modulus->mu() == Approx(2.0));
    CHECK(*g.lipschitz_z == Approx(4.0));
    const auto out = eval(g, 0.0, {0.0}, {1.0, 1.0}, {1.0, 1.0});
    CHECK(out == std::vector<double>{1.0 + 2.0 + 3.0, -1.0 + 4.0});
    CHECK_THROWS_AS(make_affine(2, 1, {1.0}, {}, {0.0, 0.0}), InvalidArgument);
    const auto no_z = make_affine(1, 2, {-1.0}, {}, {0.0});
    CHECK(*no_z.lipschitz_z == 0.0);
}

TEST_CASE("fixtures and the zero generator", "[generators]") {
    const auto z = make_zero(3, 2);
    CHECK(eval(z, 0.1, {1.0, 2.0}, {1.0, 2.0, 3.0}, std::vector<double>(6, 1.0)) == std::vector<double>(3, 0.0));
    CHECK(eval(make_quadratic(), 0.0, {0.0}, {-3.0}, {0.0})[0] == 9.0);
    CHECK(eval(make_signed_sqrt(), 0.0, {0.0}, {-4.0}, {0.0})[0] == -2.0);
    CHECK(eval(make_step(), 0.0, {0.0}, {-4.0}, {0.0})[0] == -1.0);
    CHECK(make_step().claimed_conditions.empty());
}

TEST_CASE("truncation map q_n", "[generators]") {
    const std::vector<double> x = {3.0, 4.0};
    CHECK(truncate_vector(x, 10.0) == x);
    const auto q = truncate_vector(x, 1.0);
    CHECK(q[0] == Approx(0.6));
    CHECK(q[1] == Approx(0.8));
    std::vector<double> y = {-2.0};
    truncate_in_place(y, 0.5);
    CHECK(y[0] == -0.5);
}

TEST_CASE("truncated problems keep increments and bound the free term", "[generators]") {
    HFunctionParams p;
    p.pbar = 2.0;
    const auto g = make_example1(p);
    const auto xi = make_brownian_terminal(1, 3.0);
    const double n = 0.75;
    const auto [xin, gn] = truncate_problem(xi, g, n);
    CHECK_FALSE(gn.singular_forcing);
    CHECK(gn.name.find("|q") != std::string::npos);

    const auto ens = simulate_ensemble(make_uniform_grid(1.0, 2), 1, 50, 1);
    std::vector<double> v(1);
    for (std::size_t m = 0; m < 50; ++m) {
        xin.eval(ens->state(2, m), PathRef{ens.get(), m}, v);
        CHECK(std::abs(v[0]) <= n + 1e-15);
        CHECK(v[0] == Approx(truncate_vector(std::vector<double>{3.0 * ens->state(2, m)[0]}, n)[0]));
    }
    for (double t : {0.01, 0.5}) {
        for (double b : {-1.0, 0.3}) {
            const double full0 = eval(g, t, {b}, {0.0}, {0.0})[0];
            const double trunc0 = eval(gn, t, {b}, {0.0}, {0.0})[0];
            CHECK(trunc0 == Approx(truncate_vector(std::vector<double>{full0}, n)[0]));
            for (double y : {-0.4, 0.2}) {
                const double inc = eval(g, t, {b}, {y}, {0.7})[0] - full0;
                CHECK(eval(gn, t, {b}, {y}, {0.7})[0] - trunc0 == Approx(inc).margin(1e-12));
            }
        }
    }
}

TEST_CASE("terminal constructors", "[generators]") {
    const auto ens = simulate_ensemble(make_uniform_grid(1.0, 1), 2, 3, 1);
    const PathRef ref{ens.get(), 0};
    const ConstVec b = ens->state(1, 0);
    std::vector<double> out(2);
    make_constant_terminal({1.0, 2.0}).eval(b, ref, out);
    CHECK(out == std::vector<double>{1.0, 2.0});
    make_brownian_terminal(2, 2.0, 1.0).eval(b, ref, out);
    CHECK(out[1] == Approx(2.0 * b[1] + 1.0));
    make_sine_terminal(2, 0.5, -1.0).eval(b, ref, out);
    CHECK(out[0] == Approx(0.5 * std::sin(b[0]) - 1.0));
    CHECK(out[1] == out[0]);
    CHECK_THROWS_AS(make_constant_terminal({}), InvalidArgument);
}
