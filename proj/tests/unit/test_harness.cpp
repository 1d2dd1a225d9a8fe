#include "bsdelab/error.hpp"
#include "bsdelab/generators.hpp"
#include "bsdelab/harness.hpp"

#include <catch2/catch.hpp>

#include <cmath>
#include <sstream>

using namespace bsde;

namespace {

Problem affine_problem(double c = 0.2, double shift = 0.0) {
    return {"affine", "affine", make_affine(1, 1, {-1.0}, {0.5}, {c}), make_brownian_terminal(1, 1.0, shift)};
}

ExperimentManifest base_manifest(ExperimentKind kind, std::size_t steps = 16, std::size_t paths = 3000) {
    ExperimentManifest m;
    m.kind = kind;
    m.name = to_string(kind);
    m.problems = {affine_problem()};
    m.ensemble.steps = steps;
    m.ensemble.paths = paths;
    return m;
}

}  // namespace

TEST_CASE("kind and hypothesis names round trip", "[harness]") {
    for (auto k : {ExperimentKind::uniqueness, ExperimentKind::stability, ExperimentKind::comparison,
                   ExperimentKind::convergence, ExperimentKind::truncation}) {
        CHECK(experiment_kind_from_string(to_string(k)) == k);
    }
    for (auto h : {ComparisonHypothesis::everywhere, ComparisonHypothesis::along_primed, ComparisonHypothesis::along_unprimed}) {
        CHECK(comparison_hypothesis_from_string(to_string(h)) == h);
    }
    CHECK_THROWS_AS(experiment_kind_from_string("bogus"), InvalidArgument);
}

TEST_CASE("tables are width-checked and written as csv", "[harness]") {
    Table t{"t", {"a", "b"}, {}};
    t.add_row({"1", "2"});
    CHECK_THROWS_AS(t.add_row({"1"}), InvalidArgument);
    std::ostringstream os;
    t.write_csv(os);
    CHECK(os.str() == "a,b\n1,2\n");
}

TEST_CASE("perturbation at zero is the base problem", "[harness]") {
    const Problem base = affine_problem();
    Perturbation p;
    p.gamma = [](double, ConstVec, MutVec out) { out[0] = 1.0; };
    const Problem same = perturb(base, p, 0.0);
    const Problem moved = perturb(base, p, 0.5);
    double b = 0.3, y = 0.1, z = 0.2, g0 = 0.0, g1 = 0.0;
    same.gen.evaluate(0.5, ConstVec(&b, 1), ConstVec(&y, 1), ConstVec(&z, 1), MutVec(&g0, 1));
    moved.gen.evaluate(0.5, ConstVec(&b, 1), ConstVec(&y, 1), ConstVec(&z, 1), MutVec(&g1, 1));
    CHECK(g1 - g0 == Approx(0.5));
    CHECK(moved.gen.modulus->mu() == base.gen.modulus->mu());
    CHECK(*moved.gen.lipschitz_z == *base.gen.lipschitz_z);
}

TEST_CASE("uniqueness across seeds and schemes", "[harness]") {
    auto m = base_manifest(ExperimentKind::uniqueness, 32, 4000);
    m.variants = {{"base", {}, {}, {}}};
    EnsembleSpec reseeded = m.ensemble;
    reseeded.seed = 17;
    m.variants.push_back({"reseed", reseeded, {}, {}});
    const auto res = run_uniqueness(m);
    INFO(res.gates[0].value << " vs " << res.gates[0].threshold << ": " << res.gates[0].detail);
    CHECK(res.passed());
    CHECK(res.table("variants").rows.size() == 2);
    CHECK_THROWS_AS(res.gate("nope"), InvalidArgument);

    m.variants.resize(1);
    CHECK_THROWS_AS(run_uniqueness(m), InvalidArgument);
}

TEST_CASE("uniqueness flags a different problem", "[harness]") {
    auto m = base_manifest(ExperimentKind::uniqueness, 16, 3000);
    m.variants = {{"base", {}, {}, {}}, {"shifted", {}, {}, affine_problem(0.2, 0.5)}};
    CHECK_FALSE(run_uniqueness(m).passed());
}

TEST_CASE("stability on an affine problem", "[harness]") {
    auto m = base_manifest(ExperimentKind::stability, 16, 2000);
    m.epsilons = {1.0, 0.5, 0.25, 0.125, 0.0};
    m.perturbation.eta = [](ConstVec b, const PathRef&, MutVec out) { out[0] = b[0]; };
    const auto res = run_stability(m);
    CHECK(res.passed());
    CHECK(res.gate("zero_at_zero").passed);
    CHECK(res.gate("zero_at_zero").value == 0.0);
    const auto& rows = res.table("stages").rows;
    REQUIRE(rows.size() == 5);
    CHECK(rows[2][4] == "0.25");
}

TEST_CASE("comparison with shifted terminal", "[harness]") {
    auto m = base_manifest(ExperimentKind::comparison, 16, 2000);
    Problem primed = affine_problem(0.2, 1.0);
    primed.label = "primed";
    m.problems.push_back(primed);
    const auto res = run_comparison(m);
    CHECK(res.passed());
    CHECK(res.gate("violation_fraction").value == 0.0);

    std::swap(m.problems[0], m.problems[1]);
    CHECK_THROWS_AS(run_comparison(m), PreconditionError);
}

TEST_CASE("convergence to a closed form", "[harness]") {
    auto m = base_manifest(ExperimentKind::convergence);
    m.problems = {{"decay", "decay", make_affine(1, 1, {-1.0}, {}, {0.0}), make_constant_terminal({1.0})}};
    m.scheme.stepping = Stepping::implicit_y;
    m.scheme.implicit_weight = 0.5;
    m.refinement = {{8, 200}, {16, 200}, {32, 200}};
    m.exact_y0 = std::exp(-1.0);
    m.exact_z = 0.0;
    const auto res = run_convergence(m);
    CHECK(res.passed());
    CHECK(res.gate("y0_final").value < 1e-4);
    CHECK(res.gate("z_final").value < 1e-9);
}

TEST_CASE("truncation of a bounded problem becomes exact", "[harness]") {
    auto m = base_manifest(ExperimentKind::truncation, 8, 1000);
    HFunctionParams h;
    h.pbar = 2.0;
    m.problems = {{"ex1", "ex1", make_example1(h), make_sine_terminal(1)}};
    m.truncation_levels = {1.0, 2.0, 4.0, 8.0, 16.0};
    m.truncation_bound = 8.0;
    const auto res = run_truncation(m);
    CHECK(res.gate("cauchy").passed);
    CHECK(res.gate("identical_beyond_bound").passed);
    CHECK(res.table("distances").rows.size() == 4);
}

TEST_CASE("experiments are reproducible", "[harness]") {
    auto m = base_manifest(ExperimentKind::stability, 8, 1000);
    m.epsilons = {1.0, 0.5};
    m.perturbation.gamma = [](double, ConstVec, MutVec out) { out[0] = 1.0; };
    const auto a = run_experiment(m);
    const auto b = run_experiment(m);
    CHECK(a.table("stages").rows == b.table("stages").rows);
}
