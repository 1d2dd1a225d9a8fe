// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include "commands.hpp"

#include "bsdelab/brownian.hpp"
#include "bsdelab/conditions.hpp"
#include "bsdelab/error.hpp"
#include "bsdelab/estimates.hpp"
#include "bsdelab/format.hpp"
#include "bsdelab/generators.hpp"
#include "bsdelab/harness.hpp"
#include "bsdelab/modulus.hpp"
#include "bsdelab/parallel.hpp"
#include "bsdelab/solver.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

using namespace bsde;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

std::string f(double v) { return format_number(v); }

std::string short_num(double v) {
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
}

EnsemblePtr ensemble(std::size_t N, std::size_t M, std::uint64_t seed, std::size_t d = 1) {
    return simulate_ensemble(make_uniform_grid(1.0, N), d, M, seed);
}

SchemeSpec implicit(double theta) {
    SchemeSpec s;
    s.stepping = Stepping::implicit_y;
    s.implicit_weight = theta;
    return s;
}

HFunctionParams h_params(double pbar) {
    HFunctionParams h;
    h.pbar = pbar;
    return h;
}

/// Slope of the tangent line of x |ln x|^r at delta.
double h_tangent_slope(double r, double delta) {
    const double L = -std::log(delta);
    return std::pow(L, r) - r * std::pow(L, r - 1.0);
}

// 1. backward-in-time decay with a closed form
Outcome closed_form_drift() {
    const auto t0 = Clock::now();
    const auto sol = solve_backward(make_affine(1, 1, {-1.0}, {}, {0.0}), make_constant_terminal({1.0}),
                                    ensemble(64, 50000, 1), implicit(0.5));
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    const double err = std::abs(sol.y_mean(0) - std::exp(-1.0));
    return {err <= 1e-3 && secs <= 60.0,
            "|Y0 - e^-1| = " + short_num(err) + " (<= 1e-3), " + short_num(secs) + " s (<= 60 s), theta = 0.5"};
}

// 2. Z of the martingale B_T is 1
Outcome martingale_representation() {
    const auto sol = solve_backward(make_zero(1, 1), make_brownian_terminal(1), ensemble(32, 100000, 2), SchemeSpec{});
    double worst = 0.0;
    for (std::size_t i = 0; i < sol.steps(); ++i) worst = std::max(worst, std::abs(sol.z_mean(i) - 1.0));
    return {worst <= 0.05, "max node |mean Z - 1| = " + short_num(worst) + " (<= 0.05)"};
}

// 3. comparison on shared paths
Outcome comparison() {
    ExperimentManifest a;
    a.kind = ExperimentKind::comparison;
    a.name = "terminal_shift";
    a.ensemble.steps = 32;
    a.ensemble.paths = 20000;
    a.ensemble.seed = 3;
    const auto decay = make_affine(1, 1, {-1.0}, {}, {0.0});
    a.problems = {{"base", "", decay, make_brownian_terminal(1)}, {"primed", "", decay, make_brownian_terminal(1, 1.0, 1.0)}};
    a.hypothesis = ComparisonHypothesis::everywhere;
    const auto ra = run_comparison(a);

    ExperimentManifest b = a;
    b.name = "drift_shift";
    const auto ex1 = make_example1(h_params(2.0));
    Problem primed{"primed", "", ex1, make_sine_terminal(1)};
    Perturbation shift;
    shift.gamma = [](double, ConstVec, MutVec out) { out[0] = 0.5; };
    primed = perturb(primed, shift, 1.0);
    b.problems = {{"base", "", ex1, make_sine_terminal(1)}, primed};
    const auto rb = run_comparison(b);

    const Gate& ga = ra.gate("violation_fraction");
    const Gate& gb = rb.gate("violation_fraction");
    return {ra.passed() && rb.passed(), "violation fraction " + short_num(ga.value) + " (xi + 1), " +
                                            short_num(gb.value) + " (Example 1 drift + 0.5); limit 1e-3"};
}

// 4. stability ladder
Outcome stability() {
    ExperimentManifest m;
    m.kind = ExperimentKind::stability;
    m.name = "stability";
    m.ensemble.steps = 32;
    m.ensemble.paths = 10000;
    m.ensemble.seed = 4;
    m.problems = {{"affine", "", make_affine(1, 1, {-1.0}, {0.5}, {0.2}), make_brownian_terminal(1)}};
    for (int n = 0; n <= 6; ++n) m.epsilons.push_back(std::ldexp(1.0, -n));
    m.epsilons.push_back(0.0);
    m.perturbation.eta = [](ConstVec b, const PathRef&, MutVec out) { out[0] = b[0]; };
    m.perturbation.gamma = [](double t, ConstVec, MutVec out) { out[0] = std::cos(t); };
    const auto r = run_stability(m);
    const auto& rows = r.table("stages").rows;
    const double first = std::stod(rows.front()[2]);
    const double last = std::stod(rows[rows.size() - 2][2]);
    return {r.passed(), "nonincreasing " + std::string(r.gate("nonincreasing").passed ? "yes" : "no") +
                            ", final/initial = " + short_num(last / first) + " (<= 0.05), metric at 0 = " +
                            f(r.gate("zero_at_zero").value)};
}

// 5. truncation sequence
Outcome truncation() {
    ExperimentManifest m;
    m.kind = ExperimentKind::truncation;
    m.name = "truncation";
    m.ensemble.steps = 16;
    m.ensemble.paths = 5000;
    m.ensemble.seed = 5;
    const auto gen = make_example1(h_params(2.0));
    m.problems = {{"example1", "", gen, make_sine_terminal(1)}};
    m.truncation_levels = {1, 2, 4, 8, 16, 32};
    // |xi| <= 1 and |g(t_i, b, 0, 0)| = |t_i^{-1/3} - 1| on the left nodes
    double bound = 1.0;
    for (std::size_t i = 1; i < m.ensemble.steps; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(m.ensemble.steps);
        bound = std::max(bound, std::abs(1.0 / std::cbrt(t) - 1.0));
    }
    m.truncation_bound = bound;
    const auto r = run_truncation(m);
    std::string dists;
    for (const auto& row : r.table("distances").rows) dists += (dists.empty() ? "" : ", ") + short_num(std::stod(row[2]));
    return {r.passed(), "distances [" + dists + "], identical for n >= " + short_num(bound) + ": " +
                            (r.gate("identical_beyond_bound").passed ? "yes" : "no")};
}

// 6. modulus transformations
Outcome modulus_suite() {
    std::size_t sandwich_bad = 0, hull_bad = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        std::vector<double> x, v;
        oracle::star_shaped(seed, 64, x, v);
        const auto fast = upper_hull_values(x, v);
        const auto slow = oracle::upper_hull(x, v);
        const auto maj = concave_majorant(x, v);
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double p = maj(x[i]);
            // 2f is exact in binary; allow the last-bit rounding of the chord
            if (!(p >= v[i] && p <= 2.0 * v[i] * (1.0 + 4.0 * std::numeric_limits<double>::epsilon()))) ++sandwich_bad;
            if (std::abs(fast[i] - slow[i]) > 1e-12 * std::abs(slow[i])) ++hull_bad;
        }
    }
    std::size_t concave_bad = 0;
    const ModulusFn inputs[] = {ModulusFn::linear(2.0), ModulusFn::power(0.5), ModulusFn::log_osgood(1.0, 0.2),
                                h_modulus(h_params(2.0))};
    for (const auto& rho : inputs) {
        for (double p : {1.0, 1.5, 2.0, 4.0}) {
            for (const auto& out : {lift_order(rho, p, p + 1.0), mao_to_constantin(rho, p), constantin_to_mao(rho, p)}) {
                if (!out.concave_verified() || !slopes_nonincreasing(out.nodes(), out.values())) ++concave_bad;
            }
        }
    }
    double round_trip = 0.0;
    for (double mu : {0.1, 1.0, 7.5}) {
        for (double p : {1.0, 2.0, 3.0}) {
            const auto back = constantin_to_mao(mao_to_constantin(ModulusFn::linear(mu), p), p);
            for (std::size_t i = 0; i < back.nodes().size(); ++i) {
                const double ref = mu * back.nodes()[i];
                round_trip = std::max(round_trip, std::abs(back.values()[i] - ref) / ref);
            }
        }
    }
    return {sandwich_bad == 0 && hull_bad == 0 && concave_bad == 0 && round_trip <= 1e-12,
            "sandwich failures " + std::to_string(sandwich_bad) + ", hull mismatches " + std::to_string(hull_bad) +
                " (100 fixtures), non-concave outputs " + std::to_string(concave_bad) +
                ", linear round trip rel err " + short_num(round_trip)};
}

// 7. Osgood classifier
Outcome classifier() {
    struct Case {
        const char* label;
        ModulusFn rho;
        double p;
        OsgoodVariant variant;
        Verdict oracle;
    };
    const auto h = h_params(2.0);
    // Reference verdicts from the closed-form integrals at 0+:
    // 1/u, u^-1/2, 1/(u|ln u|), 1/(u ln^2 u), u/h(u)^2 = 1/(u|ln u|), u^-3/2.
    const Case cases[] = {
        {"linear", ModulusFn::linear(1.0), 1.0, OsgoodVariant::osgood, Verdict::diverges},
        {"sqrt", ModulusFn::power(0.5), 1.0, OsgoodVariant::osgood, Verdict::converges},
        {"u|ln u|", ModulusFn::log_osgood(1.0, 0.2), 1.0, OsgoodVariant::osgood, Verdict::diverges},
        {"u|ln u|^2", ModulusFn::log_osgood(2.0, 0.1), 1.0, OsgoodVariant::osgood, Verdict::converges},
        {"h, constantin_2", h_modulus(h), 2.0, OsgoodVariant::constantin_p, Verdict::diverges},
        {"u^1.5", ModulusFn::power(1.5), 1.0, OsgoodVariant::osgood, Verdict::diverges},
    };
    std::size_t wrong = 0;
    std::string listing;
    for (const auto& c : cases) {
        const auto v = osgood_classifier(c.rho, c.p, c.variant);
        const auto n = osgood_classifier(c.rho, c.p, c.variant, true);
        const bool numeric_contradicts =
            n.verdict != Verdict::inconclusive && n.verdict != c.oracle;
        if (v.verdict != c.oracle || numeric_contradicts) ++wrong;
        listing += std::string(listing.empty() ? "" : ", ") + c.label + " " + to_string(v.verdict);
    }
    return {wrong == 0, std::to_string(wrong) + " misclassified [" + listing + "]"};
}

// 8. Bihari inequality
Outcome bihari() {
    double worst = 0.0;
    for (double a : {1e-4, 0.1, 1.0, 5.0}) {
        for (double mu : {0.05, 0.5, 2.0}) {
            for (double T : {0.1, 1.0, 3.0}) {
                const double ref = oracle::gronwall(a, mu, T);
                worst = std::max(worst, std::abs(bihari_bound(a, ModulusFn::linear(mu), T, 1.0) - ref) / ref);
            }
        }
    }
    bool zero_ok = true;
    for (const auto& rho : {ModulusFn::linear(1.0), ModulusFn::log_osgood(1.0, 0.2), h_modulus(h_params(1.0))}) {
        zero_ok = zero_ok && bihari_bound(0.0, rho, 2.0, 1.0) == 0.0;
    }
    bool monotone = true;
    const auto rho = ModulusFn::log_osgood(1.0, 0.2);
    double prev = 0.0;
    for (double a : {1e-8, 1e-6, 1e-4, 1e-2, 0.1, 0.5, 1.0, 2.0}) {
        const double v = bihari_bound(a, rho, 1.0, 1.0);
        monotone = monotone && v >= prev;
        prev = v;
    }
    prev = 0.0;
    for (double T : {0.0, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0}) {
        const double v = bihari_bound(1e-3, rho, T, 1.0);
        monotone = monotone && v >= prev;
        prev = v;
    }
    return {worst <= 1e-9 && zero_ok && monotone, "Gronwall rel err " + short_num(worst) + " (<= 1e-9), a = 0 gives 0: " +
                                                      (zero_ok ? "yes" : "no") + ", monotone: " +
                                                      (monotone ? "yes" : "no")};
}

// 9. condition samplers
Outcome condition_checkers() {
    SamplerSpec s;
    s.count = 100000;
    s.seed = 9;
    std::size_t violations = 0, reports = 0;
    for (const auto& gen : {make_example1(h_params(2.0)), make_example1(h_params(1.5)), make_example2(2, h_params(2.0))}) {
        for (const auto& r : check_claims(gen, s)) {
            violations += r.violation_count;
            ++reports;
        }
    }
    const auto quad = check_one_sided(make_quadratic(), ModulusFn::linear(1.0), 1.0, OneSidedVariant::osgood, s);
    std::string witness = "none";
    if (!quad.violations.empty()) {
        const Witness& w = quad.violations.front();
        witness = "y1 = " + short_num(w.y1[0]) + ", y2 = " + short_num(w.y2[0]) + ", lhs " + short_num(w.lhs) +
                  " > rhs " + short_num(w.rhs);
    }
    return {violations == 0 && reports > 0 && !quad.passed && !quad.violations.empty(),
            std::to_string(violations) + " violations in " + std::to_string(reports) +
                " claim checks x 1e5 samples; y^2 witness: " + witness};
}

// 10. a priori estimates
Outcome estimates() {
    std::vector<std::string> failed;
    std::string ratios;
    const auto record = [&](const std::string& name, const EstimateReport& r) {
        if (!r.passed) failed.push_back(name);
        ratios += (ratios.empty() ? "" : ", ") + name + " " + short_num(r.ratio);
    };
    const auto zero_f = ProcessSpec::zero();
    SamplerSpec s;
    s.count = 20000;
    s.seed = 10;

    {
        const auto sol = solve_backward(make_zero(1, 1), make_constant_terminal({0.0}), ensemble(16, 2000, 10), SchemeSpec{});
        record("zero/P2", verify_prop2(sol, {0.0, 0.0, zero_f, zero_f}, 2.0));
        record("zero/P3", verify_prop3(sol, ModulusFn::linear(0.0), 0.0, zero_f, 2.0));
    }
    {
        // y g = -y^2 <= 0
        const auto g = make_affine(1, 1, {-1.0}, {}, {0.0});
        if (!check_A1(g, 0.0, 0.0, zero_f, zero_f, 2.0, s).passed) failed.push_back("decay/A1");
        const auto sol = solve_backward(g, make_constant_terminal({1.0}), ensemble(64, 5000, 11), implicit(0.5));
        record("decay/P2", verify_prop2(sol, {0.0, 0.0, zero_f, zero_f}, 2.0));
        record("decay/P3", verify_prop3(sol, ModulusFn::linear(0.0), 0.0, zero_f, 2.0));
    }
    {
        const auto sol = solve_backward(make_zero(1, 1), make_brownian_terminal(1), ensemble(32, 20000, 12), SchemeSpec{});
        record("martingale/P2", verify_prop2(sol, {0.0, 0.0, zero_f, zero_f}, 2.0));
        record("martingale/P3", verify_prop3(sol, ModulusFn::linear(0.0), 0.0, zero_f, 2.0));
    }
    {
        // Example 1, pbar = 2. With A the linear growth bound of h:
        //   y g <= A y^2 + |y| |z| + |y| (A + 1 + t^{-1/3})
        //   |y| <y/|y|, g> <= lift(h)(|y|^2) + |y| |z| + |y| (1 + t^{-1/3})
        const auto hp = h_params(2.0);
        const auto g = make_example1(hp);
        const ModulusFn h = h_modulus(hp);
        const double A = linear_growth_bound(h);
        ProcessSpec f1;
        f1.regular = [A](double, ConstVec) { return A + 1.0; };
        f1.singular = [](double t) { return 1.0 / std::cbrt(t); };
        f1.singular_integral = [](double a, double b) { return 1.5 * (std::cbrt(b * b) - std::cbrt(a * a)); };
        ProcessSpec f2 = f1;
        f2.regular = [](double, ConstVec) { return 1.0; };
        const ModulusFn psi = lift_order(h, 1.0, 2.0);
        if (!check_A1(g, A, 1.0, f1, zero_f, 2.0, s).passed) failed.push_back("ex1/A1");
        if (!check_A2(g, psi, 1.0, f2, 2.0, s).passed) failed.push_back("ex1/A2");
        const auto sol = solve_backward(g, make_sine_terminal(1), ensemble(32, 5000, 13), SchemeSpec{});
        record("ex1/P2", verify_prop2(sol, {A, 1.0, f1, zero_f}, 2.0));
        record("ex1/P3", verify_prop3(sol, psi, 1.0, f2, 2.0));
    }
    {
        // Example 2, k = 2, pbar = 2, Euclidean norms, h <= h(delta) + h'(delta) x:
        //   y g <= sqrt(k) h'(delta) |y|^2 + sqrt(k) |y| |z| + sqrt(k) |y| (|b| + h(delta)) + k / e
        //   |y| <y/|y|, g> <= sqrt(k) lift(h)(|y|^2) + sqrt(k) |y| |z| + sqrt(k) |y| (1 + |b|)
        const double k = 2.0, rk = std::sqrt(k);
        const auto hp = h_params(2.0);
        const auto g = make_example2(2, hp);
        const double delta = hp.resolved_delta();
        const double hd = delta * std::sqrt(-std::log(delta));
        const double mu = rk * h_tangent_slope(0.5, delta);
        ProcessSpec f1;
        f1.regular = [rk, hd](double, ConstVec b) { return rk * (frobenius(b) + hd); };
        ProcessSpec f2;
        f2.regular = [rk](double, ConstVec b) { return rk * (1.0 + frobenius(b)); };
        const ProcessSpec phi = ProcessSpec::constant(k / std::exp(1.0));
        const ModulusFn psi = lift_order(h_modulus(hp, rk), 1.0, 2.0);
        if (!check_A1(g, mu, rk, f1, phi, 2.0, s).passed) failed.push_back("ex2/A1");
        if (!check_A2(g, psi, rk, f2, 2.0, s).passed) failed.push_back("ex2/A2");
        const auto sol = solve_backward(g, make_sine_terminal(2, 0.5), ensemble(32, 5000, 14), SchemeSpec{});
        record("ex2/P2", verify_prop2(sol, {mu, rk, f1, phi}, 2.0));
        record("ex2/P3", verify_prop3(sol, psi, rk, f2, 2.0));
    }
    const auto L2 = constant_ledger(2.0, 0.0, 2.0, 1.0);
    const auto L15 = constant_ledger(1.5, 0.0, 0.0, 1.0);
    const bool arithmetic = *L2.c_of_p == 1.0 && *L15.c_of_p == 0.375 && *L2.d_lambda_p == 8.0;
    if (!arithmetic) failed.push_back("ledger arithmetic");
    std::string fails;
    for (const auto& n : failed) fails += " " + n;
    return {failed.empty(), "lhs/rhs [" + ratios + "]; c(2) = 1, c(1.5) = 0.375, d_{2,2} = 8: " +
                                (arithmetic ? "exact" : "wrong") + (fails.empty() ? "" : "; failed:" + fails)};
}

// 11. determinism across thread counts
Outcome determinism() {
    const fs::path configs = BSDELAB_CONFIG_DIR;
    const fs::path root = fs::temp_directory_path() / "bsdelab_acceptance_determinism";
    fs::remove_all(root);
    fs::create_directories(root);
    struct Run {
        const char* command;
        const char* config;
    };
    const Run runs[] = {{"solve", "solve_affine"},          {"check", "check_example1"},
                        {"experiment", "stability_affine"}, {"experiment", "comparison_example1"},
                        {"experiment", "truncation_example1"}, {"experiment", "uniqueness_affine"},
                        {"modulus", "modulus_queries"}};
    std::size_t files = 0, mismatched = 0;
    std::string bad;
    for (const Run& r : runs) {
        std::map<unsigned, std::map<std::string, std::string>> contents;
        for (unsigned threads : {1u, 8u}) {
            bsde::cli::GlobalOptions opt;
            opt.config_path = (configs / (std::string(r.config) + ".json")).string();
            opt.outdir = (root / std::to_string(threads)).string();
            opt.label = "run";
            opt.threads = threads;
            std::ostringstream out, err;
            const int code = bsde::cli::run(r.command, opt, out, err);
            if (code != bsde::cli::kExitOk && code != bsde::cli::kExitGateFailed) {
                return {false, std::string(r.config) + " failed: " + err.str()};
            }
            const fs::path tables = root / std::to_string(threads) / r.config / "run" / "tables";
            for (const auto& e : fs::directory_iterator(tables)) {
                std::ifstream is(e.path(), std::ios::binary);
                std::ostringstream os;
                os << is.rdbuf();
                contents[threads][e.path().filename().string()] = os.str();
            }
        }
        parallel::set_max_threads(0);
        for (const auto& [name, text] : contents[1]) {
            ++files;
            const auto it = contents[8].find(name);
            if (it == contents[8].end() || it->second != text) {
                ++mismatched;
                bad += " " + std::string(r.config) + "/" + name;
            }
        }
    }
    fs::remove_all(root);
    return {mismatched == 0 && files > 0, std::to_string(files) + " CSV files from " + std::to_string(std::size(runs)) +
                                              " manifests compared at 1 and 8 threads, " +
                                              std::to_string(mismatched) + " differ" + bad};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    const Criterion criteria[] = {
        {1, "closed-form drift", closed_form_drift},
        {2, "martingale representation", martingale_representation},
        {3, "comparison", comparison},
        {4, "stability", stability},
        {5, "truncation Cauchy", truncation},
        {6, "modulus suite", modulus_suite},
        {7, "Osgood classifier", classifier},
        {8, "Bihari bound", bihari},
        {9, "condition checkers", condition_checkers},
        {10, "a priori estimates", estimates},
        {11, "determinism", determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        std::cout << (o.passed ? "PASS" : "FAIL") << "  " << c.id << ". " << c.name << ": " << o.detail << " ["
                  << short_num(secs) << " s]" << std::endl;
        failed += o.passed ? 0 : 1;
    }
    std::cout << (std::size(criteria) - static_cast<std::size_t>(failed)) << "/" << std::size(criteria)
              << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
