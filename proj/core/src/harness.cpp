#include "bsdelab/harness.hpp"

#include "bsdelab/brownian.hpp"
#include "bsdelab/conditions.hpp"
#include "bsdelab/error.hpp"
#include "bsdelab/format.hpp"
#include "bsdelab/generators.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace bsde {

namespace {

using Clock = std::chrono::steady_clock;

std::string num(double v) { return format_number(v); }
std::string num(std::size_t v) { return std::to_string(v); }

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

const Problem& first_problem(const ExperimentManifest& m) {
    if (m.problems.empty()) throw InvalidArgument("experiment '" + m.name + "' has no problem");
    return m.problems.front();
}

/// Euclidean norm of per-component stderrs.
double combined_stderr(const DiscreteSolution& s) { return frobenius(s.diagnostics.y0_stderr); }

double y0_gap(const DiscreteSolution& a, const DiscreteSolution& b) {
    std::vector<double> d(a.k());
    for (std::size_t i = 0; i < a.k(); ++i) d[i] = a.y_mean(0, i) - b.y_mean(0, i);
    return frobenius(d);
}

SchemeSpec resolved(SchemeSpec s, const GeneratorSpec& gen) {
    if (!s.stepping) s.stepping = default_stepping(gen);
    return s;
}

bool claims_h1_and_h4(const GeneratorSpec& g) {
    const auto& c = g.claimed_conditions;
    const bool h1 = c.count(Condition::h1) || c.count(Condition::h1a) || c.count(Condition::h1b) ||
                    c.count(Condition::h1star);
    return h1 && c.count(Condition::h4);
}

/// g(t_i, B, y_i, z_i) <= g'(t_i, B, y_i, z_i) along a computed solution.
void check_ordering_along(const GeneratorSpec& g, const GeneratorSpec& gp, const DiscreteSolution& sol,
                          const char* which) {
    const PathEnsemble& ens = *sol.ensemble();
    for (std::size_t node = 0; node < sol.steps(); ++node) {
        const double t = sol.grid()[node];
        for (std::size_t m = 0; m < sol.paths(); ++m) {
            double a = 0.0, b = 0.0;
            g.evaluate(t, ens.state(node, m), sol.y(node, m), sol.z(node, m), MutVec(&a, 1));
            gp.evaluate(t, ens.state(node, m), sol.y(node, m), sol.z(node, m), MutVec(&b, 1));
            if (a - b > kSlackTolerance) {
                throw PreconditionError(std::string("generator ordering fails along the ") + which +
                                        " solution at node " + std::to_string(node) + ", path " + std::to_string(m) +
                                        ": g = " + num(a) + " > g' = " + num(b));
            }
        }
    }
}

}  // namespace

const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::uniqueness: return "uniqueness";
        case ExperimentKind::stability: return "stability";
        case ExperimentKind::comparison: return "comparison";
        case ExperimentKind::convergence: return "convergence";
        case ExperimentKind::truncation: return "truncation";
    }
    return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
    for (ExperimentKind k : {ExperimentKind::uniqueness, ExperimentKind::stability, ExperimentKind::comparison,
                             ExperimentKind::convergence, ExperimentKind::truncation}) {
        if (s == to_string(k)) return k;
    }
    throw InvalidArgument("unknown experiment kind '" + s + "'");
}

const char* to_string(ComparisonHypothesis h) {
    switch (h) {
        case ComparisonHypothesis::everywhere: return "everywhere";
        case ComparisonHypothesis::along_primed: return "along_primed";
        case ComparisonHypothesis::along_unprimed: return "along_unprimed";
    }
    return "?";
}

ComparisonHypothesis comparison_hypothesis_from_string(const std::string& s) {
    for (ComparisonHypothesis h :
         {ComparisonHypothesis::everywhere, ComparisonHypothesis::along_primed, ComparisonHypothesis::along_unprimed}) {
        if (s == to_string(h)) return h;
    }
    throw InvalidArgument("unknown comparison hypothesis '" + s + "'");
}

EnsemblePtr EnsembleSpec::build() const {
    const EnsemblePtr base = simulate_ensemble(make_uniform_grid(T, steps), d, paths, seed);
    return antithetic ? antithetic_pairing(*base) : base;
}

void Table::add_row(std::vector<std::string> row) {
    if (row.size() != columns.size()) throw InvalidArgument("table '" + name + "' row has the wrong width");
    rows.push_back(std::move(row));
}

void Table::write_csv(std::ostream& os) const {
    for (std::size_t j = 0; j < columns.size(); ++j) os << (j ? "," : "") << columns[j];
    os << '\n';
    for (const auto& row : rows) {
        for (std::size_t j = 0; j < row.size(); ++j) os << (j ? "," : "") << row[j];
        os << '\n';
    }
}

bool ExperimentResult::passed() const {
    return std::all_of(gates.begin(), gates.end(), [](const Gate& g) { return g.passed; });
}

const Table& ExperimentResult::table(const std::string& name) const {
    for (const Table& t : tables) {
        if (t.name == name) return t;
    }
    throw InvalidArgument("no table named '" + name + "'");
}

const Gate& ExperimentResult::gate(const std::string& name) const {
    for (const Gate& g : gates) {
        if (g.name == name) return g;
    }
    throw InvalidArgument("no gate named '" + name + "'");
}

Problem perturb(const Problem& base, const Perturbation& pert, double eps) {
    if (!std::isfinite(eps)) throw InvalidArgument("perturbation size must be finite");
    if (eps == 0.0) return base;
    Problem out = base;
    out.label = base.label + "+eps";
    const std::size_t k = base.gen.k;
    if (pert.eta) {
        out.xi.eval = [inner = base.xi.eval, eta = pert.eta, eps, k](ConstVec b, const PathRef& path, MutVec y) {
            inner(b, path, y);
            std::vector<double> e(k);
            eta(b, path, e);
            for (std::size_t i = 0; i < k; ++i) y[i] += eps * e[i];
        };
    }
    if (pert.gamma) {
        out.gen.eval = [inner = base.gen.eval, gamma = pert.gamma, eps, k](double t, ConstVec b, ConstVec y, ConstVec z,
                                                                         MutVec g) {
            inner(t, b, y, z, g);
            std::vector<double> e(k);
            gamma(t, b, e);
            for (std::size_t i = 0; i < k; ++i) g[i] += eps * e[i];
        };
    }
    return out;
}

std::vector<double> paired_stderr(const DiscreteSolution& a, const DiscreteSolution& b) {
    const DiscreteSolution diff = difference(a, b);
    const std::size_t M = diff.paths();
    std::vector<double> out(diff.steps() + 1, 0.0);
    if (M < 2) return out;
    for (std::size_t node = 0; node <= diff.steps(); ++node) {
        const double mean = diff.y_mean(node);
        double var = 0.0;
        for (std::size_t m = 0; m < M; ++m) {
            const double v = diff.y(node, m)[0] - mean;
            var += v * v;
        }
        out[node] = std::sqrt(var / static_cast<double>(M - 1) / static_cast<double>(M));
    }
    return out;
}

ExperimentResult run_uniqueness(const ExperimentManifest& m) {
    const auto t0 = Clock::now();
    const Problem& base = first_problem(m);
    if (m.variants.size() < 2) throw InvalidArgument("uniqueness needs at least two variants");
    const TolerancePolicy& tol = m.tolerance;

    struct Arm {
        EnsembleSpec spec;
        EnsemblePtr ens;
        DiscreteSolution sol;
    };
    std::vector<Arm> arms;
    arms.reserve(m.variants.size());
    for (const Variant& v : m.variants) {
        const Problem& prob = v.problem ? *v.problem : base;
        const EnsembleSpec spec = v.ensemble.value_or(m.ensemble);
        EnsemblePtr ens;
        for (const Arm& a : arms) {
            if (a.spec == spec) ens = a.ens;
        }
        if (!ens) ens = spec.build();
        const SchemeSpec scheme = resolved(v.scheme.value_or(m.scheme), prob.gen);
        arms.push_back({spec, ens, solve_backward(prob.gen, prob.xi, ens, scheme)});
    }

    ExperimentResult res;
    res.kind = "uniqueness";
    Table arms_t{"variants", {"variant", "seed", "steps", "paths", "stepping", "y0", "y0_stderr"}, {}};
    for (std::size_t j = 0; j < arms.size(); ++j) {
        const Arm& a = arms[j];
        arms_t.add_row({m.variants[j].label, std::to_string(a.spec.seed), num(a.spec.steps), num(a.sol.paths()),
                        a.sol.diagnostics.stepping, num(a.sol.y_mean(0)), num(combined_stderr(a.sol))});
    }
    Table cmp{"distances",
              {"variant", "reference", "y0_gap", "y0_floor", "shared_paths", "s_p", "s_p_stderr", "m_p", "floor"},
              {}};
    std::vector<Gate> gates;
    for (std::size_t j = 1; j < arms.size(); ++j) {
        const Arm& a = arms[0];
        const Arm& b = arms[j];
        const double se = combined_stderr(a.sol) + combined_stderr(b.sol);
        const double gap = y0_gap(a.sol, b.sol);
        const double y0_floor = tol.sigma * se + tol.abs_floor;
        const bool shared = a.ens == b.ens;
        Gate g{"variant_" + m.variants[j].label, gap <= y0_floor, gap, y0_floor, ""};
        if (shared) {
            const EmpiricalNorms d = solution_distance(b.sol, a.sol, m.p);
            const double floor = y0_floor + tol.sigma * d.stderr_s;
            cmp.add_row({m.variants[j].label, m.variants[0].label, num(gap), num(y0_floor), "1", num(d.s_p),
                         num(d.stderr_s), num(d.m_p), num(floor)});
            g.passed = g.passed && d.s_p <= floor;
            g.value = d.s_p;
            g.threshold = floor;
            g.detail = "pathwise S^p distance on shared paths, Y0 gap " + num(gap);
        } else {
            cmp.add_row({m.variants[j].label, m.variants[0].label, num(gap), num(y0_floor), "0", "", "", "", ""});
            g.detail = "independent ensembles: Y0 gap against the combined floor";
        }
        gates.push_back(std::move(g));
    }
    res.tables = {std::move(arms_t), std::move(cmp)};
    res.gates = std::move(gates);
    res.wall_seconds = seconds_since(t0);
    return res;
}

ExperimentResult run_stability(const ExperimentManifest& m) {
    const auto t0 = Clock::now();
    const Problem& base = first_problem(m);
    if (m.epsilons.empty()) throw InvalidArgument("stability needs an epsilon schedule");
    const TolerancePolicy& tol = m.tolerance;
    const EnsemblePtr ens = m.ensemble.build();
    const SchemeSpec scheme = resolved(m.scheme, base.gen);
    const DiscreteSolution ref = solve_backward(base.gen, base.xi, ens, scheme);

    ExperimentResult res;
    res.kind = "stability";
    Table stages{"stages", {"stage", "epsilon", "metric", "stderr", "ratio_to_previous"}, {}};
    std::vector<MeanEstimate> metrics;
    for (std::size_t n = 0; n < m.epsilons.size(); ++n) {
        const double eps = m.epsilons[n];
        const Problem pert = perturb(base, m.perturbation, eps);
        if (eps != 0.0 && !pert.gen.claimed_conditions.empty()) smoke_check_claims(pert.gen);
        const DiscreteSolution sol = solve_backward(pert.gen, pert.xi, ens, scheme);
        metrics.push_back(stability_metric(sol, ref, m.p));
        const double prev = n ? metrics[n - 1].mean : std::numeric_limits<double>::quiet_NaN();
        stages.add_row({num(n), num(eps), num(metrics[n].mean), num(metrics[n].stderr),
                        n && prev > 0.0 ? num(metrics[n].mean / prev) : ""});
    }
    res.tables.push_back(std::move(stages));

    bool any_zero = false, zero_ok = true;
    for (std::size_t n = 0; n < metrics.size(); ++n) {
        if (m.epsilons[n] == 0.0) {
            any_zero = true;
            zero_ok = zero_ok && metrics[n].mean == 0.0;
        }
    }
    if (any_zero) res.gates.push_back({"zero_at_zero", zero_ok, 0.0, 0.0, "metric is exactly 0 where epsilon = 0"});

    bool mono = true;
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t n = 1; n < metrics.size(); ++n) {
        if (metrics[n - 1].mean <= tol.sigma * metrics[n - 1].stderr) break;  // noise floor reached
        const double excess =
            metrics[n].mean - metrics[n - 1].mean - tol.sigma * (metrics[n].stderr + metrics[n - 1].stderr);
        worst = std::max(worst, excess);
        mono = mono && excess <= 0.0;
    }
    res.gates.push_back({"nonincreasing", mono, std::isfinite(worst) ? worst : 0.0, 0.0,
                         "largest increase beyond the noise allowance"});

    const double initial = metrics.front().mean;
    const double final_metric = metrics.back().mean;
    const double limit = std::max(tol.sigma * metrics.back().stderr, tol.stability_ratio * initial);
    res.gates.push_back({"final", final_metric <= limit, final_metric, limit,
                         "final/initial = " + (initial > 0.0 ? num(final_metric / initial) : std::string("n/a"))});
    res.wall_seconds = seconds_since(t0);
    return res;
}

ExperimentResult run_comparison(const ExperimentManifest& m) {
    const auto t0 = Clock::now();
    if (m.problems.size() < 2) throw InvalidArgument("comparison needs a problem pair");
    const Problem& P = m.problems[0];
    const Problem& Q = m.problems[1];
    if (P.gen.k != 1 || Q.gen.k != 1 || P.xi.k != 1 || Q.xi.k != 1) {
        throw InvalidArgument("comparison is one-dimensional: both problems need k = 1");
    }
    const TolerancePolicy& tol = m.tolerance;
    const EnsemblePtr ens = m.ensemble.build();
    const PathEnsemble& E = *ens;
    const std::size_t N = E.grid().steps();

    for (std::size_t p = 0; p < E.paths(); ++p) {
        double a = 0.0, b = 0.0;
        P.xi.eval(E.state(N, p), PathRef{&E, p}, MutVec(&a, 1));
        Q.xi.eval(E.state(N, p), PathRef{&E, p}, MutVec(&b, 1));
        if (a > b) {
            throw PreconditionError("terminal ordering fails on path " + std::to_string(p) + ": xi = " + num(a) +
                                    " > xi' = " + num(b));
        }
    }
    switch (m.hypothesis) {
        case ComparisonHypothesis::everywhere: {
            if (!claims_h1_and_h4(P.gen) && !claims_h1_and_h4(Q.gen)) {
                throw PreconditionError("comparison needs one generator claiming an (H1) condition and H4");
            }
            SamplerSpec s;
            s.seed = E.seed();
            s.count = m.ordering_samples;
            const ConditionReport rep = check_ordering(P.gen, Q.gen, s);
            if (!rep.passed) {
                const Witness& w = rep.violations.front();
                throw PreconditionError("generator ordering fails at t = " + num(w.t) + ", y = " + num(w.y1[0]) +
                                        ": g = " + num(w.lhs) + " > g' = " + num(w.rhs));
            }
            break;
        }
        case ComparisonHypothesis::along_primed:
            if (!claims_h1_and_h4(P.gen)) throw PreconditionError("ordering along the primed solution needs g to claim (H1) and H4");
            break;
        case ComparisonHypothesis::along_unprimed:
            if (!claims_h1_and_h4(Q.gen)) throw PreconditionError("ordering along the unprimed solution needs g' to claim (H1) and H4");
            break;
    }

    const DiscreteSolution a = solve_backward(P.gen, P.xi, ens, resolved(m.scheme, P.gen));
    const DiscreteSolution b = solve_backward(Q.gen, Q.xi, ens, resolved(m.scheme, Q.gen));
    if (m.hypothesis == ComparisonHypothesis::along_primed) check_ordering_along(P.gen, Q.gen, b, "primed");
    if (m.hypothesis == ComparisonHypothesis::along_unprimed) check_ordering_along(P.gen, Q.gen, a, "unprimed");

    const std::vector<double> se = paired_stderr(a, b);
    ExperimentResult res;
    res.kind = "comparison";
    Table nodes{"nodes", {"node", "t", "mean_gap", "min_gap", "stderr", "violations"}, {}};
    std::size_t violations = 0;
    double worst = 0.0;
    std::size_t worst_node = 0, worst_path = 0;
    for (std::size_t node = 0; node <= N; ++node) {
        double mean = 0.0, lo = std::numeric_limits<double>::infinity();
        std::size_t count = 0;
        for (std::size_t p = 0; p < E.paths(); ++p) {
            const double gap = b.y(node, p)[0] - a.y(node, p)[0];
            mean += gap;
            lo = std::min(lo, gap);
            const double excess = -gap - tol.sigma * se[node];
            if (excess > 0.0) {
                ++count;
                if (excess > worst) {
                    worst = excess;
                    worst_node = node;
                    worst_path = p;
                }
            }
        }
        violations += count;
        nodes.add_row({num(node), num(E.grid()[node]), num(mean / static_cast<double>(E.paths())), num(lo),
                       num(se[node]), num(count)});
    }
    res.tables.push_back(std::move(nodes));
    const double fraction = static_cast<double>(violations) / static_cast<double>((N + 1) * E.paths());
    std::string detail = std::to_string(violations) + " violating cells";
    if (violations) {
        detail += "; worst excess " + num(worst) + " at node " + std::to_string(worst_node) + ", path " +
                  std::to_string(worst_path);
    }
    res.gates.push_back({"violation_fraction", fraction <= tol.violation_fraction, fraction, tol.violation_fraction,
                         detail});
    res.wall_seconds = seconds_since(t0);
    return res;
}

ExperimentResult run_convergence(const ExperimentManifest& m) {
    const auto t0 = Clock::now();
    const Problem& prob = first_problem(m);
    if (m.refinement.empty()) throw InvalidArgument("convergence needs a refinement schedule");
    const TolerancePolicy& tol = m.tolerance;
    const SchemeSpec scheme = resolved(m.scheme, prob.gen);

    ExperimentResult res;
    res.kind = "convergence";
    Table stages{"stages", {"stage", "steps", "paths", "y0", "y0_stderr", "y0_error", "z_error"}, {}};
    std::vector<double> err, se, zerr;
    double prev_y0 = std::numeric_limits<double>::quiet_NaN();
    double prev_se = 0.0;
    for (std::size_t j = 0; j < m.refinement.size(); ++j) {
        EnsembleSpec spec = m.ensemble;
        spec.steps = m.refinement[j].first;
        spec.paths = m.refinement[j].second;
        const DiscreteSolution sol = solve_backward(prob.gen, prob.xi, spec.build(), scheme);
        const double y0 = sol.y_mean(0);
        const double s = combined_stderr(sol);
        double e = std::numeric_limits<double>::quiet_NaN();
        if (m.exact_y0) {
            e = std::abs(y0 - *m.exact_y0);
            se.push_back(s);
        } else if (j > 0) {
            e = std::abs(y0 - prev_y0);
            se.push_back(s + prev_se);
        }
        double ze = std::numeric_limits<double>::quiet_NaN();
        if (m.exact_z) {
            ze = 0.0;
            for (std::size_t node = 0; node < sol.steps(); ++node) ze = std::max(ze, std::abs(sol.z_mean(node) - *m.exact_z));
            zerr.push_back(ze);
        }
        if (!std::isnan(e)) err.push_back(e);
        stages.add_row({num(j), num(spec.steps), num(sol.paths()), num(y0), num(s), std::isnan(e) ? "" : num(e),
                        std::isnan(ze) ? "" : num(ze)});
        prev_y0 = y0;
        prev_se = s;
    }
    res.tables.push_back(std::move(stages));

    if (!err.empty()) {
        bool mono = true;
        for (std::size_t j = 1; j < err.size(); ++j) {
            mono = mono && err[j] <= err[j - 1] + tol.sigma * (se[j] + se[j - 1]);
        }
        res.gates.push_back({"y0_monotone", mono, err.back(), 0.0,
                             m.exact_y0 ? "error against the exact Y0" : "self-refinement gaps"});
        res.gates.push_back({"y0_final", err.back() <= tol.target_error, err.back(), tol.target_error, ""});
    }
    if (!zerr.empty()) {
        res.gates.push_back({"z_final", zerr.back() <= tol.z_target_error, zerr.back(), tol.z_target_error,
                             "max over nodes of |mean Z - exact|"});
    }
    res.wall_seconds = seconds_since(t0);
    return res;
}

ExperimentResult run_truncation(const ExperimentManifest& m) {
    const auto t0 = Clock::now();
    const Problem& prob = first_problem(m);
    if (m.truncation_levels.size() < 2) throw InvalidArgument("truncation needs at least two levels");
    const TolerancePolicy& tol = m.tolerance;
    const EnsemblePtr ens = m.ensemble.build();
    const std::vector<DiscreteSolution> sols =
        picard_truncation_sequence(prob.gen, prob.xi, m.truncation_levels, ens, m.scheme);

    ExperimentResult res;
    res.kind = "truncation";
    Table dist{"distances", {"n_from", "n_to", "s_p", "s_p_stderr", "m_p", "identical"}, {}};
    std::vector<EmpiricalNorms> d;
    for (std::size_t j = 0; j + 1 < sols.size(); ++j) {
        d.push_back(solution_distance(sols[j + 1], sols[j], m.p));
        const bool same = sols[j].Y() == sols[j + 1].Y() && sols[j].Z() == sols[j + 1].Z();
        dist.add_row({num(m.truncation_levels[j]), num(m.truncation_levels[j + 1]), num(d.back().s_p),
                      num(d.back().stderr_s), num(d.back().m_p), same ? "1" : "0"});
    }
    res.tables.push_back(std::move(dist));

    std::size_t peak = 0;
    for (std::size_t j = 1; j < d.size(); ++j) {
        if (d[j].s_p > d[peak].s_p) peak = j;
    }
    bool mono = true;
    for (std::size_t j = peak + 1; j < d.size(); ++j) {
        mono = mono && d[j].s_p <= d[j - 1].s_p + tol.sigma * (d[j].stderr_s + d[j - 1].stderr_s);
    }
    res.gates.push_back({"cauchy", mono, d.back().s_p, d[peak].s_p,
                         "distances nonincreasing from index " + std::to_string(peak)});

    if (m.truncation_bound) {
        std::size_t first = sols.size();
        for (std::size_t j = 0; j < sols.size(); ++j) {
            if (m.truncation_levels[j] >= *m.truncation_bound) {
                first = j;
                break;
            }
        }
        bool identical = true;
        for (std::size_t j = first + 1; j < sols.size(); ++j) {
            identical = identical && sols[j].Y() == sols[first].Y() && sols[j].Z() == sols[first].Z();
        }
        res.gates.push_back({"identical_beyond_bound", identical, static_cast<double>(sols.size() - first),
                             *m.truncation_bound, "solutions at levels >= bound compared bitwise"});
    }
    res.wall_seconds = seconds_since(t0);
    return res;
}

ExperimentResult run_experiment(const ExperimentManifest& m) {
    switch (m.kind) {
        case ExperimentKind::uniqueness: return run_uniqueness(m);
        case ExperimentKind::stability: return run_stability(m);
        case ExperimentKind::comparison: return run_comparison(m);
        case ExperimentKind::convergence: return run_convergence(m);
        case ExperimentKind::truncation: return run_truncation(m);
    }
    throw InvalidArgument("unknown experiment kind");
}

}  // namespace bsde
