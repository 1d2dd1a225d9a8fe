#include "commands.hpp"

#include "codec.hpp"

#include "bsdelab/brownian.hpp"
#include "bsdelab/error.hpp"
#include "bsdelab/estimates.hpp"
#include "bsdelab/format.hpp"
#include "bsdelab/parallel.hpp"

#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

namespace bsde::cli {

namespace fs = std::filesystem;

namespace {

struct Numeric {
    EnsembleSpec ensemble;
    SchemeSpec scheme;
    std::size_t csv_paths = 64;
};

Numeric read_numeric(Reader& top) {
    Numeric n;
    if (auto r = top.optional_object("numeric")) {
        n.ensemble = read_ensemble(*r);
        if (auto s = r->optional_object("scheme")) n.scheme = read_scheme(*s);
        n.csv_paths = r->count("csv_paths", n.csv_paths);
        r->finish();
    }
    return n;
}

void read_output(Reader& top) {
    if (auto r = top.optional_object("output")) {
        r->text("dir", "");
        r->text("label", "");
        r->finish();
    }
}

std::string utc_stamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << text;
}

void write_table(const fs::path& dir, const Table& t) {
    std::ostringstream os;
    t.write_csv(os);
    write_text(dir / "tables" / (t.name + ".csv"), os.str());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + format_number(v[i]);
    return s;
}

json ledger_json(const ConstantLedger& L) {
    json j{{"p", L.p},           {"mu", L.mu},           {"lambda", L.lambda},
           {"T", L.T},           {"c_p_power", L.c_p_power}, {"bdg_prop2", L.bdg_prop2},
           {"c_p", L.c_p},       {"d_p", L.d_p},         {"C_mu_lambda_p_T", L.C_mu_lambda_p_T},
           {"C_p", L.C_p},       {"bdg_configured", L.bdg_configured}};
    const auto put = [&](const char* key, const std::optional<double>& v) {
        if (v) j[key] = *v;
    };
    put("c_of_p", L.c_of_p);
    put("d_lambda_p", L.d_lambda_p);
    put("bdg_prop3", L.bdg_prop3);
    put("k_p", L.k_p);
    put("k1_p", L.k1_p);
    put("k2_p", L.k2_p);
    put("C_lambda_p_T", L.C_lambda_p_T);
    return j;
}

json report_json(const EstimateReport& r) {
    json terms = json::object();
    for (const auto& [k, v] : r.terms) terms[k] = v;
    return {{"lhs", r.lhs},   {"lhs_stderr", r.lhs_stderr},          {"rhs", r.rhs}, {"ratio", r.ratio},
            {"passed", r.passed}, {"constants", ledger_json(r.constants)}, {"terms", terms}};
}

json gates_json(const std::vector<Gate>& gates) {
    json out = json::array();
    for (const Gate& g : gates) {
        out.push_back({{"name", g.name}, {"passed", g.passed}, {"value", g.value}, {"threshold", g.threshold},
                       {"detail", g.detail}});
    }
    return out;
}

Table gates_table(const std::vector<Gate>& gates) {
    Table t{"gates", {"gate", "passed", "value", "threshold"}, {}};
    for (const Gate& g : gates) {
        t.add_row({g.name, g.passed ? "1" : "0", format_number(g.value), format_number(g.threshold)});
    }
    return t;
}

/// A problem whose terminal may be omitted (condition checks).
struct CheckProblem {
    GeneratorSpec gen;
    std::optional<TerminalSpec> xi;
    double p = 2.0;
};

CheckProblem read_check_problem(Reader r, std::size_t d) {
    CheckProblem out;
    out.p = r.number("p", 2.0);
    out.gen = read_generator(r.object("generator"), d);
    if (r.has("terminal")) out.xi = read_terminal(r.object("terminal"), d, out.p);
    r.finish();
    return out;
}

ConditionReport run_condition(Reader q, const CheckProblem& prob, const SamplerSpec& s, const EnsembleSpec& ens) {
    const GeneratorSpec& g = prob.gen;
    const std::string id = q.text("id");
    const double p = q.number("p", g.order.value_or(prob.p));
    const auto modulus = [&]() {
        if (q.has("modulus")) return read_modulus(q.object("modulus"));
        if (!g.modulus) throw ConfigError(q.path() + ": generator has no modulus; give one");
        return *g.modulus;
    };
    const auto lambda_bar = [&]() {
        if (q.has("lambda_bar")) return q.number("lambda_bar");
        if (!g.lipschitz_z) throw ConfigError(q.path() + ": generator has no Lipschitz constant; give lambda_bar");
        return *g.lipschitz_z;
    };
    const auto process = [&](const char* key) {
        return q.has(key) ? read_process(q.object(key)) : ProcessSpec::zero();
    };

    ConditionReport rep;
    if (id == "H1") {
        rep = check_weak_monotonicity(g, modulus(), p, s);
    } else if (id == "H1a" || id == "H1b" || id == "H1*") {
        const OneSidedVariant v =
            id == "H1a" ? OneSidedVariant::mao : id == "H1b" ? OneSidedVariant::constantin : OneSidedVariant::osgood;
        rep = check_one_sided(g, modulus(), p, v, s);
    } else if (id == "H1'" || id == "H1a'" || id == "H1b'" || id == "H1'*") {
        const TwoSidedVariant v = id == "H1'"    ? TwoSidedVariant::h1prime
                                  : id == "H1a'" ? TwoSidedVariant::mao_prime
                                  : id == "H1b'" ? TwoSidedVariant::constantin_prime
                                                 : TwoSidedVariant::osgood_prime;
        rep = check_two_sided(g, modulus(), p, v, s);
    } else if (id == "H2") {
        rep = check_continuity_y(g, s);
    } else if (id == "H3") {
        const std::vector<double> alphas = q.numbers("alphas", {0.5, 1.0, 2.0});
        rep = check_general_growth(g, alphas, *ens.build());
    } else if (id == "H4") {
        rep = check_lipschitz_z(g, lambda_bar(), s);
    } else if (id == "H5") {
        if (!prob.xi) throw ConfigError(q.path() + ": H5 needs problem.terminal");
        rep = check_integrability(*prob.xi, g, p, *ens.build());
    } else if (id == "A1") {
        const double mu = q.number("mu");
        const double lambda = q.number("lambda");
        rep = check_A1(g, mu, lambda, process("f"), process("phi"), p, s);
    } else if (id == "A2") {
        const ModulusFn psi = read_modulus(q.object("psi"));
        const double lambda = q.number("lambda");
        rep = check_A2(g, psi, lambda, process("f"), p, s);
    } else {
        throw ConfigError(q.path() + ".id '" + id + "' is not a condition");
    }
    q.finish();
    return rep;
}

std::function<void(ConstVec, const PathRef&, MutVec)> terminal_noise(const std::string& kind, double scale,
                                                                     std::size_t d) {
    if (kind == "none") return {};
    if (kind == "constant") {
        return [scale](ConstVec, const PathRef&, MutVec out) { std::fill(out.begin(), out.end(), scale); };
    }
    if (kind == "brownian") {
        return [scale, d](ConstVec b, const PathRef&, MutVec out) {
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale * b[i % d];
        };
    }
    throw ConfigError("perturbation terminal must be none, constant or brownian");
}

std::function<void(double, ConstVec, MutVec)> drift_noise(double c) {
    if (c == 0.0) return {};
    return [c](double, ConstVec, MutVec out) { std::fill(out.begin(), out.end(), c); };
}

/// Base problem shifted by constants in xi and g.
Problem shifted(const Problem& base, double terminal_shift, double drift_shift, const std::string& label) {
    Perturbation p;
    if (terminal_shift != 0.0) p.eta = terminal_noise("constant", terminal_shift, 1);
    p.gamma = drift_noise(drift_shift);
    Problem out = perturb(base, p, 1.0);
    out.label = label;
    return out;
}

ExperimentManifest read_experiment(Reader& top, std::size_t d, const Numeric& num, Problem base) {
    ExperimentManifest m;
    Reader e = top.object("experiment");
    m.kind = experiment_kind_from_string(e.text("kind"));
    m.name = to_string(m.kind);
    m.ensemble = num.ensemble;
    m.scheme = num.scheme;
    m.p = base.xi.p;
    if (auto t = e.optional_object("tolerance")) m.tolerance = read_tolerance(*t);

    switch (m.kind) {
        case ExperimentKind::uniqueness:
            for (Reader v : e.objects("variants")) {
                Variant var;
                var.label = v.text("label");
                EnsembleSpec spec = num.ensemble;
                bool custom = false;
                for (const char* key : {"seed", "steps", "paths"}) custom = custom || v.has(key);
                spec.seed = v.count("seed", spec.seed);
                spec.steps = v.count("steps", spec.steps);
                spec.paths = v.count("paths", spec.paths);
                if (custom) var.ensemble = spec;
                if (auto s = v.optional_object("scheme")) var.scheme = read_scheme(*s);
                const double ts = v.number("terminal_shift", 0.0);
                const double ds = v.number("drift_shift", 0.0);
                if (ts != 0.0 || ds != 0.0) var.problem = shifted(base, ts, ds, var.label);
                v.finish();
                m.variants.push_back(std::move(var));
            }
            break;
        case ExperimentKind::stability: {
            if (e.has("epsilons")) {
                m.epsilons = e.numbers("epsilons");
            } else {
                Reader l = e.object("ladder");
                const double b = l.number("base", 2.0);
                const auto from = static_cast<int>(l.count("from", 0));
                const auto to = static_cast<int>(l.count("to"));
                for (int n = from; n <= to; ++n) m.epsilons.push_back(std::pow(b, -n));
                l.finish();
            }
            Reader p = e.object("perturbation");
            const std::string kind = p.text("terminal", "none");
            m.perturbation.eta = terminal_noise(kind, p.number("terminal_scale", 1.0), d);
            m.perturbation.gamma = drift_noise(p.number("drift", 0.0));
            p.finish();
            break;
        }
        case ExperimentKind::comparison: {
            m.hypothesis = comparison_hypothesis_from_string(e.text("hypothesis", "everywhere"));
            m.ordering_samples = e.count("ordering_samples", m.ordering_samples);
            Reader pr = e.object("primed");
            Problem primed = base;
            if (pr.has("generator")) primed.gen = read_generator(pr.object("generator"), d);
            if (pr.has("terminal")) primed.xi = read_terminal(pr.object("terminal"), d, base.xi.p);
            const double ts = pr.number("terminal_shift", 0.0);
            const double ds = pr.number("drift_shift", 0.0);
            pr.finish();
            m.problems = {base, shifted(primed, ts, ds, "primed")};
            break;
        }
        case ExperimentKind::convergence:
            for (const json& row : e.raw("refinement")) {
                if (!row.is_array() || row.size() != 2 || !row[0].is_number_unsigned() || !row[1].is_number_unsigned()) {
                    throw ConfigError(e.path() + ".refinement entries must be [steps, paths]");
                }
                m.refinement.emplace_back(row[0].get<std::size_t>(), row[1].get<std::size_t>());
            }
            m.exact_y0 = e.optional_number("exact_y0");
            m.exact_z = e.optional_number("exact_z");
            break;
        case ExperimentKind::truncation:
            m.truncation_levels = e.numbers("levels");
            m.truncation_bound = e.optional_number("bound");
            break;
    }
    e.finish();
    if (m.problems.empty()) m.problems = {std::move(base)};
    return m;
}

std::string top_name(const json& cfg, const std::string& fallback) {
    if (cfg.contains("name") && cfg["name"].is_string()) return cfg["name"].get<std::string>();
    return fallback;
}

}  // namespace

fs::path prepare_run_dir(const json& cfg, const GlobalOptions& opt, const std::string& experiment) {
    std::string dir, label;
    if (cfg.contains("output")) {
        const json& o = cfg["output"];
        if (o.contains("dir")) dir = o["dir"].get<std::string>();
        if (o.contains("label")) label = o["label"].get<std::string>();
    }
    if (opt.outdir) dir = *opt.outdir;
    if (dir.empty()) {
        const char* env = std::getenv(kOutdirEnv);
        dir = env && *env ? env : "bsdelab-out";
    }
    if (opt.label) label = *opt.label;
    if (label.empty()) label = utc_stamp();
    const fs::path root = fs::path(dir) / experiment / label;
    fs::create_directories(root / "tables");
    return root;
}

int cmd_solve(const json& cfg, const GlobalOptions& opt, std::ostream& out) {
    Reader top(cfg, "config");
    top.text("name", "");
    read_output(top);
    const Numeric num = read_numeric(top);
    const Problem prob = read_problem(top.object("problem"), num.ensemble.d, "problem");
    std::optional<Reader> est = top.optional_object("estimates");
    top.finish();

    struct Prop2Query {
        A1Bounds bounds;
        std::size_t t_index;
    };
    struct Prop3Query {
        ModulusFn psi = ModulusFn::linear(0.0);
        double lambda;
        ProcessSpec f;
        std::size_t t_index;
    };
    std::optional<Prop2Query> q2;
    std::optional<Prop3Query> q3;
    std::optional<double> bdg;
    if (est) {
        bdg = est->optional_number("bdg_constant");
        if (auto r = est->optional_object("prop2")) {
            Prop2Query q;
            q.bounds.mu = r->number("mu");
            q.bounds.lambda = r->number("lambda");
            q.bounds.f = r->has("f") ? read_process(r->object("f")) : ProcessSpec::zero();
            q.bounds.phi = r->has("phi") ? read_process(r->object("phi")) : ProcessSpec::zero();
            q.t_index = r->count("t_index", 0);
            r->finish();
            q2 = std::move(q);
        }
        if (auto r = est->optional_object("prop3")) {
            Prop3Query q;
            q.psi = read_modulus(r->object("psi"));
            q.lambda = r->number("lambda");
            q.f = r->has("f") ? read_process(r->object("f")) : ProcessSpec::zero();
            q.t_index = r->count("t_index", 0);
            r->finish();
            q3 = std::move(q);
        }
        est->finish();
    }

    const fs::path dir = prepare_run_dir(cfg, opt, top_name(cfg, "solve"));
    write_json(dir / "manifest.json", cfg);

    const DiscreteSolution sol = solve_backward(prob.gen, prob.xi, num.ensemble.build(), num.scheme);
    const SolutionSummary s = summarize(sol, prob.xi.p);
    {
        std::ostringstream os;
        write_solution_csv(os, sol, num.csv_paths);
        write_text(dir / "tables" / "solution.csv", os.str());
    }
    Table nodes{"nodes", {"node", "t", "y_mean", "z_mean", "r2"}, {}};
    for (std::size_t i = 0; i <= sol.steps(); ++i) {
        nodes.add_row({std::to_string(i), format_number(sol.grid()[i]), format_number(sol.y_mean(i)),
                       i < sol.steps() ? format_number(sol.z_mean(i)) : "",
                       i < sol.steps() ? format_number(sol.diagnostics.regression_r2[i]) : ""});
    }
    write_table(dir, nodes);

    bool passed = true;
    json summary{{"command", "solve"},
                 {"y0", s.y0},
                 {"y0_stderr", s.y0_stderr},
                 {"norms", {{"p", s.norms.p}, {"s_p", s.norms.s_p}, {"m_p", s.norms.m_p},
                            {"stderr_s", s.norms.stderr_s}, {"stderr_m", s.norms.stderr_m}}},
                 {"scheme", {{"stepping", s.stepping}, {"degree", num.scheme.degree},
                             {"implicit_weight", num.scheme.implicit_weight}, {"damping", num.scheme.damping}}},
                 {"steps", s.steps},
                 {"paths", s.paths},
                 {"max_implicit_iterations", s.max_implicit_iterations},
                 {"bisection_fallbacks", s.bisection_fallbacks},
                 {"min_regression_r2", s.min_regression_r2}};
    Table est_t{"estimates", {"estimate", "lhs", "rhs", "ratio", "passed"}, {}};
    if (q2) {
        const EstimateReport r = verify_prop2(sol, q2->bounds, prob.xi.p, q2->t_index, bdg);
        summary["prop2"] = report_json(r);
        est_t.add_row({"prop2", format_number(r.lhs), format_number(r.rhs), format_number(r.ratio), r.passed ? "1" : "0"});
        passed = passed && r.passed;
    }
    if (q3) {
        const EstimateReport r = verify_prop3(sol, q3->psi, q3->lambda, q3->f, prob.xi.p, q3->t_index, bdg);
        summary["prop3"] = report_json(r);
        est_t.add_row({"prop3", format_number(r.lhs), format_number(r.rhs), format_number(r.ratio), r.passed ? "1" : "0"});
        passed = passed && r.passed;
    }
    if (!est_t.rows.empty()) write_table(dir, est_t);
    write_json(dir / "summary.json", summary);

    for (std::size_t i = 0; i < s.y0.size(); ++i) {
        out << "Y0[" << i << "] = " << format_number(s.y0[i]) << " +/- " << format_number(s.y0_stderr[i]) << "\n";
    }
    for (const auto& row : est_t.rows) out << row[0] << ": lhs " << row[1] << " rhs " << row[2] << (row[4] == "1" ? " passed" : " FAILED") << "\n";
    out << "outputs: " << dir.string() << "\n";
    return passed ? kExitOk : kExitGateFailed;
}

int cmd_check(const json& cfg, const GlobalOptions& opt, std::ostream& out) {
    Reader top(cfg, "config");
    top.text("name", "");
    read_output(top);
    Numeric num;
    if (auto r = top.optional_object("numeric")) {
        num.ensemble = read_ensemble(*r);
        r->finish();
    }
    const CheckProblem prob = read_check_problem(top.object("problem"), num.ensemble.d);
    Reader c = top.object("check");
    top.finish();

    SamplerSpec s;
    s.seed = num.ensemble.seed;
    if (auto r = c.optional_object("sampler")) {
        s.seed = r->count("seed", s.seed);
        s.count = r->count("count", s.count);
        s.y_radius = r->number("y_radius", s.y_radius);
        s.z_radius = r->number("z_radius", s.z_radius);
        r->finish();
    }
    const bool use_claims = c.flag("use_claims", false);
    std::vector<Reader> queries;
    if (c.has("conditions")) queries = c.objects("conditions");
    c.finish();
    if (queries.empty() && !use_claims) throw ConfigError("config.check: the condition list is empty");

    std::vector<ConditionReport> reports;
    if (use_claims) {
        for (ConditionReport& r : check_claims(prob.gen, s)) reports.push_back(std::move(r));
    }
    for (Reader& q : queries) reports.push_back(run_condition(q, prob, s, num.ensemble));

    const fs::path dir = prepare_run_dir(cfg, opt, top_name(cfg, "check"));
    write_json(dir / "manifest.json", cfg);
    Table conds{"conditions", {"condition", "samples", "violations", "max_slack", "passed"}, {}};
    Table wit{"witnesses", {"condition", "t", "b", "y1", "y2", "z1", "z2", "lhs", "rhs", "note"}, {}};
    Table metrics{"metrics", {"condition", "metric", "value"}, {}};
    json summary{{"command", "check"}, {"conditions", json::array()}};
    bool passed = true;
    for (const ConditionReport& r : reports) {
        conds.add_row({r.condition_id, std::to_string(r.samples), std::to_string(r.violation_count),
                       format_number(r.max_slack), r.passed ? "1" : "0"});
        for (const Witness& w : r.violations) {
            wit.add_row({r.condition_id, format_number(w.t), join(w.b), join(w.y1), join(w.y2), join(w.z1), join(w.z2),
                         format_number(w.lhs), format_number(w.rhs), w.note});
        }
        for (const auto& [k, v] : r.metrics) metrics.add_row({r.condition_id, k, format_number(v)});
        summary["conditions"].push_back({{"id", r.condition_id}, {"passed", r.passed}, {"violations", r.violation_count},
                                         {"samples", r.samples}, {"box", r.box}, {"note", r.note}});
        out << r.condition_id << ": " << (r.passed ? "passed" : "FAILED") << " (" << r.violation_count << " of "
            << r.samples << " samples)\n";
        if (!r.passed && !r.violations.empty()) {
            const Witness& w = r.violations.front();
            out << "  witness: t = " << format_number(w.t) << ", y1 = [" << join(w.y1) << "], y2 = [" << join(w.y2)
                << "], z1 = [" << join(w.z1) << "], lhs = " << format_number(w.lhs)
                << ", rhs = " << format_number(w.rhs) << "\n";
        }
        passed = passed && r.passed;
    }
    write_table(dir, conds);
    write_table(dir, wit);
    write_table(dir, metrics);
    write_json(dir / "summary.json", summary);
    out << "outputs: " << dir.string() << "\n";
    return passed ? kExitOk : kExitGateFailed;
}

int cmd_experiment(const json& cfg, const GlobalOptions& opt, std::ostream& out) {
    Reader top(cfg, "config");
    top.text("name", "");
    read_output(top);
    const Numeric num = read_numeric(top);
    Problem base = read_problem(top.object("problem"), num.ensemble.d, "problem");
    const ExperimentManifest m = read_experiment(top, num.ensemble.d, num, std::move(base));
    top.finish();

    const fs::path dir = prepare_run_dir(cfg, opt, top_name(cfg, m.name));
    write_json(dir / "manifest.json", cfg);
    const ExperimentResult res = run_experiment(m);
    for (const Table& t : res.tables) write_table(dir, t);
    write_table(dir, gates_table(res.gates));
    write_json(dir / "summary.json", {{"command", "experiment"},
                                      {"kind", res.kind},
                                      {"passed", res.passed()},
                                      {"gates", gates_json(res.gates)},
                                      {"wall_seconds", res.wall_seconds}});
    for (const Gate& g : res.gates) {
        out << g.name << ": " << (g.passed ? "passed" : "FAILED") << " (value " << format_number(g.value)
            << ", threshold " << format_number(g.threshold) << ")";
        if (!g.detail.empty()) out << " " << g.detail;
        out << "\n";
    }
    out << "outputs: " << dir.string() << "\n";
    return res.passed() ? kExitOk : kExitGateFailed;
}

int cmd_modulus(const json& cfg, const GlobalOptions& opt, std::ostream& out) {
    Reader top(cfg, "config");
    top.text("name", "");
    read_output(top);
    Reader mod = top.object("modulus");
    std::vector<Reader> queries = mod.objects("queries");
    mod.finish();
    top.finish();
    if (queries.empty()) throw ConfigError("config.modulus.queries is empty");

    struct Done {
        json result;
        std::optional<Table> table;
    };
    std::vector<Done> done;
    for (std::size_t i = 0; i < queries.size(); ++i) {
        Reader& q = queries[i];
        const std::string op = q.text("op");
        const std::string tag = std::to_string(i) + "_" + op;
        Done d;
        d.result = {{"op", op}};
        const auto tabulate = [&](const ModulusFn& in, const ModulusFn& res) {
            Table t{tag, {"x", "input", "value"}, {}};
            for (double x : res.scan_grid()) t.add_row({format_number(x), format_number(in(x)), format_number(res(x))});
            d.table = std::move(t);
            d.result["result"] = modulus_to_json(res);
            d.result["concave_verified"] = res.concave_verified();
            d.result["description"] = res.describe();
        };
        if (op == "classify") {
            const ModulusFn rho = read_modulus(q.object("modulus"));
            const double p = q.number("p", 1.0);
            const std::string variant = q.text("variant", "osgood");
            if (variant != "osgood" && variant != "constantin_p") throw ConfigError(q.path() + ".variant is invalid");
            const bool numeric_only = q.flag("numeric_only", false);
            const DivergenceVerdict v = osgood_classifier(
                rho, p, variant == "osgood" ? OsgoodVariant::osgood : OsgoodVariant::constantin_p, numeric_only);
            Table t{tag, {"epsilon", "integral"}, {}};
            for (const auto& [eps, val] : v.partial_integrals) t.add_row({format_number(eps), format_number(val)});
            d.table = std::move(t);
            d.result["verdict"] = to_string(v.verdict);
            d.result["analytic"] = v.analytic;
            out << tag << ": " << to_string(v.verdict) << (v.analytic ? " (closed form)" : " (numeric)") << "\n";
        } else if (op == "lift_order" || op == "mao_to_constantin" || op == "constantin_to_mao" ||
                   op == "concave_majorant" || op == "subadditive_envelope") {
            const ModulusFn rho = read_modulus(q.object("modulus"));
            ModulusFn res = rho;
            if (op == "lift_order") {
                const double p = q.number("p");
                res = lift_order(rho, p, q.number("q"));
            } else if (op == "mao_to_constantin") {
                res = mao_to_constantin(rho, q.number("p"));
            } else if (op == "constantin_to_mao") {
                res = constantin_to_mao(rho, q.number("p"));
            } else if (op == "concave_majorant") {
                res = concave_majorant(rho);
            } else {
                res = subadditive_envelope(rho);
            }
            tabulate(rho, res);
            out << tag << ": " << res.describe() << (res.concave_verified() ? ", concave" : ", not concave") << "\n";
        } else if (op == "bihari") {
            const double a = q.number("a");
            const ModulusFn rho = read_modulus(q.object("modulus"));
            const double horizon = q.number("horizon");
            const double v = bihari_bound(a, rho, horizon, q.number("multiplier", 1.0));
            d.result["value"] = v;
            out << tag << ": " << format_number(v) << "\n";
        } else if (op == "growth_bound") {
            const double v = linear_growth_bound(read_modulus(q.object("modulus")));
            d.result["value"] = v;
            out << tag << ": A = " << format_number(v) << "\n";
        } else if (op == "split_bound") {
            const ModulusFn rho = read_modulus(q.object("modulus"));
            const SplitBound b = split_growth_bound(rho, q.number("m", 1.0));
            d.result["slope"] = b.slope;
            d.result["offset"] = b.offset;
            out << tag << ": slope " << format_number(b.slope) << ", offset " << format_number(b.offset) << "\n";
        } else {
            throw ConfigError(q.path() + ".op '" + op + "' is not a modulus query");
        }
        q.finish();
        done.push_back(std::move(d));
    }

    const fs::path dir = prepare_run_dir(cfg, opt, top_name(cfg, "modulus"));
    write_json(dir / "manifest.json", cfg);
    json results = json::array();
    for (const Done& d : done) {
        if (d.table) write_table(dir, *d.table);
        results.push_back(d.result);
    }
    write_json(dir / "summary.json", {{"command", "modulus"}, {"results", results}});
    out << "outputs: " << dir.string() << "\n";
    return kExitOk;
}

int run(const std::string& command, const GlobalOptions& opt, std::ostream& out, std::ostream& err) {
    try {
        if (opt.config_path.empty()) throw ConfigError("--config is required");
        std::ifstream in(opt.config_path);
        if (!in) throw ConfigError("cannot open config '" + opt.config_path + "'");
        json cfg;
        try {
            cfg = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("config is not valid JSON: ") + e.what());
        }
        if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
        if (opt.seed) cfg["numeric"]["seed"] = *opt.seed;
        if (opt.threads) parallel::set_max_threads(*opt.threads);

        if (command == "solve") return cmd_solve(cfg, opt, out);
        if (command == "check") return cmd_check(cfg, opt, out);
        if (command == "experiment") return cmd_experiment(cfg, opt, out);
        if (command == "modulus") return cmd_modulus(cfg, opt, out);
        throw ConfigError("unknown subcommand '" + command + "'");
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const InvalidArgument& e) {
        err << "invalid argument: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

}  // namespace bsde::cli
