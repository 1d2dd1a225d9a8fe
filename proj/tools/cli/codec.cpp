#include "codec.hpp"

#include "bsdelab/error.hpp"

#include <cmath>

namespace bsde::cli {

HFunctionParams read_h_params(Reader& r) {
    HFunctionParams h;
    h.pbar = r.number("pbar", h.pbar);
    h.delta = r.optional_number("delta");
    const std::string sign = r.text("sign", "positive_modulus");
    if (sign == "positive_modulus") {
        h.sign = SignConvention::positive_modulus;
    } else if (sign == "paper_negative") {
        h.sign = SignConvention::paper_negative;
    } else {
        throw ConfigError(r.path() + ".sign must be positive_modulus or paper_negative");
    }
    return h;
}

ModulusFn read_modulus(Reader r) {
    const std::string family = r.text("family");
    ModulusFn out = ModulusFn::linear(0.0);
    if (family == "linear") {
        out = ModulusFn::linear(r.number("mu"));
    } else if (family == "log_osgood") {
        const double rr = r.number("r");
        out = ModulusFn::log_osgood(rr, r.number("delta"), r.number("scale", 1.0));
    } else if (family == "power") {
        const double alpha = r.number("alpha");
        out = ModulusFn::power(alpha, r.number("scale", 1.0));
    } else if (family == "tabulated") {
        const std::vector<double> x = r.numbers("nodes");
        out = ModulusFn::tabulated(x, r.numbers("values"));
    } else if (family == "h") {
        const HFunctionParams h = read_h_params(r);
        out = h_modulus(h, r.number("scale", 1.0));
    } else {
        throw ConfigError(r.path() + ".family '" + family + "' is not a modulus family");
    }
    r.finish();
    return out;
}

json modulus_to_json(const ModulusFn& rho) {
    json j;
    j["family"] = to_string(rho.family());
    switch (rho.family()) {
        case ModulusFamily::linear: j["mu"] = rho.mu(); break;
        case ModulusFamily::log_osgood:
            j["r"] = rho.r();
            j["delta"] = rho.delta();
            j["scale"] = rho.scale();
            break;
        case ModulusFamily::power:
            j["alpha"] = rho.alpha();
            j["scale"] = rho.scale();
            break;
        case ModulusFamily::tabulated:
            j["nodes"] = rho.nodes();
            j["values"] = rho.values();
            break;
    }
    return j;
}

ProcessSpec read_process(Reader r) {
    const double c = r.number("constant", 0.0);
    const double nb = r.number("brownian_norm", 0.0);
    const double cube = r.number("inverse_cube_root", 0.0);
    r.finish();
    if (c < 0.0 || nb < 0.0 || cube < 0.0) throw ConfigError(r.path() + " coefficients must be nonnegative");
    ProcessSpec f;
    f.name = "process";
    f.regular = [c, nb](double, ConstVec b) { return c + nb * frobenius(b); };
    if (cube > 0.0) {
        f.singular = [cube](double t) { return t > 0.0 ? cube / std::cbrt(t) : 0.0; };
        f.singular_integral = [cube](double a, double b) { return 1.5 * cube * (std::cbrt(b * b) - std::cbrt(a * a)); };
    }
    return f;
}

GeneratorSpec read_generator(Reader r, std::size_t d) {
    const std::string name = r.text("name");
    const json empty = json::object();
    Reader p = r.has("params") ? r.object("params") : Reader(empty, r.path() + ".params");
    r.finish();
    GeneratorSpec g;
    if (name == "zero") {
        g = make_zero(p.count("k", 1), d);
    } else if (name == "affine") {
        const std::size_t k = p.count("k", 1);
        std::vector<double> a = p.numbers("a");
        std::vector<double> b = p.numbers("b", {});
        std::vector<double> c = p.numbers("c", std::vector<double>(k, 0.0));
        g = make_affine(k, d, std::move(a), std::move(b), std::move(c));
    } else if (name == "example1") {
        g = make_example1(read_h_params(p), d);
    } else if (name == "example2") {
        const std::size_t k = p.count("k", 2);
        g = make_example2(k, read_h_params(p), d);
    } else if (name == "quadratic" || name == "signed_sqrt" || name == "step") {
        if (d != 1) throw ConfigError(r.path() + ": fixture '" + name + "' needs d = 1");
        g = name == "quadratic" ? make_quadratic() : name == "signed_sqrt" ? make_signed_sqrt() : make_step();
    } else {
        throw ConfigError(r.path() + ".name '" + name + "' is not a known generator");
    }
    p.finish();
    return g;
}

TerminalSpec read_terminal(Reader r, std::size_t d, double p) {
    const std::string name = r.text("name");
    const json empty = json::object();
    Reader q = r.has("params") ? r.object("params") : Reader(empty, r.path() + ".params");
    r.finish();
    TerminalSpec xi;
    if (name == "constant") {
        xi = make_constant_terminal(q.scalar_or_numbers("value"), p);
    } else if (name == "brownian") {
        const double scale = q.number("scale", 1.0);
        xi = make_brownian_terminal(d, scale, q.number("shift", 0.0), p);
    } else if (name == "sine") {
        const std::size_t k = q.count("k", 1);
        const double amplitude = q.number("amplitude", 1.0);
        xi = make_sine_terminal(k, amplitude, q.number("shift", 0.0), p);
    } else {
        throw ConfigError(r.path() + ".name '" + name + "' is not a known terminal");
    }
    q.finish();
    return xi;
}

Problem read_problem(Reader r, std::size_t d, const std::string& label) {
    Problem prob;
    prob.label = label;
    const double p = r.number("p", 2.0);
    prob.descriptor = r.raw("generator").dump();
    prob.gen = read_generator(r.object("generator"), d);
    prob.xi = read_terminal(r.object("terminal"), d, p);
    r.finish();
    if (prob.gen.k != prob.xi.k) throw ConfigError(r.path() + ": generator and terminal dimensions differ");
    return prob;
}

SchemeSpec read_scheme(Reader r) {
    SchemeSpec s;
    if (r.has("stepping")) s.stepping = stepping_from_string(r.text("stepping"));
    s.degree = r.count("degree", s.degree);
    s.tolerance = r.number("tolerance", s.tolerance);
    s.max_iterations = r.count("max_iterations", s.max_iterations);
    s.damping = r.number("damping", s.damping);
    s.implicit_weight = r.number("implicit_weight", s.implicit_weight);
    s.step_guard = r.flag("step_guard", s.step_guard);
    r.finish();
    s.validate();
    return s;
}

EnsembleSpec read_ensemble(Reader& r) {
    EnsembleSpec e;
    e.T = r.number("T", e.T);
    e.steps = r.count("steps", e.steps);
    e.paths = r.count("paths", e.paths);
    e.d = r.count("d", e.d);
    e.seed = r.count("seed", e.seed);
    e.antithetic = r.flag("antithetic", e.antithetic);
    if (!(e.T > 0.0) || e.steps == 0 || e.paths == 0 || e.d == 0) {
        throw ConfigError(r.path() + ": T, steps, paths and d must be positive");
    }
    return e;
}

TolerancePolicy read_tolerance(Reader r) {
    TolerancePolicy t;
    t.sigma = r.number("sigma", t.sigma);
    t.abs_floor = r.number("abs_floor", t.abs_floor);
    t.violation_fraction = r.number("violation_fraction", t.violation_fraction);
    t.stability_ratio = r.number("stability_ratio", t.stability_ratio);
    t.target_error = r.number("target_error", t.target_error);
    t.z_target_error = r.number("z_target_error", t.z_target_error);
    r.finish();
    return t;
}

}  // namespace bsde::cli
