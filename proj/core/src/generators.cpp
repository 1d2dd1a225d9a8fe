#include "bsdelab/generators.hpp"

#include "bsdelab/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bsde {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

double signed_h(const ModulusFn& h, SignConvention sign, double x) {
    const double v = h(x);
    return sign == SignConvention::positive_modulus ? v : -v;
}

SingularForcing inverse_cube_root_forcing() {
    SingularForcing f;
    f.value = [](double t, MutVec out) { out[0] = t > 0.0 ? 1.0 / std::cbrt(t) : 0.0; };
    f.cell_integral = [](double a, double b, MutVec out) {
        out[0] = 1.5 * (std::cbrt(b * b) - std::cbrt(a * a));
    };
    f.description = "t^{-1/3} 1_{t>0}";
    return f;
}

}  // namespace

double HFunctionParams::resolved_delta() const {
    return delta.value_or(0.5 * std::exp(-1.0 - 1.0 / pbar));
}

void HFunctionParams::validate() const {
    if (!(pbar >= 1.0) || !std::isfinite(pbar)) throw InvalidArgument("h-function needs pbar >= 1, got " + fmt(pbar));
    const double d = resolved_delta();
    const double limit = std::exp(-1.0 / pbar);
    if (!(d > 0.0 && d < limit)) {
        throw InvalidArgument("h-function splice point must lie in (0, e^{-1/pbar}) = (0, " + fmt(limit) + "), got " +
                              fmt(d));
    }
    constexpr std::size_t kNodes = 256;
    std::vector<double> x(kNodes), v(kNodes);
    const double r = 1.0 / pbar;
    for (std::size_t i = 0; i < kNodes; ++i) {
        x[i] = d * static_cast<double>(i + 1) / kNodes;
        v[i] = x[i] * std::pow(-std::log(x[i]), r);
        if (i > 0 && v[i] < v[i - 1]) {
            throw InvalidArgument("h-function branch decreases below the splice point " + fmt(d));
        }
    }
    if (!slopes_nonincreasing(x, v)) throw InvalidArgument("h-function branch is not concave below " + fmt(d));
}

ModulusFn h_modulus(const HFunctionParams& params, double scale) {
    params.validate();
    return ModulusFn::log_osgood(1.0 / params.pbar, params.resolved_delta(), scale);
}

double h_function(double x, const HFunctionParams& params) {
    if (!(x >= 0.0)) throw InvalidArgument("h-function evaluated at negative x");
    return signed_h(h_modulus(params), params.sign, x);
}

void smoke_check_claims(const GeneratorSpec& gen) {
    SamplerSpec s;
    s.count = kSmokeSamples;
    s.seed = 0x5a11c0de;
    for (const ConditionReport& rep : check_claims(gen, s)) {
        if (rep.passed) continue;
        std::string msg = "generator '" + gen.name + "' claims " + rep.condition_id +
                          " but the smoke sampler found " + std::to_string(rep.violation_count) + " counterexamples";
        if (!rep.violations.empty()) {
            const Witness& w = rep.violations.front();
            msg += " (first: t = " + fmt(w.t) + ", lhs = " + fmt(w.lhs) + ", rhs = " + fmt(w.rhs) + ")";
        }
        throw PreconditionError(msg);
    }
}

GeneratorSpec make_example1(const HFunctionParams& params, std::size_t d) {
    if (d == 0) throw InvalidArgument("example1 needs d >= 1");
    const ModulusFn h = h_modulus(params);
    const SignConvention sign = params.sign;
    GeneratorSpec g;
    g.name = "example1";
    g.k = 1;
    g.d = d;
    g.eval = [h, sign](double, ConstVec b, ConstVec y, ConstVec z, MutVec out) {
        const double nb = frobenius(b);
        out[0] = signed_h(h, sign, std::abs(y[0])) - std::exp(nb * y[0]) + std::min(std::exp(-y[0]), 1.0) * frobenius(z);
    };
    g.lipschitz_z = 1.0;
    g.modulus = h;
    g.order = params.pbar;
    g.singular_forcing = inverse_cube_root_forcing();
    g.claimed_conditions = {Condition::h1b, Condition::h1star, Condition::h2, Condition::h3, Condition::h4};
    g.validate();
    smoke_check_claims(g);
    return g;
}

GeneratorSpec make_example2(std::size_t k, const HFunctionParams& params, std::size_t d) {
    if (k == 0 || d == 0) throw InvalidArgument("example2 needs k, d >= 1");
    const ModulusFn h = h_modulus(params);
    const SignConvention sign = params.sign;
    const double root_k = std::sqrt(static_cast<double>(k));
    GeneratorSpec g;
    g.name = "example2";
    g.k = k;
    g.d = d;
    g.eval = [h, sign, k](double, ConstVec b, ConstVec y, ConstVec z, MutVec out) {
        const double common = signed_h(h, sign, frobenius(y)) + std::sin(frobenius(z)) + frobenius(b);
        for (std::size_t i = 0; i < k; ++i) out[i] = std::exp(-y[i]) + common;
    };
    g.lipschitz_z = root_k;
    g.modulus = h_modulus(params, root_k);
    g.order = params.pbar;
    g.claimed_conditions = {Condition::h1b, Condition::h1star, Condition::h2, Condition::h3, Condition::h4};
    g.validate();
    smoke_check_claims(g);
    return g;
}

GeneratorSpec make_affine(std::size_t k, std::size_t d, std::vector<double> a, std::vector<double> bmat,
                          std::vector<double> c) {
    if (k == 0 || d == 0) throw InvalidArgument("affine generator needs k, d >= 1");
    if (a.size() != k * k) throw InvalidArgument("affine generator: a must be k x k");
    if (bmat.empty()) bmat.assign(k * k * d, 0.0);
    if (bmat.size() != k * k * d) throw InvalidArgument("affine generator: bmat must be k x (k d)");
    if (c.size() != k) throw InvalidArgument("affine generator: c must have k entries");

    using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const Mat A = Eigen::Map<const Mat>(a.data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    const Mat B = Eigen::Map<const Mat>(bmat.data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k * d));
    const double norm_a = Eigen::JacobiSVD<Mat>(A).singularValues()(0);
    const double norm_b = Eigen::JacobiSVD<Mat>(B).singularValues()(0);

    GeneratorSpec g;
    g.name = "affine";
    g.k = k;
    g.d = d;
    const std::size_t kd = k * d;
    g.eval = [a = std::move(a), bmat = std::move(bmat), c = std::move(c), k, kd](double, ConstVec, ConstVec y,
                                                                                 ConstVec z, MutVec out) {
        for (std::size_t i = 0; i < k; ++i) {
            double s = c[i];
            for (std::size_t j = 0; j < k; ++j) s += a[i * k + j] * y[j];
            for (std::size_t j = 0; j < kd; ++j) s += bmat[i * kd + j] * z[j];
            out[i] = s;
        }
    };
    g.lipschitz_z = norm_b;
    g.modulus = ModulusFn::linear(norm_a);
    g.claimed_conditions = {Condition::h1,           Condition::h1star, Condition::h1star_prime,
                            Condition::h2,           Condition::h3,     Condition::h4};
    g.validate();
    smoke_check_claims(g);
    return g;
}

GeneratorSpec make_zero(std::size_t k, std::size_t d) {
    if (k == 0 || d == 0) throw InvalidArgument("zero generator needs k, d >= 1");
    GeneratorSpec g;
    g.name = "zero";
    g.k = k;
    g.d = d;
    g.eval = [](double, ConstVec, ConstVec, ConstVec, MutVec out) { std::fill(out.begin(), out.end(), 0.0); };
    g.lipschitz_z = 0.0;
    g.modulus = ModulusFn::linear(0.0);
    g.claimed_conditions = {Condition::h1, Condition::h1star_prime, Condition::h2, Condition::h3, Condition::h4};
    g.validate();
    return g;
}

GeneratorSpec make_quadratic() {
    GeneratorSpec g;
    g.name = "quadratic";
    g.eval = [](double, ConstVec, ConstVec y, ConstVec, MutVec out) { out[0] = y[0] * y[0]; };
    g.lipschitz_z = 0.0;
    g.claimed_conditions = {Condition::h2, Condition::h4};
    g.validate();
    return g;
}

GeneratorSpec make_signed_sqrt() {
    GeneratorSpec g;
    g.name = "signed_sqrt";
    g.eval = [](double, ConstVec, ConstVec y, ConstVec, MutVec out) {
        out[0] = std::copysign(std::sqrt(std::abs(y[0])), y[0]);
    };
    g.lipschitz_z = 0.0;
    // sup |s(a) - s(b)| / sqrt|a - b| = sqrt 2, reached at b = -a
    g.modulus = ModulusFn::power(0.5, std::sqrt(2.0));
    g.claimed_conditions = {Condition::h1star, Condition::h1star_prime, Condition::h2, Condition::h4};
    g.validate();
    smoke_check_claims(g);
    return g;
}

GeneratorSpec make_step() {
    GeneratorSpec g;
    g.name = "step";
    g.eval = [](double, ConstVec, ConstVec y, ConstVec, MutVec out) {
        out[0] = y[0] > 0.0 ? 1.0 : (y[0] < 0.0 ? -1.0 : 0.0);
    };
    g.lipschitz_z = 0.0;
    g.validate();
    return g;
}

void truncate_in_place(MutVec x, double n) {
    if (!(n > 0.0)) throw InvalidArgument("truncation level must be positive");
    const double norm = frobenius(x);
    const double factor = n / std::max(norm, n);
    if (factor == 1.0) return;
    for (double& v : x) v *= factor;
}

std::vector<double> truncate_vector(ConstVec x, double n) {
    std::vector<double> out(x.begin(), x.end());
    truncate_in_place(out, n);
    return out;
}

std::pair<TerminalSpec, GeneratorSpec> truncate_problem(const TerminalSpec& xi, const GeneratorSpec& gen, double n) {
    if (!(n > 0.0)) throw InvalidArgument("truncation level must be positive");
    xi.validate();
    gen.validate();
    if (xi.k != gen.k) throw InvalidArgument("terminal and generator dimensions differ");

    TerminalSpec xn = xi;
    xn.name = xi.name + "|q" + fmt(n);
    xn.eval = [inner = xi.eval, n](ConstVec b, const PathRef& path, MutVec out) {
        inner(b, path, out);
        truncate_in_place(out, n);
    };

    GeneratorSpec gn = gen;
    gn.name = gen.name + "|q" + fmt(n);
    gn.singular_forcing.reset();
    const std::size_t k = gen.k;
    const std::size_t kd = gen.k * gen.d;
    gn.eval = [base = gen, n, k, kd](double t, ConstVec b, ConstVec y, ConstVec z, MutVec out) {
        constexpr std::size_t kStack = 32;
        double stack[3 * kStack] = {};
        std::vector<double> heap;
        double* buf = stack;
        const std::size_t width = std::max(k, kd);
        if (width > kStack) {
            heap.assign(3 * width, 0.0);
            buf = heap.data();
        }
        const std::size_t stride = std::max(width, kStack);
        double* zeros = buf;
        double* g0 = buf + stride;
        double* full0 = buf + 2 * stride;
        base.regular(t, b, ConstVec(zeros, k), ConstVec(zeros, kd), MutVec(g0, k));
        std::copy_n(g0, k, full0);
        if (base.singular_forcing && t > 0.0) {
            double* f = zeros;  // no longer needed as an argument
            base.singular_forcing->value(t, MutVec(f, k));
            for (std::size_t i = 0; i < k; ++i) full0[i] += f[i];
        }
        truncate_in_place(MutVec(full0, k), n);
        base.regular(t, b, y, z, out);
        for (std::size_t i = 0; i < k; ++i) out[i] = out[i] - g0[i] + full0[i];
    };
    return {std::move(xn), std::move(gn)};
}

TerminalSpec make_constant_terminal(std::vector<double> value, double p) {
    if (value.empty()) throw InvalidArgument("constant terminal needs at least one component");
    TerminalSpec xi;
    xi.name = "constant";
    xi.k = value.size();
    xi.p = p;
    xi.eval = [v = std::move(value)](ConstVec, const PathRef&, MutVec out) { std::copy(v.begin(), v.end(), out.begin()); };
    xi.validate();
    return xi;
}

TerminalSpec make_brownian_terminal(std::size_t d, double scale, double shift, double p) {
    if (d == 0) throw InvalidArgument("brownian terminal needs d >= 1");
    TerminalSpec xi;
    xi.name = "brownian";
    xi.k = d;
    xi.p = p;
    xi.eval = [scale, shift](ConstVec b, const PathRef&, MutVec out) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale * b[i] + shift;
    };
    xi.validate();
    return xi;
}

TerminalSpec make_sine_terminal(std::size_t k, double amplitude, double shift, double p) {
    if (k == 0) throw InvalidArgument("sine terminal needs k >= 1");
    TerminalSpec xi;
    xi.name = "sine";
    xi.k = k;
    xi.p = p;
    xi.eval = [amplitude, shift](ConstVec b, const PathRef&, MutVec out) {
        const double v = amplitude * std::sin(b[0]) + shift;
        std::fill(out.begin(), out.end(), v);
    };
    xi.validate();
    return xi;
}

}  // namespace bsde
