#pragma once

#include "bsdelab/conditions.hpp"
#include "bsdelab/model.hpp"
#include "bsdelab/modulus.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace bsde {

enum class SignConvention { paper_negative, positive_modulus };

struct HFunctionParams {
    double pbar = 1.5;
    /// Splice point; defaults to e^{-1-1/pbar} / 2.
    std::optional<double> delta;
    SignConvention sign = SignConvention::positive_modulus;

    double resolved_delta() const;
    /// Throws InvalidArgument unless pbar >= 1, delta in (0, e^{-1/pbar}) and
    /// the positive branch is nondecreasing and concave on a 256-node grid.
    void validate() const;
};

/// x |ln x|^{1/pbar} on (0, delta], tangent line above delta, 0 at 0; the
/// paper_negative convention returns the negated value.
double h_function(double x, const HFunctionParams& params);

/// The positive h as a modulus: log_osgood(1/pbar, delta, scale).
ModulusFn h_modulus(const HFunctionParams& params, double scale = 1.0);

/// Sample size of the construction-time claim check.
inline constexpr std::size_t kSmokeSamples = 1000;

/// Verifies the generator's claimed pointwise conditions at smoke scale and
/// throws PreconditionError on a counterexample.
void smoke_check_claims(const GeneratorSpec& gen);

/// k = 1: g = h(|y|) - e^{|b| y} + min(e^{-y}, 1) |z| + t^{-1/3} 1_{t>0}, the
/// last term registered as singular forcing.
GeneratorSpec make_example1(const HFunctionParams& params, std::size_t d = 1);

/// g_i = e^{-y_i} + h(|y|) + sin|z| + |b|. The Euclidean-norm constants are
/// lambda_bar = sqrt(k) and modulus sqrt(k) h.
GeneratorSpec make_example2(std::size_t k, const HFunctionParams& params, std::size_t d = 1);

/// g = a y + B vec(z) + c with a (k x k) and B (k x kd) row-major.
GeneratorSpec make_affine(std::size_t k, std::size_t d, std::vector<double> a, std::vector<double> bmat,
                          std::vector<double> c);

GeneratorSpec make_zero(std::size_t k, std::size_t d);
/// k = 1 fixtures.
GeneratorSpec make_quadratic();    // y^2
GeneratorSpec make_signed_sqrt();  // sqrt|y| sign(y)
GeneratorSpec make_step();         // sign(y)

/// x n / max(|x|, n).
std::vector<double> truncate_vector(ConstVec x, double n);
void truncate_in_place(MutVec x, double n);

/// (q_n o xi, g_n) with g_n = g - g(t,b,0,0) + q_n(g(t,b,0,0)), where
/// g(t,b,0,0) includes the forcing value; g_n carries no singular forcing.
std::pair<TerminalSpec, GeneratorSpec> truncate_problem(const TerminalSpec& xi, const GeneratorSpec& gen, double n);

/// Terminal constructors.
TerminalSpec make_constant_terminal(std::vector<double> value, double p = 2.0);
/// xi = scale * B_T (+ shift), k = d.
TerminalSpec make_brownian_terminal(std::size_t d, double scale = 1.0, double shift = 0.0, double p = 2.0);
/// xi_i = amplitude * sin(B_T^1) + shift for every component.
TerminalSpec make_sine_terminal(std::size_t k, double amplitude = 1.0, double shift = 0.0, double p = 2.0);

}  // namespace bsde
