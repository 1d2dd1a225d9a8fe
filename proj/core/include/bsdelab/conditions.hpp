#pragma once

#include "bsdelab/model.hpp"
#include "bsdelab/modulus.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bsde {

/// Log-spaced |y1 - y2| targets from 1e-1 down to 1e-8.
std::vector<double> default_closeness();

struct SamplerSpec {
    std::uint64_t seed = 1;
    std::size_t count = 10000;
    double y_radius = 2.0;
    double z_radius = 2.0;
    /// Candidate sample times; when an ensemble is given its grid is used.
    std::vector<double> t_grid = {0.0, 0.125, 0.25, 0.5, 0.75, 1.0};
    std::vector<double> closeness = default_closeness();
    /// Brownian states are taken from this ensemble when present, otherwise
    /// drawn as N(0, t I).
    EnsemblePtr ensemble;

    void validate() const;
};

struct Witness {
    double t = 0.0;
    std::vector<double> b;
    std::vector<double> y1, y2;
    std::vector<double> z1, z2;
    double lhs = 0.0;
    double rhs = 0.0;
    std::string note;
};

struct ConditionReport {
    std::string condition_id;
    std::size_t samples = 0;
    std::vector<Witness> violations;   // first kMaxWitnesses in sample order
    std::size_t violation_count = 0;
    double max_slack = -std::numeric_limits<double>::infinity();
    bool passed = true;
    std::string box;
    std::string note;
    /// Named scalar results (estimates, shares) for the Monte Carlo checks.
    std::vector<std::pair<std::string, double>> metrics;
};

inline constexpr std::size_t kMaxWitnesses = 32;
inline constexpr double kSlackTolerance = 1e-12;

enum class OneSidedVariant { mao, constantin, osgood };
enum class TwoSidedVariant { h1prime, mao_prime, constantin_prime, osgood_prime };

/// Nonnegative process f_t(omega) evaluated through the Brownian state, with
/// an optional t-only part that has exact cell integrals.
struct ProcessSpec {
    std::string name;
    std::function<double(double t, ConstVec b)> regular;
    std::function<double(double t)> singular;                 // may be empty
    std::function<double(double a, double b)> singular_integral;  // required with singular

    double value(double t, ConstVec b) const;
    /// Integral over [t_i, t_{i+1}]: left-point regular part plus exact singular part.
    double cell_integral(double a, double b, ConstVec state_a) const;

    static ProcessSpec zero();
    static ProcessSpec constant(double c);
};

ConditionReport check_weak_monotonicity(const GeneratorSpec& gen, const ModulusFn& rho, double p,
                                        const SamplerSpec& s);
ConditionReport check_one_sided(const GeneratorSpec& gen, const ModulusFn& rho, double p, OneSidedVariant variant,
                                const SamplerSpec& s);
ConditionReport check_two_sided(const GeneratorSpec& gen, const ModulusFn& rho, double p, TwoSidedVariant variant,
                                const SamplerSpec& s);
ConditionReport check_continuity_y(const GeneratorSpec& gen, const SamplerSpec& s);
ConditionReport check_general_growth(const GeneratorSpec& gen, const std::vector<double>& alphas,
                                     const PathEnsemble& ensemble);
ConditionReport check_lipschitz_z(const GeneratorSpec& gen, double lambda_bar, const SamplerSpec& s);
ConditionReport check_integrability(const TerminalSpec& xi, const GeneratorSpec& gen, double p,
                                    const PathEnsemble& ensemble);
ConditionReport check_A1(const GeneratorSpec& gen, double mu, double lambda, const ProcessSpec& f,
                         const ProcessSpec& phi, double p, const SamplerSpec& s);
ConditionReport check_A2(const GeneratorSpec& gen, const ModulusFn& psi, double lambda, const ProcessSpec& f, double p,
                         const SamplerSpec& s);

/// g(t, b, y, z) <= g'(t, b, y, z) at every sample, k = 1.
ConditionReport check_ordering(const GeneratorSpec& g, const GeneratorSpec& g_prime, const SamplerSpec& s);

/// Runs every claimed condition that can be checked pointwise (H1 family,
/// H2, H4) with the generator's own metadata. Used as a construction-time
/// smoke test and by the cli.
std::vector<ConditionReport> check_claims(const GeneratorSpec& gen, const SamplerSpec& s);

const char* to_string(OneSidedVariant v);
const char* to_string(TwoSidedVariant v);

}  // namespace bsde
