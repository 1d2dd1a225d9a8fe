#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace bsde {

enum class ModulusFamily { linear, log_osgood, power, tabulated };

/// Default table layout for moduli produced by transformations.
inline constexpr std::size_t kTableNodes = 512;
inline constexpr double kTableFloor = 1e-12;
inline constexpr double kTableCeiling = 10.0;

struct TableOptions {
    double u_max = kTableCeiling;
    std::size_t nodes = kTableNodes;
};

/// A nondecreasing modulus rho: R+ -> R+ with rho(0) = 0.
///
/// Families:
///   linear(mu)                 mu * u
///   log_osgood(r, delta, s)    s * u |ln u|^r on (0, delta], tangent line above delta
///   power(alpha, s)            s * u^alpha
///   tabulated(x, v)            piecewise linear through (0,0) and the nodes,
///                              constant above the last node
class ModulusFn {
public:
    static ModulusFn linear(double mu);
    static ModulusFn log_osgood(double r, double delta, double scale = 1.0);
    static ModulusFn power(double alpha, double scale = 1.0);
    static ModulusFn tabulated(std::vector<double> nodes, std::vector<double> values);

    double operator()(double u) const;

    ModulusFamily family() const noexcept { return family_; }
    /// Linear coefficient, log exponent r, or power alpha.
    double mu() const noexcept { return a_; }
    double r() const noexcept { return a_; }
    double alpha() const noexcept { return a_; }
    double delta() const noexcept { return b_; }
    double scale() const noexcept { return scale_; }
    const std::vector<double>& nodes() const noexcept { return nodes_; }
    const std::vector<double>& values() const noexcept { return values_; }

    /// Set by construction: analytically for closed forms, by the discrete
    /// slope test for tables.
    bool concave_verified() const noexcept { return concave_; }

    /// Points where the representation is not smooth (table nodes, splice point).
    std::vector<double> breakpoints() const;

    /// Evaluation grid used by scans: the table nodes, or a log grid.
    std::vector<double> scan_grid(const TableOptions& opt = {}) const;

    /// Limit of rho(u)/u as u -> infinity.
    double asymptotic_slope() const;

    std::string describe() const;

private:
    ModulusFamily family_ = ModulusFamily::linear;
    double a_ = 0.0;
    double b_ = 0.0;
    double scale_ = 1.0;
    // log_osgood tangent line above the splice point
    double tangent_slope_ = 0.0;
    double tangent_value_ = 0.0;
    std::vector<double> nodes_;
    std::vector<double> values_;
    bool concave_ = false;
};

/// rho(u), rejecting u < 0.
double eval(const ModulusFn& rho, double u);

/// n log-spaced points on [lo, hi], endpoints exact.
std::vector<double> log_grid(double lo, double hi, std::size_t n);

/// Discrete slope test through the origin: every slope is at most the previous
/// one (relative tolerance rel_tol) and none is negative.
bool slopes_nonincreasing(const std::vector<double>& x, const std::vector<double>& v, double rel_tol = 1e-9);

/// Index of the first node where v/x increases (relative tolerance), or -1.
long first_star_violation(const std::vector<double>& x, const std::vector<double>& v, double rel_tol = 1e-10);

/// Smallest A with rho(x) <= A(x+1) on the scan grid and at infinity.
double linear_growth_bound(const ModulusFn& rho);

struct SplitBound {
    double slope;
    double offset;
};

/// rho(x) <= (m + 2A) x + rho(2A / (m + 2A)).
SplitBound split_growth_bound(const ModulusFn& rho, double m);

/// Upper concave hull through the origin, evaluated at every node and
/// maxed with f so that f <= hull holds exactly. Monotone chain, O(n).
std::vector<double> upper_hull_values(const std::vector<double>& x, const std::vector<double>& f);

/// Concave majorant of a star-shaped tabulated function.
ModulusFn concave_majorant(const std::vector<double>& x, const std::vector<double>& f);
ModulusFn concave_majorant(const ModulusFn& f, const TableOptions& opt = {});

ModulusFn lift_order(const ModulusFn& rho, double p, double q, const TableOptions& opt = {});
ModulusFn mao_to_constantin(const ModulusFn& rho, double p, const TableOptions& opt = {});
ModulusFn constantin_to_mao(const ModulusFn& rho, double p, const TableOptions& opt = {});

/// Smallest sub-additive minorant on the uniform grid h, 2h, ..., n h given
/// f sampled there (f[i] = f((i+1) h)).
std::vector<double> subadditive_minorant(const std::vector<double>& f);

/// kappa(u) = concave majorant of the sub-additive minorant of f, plus u.
/// Uses a uniform grid of opt.nodes points on (0, opt.u_max].
ModulusFn subadditive_envelope(const ModulusFn& f, const TableOptions& opt = {});

enum class OsgoodVariant { osgood, constantin_p };
enum class Verdict { diverges, converges, inconclusive };

struct DivergenceVerdict {
    Verdict verdict = Verdict::inconclusive;
    /// (epsilon, integral from epsilon to 1), epsilon decreasing.
    std::vector<std::pair<double, double>> partial_integrals;
    /// True when the verdict came from the closed-form family.
    bool analytic = false;
};

const char* to_string(Verdict v);
const char* to_string(OsgoodVariant v);
const char* to_string(ModulusFamily f);

/// Three-way classifier of the integral at 0+ of 1/rho (osgood) or
/// u^{p-1}/rho^p (constantin_p). Closed-form families short-circuit unless
/// numeric_only is set; the ladder is always reported.
DivergenceVerdict osgood_classifier(const ModulusFn& rho, double p, OsgoodVariant variant,
                                    bool numeric_only = false);

struct BihariOptions {
    double u0 = 1.0;
};

/// G^{-1}(G(a) + multiplier * horizon) with G(u) = int_{u0}^u dv / rho(v).
/// Returns +inf if the inversion leaves the representable range.
double bihari_bound(double a, const ModulusFn& rho, double horizon, double multiplier,
                    const BihariOptions& opt = {});

}  // namespace bsde
