#pragma once

#include "bsdelab/model.hpp"

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace bsde {

enum class Stepping { explicit_euler, implicit_y };

const char* to_string(Stepping s);
Stepping stepping_from_string(const std::string& s);

struct SchemeSpec {
    /// Unset means default_stepping(gen).
    std::optional<Stepping> stepping;
    /// Total degree of the Hermite basis in B_t / sqrt(t).
    std::size_t degree = 3;
    double tolerance = 1e-10;
    std::size_t max_iterations = 100;
    double damping = 0.5;
    /// Weight of g(Y_i) in the implicit step; the rest is taken at the
    /// conditional mean. 1 is backward Euler, 0.5 the trapezoid in y.
    double implicit_weight = 1.0;
    /// Enforce dt (1 + 2A) <= 0.5 for implicit steps, A from the modulus.
    bool step_guard = true;

    void validate() const;
};

/// Implicit when the generator claims an (H1)-family condition but no
/// Lipschitz bound in y (a linear modulus under H1'*); explicit otherwise.
Stepping default_stepping(const GeneratorSpec& gen);

/// Probabilists' Hermite products in x = b / sqrt(t), normalized so the
/// Gram matrix is the identity under a standard Gaussian state.
struct RegressionBasis {
    std::size_t d = 1;
    std::size_t degree = 3;
    std::vector<std::vector<unsigned>> exponents;

    RegressionBasis(std::size_t d, std::size_t degree);
    std::size_t size() const noexcept { return exponents.size(); }
    /// Values at state b and time t; only the constant is nonzero at t = 0.
    void evaluate(ConstVec b, double t, MutVec out) const;
    std::string describe() const;
};

/// Row-major coefficient matrices, basis size x target dimension.
struct RegressionModel {
    std::string basis;
    std::size_t basis_size = 0;
    std::vector<std::vector<double>> y_coefficients;  // per node 0..N-1, size x k
    std::vector<std::vector<double>> z_coefficients;  // per node 0..N-1, size x kd
};

DiscreteSolution solve_backward(const GeneratorSpec& gen, const TerminalSpec& xi, const EnsemblePtr& ensemble,
                                const SchemeSpec& scheme, RegressionModel* model = nullptr);

/// One solve per truncation level, in order.
std::vector<DiscreteSolution> picard_truncation_sequence(const GeneratorSpec& gen, const TerminalSpec& xi,
                                                         const std::vector<double>& n_list,
                                                         const EnsemblePtr& ensemble, const SchemeSpec& scheme);

/// Pathwise a - b on a shared ensemble.
DiscreteSolution difference(const DiscreteSolution& a, const DiscreteSolution& b);

/// empirical_norms of the differenced solution.
EmpiricalNorms solution_distance(const DiscreteSolution& a, const DiscreteSolution& b, double p);

/// E[sup |Y^a - Y^b|^p + (sum |Z^a - Z^b|^2 dt)^{p/2}] with bootstrap stderr.
MeanEstimate stability_metric(const DiscreteSolution& a, const DiscreteSolution& b, double p);

/// Columns: path,node,t,y0..y{k-1},z0..z{kd-1}; z fields are empty at node N.
/// Only the first max_paths paths are written.
void write_solution_csv(std::ostream& os, const DiscreteSolution& sol,
                        std::size_t max_paths = static_cast<std::size_t>(-1));

struct SolutionSummary {
    std::vector<double> y0;
    std::vector<double> y0_stderr;
    EmpiricalNorms norms;
    std::string stepping;
    std::size_t steps = 0;
    std::size_t paths = 0;
    std::size_t max_implicit_iterations = 0;
    std::size_t bisection_fallbacks = 0;
    double min_regression_r2 = 1.0;
};

SolutionSummary summarize(const DiscreteSolution& sol, double p);

}  // namespace bsde
