#pragma once

#include "bsdelab/modulus.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace bsde {

using ConstVec = std::span<const double>;
using MutVec = std::span<double>;

/// Time nodes 0 = t_0 < ... < t_N = T.
class TimeGrid {
public:
    explicit TimeGrid(std::vector<double> nodes);

    std::size_t steps() const noexcept { return nodes_.size() - 1; }
    double horizon() const noexcept { return nodes_.back(); }
    double operator[](std::size_t i) const noexcept { return nodes_[i]; }
    double width(std::size_t i) const noexcept { return nodes_[i + 1] - nodes_[i]; }
    const std::vector<double>& nodes() const noexcept { return nodes_; }

    /// Each cell split into `factor` equal parts.
    TimeGrid refined(std::size_t factor) const;

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    std::vector<double> nodes_;
};

TimeGrid make_uniform_grid(double T, std::size_t N);

/// M Brownian paths in R^d on a grid, stored node-major: [node][path][dim].
class PathEnsemble {
public:
    PathEnsemble(TimeGrid grid, std::size_t d, std::size_t M, std::uint64_t seed, std::vector<double> values,
                 bool antithetic = false);

    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t dims() const noexcept { return d_; }
    std::size_t paths() const noexcept { return m_; }
    std::uint64_t seed() const noexcept { return seed_; }
    bool antithetic() const noexcept { return antithetic_; }

    ConstVec state(std::size_t node, std::size_t path) const noexcept {
        return {values_.data() + (node * m_ + path) * d_, d_};
    }
    const std::vector<double>& values() const noexcept { return values_; }

private:
    TimeGrid grid_;
    std::size_t d_;
    std::size_t m_;
    std::uint64_t seed_;
    std::vector<double> values_;
    bool antithetic_;
};

using EnsemblePtr = std::shared_ptr<const PathEnsemble>;

/// Named structural conditions a generator may claim.
enum class Condition {
    h1,            // p-order weak monotonicity
    h1a,           // one-sided Mao
    h1b,           // one-sided Constantin
    h1star,        // one-sided Osgood
    h1prime,       // two-sided variants
    h1a_prime,
    h1b_prime,
    h1star_prime,
    h2,            // continuity in y
    h3,            // general growth in y
    h4,            // Lipschitz in z
    h5,            // integrability
    a1,
    a2,
};

const char* to_string(Condition c);
Condition condition_from_string(const std::string& name);

/// Additive t-only term with exact cell integrals.
struct SingularForcing {
    std::function<void(double t, MutVec out)> value;
    std::function<void(double a, double b, MutVec out)> cell_integral;
    std::string description;
};

/// z is stored row-major as a k x d matrix.
using GeneratorFn = std::function<void(double t, ConstVec b, ConstVec y, ConstVec z, MutVec out)>;

struct GeneratorSpec {
    std::string name;
    std::size_t k = 1;
    std::size_t d = 1;
    /// Regular part; the singular forcing is not included.
    GeneratorFn eval;
    std::optional<double> lipschitz_z;
    std::optional<ModulusFn> modulus;
    std::optional<double> order;
    std::optional<SingularForcing> singular_forcing;
    std::set<Condition> claimed_conditions;

    /// Full generator at a point: regular part plus forcing value (t > 0).
    void evaluate(double t, ConstVec b, ConstVec y, ConstVec z, MutVec out) const;
    /// Regular part only.
    void regular(double t, ConstVec b, ConstVec y, ConstVec z, MutVec out) const { eval(t, b, y, z, out); }

    void validate() const;
};

/// A path of a Brownian ensemble, handed to terminal conditions.
struct PathRef {
    const PathEnsemble* ensemble = nullptr;
    std::size_t path = 0;
};

struct TerminalSpec {
    std::string name;
    std::size_t k = 1;
    double p = 2.0;
    std::function<void(ConstVec b_terminal, const PathRef& path, MutVec out)> eval;

    void validate() const;
};

struct SolveDiagnostics {
    std::vector<double> y0_stderr;         // per component
    std::vector<double> regression_r2;     // per node, first component of the Y fit
    std::size_t max_implicit_iterations = 0;
    std::size_t bisection_fallbacks = 0;
    std::string stepping;
};

/// Y stored [node][path][k] for nodes 0..N, Z stored [node][path][k*d] for
/// nodes 0..N-1.
class DiscreteSolution {
public:
    DiscreteSolution(EnsemblePtr ensemble, std::size_t k, std::vector<double> Y, std::vector<double> Z);

    const TimeGrid& grid() const noexcept { return ensemble_->grid(); }
    const EnsemblePtr& ensemble() const noexcept { return ensemble_; }
    std::size_t k() const noexcept { return k_; }
    std::size_t d() const noexcept { return ensemble_->dims(); }
    std::size_t paths() const noexcept { return ensemble_->paths(); }
    std::size_t steps() const noexcept { return grid().steps(); }

    ConstVec y(std::size_t node, std::size_t path) const noexcept {
        return {Y_.data() + (node * paths() + path) * k_, k_};
    }
    ConstVec z(std::size_t node, std::size_t path) const noexcept {
        const std::size_t kd = k_ * d();
        return {Z_.data() + (node * paths() + path) * kd, kd};
    }
    const std::vector<double>& Y() const noexcept { return Y_; }
    const std::vector<double>& Z() const noexcept { return Z_; }

    /// Path mean of component c at a node.
    double y_mean(std::size_t node, std::size_t c = 0) const;
    double z_mean(std::size_t node, std::size_t c = 0) const;

    SolveDiagnostics diagnostics;

private:
    EnsemblePtr ensemble_;
    std::size_t k_;
    std::vector<double> Y_;
    std::vector<double> Z_;
};

struct EmpiricalNorms {
    double s_p = 0.0;
    double m_p = 0.0;
    double stderr_s = 0.0;
    double stderr_m = 0.0;
    double p = 2.0;
};

struct MeanEstimate {
    double mean = 0.0;
    double stderr = 0.0;
};

inline constexpr std::size_t kBootstrapResamples = 200;

/// Per-path sup over nodes >= from of |Y|^p.
std::vector<double> path_sup_power(const DiscreteSolution& sol, double p, std::size_t from = 0);
/// Per-path (sum over cells >= from of |Z|^2 dt)^{p/2}, Frobenius |Z|.
std::vector<double> path_quadratic_power(const DiscreteSolution& sol, double p, std::size_t from = 0);

/// Sample mean with a path-level bootstrap stderr of transform(mean). The
/// values are sorted first, so the result does not depend on path order.
MeanEstimate bootstrap_mean(std::vector<double> values, std::uint64_t seed,
                            const std::function<double(double)>& transform = {},
                            std::size_t resamples = kBootstrapResamples);

EmpiricalNorms empirical_norms(const DiscreteSolution& sol, double p);

double frobenius(ConstVec v) noexcept;

}  // namespace bsde
