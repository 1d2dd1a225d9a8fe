#include "bsdelab/model.hpp"

#include "bsdelab/error.hpp"
#include "bsdelab/parallel.hpp"
#include "bsdelab/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bsde {

TimeGrid::TimeGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.size() < 2) throw InvalidArgument("time grid needs at least two nodes");
    if (nodes_.front() != 0.0) throw InvalidArgument("time grid must start at 0");
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        if (!(nodes_[i] > nodes_[i - 1]) || !std::isfinite(nodes_[i])) {
            throw InvalidArgument("time grid must be strictly increasing and finite");
        }
    }
}

TimeGrid TimeGrid::refined(std::size_t factor) const {
    if (factor == 0) throw InvalidArgument("refinement factor must be positive");
    std::vector<double> out;
    out.reserve(steps() * factor + 1);
    for (std::size_t i = 0; i < steps(); ++i) {
        for (std::size_t j = 0; j < factor; ++j) {
            out.push_back(nodes_[i] + width(i) * static_cast<double>(j) / static_cast<double>(factor));
        }
    }
    out.push_back(nodes_.back());
    return TimeGrid(std::move(out));
}

TimeGrid make_uniform_grid(double T, std::size_t N) {
    if (!(T > 0.0) || !std::isfinite(T)) throw InvalidArgument("grid horizon must be positive");
    if (N == 0) throw InvalidArgument("grid needs at least one step");
    std::vector<double> nodes(N + 1);
    for (std::size_t i = 0; i <= N; ++i) nodes[i] = T * static_cast<double>(i) / static_cast<double>(N);
    nodes.back() = T;
    return TimeGrid(std::move(nodes));
}

PathEnsemble::PathEnsemble(TimeGrid grid, std::size_t d, std::size_t M, std::uint64_t seed,
                           std::vector<double> values, bool antithetic)
    : grid_(std::move(grid)), d_(d), m_(M), seed_(seed), values_(std::move(values)), antithetic_(antithetic) {
    if (d_ == 0 || m_ == 0) throw InvalidArgument("ensemble needs d >= 1 and M >= 1");
    if (values_.size() != (grid_.steps() + 1) * m_ * d_) throw InvalidArgument("ensemble value array has wrong size");
    for (std::size_t i = 0; i < m_ * d_; ++i) {
        if (values_[i] != 0.0) throw InvalidArgument("ensemble paths must start at 0");
    }
}

namespace {

struct ConditionName {
    Condition id;
    const char* name;
};

constexpr ConditionName kConditionNames[] = {
    {Condition::h1, "H1"},          {Condition::h1a, "H1a"},
    {Condition::h1b, "H1b"},        {Condition::h1star, "H1*"},
    {Condition::h1prime, "H1'"},    {Condition::h1a_prime, "H1a'"},
    {Condition::h1b_prime, "H1b'"}, {Condition::h1star_prime, "H1'*"},
    {Condition::h2, "H2"},          {Condition::h3, "H3"},
    {Condition::h4, "H4"},          {Condition::h5, "H5"},
    {Condition::a1, "A1"},          {Condition::a2, "A2"},
};

}  // namespace

const char* to_string(Condition c) {
    for (const auto& e : kConditionNames) {
        if (e.id == c) return e.name;
    }
    return "?";
}

Condition condition_from_string(const std::string& name) {
    for (const auto& e : kConditionNames) {
        if (name == e.name) return e.id;
    }
    throw InvalidArgument("unknown condition '" + name + "'");
}

void GeneratorSpec::evaluate(double t, ConstVec b, ConstVec y, ConstVec z, MutVec out) const {
    eval(t, b, y, z, out);
    if (singular_forcing && t > 0.0) {
        double buf[16];
        std::vector<double> heap;
        double* f = buf;
        if (k > 16) {
            heap.resize(k);
            f = heap.data();
        }
        singular_forcing->value(t, {f, k});
        for (std::size_t i = 0; i < k; ++i) out[i] += f[i];
    }
}

void GeneratorSpec::validate() const {
    if (k == 0 || d == 0) throw InvalidArgument("generator '" + name + "' needs k, d >= 1");
    if (!eval) throw InvalidArgument("generator '" + name + "' has no evaluation map");
    if (lipschitz_z && !(*lipschitz_z >= 0.0)) throw InvalidArgument("generator Lipschitz constant must be >= 0");
    if (order && !(*order >= 1.0)) throw InvalidArgument("generator order must be >= 1");
    if (singular_forcing && (!singular_forcing->value || !singular_forcing->cell_integral)) {
        throw InvalidArgument("generator '" + name + "' singular forcing is incomplete");
    }
}

void TerminalSpec::validate() const {
    if (k == 0) throw InvalidArgument("terminal '" + name + "' needs k >= 1");
    if (!(p > 1.0)) throw InvalidArgument("terminal integrability order must be > 1");
    if (!eval) throw InvalidArgument("terminal '" + name + "' has no evaluation map");
}

DiscreteSolution::DiscreteSolution(EnsemblePtr ensemble, std::size_t k, std::vector<double> Y,
                                   std::vector<double> Z)
    : ensemble_(std::move(ensemble)), k_(k), Y_(std::move(Y)), Z_(std::move(Z)) {
    if (!ensemble_) throw InvalidArgument("solution needs an ensemble");
    if (k_ == 0) throw InvalidArgument("solution needs k >= 1");
    const std::size_t N = ensemble_->grid().steps();
    const std::size_t M = ensemble_->paths();
    if (Y_.size() != (N + 1) * M * k_) throw InvalidArgument("solution Y array has wrong size");
    if (Z_.size() != N * M * k_ * ensemble_->dims()) throw InvalidArgument("solution Z array has wrong size");
}

double DiscreteSolution::y_mean(std::size_t node, std::size_t c) const {
    double s = 0.0;
    for (std::size_t m = 0; m < paths(); ++m) s += y(node, m)[c];
    return s / static_cast<double>(paths());
}

double DiscreteSolution::z_mean(std::size_t node, std::size_t c) const {
    double s = 0.0;
    for (std::size_t m = 0; m < paths(); ++m) s += z(node, m)[c];
    return s / static_cast<double>(paths());
}

double frobenius(ConstVec v) noexcept {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

std::vector<double> path_sup_power(const DiscreteSolution& sol, double p, std::size_t from) {
    const std::size_t M = sol.paths();
    std::vector<double> out(M, 0.0);
    for (std::size_t node = from; node <= sol.steps(); ++node) {
        for (std::size_t m = 0; m < M; ++m) out[m] = std::max(out[m], frobenius(sol.y(node, m)));
    }
    for (double& v : out) v = std::pow(v, p);
    return out;
}

std::vector<double> path_quadratic_power(const DiscreteSolution& sol, double p, std::size_t from) {
    const std::size_t M = sol.paths();
    std::vector<double> out(M, 0.0);
    for (std::size_t node = from; node < sol.steps(); ++node) {
        const double dt = sol.grid().width(node);
        for (std::size_t m = 0; m < M; ++m) {
            double s = 0.0;
            for (double x : sol.z(node, m)) s += x * x;
            out[m] += s * dt;
        }
    }
    for (double& v : out) v = std::pow(v, 0.5 * p);
    return out;
}

MeanEstimate bootstrap_mean(std::vector<double> values, std::uint64_t seed,
                            const std::function<double(double)>& transform, std::size_t resamples) {
    if (values.empty()) throw InvalidArgument("bootstrap of an empty sample");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    const auto apply = [&](double x) { return transform ? transform(x) : x; };

    MeanEstimate out;
    out.mean = apply(std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n));
    if (n < 2 || resamples < 2) return out;

    const rng::Key key = rng::stream_key(seed, rng::Stream::bootstrap);
    std::vector<double> stats(resamples);
    parallel::for_chunks(resamples, 4, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            double sum = 0.0;
            for (std::size_t i = 0; i < n; i += 4) {
                const rng::Counter w = rng::philox4x32(
                    {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(static_cast<std::uint64_t>(i) >> 32),
                     static_cast<std::uint32_t>(r), 0u},
                    key);
                for (std::size_t j = 0; j < 4 && i + j < n; ++j) {
                    const auto idx = static_cast<std::size_t>((static_cast<std::uint64_t>(w[j]) * n) >> 32);
                    sum += values[idx];
                }
            }
            stats[r] = apply(sum / static_cast<double>(n));
        }
    });
    double mean = 0.0;
    for (double s : stats) mean += s;
    mean /= static_cast<double>(resamples);
    double var = 0.0;
    for (double s : stats) var += (s - mean) * (s - mean);
    out.stderr = std::sqrt(var / static_cast<double>(resamples - 1));
    return out;
}

EmpiricalNorms empirical_norms(const DiscreteSolution& sol, double p) {
    if (!(p > 1.0)) throw InvalidArgument("empirical_norms needs p > 1");
    if (sol.paths() == 0) throw InvalidArgument("empirical_norms of an empty ensemble");
    const auto root = [p](double x) { return std::pow(x, 1.0 / p); };
    const std::uint64_t seed = sol.ensemble()->seed();
    const MeanEstimate s = bootstrap_mean(path_sup_power(sol, p), seed, root);
    const MeanEstimate m = bootstrap_mean(path_quadratic_power(sol, p), seed, root);
    return {s.mean, m.mean, s.stderr, m.stderr, p};
}

}  // namespace bsde
