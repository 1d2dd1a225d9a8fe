#include "bsdelab/solver.hpp"

#include "bsdelab/error.hpp"
#include "bsdelab/format.hpp"
#include "bsdelab/generators.hpp"
#include "bsdelab/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bsde {

namespace {

constexpr std::size_t kPathChunk = 4096;
constexpr double kRankThreshold = 1e-10;

using Matrix = Eigen::MatrixXd;

bool claims_any(const GeneratorSpec& gen, std::initializer_list<Condition> cs) {
    for (Condition c : cs) {
        if (gen.claimed_conditions.count(c)) return true;
    }
    return false;
}

/// Chunked sums of phi phi^T and phi target^T, combined in chunk order.
struct NormalEquations {
    Matrix gram;
    Matrix rhs;
};

template <class TargetFn>
NormalEquations assemble(const std::vector<double>& phi, std::size_t M, std::size_t P, std::size_t width,
                         TargetFn&& target) {
    const std::size_t chunks = (M + kPathChunk - 1) / kPathChunk;
    std::vector<Matrix> grams(chunks, Matrix::Zero(P, P));
    std::vector<Matrix> rhss(chunks, Matrix::Zero(P, width));
    parallel::for_chunks(M, kPathChunk, [&](std::size_t c, std::size_t begin, std::size_t end) {
        Matrix& G = grams[c];
        Matrix& R = rhss[c];
        std::vector<double> t(width);
        for (std::size_t m = begin; m < end; ++m) {
            const double* f = phi.data() + m * P;
            target(m, MutVec(t));
            for (std::size_t a = 0; a < P; ++a) {
                for (std::size_t b = 0; b <= a; ++b) G(a, b) += f[a] * f[b];
                for (std::size_t j = 0; j < width; ++j) R(a, j) += f[a] * t[j];
            }
        }
    });
    NormalEquations out{Matrix::Zero(P, P), Matrix::Zero(P, width)};
    for (std::size_t c = 0; c < chunks; ++c) {
        out.gram += grams[c];
        out.rhs += rhss[c];
    }
    for (std::size_t a = 0; a < P; ++a) {
        for (std::size_t b = a + 1; b < P; ++b) out.gram(a, b) = out.gram(b, a);
    }
    return out;
}

class GramSolver {
public:
    GramSolver(const Matrix& gram, std::size_t node) : qr_(gram) {
        qr_.setThreshold(kRankThreshold);
        const auto& R = qr_.matrixR();
        const double top = std::abs(R(0, 0));
        double bottom = std::abs(R(gram.rows() - 1, gram.rows() - 1));
        cond_ = bottom > 0.0 ? top / bottom : std::numeric_limits<double>::infinity();
        if (static_cast<Eigen::Index>(qr_.rank()) < gram.rows()) {
            throw RegressionError(node, cond_,
                                  "regression basis is rank deficient at node " + std::to_string(node) +
                                      " (condition estimate " + format_number(cond_) + ")");
        }
    }
    Matrix solve(const Matrix& rhs) const { return qr_.solve(rhs); }

private:
    Eigen::ColPivHouseholderQR<Matrix> qr_;
    double cond_ = 1.0;
};

void predict(const std::vector<double>& phi, std::size_t P, const Matrix& coef, std::size_t m, MutVec out) {
    const double* f = phi.data() + m * P;
    for (std::size_t j = 0; j < out.size(); ++j) {
        double s = 0.0;
        for (std::size_t a = 0; a < P; ++a) s += f[a] * coef(a, j);
        out[j] = s;
    }
}

std::vector<double> flatten(const Matrix& m) {
    std::vector<double> out(static_cast<std::size_t>(m.size()));
    for (Eigen::Index a = 0; a < m.rows(); ++a) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(a * m.cols() + j)] = m(a, j);
    }
    return out;
}

struct ChunkStats {
    std::size_t max_iterations = 0;
    std::size_t fallbacks = 0;
};

/// Y = c + dt * theta * g(t, b, Y, z); c already holds every explicit part.
struct ImplicitStep {
    const GeneratorSpec& gen;
    const SchemeSpec& scheme;
    double t;
    double dt;
    std::size_t node;

    std::size_t operator()(ConstVec b, ConstVec c, ConstVec z, MutVec y, std::size_t chunk, ChunkStats& stats) const {
        const std::size_t k = y.size();
        const double w = dt * scheme.implicit_weight;
        thread_local std::vector<double> g, next;
        g.resize(k);
        next.resize(k);
        double residual = 0.0;
        for (std::size_t it = 1; it <= scheme.max_iterations; ++it) {
            gen.regular(t, b, y, z, g);
            double diff2 = 0.0;
            for (std::size_t i = 0; i < k; ++i) {
                next[i] = c[i] + w * g[i];
                diff2 += (next[i] - y[i]) * (next[i] - y[i]);
            }
            residual = std::sqrt(diff2);
            if (!std::isfinite(residual)) break;
            if (residual <= scheme.tolerance * (1.0 + frobenius(y))) {
                std::copy(next.begin(), next.end(), y.begin());
                return it;
            }
            for (std::size_t i = 0; i < k; ++i) y[i] += scheme.damping * (next[i] - y[i]);
        }
        if (k == 1 && bisect(b, c[0], z, y, w)) {
            ++stats.fallbacks;
            return scheme.max_iterations;
        }
        throw ImplicitSolveError(node, chunk, residual,
                                 "implicit step did not converge at node " + std::to_string(node) + ", path batch " +
                                     std::to_string(chunk) + " (residual " + format_number(residual) + ")");
    }

    /// r(y) = y - c - w g(y) is increasing for a monotone drift; bracket and bisect.
    bool bisect(ConstVec b, double c, ConstVec z, MutVec y, double w) const {
        if (!std::isfinite(c)) return false;
        double g = 0.0;
        const auto r = [&](double v) {
            gen.regular(t, b, ConstVec(&v, 1), z, MutVec(&g, 1));
            return v - c - w * g;
        };
        const double start = c;
        double lo = start, hi = start;
        double step = 1.0 + std::abs(start);
        double rlo = r(lo), rhi = rlo;
        for (int i = 0; i < 64 && rlo > 0.0; ++i, step *= 2.0) {
            lo -= step;
            rlo = r(lo);
        }
        step = 1.0 + std::abs(start);
        for (int i = 0; i < 64 && rhi < 0.0; ++i, step *= 2.0) {
            hi += step;
            rhi = r(hi);
        }
        if (!(rlo <= 0.0 && rhi >= 0.0)) return false;
        for (int i = 0; i < 200 && hi - lo > scheme.tolerance * (1.0 + std::abs(lo)); ++i) {
            const double mid = 0.5 * (lo + hi);
            (r(mid) <= 0.0 ? lo : hi) = mid;
        }
        y[0] = 0.5 * (lo + hi);
        return true;
    }
};

void require_shared(const DiscreteSolution& a, const DiscreteSolution& b) {
    if (a.k() != b.k()) throw InvalidArgument("solutions have different dimensions");
    if (a.ensemble() == b.ensemble()) return;
    const PathEnsemble& ea = *a.ensemble();
    const PathEnsemble& eb = *b.ensemble();
    if (!(ea.grid() == eb.grid()) || ea.dims() != eb.dims() || ea.paths() != eb.paths() ||
        ea.values() != eb.values()) {
        throw InvalidArgument("solutions live on different grids or ensembles");
    }
}

}  // namespace

const char* to_string(Stepping s) { return s == Stepping::explicit_euler ? "explicit" : "implicit_y"; }

Stepping stepping_from_string(const std::string& s) {
    if (s == "explicit") return Stepping::explicit_euler;
    if (s == "implicit_y" || s == "implicit") return Stepping::implicit_y;
    throw InvalidArgument("unknown stepping '" + s + "'");
}

void SchemeSpec::validate() const {
    if (!(tolerance > 0.0)) throw InvalidArgument("scheme tolerance must be positive");
    if (max_iterations == 0) throw InvalidArgument("scheme needs at least one implicit iteration");
    if (!(damping > 0.0 && damping <= 1.0)) throw InvalidArgument("scheme damping must lie in (0, 1]");
    if (!(implicit_weight >= 0.0 && implicit_weight <= 1.0)) {
        throw InvalidArgument("implicit weight must lie in [0, 1]");
    }
}

Stepping default_stepping(const GeneratorSpec& gen) {
    const bool h1_family = claims_any(gen, {Condition::h1, Condition::h1a, Condition::h1b, Condition::h1star});
    const bool lipschitz_y = gen.modulus && gen.modulus->family() == ModulusFamily::linear &&
                             gen.claimed_conditions.count(Condition::h1star_prime);
    return h1_family && !lipschitz_y ? Stepping::implicit_y : Stepping::explicit_euler;
}

RegressionBasis::RegressionBasis(std::size_t d_, std::size_t degree_) : d(d_), degree(degree_) {
    if (d == 0) throw InvalidArgument("regression basis needs d >= 1");
    for (std::size_t total = 0; total <= degree; ++total) {
        // all exponent vectors with the given total, in lexicographic order (first axis largest first)
        std::vector<unsigned> cur(d, 0);
        const auto rec = [&](auto&& self, std::size_t axis, std::size_t left) -> void {
            if (axis + 1 == d) {
                cur[axis] = static_cast<unsigned>(left);
                exponents.push_back(cur);
                return;
            }
            for (std::size_t v = left + 1; v-- > 0;) {
                cur[axis] = static_cast<unsigned>(v);
                self(self, axis + 1, left - v);
            }
        };
        rec(rec, 0, total);
    }
}

void RegressionBasis::evaluate(ConstVec b, double t, MutVec out) const {
    std::fill(out.begin(), out.end(), 0.0);
    out[0] = 1.0;
    if (!(t > 0.0)) return;
    const double scale = 1.0 / std::sqrt(t);
    // normalized He_n per axis
    std::vector<double> table(d * (degree + 1));
    for (std::size_t a = 0; a < d; ++a) {
        const double x = b[a] * scale;
        double* h = table.data() + a * (degree + 1);
        double prev = 0.0, cur = 1.0;
        h[0] = 1.0;
        double fact = 1.0;
        for (std::size_t n = 1; n <= degree; ++n) {
            const double next = x * cur - static_cast<double>(n - 1) * prev;
            prev = cur;
            cur = next;
            fact *= static_cast<double>(n);
            h[n] = cur / std::sqrt(fact);
        }
    }
    for (std::size_t j = 0; j < exponents.size(); ++j) {
        double v = 1.0;
        for (std::size_t a = 0; a < d; ++a) v *= table[a * (degree + 1) + exponents[j][a]];
        out[j] = v;
    }
}

std::string RegressionBasis::describe() const {
    return "hermite(d=" + std::to_string(d) + ", degree<=" + std::to_string(degree) + ", size=" +
           std::to_string(size()) + ")";
}

DiscreteSolution solve_backward(const GeneratorSpec& gen, const TerminalSpec& xi, const EnsemblePtr& ensemble,
                                const SchemeSpec& scheme, RegressionModel* model) {
    if (!ensemble) throw InvalidArgument("solve_backward needs an ensemble");
    gen.validate();
    xi.validate();
    scheme.validate();
    if (xi.k != gen.k) throw InvalidArgument("terminal and generator dimensions differ");
    if (gen.d != ensemble->dims()) throw InvalidArgument("generator and ensemble Brownian dimensions differ");

    const PathEnsemble& ens = *ensemble;
    const TimeGrid& grid = ens.grid();
    const std::size_t N = grid.steps();
    const std::size_t M = ens.paths();
    const std::size_t k = gen.k;
    const std::size_t d = gen.d;
    const std::size_t kd = k * d;
    const Stepping stepping = scheme.stepping.value_or(default_stepping(gen));

    if (stepping == Stepping::implicit_y && scheme.step_guard && gen.modulus) {
        const double slope = split_growth_bound(*gen.modulus, 1.0).slope;
        double widest = 0.0;
        for (std::size_t i = 0; i < N; ++i) widest = std::max(widest, grid.width(i));
        if (widest * slope > 0.5) {
            throw PreconditionError("implicit step guard: dt * (1 + 2A) = " + format_number(widest * slope) +
                                    " exceeds 0.5; refine the grid");
        }
    }

    std::vector<double> Y((N + 1) * M * k);
    std::vector<double> Z(N * M * kd);
    const RegressionBasis basis(d, scheme.degree);
    const std::size_t full = basis.size();

    parallel::for_chunks(M, kPathChunk, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t m = begin; m < end; ++m) {
            xi.eval(ens.state(N, m), PathRef{&ens, m}, MutVec(Y.data() + (N * M + m) * k, k));
        }
    });

    if (model) {
        model->basis = basis.describe();
        model->basis_size = full;
        model->y_coefficients.assign(N, {});
        model->z_coefficients.assign(N, {});
    }
    SolveDiagnostics diag;
    diag.stepping = to_string(stepping);
    diag.regression_r2.assign(N, 1.0);

    const std::size_t chunks = (M + kPathChunk - 1) / kPathChunk;
    std::vector<double> phi;
    std::vector<double> cond_mean(M * k);
    std::vector<double> forcing(k, 0.0);

    /// per-path xi + sum of (Y_i - E_i); OLS with an intercept makes its mean equal Y0
    std::vector<double> pathwise(Y.begin() + static_cast<std::ptrdiff_t>(N * M * k), Y.end());
    for (std::size_t node = N; node-- > 0;) {
        const double t = grid[node];
        const double dt = grid.width(node);
        const std::size_t P = t > 0.0 ? full : 1;
        const double* next = Y.data() + (node + 1) * M * k;
        double* cur = Y.data() + node * M * k;
        double* zcur = Z.data() + node * M * kd;

        phi.assign(M * P, 0.0);
        parallel::for_chunks(M, kPathChunk, [&](std::size_t, std::size_t begin, std::size_t end) {
            std::vector<double> buf(full);
            for (std::size_t m = begin; m < end; ++m) {
                basis.evaluate(ens.state(node, m), t, buf);
                std::copy_n(buf.begin(), P, phi.begin() + static_cast<std::ptrdiff_t>(m * P));
            }
        });

        const NormalEquations ye = assemble(phi, M, P, k, [&](std::size_t m, MutVec out) {
            std::copy_n(next + m * k, k, out.begin());
        });
        const GramSolver solver(ye.gram, node);
        const Matrix cy = solver.solve(ye.rhs);
        parallel::for_chunks(M, kPathChunk, [&](std::size_t, std::size_t begin, std::size_t end) {
            for (std::size_t m = begin; m < end; ++m) predict(phi, P, cy, m, MutVec(cond_mean.data() + m * k, k));
        });

        const NormalEquations ze = assemble(phi, M, P, kd, [&](std::size_t m, MutVec out) {
            const ConstVec b0 = ens.state(node, m);
            const ConstVec b1 = ens.state(node + 1, m);
            for (std::size_t i = 0; i < k; ++i) {
                const double innov = next[m * k + i] - cond_mean[m * k + i];
                for (std::size_t j = 0; j < d; ++j) out[i * d + j] = innov * (b1[j] - b0[j]) / dt;
            }
        });
        const Matrix cz = solver.solve(ze.rhs);

        {
            double mean = 0.0;
            for (std::size_t m = 0; m < M; ++m) mean += next[m * k];
            mean /= static_cast<double>(M);
            double ss_tot = 0.0, ss_res = 0.0;
            for (std::size_t m = 0; m < M; ++m) {
                ss_tot += (next[m * k] - mean) * (next[m * k] - mean);
                ss_res += (next[m * k] - cond_mean[m * k]) * (next[m * k] - cond_mean[m * k]);
            }
            diag.regression_r2[node] = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
        }
        if (model) {
            model->y_coefficients[node] = flatten(cy);
            model->z_coefficients[node] = flatten(cz);
        }

        std::fill(forcing.begin(), forcing.end(), 0.0);
        if (gen.singular_forcing) gen.singular_forcing->cell_integral(t, t + dt, forcing);

        std::vector<ChunkStats> stats(chunks);
        const ImplicitStep implicit{gen, scheme, t, dt, node};
        parallel::for_chunks(M, kPathChunk, [&](std::size_t c, std::size_t begin, std::size_t end) {
            std::vector<double> g(k), fixed(k);
            for (std::size_t m = begin; m < end; ++m) {
                const ConstVec b = ens.state(node, m);
                const ConstVec e(cond_mean.data() + m * k, k);
                const MutVec z(zcur + m * kd, kd);
                predict(phi, P, cz, m, z);
                const MutVec y(cur + m * k, k);
                gen.regular(t, b, e, z, g);
                for (std::size_t i = 0; i < k; ++i) y[i] = e[i] + dt * g[i] + forcing[i];
                if (stepping == Stepping::implicit_y) {
                    const double explicit_share = dt * (1.0 - scheme.implicit_weight);
                    for (std::size_t i = 0; i < k; ++i) fixed[i] = e[i] + explicit_share * g[i] + forcing[i];
                    const std::size_t its = implicit(b, fixed, z, y, c, stats[c]);
                    stats[c].max_iterations = std::max(stats[c].max_iterations, its);
                }
                for (std::size_t i = 0; i < k; ++i) pathwise[m * k + i] += y[i] - e[i];
            }
        });
        for (const ChunkStats& s : stats) {
            diag.max_implicit_iterations = std::max(diag.max_implicit_iterations, s.max_iterations);
            diag.bisection_fallbacks += s.fallbacks;
        }
    }

    diag.y0_stderr.assign(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        std::vector<double> v(M);
        for (std::size_t m = 0; m < M; ++m) v[m] = pathwise[m * k + i];
        diag.y0_stderr[i] = bootstrap_mean(std::move(v), ens.seed() + i).stderr;
    }

    DiscreteSolution sol(ensemble, k, std::move(Y), std::move(Z));
    sol.diagnostics = std::move(diag);
    return sol;
}

std::vector<DiscreteSolution> picard_truncation_sequence(const GeneratorSpec& gen, const TerminalSpec& xi,
                                                         const std::vector<double>& n_list,
                                                         const EnsemblePtr& ensemble, const SchemeSpec& scheme) {
    if (n_list.empty()) throw InvalidArgument("truncation sequence needs at least one level");
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        if (!(n_list[i] > 0.0)) throw InvalidArgument("truncation levels must be positive");
        if (i > 0 && !(n_list[i] > n_list[i - 1])) throw InvalidArgument("truncation levels must increase");
    }
    SchemeSpec s = scheme;
    if (!s.stepping) s.stepping = default_stepping(gen);
    std::vector<DiscreteSolution> out;
    out.reserve(n_list.size());
    for (double n : n_list) {
        const auto [xn, gn] = truncate_problem(xi, gen, n);
        out.push_back(solve_backward(gn, xn, ensemble, s));
    }
    return out;
}

DiscreteSolution difference(const DiscreteSolution& a, const DiscreteSolution& b) {
    require_shared(a, b);
    std::vector<double> Y(a.Y().size()), Z(a.Z().size());
    for (std::size_t i = 0; i < Y.size(); ++i) Y[i] = a.Y()[i] - b.Y()[i];
    for (std::size_t i = 0; i < Z.size(); ++i) Z[i] = a.Z()[i] - b.Z()[i];
    return DiscreteSolution(a.ensemble(), a.k(), std::move(Y), std::move(Z));
}

EmpiricalNorms solution_distance(const DiscreteSolution& a, const DiscreteSolution& b, double p) {
    return empirical_norms(difference(a, b), p);
}

MeanEstimate stability_metric(const DiscreteSolution& a, const DiscreteSolution& b, double p) {
    if (!(p > 1.0)) throw InvalidArgument("stability metric needs p > 1");
    const DiscreteSolution diff = difference(a, b);
    std::vector<double> v = path_sup_power(diff, p);
    const std::vector<double> q = path_quadratic_power(diff, p);
    for (std::size_t m = 0; m < v.size(); ++m) v[m] += q[m];
    return bootstrap_mean(std::move(v), a.ensemble()->seed());
}

void write_solution_csv(std::ostream& os, const DiscreteSolution& sol, std::size_t max_paths) {
    const std::size_t k = sol.k();
    const std::size_t kd = k * sol.d();
    os << "path,node,t";
    for (std::size_t i = 0; i < k; ++i) os << ",y" << i;
    for (std::size_t j = 0; j < kd; ++j) os << ",z" << j;
    os << '\n';
    const std::size_t paths = std::min(max_paths, sol.paths());
    for (std::size_t m = 0; m < paths; ++m) {
        for (std::size_t node = 0; node <= sol.steps(); ++node) {
            os << m << ',' << node << ',' << format_number(sol.grid()[node]);
            for (double v : sol.y(node, m)) os << ',' << format_number(v);
            if (node < sol.steps()) {
                for (double v : sol.z(node, m)) os << ',' << format_number(v);
            } else {
                for (std::size_t j = 0; j < kd; ++j) os << ',';
            }
            os << '\n';
        }
    }
}

SolutionSummary summarize(const DiscreteSolution& sol, double p) {
    SolutionSummary s;
    for (std::size_t i = 0; i < sol.k(); ++i) s.y0.push_back(sol.y_mean(0, i));
    s.y0_stderr = sol.diagnostics.y0_stderr;
    s.norms = empirical_norms(sol, p);
    s.stepping = sol.diagnostics.stepping;
    s.steps = sol.steps();
    s.paths = sol.paths();
    s.max_implicit_iterations = sol.diagnostics.max_implicit_iterations;
    s.bisection_fallbacks = sol.diagnostics.bisection_fallbacks;
    for (double r : sol.diagnostics.regression_r2) s.min_regression_r2 = std::min(s.min_regression_r2, r);
    return s;
}

}  // namespace bsde
