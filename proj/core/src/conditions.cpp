#include "bsdelab/conditions.hpp"

#include "bsdelab/brownian.hpp"
#include "bsdelab/error.hpp"
#include "bsdelab/parallel.hpp"
#include "bsdelab/random.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bsde {

namespace {

constexpr std::size_t kSampleChunk = 2048;
constexpr double kLattice[] = {-1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0};
constexpr std::size_t kLatticeSize = std::size(kLattice) * std::size(kLattice);

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

struct Sample {
    double t = 0.0;
    std::vector<double> b, y1, y2, z1, z2;
};

double dot(ConstVec a, ConstVec b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double distance(ConstVec a, ConstVec b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

std::vector<double> sample_times(const SamplerSpec& s) {
    return s.ensemble ? s.ensemble->grid().nodes() : s.t_grid;
}

class Sampler {
public:
    Sampler(const SamplerSpec& s, std::size_t k, std::size_t d)
        : s_(s), k_(k), d_(d), times_(sample_times(s)) {}

    Sample draw(std::size_t i) const {
        Sample out;
        out.b.assign(d_, 0.0);
        out.y1.assign(k_, 0.0);
        out.y2.assign(k_, 0.0);
        out.z1.assign(k_ * d_, 0.0);
        out.z2.assign(k_ * d_, 0.0);
        if (i < std::min(s_.count, kLatticeSize)) {
            // Deterministic coarse lattice along the first y axis.
            out.t = times_[times_.size() / 2];
            out.y1[0] = s_.y_radius * kLattice[i / std::size(kLattice)];
            out.y2[0] = s_.y_radius * kLattice[i % std::size(kLattice)];
            if (s_.ensemble) {
                out.b = copy_state(times_.size() / 2, 0);
            }
            return out;
        }
        rng::CounterStream st(s_.seed, rng::Stream::sampler, i);
        const std::size_t node = static_cast<std::size_t>(st.below(times_.size()));
        out.t = times_[node];
        if (s_.ensemble) {
            out.b = copy_state(node, static_cast<std::size_t>(st.below(s_.ensemble->paths())));
        } else {
            const double sd = std::sqrt(out.t);
            for (double& v : out.b) v = sd * st.normal();
        }
        for (double& v : out.y1) v = s_.y_radius * (2.0 * st.uniform() - 1.0);
        const double mode = st.uniform();
        if (mode < 0.25) {
            // close to the origin
            place_near(st, out.y1, std::vector<double>(k_, 0.0));
        }
        if (st.uniform() < 0.5) {
            place_near(st, out.y2, out.y1);
        } else {
            for (double& v : out.y2) v = s_.y_radius * (2.0 * st.uniform() - 1.0);
        }
        for (double& v : out.z1) v = s_.z_radius * (2.0 * st.uniform() - 1.0);
        if (st.uniform() < 0.5) {
            place_near(st, out.z2, out.z1);
        } else {
            for (double& v : out.z2) v = s_.z_radius * (2.0 * st.uniform() - 1.0);
        }
        return out;
    }

private:
    std::vector<double> copy_state(std::size_t node, std::size_t path) const {
        const ConstVec b = s_.ensemble->state(node, path);
        return {b.begin(), b.end()};
    }

    void place_near(rng::CounterStream& st, std::vector<double>& target, const std::vector<double>& centre) const {
        const double r = s_.closeness[static_cast<std::size_t>(st.below(s_.closeness.size()))];
        std::vector<double> dir(target.size());
        double norm = 0.0;
        for (double& v : dir) {
            v = st.normal();
            norm += v * v;
        }
        norm = std::sqrt(norm);
        for (std::size_t j = 0; j < target.size(); ++j) target[j] = centre[j] + r * dir[j] / norm;
    }

    const SamplerSpec& s_;
    std::size_t k_;
    std::size_t d_;
    std::vector<double> times_;
};

std::string describe_box(const SamplerSpec& s) {
    const auto times = sample_times(s);
    std::string out = "t in [" + fmt(times.front()) + ", " + fmt(times.back()) + "], |y_i| <= " + fmt(s.y_radius) +
                      ", |z_ij| <= " + fmt(s.z_radius) + ", closeness down to " +
                      fmt(*std::min_element(s.closeness.begin(), s.closeness.end()));
    out += s.ensemble ? ", b from ensemble" : ", b ~ N(0, t I)";
    return out;
}

[[noreturn]] void rethrow_with_sample(const std::string& id, const Sample& smp, const std::exception& e) {
    std::ostringstream os;
    os << id << ": generator evaluation failed at t = " << smp.t << ", y1 = (";
    for (double v : smp.y1) os << v << ' ';
    os << "), z1 = (";
    for (double v : smp.z1) os << v << ' ';
    os << "): " << e.what();
    throw EvaluationError(os.str());
}

/// Evaluates fn on every sample; fn returns false to skip a sample and
/// otherwise fills lhs/rhs of the witness.
template <class Fn>
ConditionReport run_sampled(const std::string& id, const SamplerSpec& s, std::size_t k, std::size_t d, Fn fn) {
    s.validate();
    const Sampler sampler(s, k, d);
    const std::size_t chunks = (s.count + kSampleChunk - 1) / kSampleChunk;
    struct Partial {
        std::vector<Witness> witnesses;
        std::size_t violations = 0;
        double max_slack = -std::numeric_limits<double>::infinity();
    };
    std::vector<Partial> parts(chunks);
    parallel::for_chunks(s.count, kSampleChunk, [&](std::size_t c, std::size_t begin, std::size_t end) {
        Partial& part = parts[c];
        for (std::size_t i = begin; i < end; ++i) {
            const Sample smp = sampler.draw(i);
            Witness w;
            bool used = false;
            try {
                used = fn(smp, w);
            } catch (const EvaluationError&) {
                throw;
            } catch (const std::exception& e) {
                rethrow_with_sample(id, smp, e);
            }
            if (!used) continue;
            if (std::isnan(w.lhs) || std::isnan(w.rhs)) {
                rethrow_with_sample(id, smp, EvaluationError("non-finite inequality side"));
            }
            const double slack = w.lhs - w.rhs;
            part.max_slack = std::max(part.max_slack, slack);
            if (slack > kSlackTolerance) {
                ++part.violations;
                if (part.witnesses.size() < kMaxWitnesses) {
                    w.t = smp.t;
                    w.b = smp.b;
                    if (w.y1.empty()) w.y1 = smp.y1;
                    if (w.z1.empty()) w.z1 = smp.z1;
                    part.witnesses.push_back(std::move(w));
                }
            }
        }
    });
    ConditionReport out;
    out.condition_id = id;
    out.samples = s.count;
    out.box = describe_box(s);
    for (auto& part : parts) {
        out.violation_count += part.violations;
        out.max_slack = std::max(out.max_slack, part.max_slack);
        for (auto& w : part.witnesses) {
            if (out.violations.size() < kMaxWitnesses) out.violations.push_back(std::move(w));
        }
    }
    out.passed = out.violation_count == 0;
    return out;
}

void require_dims(const GeneratorSpec& gen) {
    gen.validate();
}

// Inner product term <(y1-y2)/|y1-y2|, g(y1) - g(y2)> and the norm of the difference.
struct Increment {
    double dist = 0.0;
    double inner = 0.0;
    double diff_norm = 0.0;
};

Increment y_increment(const GeneratorSpec& gen, const Sample& smp) {
    const std::size_t k = gen.k;
    std::vector<double> g1(k), g2(k), dy(k), dg(k);
    gen.evaluate(smp.t, smp.b, smp.y1, smp.z1, g1);
    gen.evaluate(smp.t, smp.b, smp.y2, smp.z1, g2);
    Increment inc;
    for (std::size_t i = 0; i < k; ++i) {
        dy[i] = smp.y1[i] - smp.y2[i];
        dg[i] = g1[i] - g2[i];
    }
    inc.dist = frobenius(dy);
    if (inc.dist > 0.0) inc.inner = dot(dy, dg) / inc.dist;
    inc.diff_norm = frobenius(dg);
    return inc;
}

}  // namespace

std::vector<double> default_closeness() {
    std::vector<double> out;
    for (int e = 1; e <= 8; ++e) out.push_back(std::pow(10.0, -e));
    return out;
}

void SamplerSpec::validate() const {
    if (count == 0) throw InvalidArgument("sampler count must be >= 1");
    if (!(y_radius > 0.0) || !(z_radius > 0.0)) throw InvalidArgument("sampler radii must be positive");
    if (!ensemble && t_grid.empty()) throw InvalidArgument("sampler needs a t grid");
    for (double t : t_grid) {
        if (!(t >= 0.0)) throw InvalidArgument("sampler times must be nonnegative");
    }
    if (closeness.empty()) throw InvalidArgument("sampler closeness schedule is empty");
    for (double c : closeness) {
        if (!(c > 0.0)) throw InvalidArgument("closeness values must be positive");
    }
}

double ProcessSpec::value(double t, ConstVec b) const {
    double v = regular ? regular(t, b) : 0.0;
    if (singular && t > 0.0) v += singular(t);
    return v;
}

double ProcessSpec::cell_integral(double a, double b, ConstVec state_a) const {
    double v = regular ? regular(a, state_a) * (b - a) : 0.0;
    if (singular) v += singular_integral(a, b);
    return v;
}

ProcessSpec ProcessSpec::zero() {
    return {"0", [](double, ConstVec) { return 0.0; }, {}, {}};
}

ProcessSpec ProcessSpec::constant(double c) {
    return {fmt(c), [c](double, ConstVec) { return c; }, {}, {}};
}

const char* to_string(OneSidedVariant v) {
    switch (v) {
    case OneSidedVariant::mao:
        return "H1a";
    case OneSidedVariant::constantin:
        return "H1b";
    case OneSidedVariant::osgood:
        return "H1*";
    }
    return "?";
}

const char* to_string(TwoSidedVariant v) {
    switch (v) {
    case TwoSidedVariant::h1prime:
        return "H1'";
    case TwoSidedVariant::mao_prime:
        return "H1a'";
    case TwoSidedVariant::constantin_prime:
        return "H1b'";
    case TwoSidedVariant::osgood_prime:
        return "H1'*";
    }
    return "?";
}

ConditionReport check_weak_monotonicity(const GeneratorSpec& gen, const ModulusFn& rho, double p,
                                        const SamplerSpec& s) {
    require_dims(gen);
    if (!(p >= 1.0)) throw InvalidArgument("weak monotonicity order must be >= 1");
    return run_sampled("H1", s, gen.k, gen.d, [&](const Sample& smp, Witness& w) {
        const Increment inc = y_increment(gen, smp);
        if (inc.dist == 0.0) return false;
        w.y2 = smp.y2;
        w.lhs = std::pow(inc.dist, p - 1.0) * inc.inner;
        w.rhs = rho(std::pow(inc.dist, p));
        return true;
    });
}

ConditionReport check_one_sided(const GeneratorSpec& gen, const ModulusFn& rho, double p, OneSidedVariant variant,
                                const SamplerSpec& s) {
    require_dims(gen);
    if (!(p >= 1.0)) throw InvalidArgument("condition order must be >= 1");
    return run_sampled(to_string(variant), s, gen.k, gen.d, [&](const Sample& smp, Witness& w) {
        const Increment inc = y_increment(gen, smp);
        if (inc.dist == 0.0) return false;
        w.y2 = smp.y2;
        w.lhs = inc.inner;
        w.rhs = variant == OneSidedVariant::mao ? std::pow(rho(std::pow(inc.dist, p)), 1.0 / p) : rho(inc.dist);
        return true;
    });
}

ConditionReport check_two_sided(const GeneratorSpec& gen, const ModulusFn& rho, double p, TwoSidedVariant variant,
                                const SamplerSpec& s) {
    require_dims(gen);
    if (!(p >= 1.0)) throw InvalidArgument("condition order must be >= 1");
    return run_sampled(to_string(variant), s, gen.k, gen.d, [&](const Sample& smp, Witness& w) {
        const Increment inc = y_increment(gen, smp);
        if (inc.dist == 0.0) return false;
        w.y2 = smp.y2;
        switch (variant) {
        case TwoSidedVariant::h1prime:
            w.lhs = std::pow(inc.dist, p - 1.0) * inc.diff_norm;
            w.rhs = rho(std::pow(inc.dist, p));
            break;
        case TwoSidedVariant::mao_prime:
            w.lhs = inc.diff_norm;
            w.rhs = std::pow(rho(std::pow(inc.dist, p)), 1.0 / p);
            break;
        case TwoSidedVariant::constantin_prime:
        case TwoSidedVariant::osgood_prime:
            w.lhs = inc.diff_norm;
            w.rhs = rho(inc.dist);
            break;
        }
        return true;
    });
}

ConditionReport check_continuity_y(const GeneratorSpec& gen, const SamplerSpec& s) {
    require_dims(gen);
    const std::size_t k = gen.k;
    /// sup of |g(y') - g(y)| over y' = y +- s r e_j, s in {1, 1/2, 1/4}
    auto oscillation = [&](const Sample& smp, double r) {
        std::vector<double> g0(k), y(smp.y1), g(k);
        gen.evaluate(smp.t, smp.b, smp.y1, smp.z1, g0);
        double osc = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            for (double s : {1.0, -1.0, 0.5, -0.5, 0.25, -0.25}) {
                y[j] = smp.y1[j] + s * r;
                gen.evaluate(smp.t, smp.b, y, smp.z1, g);
                osc = std::max(osc, distance(g, g0));
            }
            y[j] = smp.y1[j];
        }
        return osc;
    };
    ConditionReport rep = run_sampled("H2", s, k, gen.d, [&](const Sample& smp, Witness& w) {
        std::vector<double> g0(k);
        gen.evaluate(smp.t, smp.b, smp.y1, smp.z1, g0);
        const double fine = oscillation(smp, 1e-8);
        const double coarse = oscillation(smp, 1e-5);
        w.lhs = fine;
        w.rhs = std::max(1e-10 * (1.0 + frobenius(g0)), 0.5 * coarse);
        w.note = "oscillation at radius 1e-8 vs 1e-5";
        return true;
    });
    rep.note = "oscillation of y -> g over coordinate directions at radii 1e-5 and 1e-8";
    return rep;
}

ConditionReport check_lipschitz_z(const GeneratorSpec& gen, double lambda_bar, const SamplerSpec& s) {
    require_dims(gen);
    if (!(lambda_bar >= 0.0)) throw InvalidArgument("Lipschitz constant must be >= 0");
    const std::size_t k = gen.k;
    return run_sampled("H4", s, k, gen.d, [&](const Sample& smp, Witness& w) {
        const double dz = distance(smp.z1, smp.z2);
        if (dz == 0.0) return false;
        std::vector<double> g1(k), g2(k);
        gen.evaluate(smp.t, smp.b, smp.y1, smp.z1, g1);
        gen.evaluate(smp.t, smp.b, smp.y1, smp.z2, g2);
        w.z2 = smp.z2;
        w.lhs = distance(g1, g2);
        w.rhs = lambda_bar * dz;
        return true;
    });
}

namespace {

// Unit directions spanning the ball in R^k for the sup search.
std::vector<std::vector<double>> ball_directions(std::size_t k) {
    std::vector<std::vector<double>> dirs;
    for (std::size_t j = 0; j < k; ++j) {
        for (double sgn : {1.0, -1.0}) {
            std::vector<double> e(k, 0.0);
            e[j] = sgn;
            dirs.push_back(e);
        }
    }
    if (k > 1) {
        const double c = 1.0 / std::sqrt(static_cast<double>(k));
        for (double sgn : {1.0, -1.0}) {
            std::vector<double> diag(k, sgn * c), alt(k);
            for (std::size_t j = 0; j < k; ++j) alt[j] = (j % 2 == 0 ? sgn : -sgn) * c;
            dirs.push_back(diag);
            dirs.push_back(alt);
        }
    }
    return dirs;
}

double growth_estimate(const GeneratorSpec& gen, double alpha, const PathEnsemble& ens, std::size_t paths) {
    const std::size_t k = gen.k;
    const auto dirs = ball_directions(k);
    constexpr int kLevels = 16;
    const std::vector<double> zero_y(k, 0.0), zero_z(k * gen.d, 0.0);
    const std::size_t N = ens.grid().steps();
    std::vector<double> per_path(paths, 0.0);
    parallel::for_chunks(paths, 256, [&](std::size_t, std::size_t begin, std::size_t end) {
        std::vector<double> g0(k), g(k), y(k);
        for (std::size_t m = begin; m < end; ++m) {
            double acc = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                const double t = ens.grid()[i];
                const ConstVec b = ens.state(i, m);
                gen.regular(t, b, zero_y, zero_z, g0);
                double sup = 0.0;
                for (const auto& e : dirs) {
                    for (int l = 1; l <= kLevels; ++l) {
                        const double r = alpha * static_cast<double>(l) / kLevels;
                        for (std::size_t j = 0; j < k; ++j) y[j] = r * e[j];
                        gen.regular(t, b, y, zero_z, g);
                        sup = std::max(sup, distance(g, g0));
                    }
                }
                acc += sup * ens.grid().width(i);
            }
            per_path[m] = acc;
        }
    });
    double s = 0.0;
    for (double v : per_path) s += v;
    return s / static_cast<double>(paths);
}

}  // namespace

ConditionReport check_general_growth(const GeneratorSpec& gen, const std::vector<double>& alphas,
                                     const PathEnsemble& ensemble) {
    require_dims(gen);
    if (alphas.empty()) throw InvalidArgument("general growth check needs at least one alpha");
    if (ensemble.dims() != gen.d) throw InvalidArgument("ensemble dimension does not match the generator");
    const std::size_t paths = std::min<std::size_t>(ensemble.paths(), 2000);
    ConditionReport out;
    out.condition_id = "H3";
    out.box = "ball sup over " + std::to_string(ball_directions(gen.k).size()) +
              " directions x 16 radii; grids refined x1, x2, x4, x8";
    out.note = "refinement-growth gate is a heuristic for an expectation that sampling can only estimate";
    std::vector<EnsemblePtr> refined;
    for (std::size_t f : {2u, 4u, 8u}) {
        refined.push_back(simulate_ensemble(ensemble.grid().refined(f), ensemble.dims(), paths, ensemble.seed()));
    }
    for (double alpha : alphas) {
        if (!(alpha > 0.0)) throw InvalidArgument("growth radius alpha must be positive");
        std::vector<double> est{growth_estimate(gen, alpha, ensemble, paths)};
        for (const auto& e : refined) est.push_back(growth_estimate(gen, alpha, *e, paths));
        out.samples += paths * ensemble.grid().steps() * 15;
        double gate = std::numeric_limits<double>::infinity();
        bool finite = true;
        for (double e : est) finite = finite && std::isfinite(e);
        if (finite) {
            for (std::size_t j = 0; j + 1 < est.size(); ++j) {
                const double inc = est[j + 1] - est[j];
                gate = std::min(gate, est[j] > 0.0 ? inc / (0.1 * est[j]) : (inc > 0.0 ? gate : 0.0));
                if (j + 2 < est.size()) {
                    const double inc2 = est[j + 2] - est[j + 1];
                    gate = std::min(gate, inc > 0.0 ? inc2 / (0.5 * inc) : 0.0);
                }
            }
        }
        std::string trail;
        for (double e : est) trail += (trail.empty() ? "" : ", ") + fmt(e);
        out.metrics.emplace_back("alpha=" + fmt(alpha), est.front());
        out.metrics.emplace_back("alpha=" + fmt(alpha) + " finest", est.back());
        const double slack = gate - 1.0;
        out.max_slack = std::max(out.max_slack, slack);
        if (slack > kSlackTolerance) {
            ++out.violation_count;
            Witness w;
            w.t = ensemble.grid().horizon();
            w.y1 = {alpha};
            w.lhs = gate;
            w.rhs = 1.0;
            w.note = "alpha = " + fmt(alpha) + ": estimates grow under refinement: " + trail;
            if (out.violations.size() < kMaxWitnesses) out.violations.push_back(std::move(w));
        }
    }
    out.passed = out.violation_count == 0;
    return out;
}

ConditionReport check_integrability(const TerminalSpec& xi, const GeneratorSpec& gen, double p,
                                    const PathEnsemble& ensemble) {
    require_dims(gen);
    xi.validate();
    if (!(p > 1.0)) throw InvalidArgument("integrability order must be > 1");
    if (ensemble.dims() != gen.d || xi.k != gen.k) throw InvalidArgument("dimension mismatch in integrability check");

    auto terms = [&](const PathEnsemble& ens) {
        const std::size_t M = ens.paths();
        const std::size_t N = ens.grid().steps();
        const std::size_t k = gen.k;
        std::vector<double> out(M);
        parallel::for_chunks(M, 1024, [&](std::size_t, std::size_t begin, std::size_t end) {
            std::vector<double> v(k), g(k), f(k);
            const std::vector<double> zy(k, 0.0), zz(k * gen.d, 0.0);
            for (std::size_t m = begin; m < end; ++m) {
                xi.eval(ens.state(N, m), PathRef{&ens, m}, v);
                double integral = 0.0;
                for (std::size_t i = 0; i < N; ++i) {
                    gen.regular(ens.grid()[i], ens.state(i, m), zy, zz, g);
                    integral += frobenius(g) * ens.grid().width(i);
                    if (gen.singular_forcing) {
                        gen.singular_forcing->cell_integral(ens.grid()[i], ens.grid()[i + 1], f);
                        integral += frobenius(f);
                    }
                }
                out[m] = std::pow(frobenius(v), p) + std::pow(integral, p);
            }
        });
        return out;
    };

    ConditionReport out;
    out.condition_id = "H5";
    out.box = "E[|xi|^p + (int |g(t,0,0)| dt)^p] over " + std::to_string(ensemble.paths()) + " paths";
    out.note = "finiteness gate (largest-term share, nested-prefix growth, grid refinement) is a heuristic";
    const std::vector<double> base = terms(ensemble);
    out.samples = base.size();
    const MeanEstimate est = bootstrap_mean(base, ensemble.seed());
    double total = 0.0, largest = 0.0;
    for (double v : base) {
        total += v;
        largest = std::max(largest, v);
    }
    const double share = total > 0.0 ? largest / total : 0.0;

    // Nested prefixes M/8, M/4, M/2, M in path order.
    double growth = std::numeric_limits<double>::infinity();
    double prev = -1.0;
    for (std::size_t div : {8u, 4u, 2u, 1u}) {
        const std::size_t n = std::max<std::size_t>(1, base.size() / div);
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += base[i];
        const double mean = s / static_cast<double>(n);
        if (prev >= 0.0) growth = std::min(growth, prev > 0.0 ? mean / (1.1 * prev) : 0.0);
        prev = mean;
    }

    const auto fine_ens = simulate_ensemble(ensemble.grid().refined(2), ensemble.dims(), ensemble.paths(),
                                            ensemble.seed() ^ 0x5bd1e995ull);
    const MeanEstimate fine = bootstrap_mean(terms(*fine_ens), ensemble.seed());
    const double refinement = fine.mean / (1.1 * est.mean + 3.0 * (est.stderr + fine.stderr) + 1e-300);

    out.metrics = {{"estimate", est.mean},     {"stderr", est.stderr},         {"largest_share", share},
                   {"prefix_growth", growth},  {"refined_estimate", fine.mean}};
    double gate = std::max({share / 0.05, growth, refinement});
    if (!std::isfinite(est.mean) || !std::isfinite(fine.mean)) gate = std::numeric_limits<double>::infinity();
    out.max_slack = gate - 1.0;
    if (out.max_slack > kSlackTolerance) {
        out.violation_count = 1;
        Witness w;
        w.t = ensemble.grid().horizon();
        w.lhs = gate;
        w.rhs = 1.0;
        w.note = "estimate " + fmt(est.mean) + ", largest-term share " + fmt(share) + ", prefix growth " +
                 fmt(growth) + ", refined estimate " + fmt(fine.mean);
        out.violations.push_back(std::move(w));
    }
    out.passed = out.violation_count == 0;
    return out;
}

ConditionReport check_A1(const GeneratorSpec& gen, double mu, double lambda, const ProcessSpec& f,
                         const ProcessSpec& phi, double p, const SamplerSpec& s) {
    require_dims(gen);
    if (!(p > 0.0)) throw InvalidArgument("A1 order must be positive");
    const std::size_t k = gen.k;
    return run_sampled("A1", s, k, gen.d, [&](const Sample& smp, Witness& w) {
        std::vector<double> g(k);
        gen.evaluate(smp.t, smp.b, smp.y1, smp.z1, g);
        const double ny = frobenius(smp.y1);
        const double nz = frobenius(smp.z1);
        w.lhs = dot(smp.y1, g);
        w.rhs = mu * ny * ny + lambda * ny * nz + ny * f.value(smp.t, smp.b) + phi.value(smp.t, smp.b);
        return true;
    });
}

ConditionReport check_A2(const GeneratorSpec& gen, const ModulusFn& psi, double lambda, const ProcessSpec& f, double p,
                         const SamplerSpec& s) {
    require_dims(gen);
    if (!(p > 1.0)) throw InvalidArgument("A2 order must be > 1");
    const std::size_t k = gen.k;
    return run_sampled("A2", s, k, gen.d, [&](const Sample& smp, Witness& w) {
        const double ny = frobenius(smp.y1);
        if (ny == 0.0) return false;
        std::vector<double> g(k);
        gen.evaluate(smp.t, smp.b, smp.y1, smp.z1, g);
        const double nz = frobenius(smp.z1);
        const double w1 = std::pow(ny, p - 1.0);
        w.lhs = w1 * dot(smp.y1, g) / ny;
        w.rhs = psi(std::pow(ny, p)) + lambda * w1 * nz + w1 * f.value(smp.t, smp.b);
        return true;
    });
}

ConditionReport check_ordering(const GeneratorSpec& g, const GeneratorSpec& g_prime, const SamplerSpec& s) {
    require_dims(g);
    require_dims(g_prime);
    if (g.k != 1 || g_prime.k != 1) throw InvalidArgument("generator ordering is checked for k = 1 only");
    if (g.d != g_prime.d) throw InvalidArgument("ordered generators have different Brownian dimensions");
    return run_sampled("ordering", s, 1, g.d, [&](const Sample& smp, Witness& w) {
        double a = 0.0, b = 0.0;
        g.evaluate(smp.t, smp.b, smp.y1, smp.z1, MutVec(&a, 1));
        g_prime.evaluate(smp.t, smp.b, smp.y1, smp.z1, MutVec(&b, 1));
        w.lhs = a;
        w.rhs = b;
        return true;
    });
}

std::vector<ConditionReport> check_claims(const GeneratorSpec& gen, const SamplerSpec& s) {
    std::vector<ConditionReport> out;
    const double p = gen.order.value_or(2.0);
    auto need_rho = [&](Condition c) -> const ModulusFn& {
        if (!gen.modulus) {
            throw InvalidArgument(std::string("generator '") + gen.name + "' claims " + to_string(c) +
                                  " but declares no modulus");
        }
        return *gen.modulus;
    };
    for (Condition c : gen.claimed_conditions) {
        switch (c) {
        case Condition::h1:
            out.push_back(check_weak_monotonicity(gen, need_rho(c), p, s));
            break;
        case Condition::h1a:
            out.push_back(check_one_sided(gen, need_rho(c), p, OneSidedVariant::mao, s));
            break;
        case Condition::h1b:
            out.push_back(check_one_sided(gen, need_rho(c), p, OneSidedVariant::constantin, s));
            break;
        case Condition::h1star:
            out.push_back(check_one_sided(gen, need_rho(c), p, OneSidedVariant::osgood, s));
            break;
        case Condition::h1prime:
            out.push_back(check_two_sided(gen, need_rho(c), p, TwoSidedVariant::h1prime, s));
            break;
        case Condition::h1a_prime:
            out.push_back(check_two_sided(gen, need_rho(c), p, TwoSidedVariant::mao_prime, s));
            break;
        case Condition::h1b_prime:
            out.push_back(check_two_sided(gen, need_rho(c), p, TwoSidedVariant::constantin_prime, s));
            break;
        case Condition::h1star_prime:
            out.push_back(check_two_sided(gen, need_rho(c), p, TwoSidedVariant::osgood_prime, s));
            break;
        case Condition::h2:
            out.push_back(check_continuity_y(gen, s));
            break;
        case Condition::h4:
            if (!gen.lipschitz_z) {
                throw InvalidArgument("generator '" + gen.name + "' claims H4 but declares no Lipschitz constant");
            }
            out.push_back(check_lipschitz_z(gen, *gen.lipschitz_z, s));
            break;
        case Condition::h3:
        case Condition::h5:
        case Condition::a1:
        case Condition::a2:
            break;
        }
    }
    return out;
}

}  // namespace bsde
