#include "bsdelab/estimates.hpp"

#include "bsdelab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bsde {

namespace {

void require_process(const ProcessSpec& f, const char* what) {
    if (!f.regular) throw InvalidArgument(std::string("estimate bound '") + what + "' is missing");
    if (f.singular && !f.singular_integral) {
        throw InvalidArgument(std::string("estimate bound '") + what + "' has a singular part without integral");
    }
}

/// Per-path integral of the process over cells t_index..N-1.
std::vector<double> path_integrals(const DiscreteSolution& sol, const ProcessSpec& f, std::size_t from) {
    const PathEnsemble& ens = *sol.ensemble();
    const TimeGrid& grid = ens.grid();
    std::vector<double> out(ens.paths(), 0.0);
    for (std::size_t m = 0; m < ens.paths(); ++m) {
        double s = 0.0;
        for (std::size_t i = from; i < grid.steps(); ++i) s += f.cell_integral(grid[i], grid[i + 1], ens.state(i, m));
        out[m] = s;
    }
    return out;
}

double mean_of_power(const std::vector<double>& v, double q) {
    double s = 0.0;
    for (double x : v) s += std::pow(x, q);
    return s / static_cast<double>(v.size());
}

double ratio_of(double lhs, double rhs) {
    if (rhs > 0.0) return lhs / rhs;
    return lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

void check_index(const DiscreteSolution& sol, std::size_t t_index) {
    if (t_index > sol.steps()) throw InvalidArgument("estimate time index is past the horizon");
}

}  // namespace

double default_bdg_constant(double q) {
    if (!(q > 0.0 && q <= 2.0)) {
        throw InvalidArgument("the default BDG constant covers exponents in (0, 2]; configure one for q = " +
                              std::to_string(q));
    }
    return 4.0 * std::sqrt(2.0 / q);
}

ConstantLedger constant_ledger(double p, double mu, double lambda, double T, std::optional<double> bdg_constant) {
    if (!(p > 0.0) || !std::isfinite(p)) throw InvalidArgument("ledger needs p > 0");
    if (!(mu >= 0.0) || !(lambda >= 0.0)) throw InvalidArgument("ledger needs mu, lambda >= 0");
    if (!(T > 0.0) || !std::isfinite(T)) throw InvalidArgument("ledger needs T > 0");
    if (bdg_constant && !(*bdg_constant > 0.0)) throw InvalidArgument("configured BDG constant must be positive");

    ConstantLedger L;
    L.p = p;
    L.mu = mu;
    L.lambda = lambda;
    L.T = T;
    L.bdg_configured = bdg_constant.has_value();
    L.c_p_power = std::pow(2.0, p);

    const double q = 0.5 * p;
    L.bdg_prop2 = bdg_constant ? *bdg_constant : default_bdg_constant(q);
    L.c_p = std::pow(4.0, std::max(q - 1.0, 0.0)) * std::pow(4.0, q);
    L.d_p = L.c_p * L.bdg_prop2;
    L.C_mu_lambda_p_T = 2.0 * L.c_p * std::pow((mu + lambda * lambda) * T + 1.0, q) + L.d_p * L.d_p;
    L.C_p = 2.0 * L.c_p;

    if (p > 1.0) {
        const double w = std::min(p - 1.0, 1.0);
        L.c_of_p = p * w / 2.0;
        L.d_lambda_p = p * lambda * lambda / w;
        L.bdg_prop3 = bdg_constant ? *bdg_constant : default_bdg_constant(1.0);
        L.k_p = 2.0 * p * *L.bdg_prop3;
        L.k1_p = 2.0 + *L.k_p * *L.k_p / *L.c_of_p;
        const double r = p / (p - 1.0);
        const double eps = std::pow(r / 2.0, 1.0 / r);
        L.k2_p = 2.0 * std::pow(p * *L.k1_p / eps, p) / p;
        const double k1 = *L.k1_p;
        L.C_lambda_p_T = std::exp(2.0 * k1 * *L.d_lambda_p * T) * std::max({2.0 * k1, 2.0 * p * k1, *L.k2_p});
    }
    return L;
}

EstimateReport verify_prop2(const DiscreteSolution& sol, const A1Bounds& bounds, double p, std::size_t t_index,
                            std::optional<double> bdg_constant) {
    require_process(bounds.f, "f");
    require_process(bounds.phi, "phi");
    check_index(sol, t_index);

    EstimateReport rep;
    rep.constants = constant_ledger(p, bounds.mu, bounds.lambda, sol.grid().horizon(), bdg_constant);
    const MeanEstimate lhs = bootstrap_mean(path_quadratic_power(sol, p, t_index), sol.ensemble()->seed());
    const double sup_y = mean_of_power(path_sup_power(sol, p, t_index), 1.0);
    const double f_term = mean_of_power(path_integrals(sol, bounds.f, t_index), p);
    const double phi_term = mean_of_power(path_integrals(sol, bounds.phi, t_index), 0.5 * p);

    rep.lhs = lhs.mean;
    rep.lhs_stderr = lhs.stderr;
    rep.rhs = rep.constants.C_mu_lambda_p_T * sup_y + rep.constants.C_p * f_term + rep.constants.C_p * phi_term;
    rep.terms = {{"E sup|y|^p", sup_y}, {"E (int f)^p", f_term}, {"E (int phi)^{p/2}", phi_term}};
    rep.ratio = ratio_of(rep.lhs, rep.rhs);
    rep.passed = rep.lhs <= rep.rhs;
    return rep;
}

EstimateReport verify_prop3(const DiscreteSolution& sol, const ModulusFn& psi, double lambda, const ProcessSpec& f,
                            double p, std::size_t t_index, std::optional<double> bdg_constant) {
    if (!(p > 1.0)) throw InvalidArgument("the sup estimate needs p > 1");
    require_process(f, "f");
    check_index(sol, t_index);

    EstimateReport rep;
    rep.constants = constant_ledger(p, 0.0, lambda, sol.grid().horizon(), bdg_constant);
    const MeanEstimate lhs = bootstrap_mean(path_sup_power(sol, p, t_index), sol.ensemble()->seed());

    const std::size_t N = sol.steps();
    const std::size_t M = sol.paths();
    const auto node_moment = [&](std::size_t node) {
        double s = 0.0;
        for (std::size_t m = 0; m < M; ++m) s += std::pow(frobenius(sol.y(node, m)), p);
        return s / static_cast<double>(M);
    };
    const double xi_term = node_moment(N);
    double psi_term = 0.0;
    double prev = psi(node_moment(t_index));
    for (std::size_t i = t_index; i < N; ++i) {
        const double cur = psi(node_moment(i + 1));
        psi_term += 0.5 * (prev + cur) * sol.grid().width(i);
        prev = cur;
    }
    const double f_term = mean_of_power(path_integrals(sol, f, t_index), p);

    rep.lhs = lhs.mean;
    rep.lhs_stderr = lhs.stderr;
    rep.rhs = *rep.constants.C_lambda_p_T * (xi_term + psi_term + f_term);
    rep.terms = {{"E|xi|^p", xi_term}, {"int psi(E|y|^p)", psi_term}, {"E (int f)^p", f_term}};
    rep.ratio = ratio_of(rep.lhs, rep.rhs);
    rep.passed = rep.lhs <= rep.rhs;
    return rep;
}

}  // namespace bsde
