#pragma once

#include "bsdelab/conditions.hpp"
#include "bsdelab/model.hpp"
#include "bsdelab/modulus.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bsde {

/// Upper BDG constant for E sup|M|^q <= C E <M>^{q/2}, q in (0, 2]:
/// 4 sqrt(2/q). Other exponents need an explicit configuration.
double default_bdg_constant(double q);

struct ConstantLedger {
    double p = 2.0;
    double mu = 0.0;
    double lambda = 0.0;
    double T = 1.0;
    /// From (a+b)^{p/2} <= 2^p (a^{p/2} + b^{p/2}).
    double c_p_power = 4.0;

    /// Drift bound chain with q = p/2: c_p = n_q 4^q, n_q = 4^{max(q-1,0)};
    /// d_p = c_p * bdg(q).
    double bdg_prop2 = 0.0;
    double c_p = 0.0;
    double d_p = 0.0;
    double C_mu_lambda_p_T = 0.0;  // 2 c_p [(mu + lambda^2) T + 1]^{p/2} + d_p^2
    double C_p = 0.0;              // 2 c_p

    /// Entries that need p > 1.
    std::optional<double> c_of_p;      // p [(p-1) ^ 1] / 2
    std::optional<double> d_lambda_p;  // p lambda^2 / [(p-1) ^ 1]
    std::optional<double> bdg_prop3;   // exponent 1
    std::optional<double> k_p;         // 2 p bdg(1)
    std::optional<double> k1_p;        // 2 + k_p^2 / c(p)
    std::optional<double> k2_p;        // Young split of p k' a^{p-1} F
    std::optional<double> C_lambda_p_T;  // e^{2 k' d T} max(2k', 2pk', k'')

    bool bdg_configured = false;
};

/// Throws InvalidArgument for p <= 0, negative mu or lambda, or T <= 0.
ConstantLedger constant_ledger(double p, double mu, double lambda, double T,
                               std::optional<double> bdg_constant = std::nullopt);

struct EstimateReport {
    double lhs = 0.0;
    double lhs_stderr = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;  // lhs / rhs, 0 when both vanish
    bool passed = false;
    ConstantLedger constants;
    std::vector<std::pair<std::string, double>> terms;
};

struct A1Bounds {
    double mu = 0.0;
    double lambda = 0.0;
    ProcessSpec f;
    ProcessSpec phi;
};

/// Unconditional form (u = 0) at node t_index.
EstimateReport verify_prop2(const DiscreteSolution& sol, const A1Bounds& bounds, double p, std::size_t t_index = 0,
                            std::optional<double> bdg_constant = std::nullopt);

EstimateReport verify_prop3(const DiscreteSolution& sol, const ModulusFn& psi, double lambda, const ProcessSpec& f,
                            double p, std::size_t t_index = 0, std::optional<double> bdg_constant = std::nullopt);

}  // namespace bsde
