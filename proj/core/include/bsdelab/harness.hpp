#pragma once

#include "bsdelab/model.hpp"
#include "bsdelab/solver.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bsde {

enum class ExperimentKind { uniqueness, stability, comparison, convergence, truncation };

const char* to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

/// A terminal/generator pair with a free-form descriptor for the manifest.
struct Problem {
    std::string label;
    std::string descriptor;
    GeneratorSpec gen;
    TerminalSpec xi;
};

struct EnsembleSpec {
    double T = 1.0;
    std::size_t steps = 32;
    std::size_t paths = 10000;
    std::size_t d = 1;
    std::uint64_t seed = 1;
    bool antithetic = false;  // paths are doubled by negation

    EnsemblePtr build() const;
    bool operator==(const EnsembleSpec&) const = default;
};

struct TolerancePolicy {
    double sigma = 3.0;             // floors are sigma x stderr
    double abs_floor = 0.0;         // added to uniqueness floors
    double violation_fraction = 1e-3;
    double stability_ratio = 0.05;
    double target_error = 1e-3;     // convergence finest-stage tolerance on Y0
    double z_target_error = 0.05;   // same for the node means of Z
};

/// One arm of a uniqueness experiment; unset fields fall back to the manifest.
struct Variant {
    std::string label;
    std::optional<EnsembleSpec> ensemble;
    std::optional<SchemeSpec> scheme;
    std::optional<Problem> problem;
};

/// Additive perturbation xi + eps eta, g + eps gamma(t, b); both leave the
/// modulus and the Lipschitz constant of g unchanged.
struct Perturbation {
    std::string descriptor;
    std::function<void(ConstVec b_terminal, const PathRef& path, MutVec out)> eta;  // may be empty
    std::function<void(double t, ConstVec b, MutVec out)> gamma;                  // may be empty
};

/// Where g <= g' is sample-checked: on the whole sampler box, or along one
/// computed solution.
enum class ComparisonHypothesis { everywhere, along_primed, along_unprimed };

const char* to_string(ComparisonHypothesis h);
ComparisonHypothesis comparison_hypothesis_from_string(const std::string& s);

struct ExperimentManifest {
    ExperimentKind kind = ExperimentKind::uniqueness;
    std::string name;
    /// uniqueness/stability/convergence/truncation use problems[0];
    /// comparison uses problems[0] (unprimed) and problems[1] (primed).
    std::vector<Problem> problems;
    EnsembleSpec ensemble;
    SchemeSpec scheme;
    double p = 2.0;
    TolerancePolicy tolerance;

    std::vector<Variant> variants;                          // uniqueness
    std::vector<double> epsilons;                           // stability
    Perturbation perturbation;                              // stability
    ComparisonHypothesis hypothesis = ComparisonHypothesis::everywhere;
    std::size_t ordering_samples = 10000;                   // everywhere sampler size
    std::vector<std::pair<std::size_t, std::size_t>> refinement;  // convergence (N, M)
    std::optional<double> exact_y0;
    std::optional<double> exact_z;
    std::vector<double> truncation_levels;                  // truncation
    /// Levels at or above this bound must give bit-identical solutions.
    std::optional<double> truncation_bound;
};

/// Cells are preformatted so tables are byte-stable.
struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row);
    void write_csv(std::ostream& os) const;
};

struct Gate {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct ExperimentResult {
    std::string kind;
    std::vector<Table> tables;
    std::vector<Gate> gates;
    double wall_seconds = 0.0;

    bool passed() const;
    const Table& table(const std::string& name) const;
    const Gate& gate(const std::string& name) const;
};

ExperimentResult run_uniqueness(const ExperimentManifest& m);
ExperimentResult run_stability(const ExperimentManifest& m);
ExperimentResult run_comparison(const ExperimentManifest& m);
ExperimentResult run_convergence(const ExperimentManifest& m);
ExperimentResult run_truncation(const ExperimentManifest& m);
ExperimentResult run_experiment(const ExperimentManifest& m);

/// (xi + eps eta, g + eps gamma) with the base metadata carried over.
Problem perturb(const Problem& base, const Perturbation& pert, double eps);

/// Per-node stderr of the paired difference a - b, first component.
std::vector<double> paired_stderr(const DiscreteSolution& a, const DiscreteSolution& b);

}  // namespace bsde
