#pragma once

#include "json_reader.hpp"

#include "bsdelab/conditions.hpp"
#include "bsdelab/generators.hpp"
#include "bsdelab/harness.hpp"
#include "bsdelab/modulus.hpp"
#include "bsdelab/solver.hpp"

#include <string>

namespace bsde::cli {

/// {"family": "linear" | "log_osgood" | "power" | "tabulated" | "h", ...}
ModulusFn read_modulus(Reader r);
json modulus_to_json(const ModulusFn& rho);

/// f = constant + brownian_norm |B_t| + inverse_cube_root t^{-1/3}.
ProcessSpec read_process(Reader r);

/// {"name": ..., "params": {...}}; d is the Brownian dimension.
GeneratorSpec read_generator(Reader r, std::size_t d);
TerminalSpec read_terminal(Reader r, std::size_t d, double p);

HFunctionParams read_h_params(Reader& r);

/// {"generator": ..., "terminal": ..., "p": 2}
Problem read_problem(Reader r, std::size_t d, const std::string& label);

SchemeSpec read_scheme(Reader r);
EnsembleSpec read_ensemble(Reader& r);
TolerancePolicy read_tolerance(Reader r);

}  // namespace bsde::cli
