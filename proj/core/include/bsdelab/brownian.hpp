#pragma once

#include "bsdelab/model.hpp"

#include <cstdint>
#include <string>

namespace bsde {

/// Brownian ensemble with draws keyed on (seed, path, cell, dim); the fill
/// order and thread count never change the values.
EnsemblePtr simulate_ensemble(const TimeGrid& grid, std::size_t d, std::size_t M, std::uint64_t seed);

/// 2M paths: path M+m is the negation of path m.
EnsemblePtr antithetic_pairing(const PathEnsemble& ensemble);

/// Flat little-endian dump:
///   "BSDEPATH" | u32 version=1 | u32 d | u64 M | u64 N | u64 seed
///   | f64 nodes[N+1] | f64 values[(N+1) * M * d] (node-major)
void export_ensemble(const PathEnsemble& ensemble, const std::string& path);
EnsemblePtr import_ensemble(const std::string& path);

}  // namespace bsde
