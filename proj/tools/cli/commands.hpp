#pragma once

#include "json_reader.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace bsde::cli {

/// Exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitGateFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

inline constexpr const char* kOutdirEnv = "BSDELAB_OUTDIR";

struct GlobalOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> outdir;
    std::optional<unsigned> threads;
    std::optional<std::string> label;
};

/// Loads the config, folds in flag overrides, runs the subcommand and maps
/// errors to exit statuses. Diagnostics go to err.
int run(const std::string& command, const GlobalOptions& opt, std::ostream& out, std::ostream& err);

/// Subcommands on an already loaded config (overrides applied).
int cmd_solve(const json& cfg, const GlobalOptions& opt, std::ostream& out);
int cmd_check(const json& cfg, const GlobalOptions& opt, std::ostream& out);
int cmd_experiment(const json& cfg, const GlobalOptions& opt, std::ostream& out);
int cmd_modulus(const json& cfg, const GlobalOptions& opt, std::ostream& out);

/// <outdir>/<experiment>/<label or UTC timestamp>, with tables/ created.
std::filesystem::path prepare_run_dir(const json& cfg, const GlobalOptions& opt, const std::string& experiment);

}  // namespace bsde::cli
