#include "commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"bsdelab: BSDE solver and condition lab"};
    app.require_subcommand(1);

    bsde::cli::GlobalOptions opt;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::string outdir, label;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "JSON run config")->required();
        sub->add_option("--seed", seed, "override numeric.seed");
        sub->add_option("--outdir", outdir, "output root (default $BSDELAB_OUTDIR or ./bsdelab-out)");
        sub->add_option("--threads", threads, "worker cap; results do not depend on it")->check(CLI::PositiveNumber);
        sub->add_option("--label", label, "run directory name (default UTC timestamp)");
    };
    add_common(app.add_subcommand("solve", "solve one BSDE and write the solution tables"));
    add_common(app.add_subcommand("check", "run condition samplers on a generator"));
    add_common(app.add_subcommand("experiment", "run a uniqueness/stability/comparison/convergence/truncation manifest"));
    add_common(app.add_subcommand("modulus", "classify, transform and bound moduli"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : bsde::cli::kExitUsage;
    }

    const CLI::App* sub = app.get_subcommands().front();
    if (sub->count("--seed")) opt.seed = seed;
    if (sub->count("--threads")) opt.threads = threads;
    if (sub->count("--outdir")) opt.outdir = outdir;
    if (sub->count("--label")) opt.label = label;
    return bsde::cli::run(sub->get_name(), opt, std::cout, std::cerr);
}
