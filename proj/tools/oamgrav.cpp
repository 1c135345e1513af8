#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cli/commands.hpp"

int main(int argc, char** argv) {
    using namespace oamgrav::cli;

    CLI::App app{"Two-photon OAM entanglement under stochastic metric fluctuations"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    Invocation inv;
    std::uint64_t seed = 0;
    const auto add = [&](const std::string& name, const std::string& help) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", inv.config_path, "experiment config (JSON)")->required();
        sub->add_option("--out", inv.out_dir, "output directory (overrides output_dir)");
        sub->add_option("--seed", seed, "base seed (overrides monte_carlo.base_seed)");
        return sub;
    };
    add("modes", "sample one LG mode on a transverse grid");
    add("lsymbols", "dump the L-symbol matrix for a fixed metric perturbation");
    add("evolve", "analytic evolution of the maximally entangled state over the sweep");
    add("metrics", "purity and negativity over the sweep for every dimension");
    add("reproduce", "figure data: purity, negativity, density_matrix or decay_table")
        ->add_option("--figure", inv.figure, "figure key")
        ->required()
        ->check(CLI::IsMember({"purity", "negativity", "density_matrix", "decay_table"}));
    add("montecarlo", "ensemble simulation compared against the decay law");
    add("decay-distance", "1/e negativity distances for every dimension");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    inv.command = app.get_subcommands().front()->get_name();
    if (app.get_subcommands().front()->count("--seed")) inv.seed = seed;
    return run_command(inv, std::cerr);
}
