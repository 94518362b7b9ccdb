#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "clab/cli.hpp"
#include "clab/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"consensus-lab: a laboratory for decentralized training dynamics"};
    app.require_subcommand(1);

    std::string run_config;
    CLI::App* run = app.add_subcommand("run", "execute one experiment from a config file");
    run->add_option("config", run_config, "path to a key=value config file")->required();

    std::string suite;
    uint64_t seed = 42;
    CLI::App* verify = app.add_subcommand("verify", "run a built-in verification suite");
    verify->add_option("suite", suite, "theorem1 | lemma_c2 | smoothing | props | all")
        ->required();
    verify->add_option("--seed", seed, "base seed for the suite (default 42)");

    std::string kind;
    int m = 0;
    CLI::App* topo =
        app.add_subcommand("topology-info", "print gossip matrix diagnostics as JSON");
    topo->add_option("kind", kind, "ring | grid | exponential | fully_connected | star")
        ->required();
    topo->add_option("m", m, "number of workers")->required();

    std::string sweep_config, axis;
    CLI::App* sweep = app.add_subcommand("sweep", "run one experiment per axis value");
    sweep->add_option("config", sweep_config, "path to the base config file")->required();
    sweep->add_option("--axis", axis, "key=v1,v2,... list of config overrides")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return clab::cli::cmd_run(run_config);
        if (verify->parsed()) return clab::cli::cmd_verify(suite, seed);
        if (topo->parsed()) return clab::cli::cmd_topology_info(kind, m);
        if (sweep->parsed()) return clab::cli::cmd_sweep(sweep_config, axis);
    } catch (const clab::DivergenceError& e) {
        std::cerr << "diverged: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
