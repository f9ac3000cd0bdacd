#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "levylab/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"levy-lab: executable criteria and simulations for Levy "
                 "measures on sequence and grid L^p spaces"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;

    const char* commands[] = {"check",      "simulate",   "verify-novikov",
                              "verify-umd", "gamma-norm", "converge",
                              "criteria-matrix"};
    for (const char* name : commands) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "experiment config (TOML)")
            ->required();
        sub->add_option("--seed", seed, "override the config seed");
        sub->add_option("--out", out_dir, "output directory");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        const std::string command = app.get_subcommands().front()->get_name();
        const levylab::ExperimentConfig cfg =
            levylab::ExperimentConfig::load(config_path, seed, out_dir);
        return levylab::run_command(command, cfg);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
