// Command-line front end: kswitten <command> --config <path> [--out <dir>] [--jobs <n>]

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "kswitten/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Metastable spectral analysis of 1-d drift-diffusion potentials"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int jobs = 1;

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"analyze", "locate critical points, validate hypotheses, report the well decomposition"},
        {"spectrum", "low-lying Witten eigenvalues per h with Eyring-Kramers ratio columns"},
        {"reduce", "reduced matrices L0/A0 with eigen-data and kernel vector"},
        {"evolve", "heat-flow evolution vs the reduced model, one CSV per h"},
        {"sweep", "full convergence study across h with report and plot script"},
        {"graph", "weighted graph Laplacian from the config's graph block"},
    };
    for (const auto& [name, desc] : commands) {
        auto* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", config_path, "experiment config (JSON)")->required();
        sub->add_option("--out", out_dir, "output directory (overrides config)");
        sub->add_option("--jobs", jobs, "max concurrent h values")->check(CLI::PositiveNumber);
    }

    CLI11_PARSE(app, argc, argv);

    const std::string command = app.get_subcommands().front()->get_name();
    return ksw::cli_run(command, config_path, out_dir, jobs, std::cerr);
}
