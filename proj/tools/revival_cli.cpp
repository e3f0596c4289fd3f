// Command-line front end. Exit status: 0 when every verdict passes, 1 when
// a verdict fails, 2 for invalid configuration, 3 for numerical failures.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "revival/cli.hpp"

namespace {

constexpr int exit_verdict = 1;
constexpr int exit_config = 2;
constexpr int exit_numerical = 3;

void print_verdicts(const revival::cli::RunResult& r) {
    for (const auto& v : r.verdicts) {
        std::cout << (v.pass ? "PASS  " : "FAIL  ") << v.name << ": " << revival::io::num(v.value) << ' ' << v.relation
                  << ' ' << revival::io::num(v.limit);
        if (!v.detail.empty()) std::cout << "  (" << v.detail << ')';
        std::cout << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Periodic Schroedinger spectra, spectral evolution and revival diagnostics"};
    app.require_subcommand(1, 1);
    app.fallthrough();

    std::string config_path, out_dir;
    int n_eigs = 0, grid_points = 0;
    bool paper_scale = false, no_plots = false;
    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory (overrides the config)");
    auto* o_n = app.add_option("--n-eigs", n_eigs, "number of eigenpairs N")->check(CLI::PositiveNumber);
    auto* o_g = app.add_option("--grid-points", grid_points, "spatial grid size")->check(CLI::Range(64, 100000000));
    app.add_flag("--paper-scale", paper_scale, "N = 1000 and a grid spacing of 0.0005 pi")->excludes(o_n)->excludes(o_g);
    app.add_flag("--no-plots", no_plots, "skip SVG output");

    const char* names[] = {"spectrum", "evolve", "revival", "asymptotics", "verify"};
    const char* help[] = {"periodic, semi-periodic and Dirichlet spectra with root counts",
                          "spectral solution at the configured times",
                          "revival decomposition u = w + psi_rev with jump diagnostics",
                          "eigenvalue, eigenfunction and fundamental-solution asymptotics",
                          "all of the above with their verdicts"};
    for (int i = 0; i < 5; ++i) app.add_subcommand(names[i], help[i]);

    CLI11_PARSE(app, argc, argv);

    using namespace revival::cli;
    RunConfig cfg;
    try {
        if (!config_path.empty()) cfg = load_config(config_path);
        cfg.command = parse_command(app.get_subcommands().front()->get_name());
        if (paper_scale) {
            cfg.n_eigs = 1000;
            cfg.n_points = 4000;
        }
        if (n_eigs > 0) cfg.n_eigs = n_eigs;
        if (grid_points > 0) cfg.n_points = grid_points;
        if (!out_dir.empty()) cfg.output = out_dir;
        if (no_plots) cfg.plots = false;
        validate(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    }

    try {
        const auto result = execute(cfg);
        write_result(result, cfg.output);
        print_verdicts(result);
        std::cout << "wrote " << result.artifacts.size() + 1 << " files to " << cfg.output << " in "
                  << revival::io::fixed(result.manifest["wall_time_seconds"].get<double>(), 2) << " s\n";
        return result.pass() ? 0 : exit_verdict;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const revival::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_numerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_numerical;
    }
}
