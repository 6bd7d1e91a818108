#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "infharm/config.hpp"
#include "infharm/exceptions.hpp"
#include "infharm/run.hpp"

namespace {

// Command line settings are collected as key=value pairs so that the config
// file and the flags go through the same parser; flags win over the file.
struct FlagSet {
    std::string config_file;
    std::vector<std::pair<std::string, std::string>> overrides;
};

void add_common_flags(CLI::App* cmd, FlagSet& flags) {
    cmd->add_option("--config", flags.config_file, "key=value config file");
    auto bind = [cmd, &flags](const std::string& flag, const std::string& key,
                              const std::string& help) {
        cmd->add_option_function<std::string>(
            flag,
            [&flags, key](const std::string& value) { flags.overrides.emplace_back(key, value); },
            help);
    };
    bind("--experiment", "experiment", "mixed2d, mixed3d, rank1, triple, box or custom");
    bind("--mesh-m", "mesh_m", "grid subdivisions per side");
    bind("--output-dir", "output_dir", "artifact directory");
    bind("--emit", "emit", "comma list drawn from csv,vtk,svg,checkpoints");
    bind("--smoothed-box", "smoothed_box", "true/false: continuous box parametrisation");
    bind("--custom-boundary", "custom_boundary_file", "table file for the custom experiment");
    bind("--schedule", "schedule_mode", "geometric, plusone or explicit");
    bind("--p-max", "p_max", "largest exponent of the generated schedule");
    bind("--p-schedule", "p_schedule", "explicit comma list of exponents (implies explicit mode)");
    bind("--newton-tol", "newton_tol", "relative residual reduction target");
    bind("--newton-max-iter", "newton_max_iter", "iteration cap per exponent");
    bind("--linear-tol", "linear_tol", "inner linear solve tolerance");
    bind("--epsilon", "epsilon", "gradient norm regularization");
    bind("--tau", "tau", "relative rank threshold");
    bind("--quad-tol", "quad_tol", "quadrature tolerance for boundary data");
    bind("--contour-levels", "contour_levels", "comma list of contour levels");
}

infharm::RunConfig resolve(const FlagSet& flags) {
    infharm::RunConfig config;
    if (!flags.config_file.empty()) infharm::load_config_file(config, flags.config_file);
    for (const auto& [key, value] : flags.overrides) infharm::apply_setting(config, key, value);
    return config;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite element laboratory for p-harmonic relaxation of vector maps"};
    app.require_subcommand(1);

    FlagSet solve_flags;
    CLI::App* solve = app.add_subcommand("solve", "run the continuation and write artifacts");
    add_common_flags(solve, solve_flags);

    FlagSet analyze_flags;
    CLI::App* analyze =
        app.add_subcommand("analyze", "re-emit analysis artifacts from checkpoints");
    add_common_flags(analyze, analyze_flags);

    std::string exact_experiment;
    int exact_grid_m = 64;
    double exact_quad_tol = 1e-12;
    std::string exact_out = "exact.csv";
    bool exact_smoothed = false;
    CLI::App* exact = app.add_subcommand("exact", "tabulate the closed-form map and its det");
    exact->add_option("--experiment", exact_experiment, "triple or box")->required();
    exact->add_option("--grid-m", exact_grid_m, "lattice subdivisions per side");
    exact->add_option("--quad-tol", exact_quad_tol, "quadrature tolerance");
    exact->add_option("--output", exact_out, "CSV path");
    exact->add_flag("--smoothed-box", exact_smoothed, "continuous box parametrisation");

    FlagSet conv_flags;
    double conv_p = 2.0;
    std::vector<int> conv_sizes;
    std::string conv_out = "convergence.csv";
    CLI::App* conv = app.add_subcommand("convergence", "mesh refinement study at a fixed p");
    add_common_flags(conv, conv_flags);
    conv->add_option("--p", conv_p, "exponent to solve at")->required();
    conv->add_option("--mesh-sizes", conv_sizes, "comma list of mesh sizes")
        ->required()
        ->delimiter(',');
    conv->add_option("--output", conv_out, "CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return infharm::run(resolve(solve_flags));
        if (analyze->parsed()) return infharm::analyze_from_checkpoints(resolve(analyze_flags));
        if (exact->parsed()) {
            return infharm::exact_eval(exact_experiment, exact_grid_m, exact_quad_tol, exact_out,
                                       exact_smoothed);
        }
        if (conv->parsed()) {
            return infharm::convergence_study(resolve(conv_flags), conv_p, conv_sizes, conv_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
