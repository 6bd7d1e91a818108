#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "infharm/solver.hpp"

namespace infharm {

struct AnalysisConfig {
    double tau = 0.05;
    std::vector<double> contour_levels; // default: -1.0 to 1.0 step 0.05
    double quad_tol = 1e-12;
};

std::vector<double> default_contour_levels();

// Full description of one run, shared by the CLI, the config file parser and
// the orchestrator.
struct RunConfig {
    std::string experiment = "mixed2d";
    int mesh_m = 64;
    SolverConfig solver;
    AnalysisConfig analysis;
    std::string output_dir = "out";
    std::set<std::string> emit = {"csv", "vtk", "svg", "checkpoints"};
    bool smoothed_box = false;
    std::string custom_boundary_file;

    // geometric: the default doubling-flavored list capped at p_max;
    // plusone: 2, 3, 4, ... up to p_max; explicit: solver.p_schedule as set.
    std::string schedule_mode = "geometric";
    double p_max = 1024.0;

    std::vector<double> resolved_schedule() const;
    void validate() const;
};

std::vector<double> geometric_schedule(double p_max);
std::vector<double> plusone_schedule(double p_max);

// Apply one key=value setting; unknown keys raise InvalidArgumentError.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

// Parse a key=value file ('#' starts a comment) on top of the given config.
void load_config_file(RunConfig& config, const std::filesystem::path& path);

} // namespace infharm
