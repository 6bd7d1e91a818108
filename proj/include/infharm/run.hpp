#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "infharm/config.hpp"

namespace infharm {

// Full pipeline: p-continuation with per-stage checkpoints, analysis and
// artifact files, plus a manifest. Returns the process exit status; a
// continuation failure keeps the partial artifacts and marks the failed
// stage in the manifest.
int run(const RunConfig& config);

// Re-emit the per-stage analysis artifacts from the checkpoints found in
// config.output_dir, without re-solving. Deterministic: the files match the
// original run byte for byte.
int analyze_from_checkpoints(const RunConfig& config);

// Tabulate the closed-form map (scaled by 3/4) and its analytic determinant
// on a (grid_m+1)^2 lattice. Only experiments with a parametrisation K.
int exact_eval(const std::string& experiment, int grid_m, double quad_tol,
               const std::filesystem::path& output_path, bool smoothed_box = false);

// Mesh-refinement study at a fixed exponent: one row per mesh size with
// energy, phase area, oracle errors where available, and the successive
// difference on shared lattice points.
int convergence_study(const RunConfig& config, double p, const std::vector<int>& mesh_sizes,
                      const std::filesystem::path& output_path);

} // namespace infharm
