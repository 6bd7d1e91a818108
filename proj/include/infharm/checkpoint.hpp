#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>

namespace infharm {

// One continuation stage on disk: a labeled ASCII header followed by the
// nodal values as little-endian 64-bit floats, vertex-major component-minor.
// Round-trips bit-exactly.
struct Checkpoint {
    int version = 1;
    std::string experiment;
    int n_components = 0;
    int mesh_m = 0;
    double p = 0.0;
    int newton_iterations = 0;
    double final_residual_norm = 0.0;
    double energy_root = 0.0;
    Eigen::MatrixXd nodal_values;
};

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& cp);
Checkpoint read_checkpoint(const std::filesystem::path& path);

} // namespace infharm
