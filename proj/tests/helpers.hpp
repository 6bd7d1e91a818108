#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <random>

#include "infharm/fespace.hpp"
#include "infharm/mesh.hpp"

namespace infharm::testing {

inline std::shared_ptr<const TriMesh> square_mesh(int m) {
    return std::make_shared<TriMesh>(TriMesh::structured(m));
}

inline MapFn vec_fn(std::function<Eigen::Vector2d(double, double)> f) {
    return [f = std::move(f)](double x, double y) -> Eigen::VectorXd {
        return f(x, y);
    };
}

// Nodal field from a lambda, keeping the boundary rows as sampled.
inline VectorField field_from(const std::shared_ptr<const TriMesh>& mesh,
                              const MapFn& f, int n_components) {
    return interpolate(mesh, f, n_components);
}

// Zero every interior row, leaving the boundary rows as a cold start.
inline void zero_interior(VectorField& field) {
    const TriMesh& mesh = field.mesh();
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        if (!mesh.is_boundary_vertex(v)) {
            field.values().row(v).setZero();
        }
    }
}

inline std::mt19937& rng() {
    static std::mt19937 gen(0x5eed);
    return gen;
}

inline double uniform(double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    return dist(rng());
}

} // namespace infharm::testing
