#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <optional>
#include <vector>

#include "infharm/fespace.hpp"

namespace infharm {

// Maps interior (non-boundary) vertices to contiguous degree-of-freedom
// indices, component-minor: dof = free_index * n_components + component.
struct DofMap {
    std::vector<int> free_vertices;
    std::vector<int> vertex_to_free;
    int n_components = 0;

    int n_dofs() const {
        return static_cast<int>(free_vertices.size()) * n_components;
    }
    int dof(int free_index, int component) const {
        return free_index * n_components + component;
    }
};

DofMap make_dof_map(const TriMesh& mesh, int n_components);

// Residual and Jacobian of the normalized Galerkin p-Laplace system at the
// current iterate. Weights are (n_K / scale_M)^(p-2) with n_K the regularized
// element gradient norm and scale_M their maximum, so every weight lies in
// [0, 1]; the residual equals scale_M^(2-p) times the unnormalized one and has
// the same zero set.
struct NonlinearSystem {
    double p = 2.0;
    double epsilon = 0.0;
    double scale_M = 1.0;
    DofMap dofs;
    Eigen::VectorXd residual;
    Eigen::SparseMatrix<double> jacobian;
};

// sqrt(Frobenius(G)^2 + epsilon^2).
double regularized_norm(const Eigen::MatrixXd& G, double epsilon);

struct AssemblyOptions {
    // Freeze the normalization constant instead of taking the element maximum
    // (used to compare against unnormalized assembly and for finite
    // difference checks; 1.0 reproduces the unnormalized system).
    std::optional<double> fixed_scale;
    // Optional load density f, turning the system into the weak form of
    // div(|DU|^(p-2) DU) + f = 0 for manufactured solutions.
    const MapFn* load = nullptr;
};

NonlinearSystem assemble(const VectorField& field, double p, double epsilon,
                         const AssemblyOptions& options = {});

// log(sum_K |K| n_K^p), evaluated via log-sum-exp, and its p-th root
// exp(log_energy / p). The root form stays bounded as p grows.
struct EnergyValue {
    double log_energy;
    double energy_root;
};

EnergyValue energy(const VectorField& field, double p, double epsilon);

} // namespace infharm
