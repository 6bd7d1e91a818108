#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace infharm {

struct LinearSolveOptions {
    // Target: ||A x - b|| <= rel_tol * ||b||.
    double rel_tol = 1e-10;
    // 0 selects max(1000, 40 * n).
    int max_iterations = 0;
    // Iterations without halving the best residual before the direct
    // fallback kicks in; 0 selects ceil(10 * sqrt(n)).
    int stagnation_window = 0;
};

struct LinearSolveResult {
    Eigen::VectorXd x;
    int cg_iterations = 0;
    bool used_direct = false;
    double relative_residual = 0.0;
};

// Jacobi-preconditioned conjugate gradients for a symmetric positive
// definite sparse system, with a sparse LDLT fallback on stagnation.
// Negative curvature raises IndefiniteSystemError (the iterate's gradient
// regularization epsilon is too small).
LinearSolveResult solve_spd(const Eigen::SparseMatrix<double>& A,
                            const Eigen::VectorXd& b,
                            const LinearSolveOptions& options = {});

} // namespace infharm
