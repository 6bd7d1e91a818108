#include "infharm/linear_solver.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>

#include "infharm/exceptions.hpp"

namespace infharm {

namespace {

LinearSolveResult direct_solve(const Eigen::SparseMatrix<double>& A,
                               const Eigen::VectorXd& b, int cg_iterations,
                               const LinearSolveResult& cg_best) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(A);
    if (chol.info() != Eigen::Success) {
        throw IndefiniteSystemError(
            "direct factorization failed; increase the gradient regularization epsilon");
    }
    LinearSolveResult res;
    res.x = chol.solve(b);
    res.cg_iterations = cg_iterations;
    res.used_direct = true;
    if (!res.x.allFinite()) {
        // Singular but consistent system: keep the conjugate gradient iterate,
        // which stays in the range of A.
        res = cg_best;
        res.used_direct = true;
        return res;
    }
    const double bnorm = b.norm();
    res.relative_residual = bnorm > 0.0 ? (A * res.x - b).norm() / bnorm : 0.0;
    if (cg_best.x.size() == b.size() && cg_best.relative_residual < res.relative_residual) {
        res = cg_best;
        res.used_direct = true;
    }
    return res;
}

} // namespace

LinearSolveResult solve_spd(const Eigen::SparseMatrix<double>& A,
                            const Eigen::VectorXd& b,
                            const LinearSolveOptions& options) {
    const int n = static_cast<int>(A.rows());
    if (A.cols() != n || b.size() != n) {
        throw InvalidArgumentError("linear system dimensions disagree");
    }
    if (!b.allFinite()) {
        throw IterateCorruptionError("right-hand side contains non-finite entries");
    }

    LinearSolveResult res;
    res.x = Eigen::VectorXd::Zero(n);
    const double bnorm = b.norm();
    if (bnorm == 0.0) return res;

    const int max_iter =
        options.max_iterations > 0 ? options.max_iterations : std::max(1000, 40 * n);
    const int window = options.stagnation_window > 0
                           ? options.stagnation_window
                           : static_cast<int>(std::ceil(10.0 * std::sqrt(double(n))));

    const Eigen::VectorXd diag = A.diagonal();
    const double diag_max = diag.size() > 0 ? diag.maxCoeff() : 0.0;
    const double diag_floor = std::max(diag_max, 1.0) * 1e-300;
    Eigen::VectorXd inv_diag(n);
    for (int i = 0; i < n; ++i) {
        inv_diag[i] = 1.0 / std::max(diag[i], diag_floor);
    }

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd r = b;
    Eigen::VectorXd z = (inv_diag.array() * r.array()).matrix();
    Eigen::VectorXd p = z;
    double rz = r.dot(z);

    double best_norm = bnorm;
    int last_progress_iter = 0;
    LinearSolveResult best;
    best.x = x;
    best.relative_residual = 1.0;

    for (int iter = 1; iter <= max_iter; ++iter) {
        const Eigen::VectorXd Ap = A * p;
        const double pAp = p.dot(Ap);
        if (!(pAp > 0.0)) {
            const double pscale = p.squaredNorm() * std::max(diag_max, 1.0);
            if (std::abs(pAp) <= 1e-14 * pscale) {
                // Direction numerically in the null space; hand over.
                return direct_solve(A, b, iter - 1, best);
            }
            throw IndefiniteSystemError(
                "negative curvature in conjugate gradients; increase the gradient "
                "regularization epsilon");
        }
        const double alpha = rz / pAp;
        x += alpha * p;
        r -= alpha * Ap;
        const double rnorm = r.norm();
        if (!std::isfinite(rnorm)) {
            throw IterateCorruptionError("conjugate gradients diverged");
        }
        if (rnorm < best.relative_residual * bnorm) {
            best.x = x;
            best.relative_residual = rnorm / bnorm;
            best.cg_iterations = iter;
        }
        if (rnorm <= options.rel_tol * bnorm) {
            res.x = x;
            res.cg_iterations = iter;
            res.relative_residual = rnorm / bnorm;
            return res;
        }
        if (rnorm <= 0.5 * best_norm) {
            best_norm = rnorm;
            last_progress_iter = iter;
        }
        if (iter - last_progress_iter >= window) {
            return direct_solve(A, b, iter, best);
        }
        z = (inv_diag.array() * r.array()).matrix();
        const double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }
    return direct_solve(A, b, max_iter, best);
}

} // namespace infharm
