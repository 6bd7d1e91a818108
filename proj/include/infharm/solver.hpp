#pragma once

#include <functional>
#include <vector>

#include "infharm/assembly.hpp"
#include "infharm/exceptions.hpp"
#include "infharm/fespace.hpp"
#include "infharm/problems.hpp"

namespace infharm {

struct DampingConfig {
    double shrink = 0.5;
    double min_step = 9.5367431640625e-07; // 2^-20
    double sufficient_decrease = 1e-4;
};

std::vector<double> default_p_schedule();

struct SolverConfig {
    // Strictly increasing, starting at 2.
    std::vector<double> p_schedule = default_p_schedule();
    double newton_tol = 1e-8;
    int newton_max_iter = 50;
    DampingConfig damping;
    double linear_tol = 1e-10;
    double epsilon = 1e-10;
};

// Convergence record of one Newton solve.
struct NewtonRecord {
    double p = 0.0;
    int iterations = 0;
    double initial_residual_norm = 0.0;
    double final_residual_norm = 0.0;
    double log_energy = 0.0;
    double energy_root = 0.0;
    int total_cg_iterations = 0;
    bool used_direct_solve = false;
    bool inserted = false;
    double wall_seconds = 0.0;
    // Log-energy after the initial iterate and after each accepted step;
    // non-increasing by construction of the line search.
    std::vector<double> log_energy_history;
};

class NewtonNotConvergedError : public Error {
public:
    NewtonNotConvergedError(const std::string& what, VectorField best,
                            NewtonRecord record)
        : Error(what), best_iterate(std::move(best)), record(std::move(record)) {}
    VectorField best_iterate;
    NewtonRecord record;
};

struct NewtonResult {
    VectorField solution;
    NewtonRecord record;
};

// Damped Newton iteration at a fixed exponent. The initial iterate must carry
// the boundary values; they are never modified. Stops once the normalized
// residual norm falls below newton_tol times its initial value or below the
// absolute floor 1e-14.
NewtonResult newton_solve(const VectorField& initial, double p,
                          const SolverConfig& config);

struct ContinuationState {
    double p_current = 0.0;
    VectorField solution;
    std::vector<NewtonRecord> history;
};

class ContinuationFailureError : public Error {
public:
    ContinuationFailureError(const std::string& what, ContinuationState partial)
        : Error(what), partial(std::move(partial)) {}
    ContinuationState partial;
};

using StageCallback = std::function<void(const ContinuationState&)>;

// Solve the schedule in order, warm-starting each exponent from the previous
// solution. A stage that fails to converge is bridged by inserting the
// geometric midpoint sqrt(p_prev * p_next), up to 4 recursion levels, before
// giving up with ContinuationFailureError.
ContinuationState continue_in_p(const ProblemSpec& problem,
                                std::shared_ptr<const TriMesh> mesh,
                                const SolverConfig& config,
                                const StageCallback& on_stage = {});

} // namespace infharm
