#include "infharm/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "infharm/linear_solver.hpp"

namespace infharm {

namespace {

constexpr double kAbsoluteResidualFloor = 1e-14;

void check_config(const SolverConfig& config) {
    if (config.p_schedule.empty()) throw InvalidArgumentError("empty exponent schedule");
    if (config.p_schedule.front() != 2.0) {
        throw InvalidArgumentError("exponent schedule must start at 2");
    }
    for (size_t i = 1; i < config.p_schedule.size(); ++i) {
        if (!(config.p_schedule[i] > config.p_schedule[i - 1])) {
            throw InvalidArgumentError("exponent schedule must increase strictly");
        }
    }
    if (!(config.newton_tol > 0.0)) throw InvalidArgumentError("newton_tol must be positive");
    if (config.newton_max_iter < 1) throw InvalidArgumentError("newton_max_iter must be positive");
    if (!(config.damping.shrink > 0.0 && config.damping.shrink < 1.0)) {
        throw InvalidArgumentError("damping shrink factor must lie in (0, 1)");
    }
}

void add_to_free_dofs(VectorField& field, const DofMap& dofs,
                      const Eigen::VectorXd& direction, double step) {
    const int N = dofs.n_components;
    for (size_t i = 0; i < dofs.free_vertices.size(); ++i) {
        const int v = dofs.free_vertices[i];
        for (int c = 0; c < N; ++c) {
            field.values()(v, c) += step * direction[dofs.dof(static_cast<int>(i), c)];
        }
    }
}

} // namespace

std::vector<double> default_p_schedule() {
    return {2,  3,  4,  5,   6,   8,   11,  16,  22,  32,
            45, 64, 90, 128, 181, 256, 362, 512, 724, 1024};
}

NewtonResult newton_solve(const VectorField& initial, double p,
                          const SolverConfig& config) {
    if (p < 2.0) throw InvalidArgumentError("exponent p must be at least 2");
    if (!(config.newton_tol > 0.0)) throw InvalidArgumentError("newton_tol must be positive");
    if (config.newton_max_iter < 1) throw InvalidArgumentError("newton_max_iter must be positive");

    const auto t_start = std::chrono::steady_clock::now();
    auto elapsed = [&t_start]() {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    };

    VectorField u = initial;
    NonlinearSystem sys = assemble(u, p, config.epsilon);
    EnergyValue ev = energy(u, p, config.epsilon);

    NewtonRecord rec;
    rec.p = p;
    rec.initial_residual_norm = sys.residual.norm();
    rec.log_energy_history.push_back(ev.log_energy);

    double fnorm = rec.initial_residual_norm;
    VectorField best = u;
    double best_norm = fnorm;

    auto finish = [&](int iterations) {
        rec.iterations = iterations;
        rec.final_residual_norm = fnorm;
        rec.log_energy = ev.log_energy;
        rec.energy_root = ev.energy_root;
        rec.wall_seconds = elapsed();
        return NewtonResult{u, rec};
    };

    const double target = std::max(config.newton_tol * fnorm, kAbsoluteResidualFloor);
    if (fnorm <= kAbsoluteResidualFloor) return finish(0);

    for (int it = 1; it <= config.newton_max_iter; ++it) {
        LinearSolveOptions lin;
        lin.rel_tol = config.linear_tol;
        LinearSolveResult dir = solve_spd(sys.jacobian, -sys.residual, lin);
        rec.total_cg_iterations += dir.cg_iterations;
        rec.used_direct_solve = rec.used_direct_solve || dir.used_direct;

        const double f_dot_d = sys.residual.dot(dir.x);
        if (!(f_dot_d < 0.0)) {
            rec.iterations = it - 1;
            rec.final_residual_norm = fnorm;
            rec.log_energy = ev.log_energy;
            rec.energy_root = ev.energy_root;
            rec.wall_seconds = elapsed();
            throw NewtonNotConvergedError(
                "Newton direction is not a descent direction", best, rec);
        }

        // Slope of the log-energy along the direction:
        // d/dt log(sum |K| n^p) = p * M^(p-2) * (F . d) / E, in log space.
        double slope = -std::exp(std::log(p) + (p - 2.0) * std::log(sys.scale_M) +
                                 std::log(-f_dot_d) - ev.log_energy);
        if (!std::isfinite(slope)) slope = 0.0;

        // Once the predicted relative decrease falls below what log-energy
        // arithmetic can resolve, the Armijo test compares rounding noise;
        // switch to plain residual decrease (the quadratic basin of Newton).
        const double log_resolution = 1e-12 * std::max(1.0, std::abs(ev.log_energy));
        const bool energy_resolvable =
            config.damping.sufficient_decrease * (-slope) > log_resolution;

        double step = 1.0;
        bool accepted = false;
        VectorField trial = u;
        if (energy_resolvable) {
            EnergyValue trial_ev{};
            while (step >= config.damping.min_step) {
                trial = u;
                add_to_free_dofs(trial, sys.dofs, dir.x, step);
                trial_ev = energy(trial, p, config.epsilon);
                const double bound =
                    ev.log_energy + config.damping.sufficient_decrease * step * slope;
                if (trial_ev.log_energy <= bound) {
                    accepted = true;
                    break;
                }
                step *= config.damping.shrink;
            }
            if (accepted) {
                u = trial;
                ev = trial_ev;
            }
        } else {
            AssemblyOptions frozen;
            frozen.fixed_scale = sys.scale_M;
            while (step >= config.damping.min_step) {
                trial = u;
                add_to_free_dofs(trial, sys.dofs, dir.x, step);
                double trial_norm = std::numeric_limits<double>::infinity();
                try {
                    trial_norm = assemble(trial, p, config.epsilon, frozen).residual.norm();
                } catch (const IterateCorruptionError&) {
                    // overlong trial step overflowed the frozen weights; shrink
                }
                if (trial_norm <=
                    (1.0 - config.damping.sufficient_decrease * step) * fnorm) {
                    accepted = true;
                    break;
                }
                step *= config.damping.shrink;
            }
            if (accepted) {
                u = trial;
                ev = energy(u, p, config.epsilon);
            }
        }
        if (!accepted) {
            // An exhausted line search at a residual near the arithmetic
            // floor of the assembly means there is nothing left to improve,
            // not that Newton failed. The floor scales with p: the element
            // weights amplify unit roundoff by a factor of about p - 2.
            const double stall_floor = std::max(100.0 * kAbsoluteResidualFloor,
                                                (p - 2.0) * 1e-13);
            if (fnorm <= stall_floor) return finish(it - 1);
            rec.iterations = it - 1;
            rec.final_residual_norm = fnorm;
            rec.log_energy = ev.log_energy;
            rec.energy_root = ev.energy_root;
            rec.wall_seconds = elapsed();
            throw NewtonNotConvergedError("line search failed below the minimum step",
                                          best, rec);
        }
        rec.log_energy_history.push_back(ev.log_energy);
        sys = assemble(u, p, config.epsilon);
        fnorm = sys.residual.norm();
        if (fnorm < best_norm) {
            best = u;
            best_norm = fnorm;
        }
        if (fnorm <= target) return finish(it);
    }

    rec.iterations = config.newton_max_iter;
    rec.final_residual_norm = fnorm;
    rec.log_energy = ev.log_energy;
    rec.energy_root = ev.energy_root;
    rec.wall_seconds = elapsed();
    std::ostringstream msg;
    msg << "Newton did not converge at p = " << p << " within "
        << config.newton_max_iter << " iterations (residual " << fnorm << ", target "
        << target << ")";
    throw NewtonNotConvergedError(msg.str(), best, rec);
}

namespace {

constexpr int kMaxBisectionDepth = 4;

void advance(ContinuationState& state, double p_target, int depth, bool inserted,
             const SolverConfig& config, const StageCallback& on_stage) {
    try {
        NewtonResult res = newton_solve(state.solution, p_target, config);
        res.record.inserted = inserted;
        state.solution = std::move(res.solution);
        state.p_current = p_target;
        state.history.push_back(std::move(res.record));
        if (on_stage) on_stage(state);
    } catch (const NewtonNotConvergedError& err) {
        if (depth >= kMaxBisectionDepth) {
            std::ostringstream msg;
            msg << "continuation failed at p = " << p_target
                << " after exhausting midpoint insertions: " << err.what();
            throw ContinuationFailureError(msg.str(), state);
        }
        const double p_prev = state.p_current;
        if (!(p_prev > 0.0)) {
            throw ContinuationFailureError(
                "first continuation stage failed; no previous exponent to bisect from",
                state);
        }
        const double p_mid = std::sqrt(p_prev * p_target);
        if (p_mid <= p_prev * (1.0 + 1e-12) || p_mid >= p_target * (1.0 - 1e-12)) {
            std::ostringstream msg;
            msg << "continuation failed at p = " << p_target
                << "; the exponent gap cannot be bisected further: " << err.what();
            throw ContinuationFailureError(msg.str(), state);
        }
        advance(state, p_mid, depth + 1, true, config, on_stage);
        advance(state, p_target, depth + 1, inserted, config, on_stage);
    }
}

} // namespace

ContinuationState continue_in_p(const ProblemSpec& problem,
                                std::shared_ptr<const TriMesh> mesh,
                                const SolverConfig& config,
                                const StageCallback& on_stage) {
    check_config(config);
    if (!mesh) throw InvalidArgumentError("continuation needs a mesh");
    if (!problem.g) throw InvalidArgumentError("problem has no boundary datum");

    BoundaryValues bv = l2_project_boundary(*mesh, problem.g, problem.n_components);
    VectorField u = interpolate(mesh, problem.g, problem.n_components);
    apply_boundary_values(u, bv);

    ContinuationState state{0.0, std::move(u), {}};
    for (double p : config.p_schedule) {
        advance(state, p, 0, false, config, on_stage);
    }
    return state;
}

} // namespace infharm
