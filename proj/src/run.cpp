#include "infharm/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>

#include "infharm/analysis.hpp"
#include "infharm/assembly.hpp"
#include "infharm/checkpoint.hpp"
#include "infharm/exceptions.hpp"
#include "infharm/problems.hpp"
#include "infharm/solver.hpp"
#include "infharm/writers.hpp"

namespace infharm {

namespace fs = std::filesystem;

namespace {

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

// File name fragment for an exponent; dots swapped out so the tag stays
// portable. Inserted stages get fractional tags like 5_65685.
std::string p_tag(double p) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", p);
    std::string tag(buf);
    for (char& c : tag) {
        if (c == '.') c = '_';
    }
    return tag;
}

std::string join_doubles(const std::vector<double>& xs, const char* fmt) {
    std::string out;
    char buf[64];
    for (size_t i = 0; i < xs.size(); ++i) {
        std::snprintf(buf, sizeof(buf), fmt, xs[i]);
        if (i) out += ",";
        out += buf;
    }
    return out;
}

ProblemSpec build_problem(const RunConfig& config) {
    if (config.experiment == "custom") return make_custom_problem(config.custom_boundary_file);
    return make_problem(config.experiment, config.analysis.quad_tol, config.smoothed_box);
}

struct StageSummary {
    NewtonRecord record;
    double omega1_area = 0.0;
    double omega2_area = 0.0;
    AngleStats angles;
    double max_tangential = 0.0;
    double max_normal = 0.0;
    double l2_tangential = 0.0;
    double l2_normal = 0.0;
};

// Analysis plus the csv/vtk/svg files for one converged exponent. Pure in
// (solution, config), so an analysis-only rerun reproduces the bytes.
StageSummary emit_stage_artifacts(const RunConfig& config, const std::string& experiment,
                                  const VectorField& solution, const NewtonRecord& record) {
    const TriMesh& mesh = solution.mesh();
    const int N = solution.n_components();
    const int T = mesh.num_triangles();
    const std::string tag = p_tag(record.p);
    const fs::path dir(config.output_dir);

    const std::vector<double> levels = config.analysis.contour_levels.empty()
                                           ? default_contour_levels()
                                           : config.analysis.contour_levels;
    const PhaseField phase = rank_classify(solution, config.analysis.tau,
                                           N == 2 ? levels : std::vector<double>{});
    const ResidualField residuals = infinity_residuals(solution);
    const std::vector<double> angles = angle_field(solution);

    StageSummary summary;
    summary.record = record;
    summary.omega1_area = phase.omega1_area;
    summary.omega2_area = phase.omega2_area;
    summary.angles = angle_stats(mesh, angles);
    summary.max_tangential = residuals.max_tangential;
    summary.max_normal = residuals.max_normal;
    summary.l2_tangential = residuals.l2_tangential;
    summary.l2_normal = residuals.l2_normal;

    std::vector<double> sigma1(T), sigma2(T), rank_class(T);
    for (int k = 0; k < T; ++k) {
        sigma1[k] = phase.singular_values[k](0);
        sigma2[k] = phase.singular_values[k](1);
        rank_class[k] = phase.rank_class[k];
    }

    // the contour plot follows det where it exists, else the second singular
    // value (the rank-deficiency indicator that generalizes it)
    Eigen::VectorXd contour_nodal;
    std::vector<Polyline> contour_lines;
    if (N == 2) {
        contour_nodal = nodal_average(mesh, phase.det);
        contour_lines = phase.contours;
    } else {
        contour_nodal = nodal_average(mesh, sigma2);
        contour_lines = contour_extract(mesh, contour_nodal, levels);
    }

    if (config.emit.count("csv")) {
        write_csv_solution(dir / ("solution_p" + tag + ".csv"), solution);
        std::vector<double> index(T), bx(T), by(T);
        for (int k = 0; k < T; ++k) {
            const auto& tri = mesh.triangle(k);
            const Eigen::Vector2d c =
                (mesh.vertex(tri[0]) + mesh.vertex(tri[1]) + mesh.vertex(tri[2])) / 3.0;
            index[k] = k;
            bx[k] = c.x();
            by[k] = c.y();
        }
        std::vector<CsvColumn> cols;
        cols.push_back({"element", index});
        cols.push_back({"bx", bx});
        cols.push_back({"by", by});
        if (N == 2) cols.push_back({"det", phase.det});
        cols.push_back({"grad_norm", phase.grad_norm});
        cols.push_back({"sigma1", sigma1});
        cols.push_back({"sigma2", sigma2});
        cols.push_back({"rank", rank_class});
        cols.push_back({"angle", angles});
        cols.push_back({"residual_tangential", residuals.tangential});
        cols.push_back({"residual_normal", residuals.normal});
        write_csv(dir / ("elements_p" + tag + ".csv"), cols);
    }

    if (config.emit.count("vtk")) {
        std::vector<NamedNodalField> point_scalars;
        point_scalars.push_back({N == 2 ? "det_nodal" : "sigma2_nodal", contour_nodal});
        std::vector<NamedElementField> cell_scalars;
        if (N == 2) cell_scalars.push_back({"det", phase.det});
        cell_scalars.push_back({"grad_norm", phase.grad_norm});
        cell_scalars.push_back({"sigma1", sigma1});
        cell_scalars.push_back({"sigma2", sigma2});
        cell_scalars.push_back({"rank", rank_class});
        cell_scalars.push_back({"angle", angles});
        cell_scalars.push_back({"residual_tangential", residuals.tangential});
        cell_scalars.push_back({"residual_normal", residuals.normal});
        write_vtk(dir / ("fields_p" + tag + ".vtk"), mesh, experiment + " p=" + tag,
                  &solution, point_scalars, cell_scalars);
        write_vtk_surface(dir / ("image_p" + tag + ".vtk"), image_surface(solution),
                          experiment + " image p=" + tag);
    }

    if (config.emit.count("svg")) {
        write_svg_contours(dir / ("contours_p" + tag + ".svg"), mesh, contour_nodal,
                           contour_lines);
    }

    return summary;
}

void write_manifest(const RunConfig& config, const ProblemSpec& problem, const TriMesh& mesh,
                    const std::vector<double>& requested_schedule,
                    const std::vector<StageSummary>& stages, bool converged,
                    const std::string& failure, double total_wall_seconds) {
    const fs::path path = fs::path(config.output_dir) / "manifest.txt";
    std::ofstream out(path);
    if (!out) throw IoError("manifest: cannot write " + path.string());

    out << "status = " << (converged ? "converged" : "failed") << "\n";
    out << "experiment = " << config.experiment << "\n";
    out << "problem_name = " << problem.name << "\n";
    out << "n_components = " << problem.n_components << "\n";
    out << "mesh_m = " << config.mesh_m << "\n";
    out << "num_vertices = " << mesh.num_vertices() << "\n";
    out << "num_triangles = " << mesh.num_triangles() << "\n";
    out << "h_max = " << format_double(mesh.h_max()) << "\n";
    out << "output_dir = " << config.output_dir << "\n";
    std::string emit_list;
    for (const std::string& kind : config.emit) {
        if (!emit_list.empty()) emit_list += ",";
        emit_list += kind;
    }
    out << "emit = " << emit_list << "\n";
    out << "smoothed_box = " << (config.smoothed_box ? "true" : "false") << "\n";
    if (!config.custom_boundary_file.empty()) {
        out << "custom_boundary_file = " << config.custom_boundary_file << "\n";
    }
    out << "schedule_mode = " << config.schedule_mode << "\n";
    out << "p_max = " << format_double(config.p_max) << "\n";
    out << "newton_tol = " << format_double(config.solver.newton_tol) << "\n";
    out << "newton_max_iter = " << config.solver.newton_max_iter << "\n";
    out << "linear_tol = " << format_double(config.solver.linear_tol) << "\n";
    out << "epsilon = " << format_double(config.solver.epsilon) << "\n";
    out << "damping_shrink = " << format_double(config.solver.damping.shrink) << "\n";
    out << "damping_min_step = " << format_double(config.solver.damping.min_step) << "\n";
    out << "damping_sufficient_decrease = "
        << format_double(config.solver.damping.sufficient_decrease) << "\n";
    out << "tau = " << format_double(config.analysis.tau) << "\n";
    out << "quad_tol = " << format_double(config.analysis.quad_tol) << "\n";
    const std::vector<double>& levels = config.analysis.contour_levels.empty()
                                            ? default_contour_levels()
                                            : config.analysis.contour_levels;
    out << "contour_levels = " << join_doubles(levels, "%g") << "\n";
    out << "requested_schedule = " << join_doubles(requested_schedule, "%g") << "\n";

    std::string realized;
    char buf[64];
    for (const StageSummary& s : stages) {
        std::snprintf(buf, sizeof(buf), "%g", s.record.p);
        if (!realized.empty()) realized += ",";
        realized += buf;
        if (s.record.inserted) realized += "(inserted)";
    }
    out << "realized_schedule = " << realized << "\n";
    out << "stages_converged = " << stages.size() << "\n";
    out << "total_wall_seconds = " << format_double(total_wall_seconds) << "\n";

    for (size_t i = 0; i < stages.size(); ++i) {
        const StageSummary& s = stages[i];
        const std::string pre = "stage_" + std::to_string(i + 1) + ".";
        out << pre << "p = " << format_double(s.record.p) << "\n";
        out << pre << "inserted = " << (s.record.inserted ? "true" : "false") << "\n";
        out << pre << "newton_iterations = " << s.record.iterations << "\n";
        out << pre << "initial_residual_norm = " << format_double(s.record.initial_residual_norm)
            << "\n";
        out << pre << "final_residual_norm = " << format_double(s.record.final_residual_norm)
            << "\n";
        out << pre << "log_energy = " << format_double(s.record.log_energy) << "\n";
        out << pre << "energy_root = " << format_double(s.record.energy_root) << "\n";
        out << pre << "total_cg_iterations = " << s.record.total_cg_iterations << "\n";
        out << pre << "used_direct_solve = " << (s.record.used_direct_solve ? "true" : "false")
            << "\n";
        out << pre << "wall_seconds = " << format_double(s.record.wall_seconds) << "\n";
        out << pre << "log_energy_history = "
            << join_doubles(s.record.log_energy_history, "%.17g") << "\n";
        out << pre << "omega1_area = " << format_double(s.omega1_area) << "\n";
        out << pre << "omega2_area = " << format_double(s.omega2_area) << "\n";
        out << pre << "angle_mean = " << format_double(s.angles.mean) << "\n";
        out << pre << "angle_stddev = " << format_double(s.angles.stddev) << "\n";
        out << pre << "angle_undefined_elements = " << s.angles.undefined_elements << "\n";
        out << pre << "residual_max_tangential = " << format_double(s.max_tangential) << "\n";
        out << pre << "residual_max_normal = " << format_double(s.max_normal) << "\n";
        out << pre << "residual_l2_tangential = " << format_double(s.l2_tangential) << "\n";
        out << pre << "residual_l2_normal = " << format_double(s.l2_normal) << "\n";
    }
    if (!converged) {
        double failed_after = requested_schedule.front();
        if (!stages.empty()) failed_after = stages.back().record.p;
        double failed_target = requested_schedule.back();
        for (double p : requested_schedule) {
            if (p > failed_after) {
                failed_target = p;
                break;
            }
        }
        out << "failed_stage_p = " << format_double(failed_target) << "\n";
        out << "failure = " << failure << "\n";
    }
    if (!out) throw IoError("manifest: write failed for " + path.string());
}

} // namespace

int run(const RunConfig& config) {
    config.validate();
    const fs::path dir(config.output_dir);
    fs::create_directories(dir);

    const ProblemSpec problem = build_problem(config);
    auto mesh = std::make_shared<const TriMesh>(TriMesh::structured(config.mesh_m));

    SolverConfig solver = config.solver;
    solver.p_schedule = config.resolved_schedule();

    std::vector<StageSummary> stages;
    const auto start = std::chrono::steady_clock::now();

    const StageCallback on_stage = [&](const ContinuationState& state) {
        const NewtonRecord& record = state.history.back();
        if (config.emit.count("checkpoints")) {
            Checkpoint cp;
            cp.experiment = config.experiment;
            cp.n_components = state.solution.n_components();
            cp.mesh_m = config.mesh_m;
            cp.p = record.p;
            cp.newton_iterations = record.iterations;
            cp.final_residual_norm = record.final_residual_norm;
            cp.energy_root = record.energy_root;
            cp.nodal_values = state.solution.values();
            write_checkpoint(dir / ("checkpoint_p" + p_tag(record.p) + ".chk"), cp);
        }
        stages.push_back(emit_stage_artifacts(config, config.experiment, state.solution, record));
        std::cout << "stage p=" << record.p << (record.inserted ? " (inserted)" : "")
                  << " iterations=" << record.iterations
                  << " residual=" << record.final_residual_norm
                  << " energy_root=" << record.energy_root
                  << " wall=" << record.wall_seconds << "s" << std::endl;
    };

    bool converged = true;
    std::string failure;
    try {
        continue_in_p(problem, mesh, solver, on_stage);
    } catch (const ContinuationFailureError& e) {
        converged = false;
        failure = e.what();
    }

    const double total_wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(config, problem, *mesh, solver.p_schedule, stages, converged, failure,
                   total_wall);
    if (!converged) {
        std::cerr << "continuation failed: " << failure << std::endl;
        return 1;
    }
    return 0;
}

int analyze_from_checkpoints(const RunConfig& config) {
    const fs::path dir(config.output_dir);
    if (!fs::is_directory(dir)) throw IoError("analyze: no such directory " + dir.string());

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (name.rfind("checkpoint_p", 0) == 0 && entry.path().extension() == ".chk") {
            files.push_back(entry.path());
        }
    }
    if (files.empty()) throw IoError("analyze: no checkpoints in " + dir.string());

    std::vector<Checkpoint> checkpoints;
    checkpoints.reserve(files.size());
    for (const fs::path& f : files) checkpoints.push_back(read_checkpoint(f));
    std::sort(checkpoints.begin(), checkpoints.end(),
              [](const Checkpoint& a, const Checkpoint& b) { return a.p < b.p; });

    std::map<int, std::shared_ptr<const TriMesh>> meshes;
    for (const Checkpoint& cp : checkpoints) {
        auto& mesh = meshes[cp.mesh_m];
        if (!mesh) mesh = std::make_shared<const TriMesh>(TriMesh::structured(cp.mesh_m));
        if (cp.nodal_values.rows() != mesh->num_vertices()) {
            throw IoError("analyze: checkpoint value count does not match mesh_m");
        }
        VectorField field(mesh, cp.n_components);
        field.values() = cp.nodal_values;
        NewtonRecord record;
        record.p = cp.p;
        record.iterations = cp.newton_iterations;
        record.final_residual_norm = cp.final_residual_norm;
        record.energy_root = cp.energy_root;
        emit_stage_artifacts(config, cp.experiment, field, record);
        std::cout << "analyzed p=" << cp.p << std::endl;
    }
    return 0;
}

int exact_eval(const std::string& experiment, int grid_m, double quad_tol,
               const fs::path& output_path, bool smoothed_box) {
    if (grid_m < 1) throw InvalidArgumentError("exact_eval: grid_m must be >= 1");
    const ProblemSpec spec = make_problem(experiment, quad_tol, smoothed_box);
    if (!spec.K) {
        throw InvalidArgumentError("exact_eval: experiment '" + experiment +
                                   "' has no closed-form map");
    }

    const int n = grid_m + 1;
    std::vector<double> xs, ys, u1, u2, det;
    xs.reserve(n * n);
    ys.reserve(n * n);
    u1.reserve(n * n);
    u2.reserve(n * n);
    det.reserve(n * n);
    for (int j = 0; j < n; ++j) {
        const double y = -1.0 + 2.0 * j / grid_m;
        for (int i = 0; i < n; ++i) {
            const double x = -1.0 + 2.0 * i / grid_m;
            const Eigen::Vector2d u = spec.scale * exact_map(x, y, spec.K, quad_tol);
            xs.push_back(x);
            ys.push_back(y);
            u1.push_back(u(0));
            u2.push_back(u(1));
            det.push_back(spec.scale * spec.scale * std::sin(spec.K(x) - spec.K(y)));
        }
    }

    if (output_path.has_parent_path()) fs::create_directories(output_path.parent_path());
    write_csv(output_path,
              {{"x", xs}, {"y", ys}, {"u1", u1}, {"u2", u2}, {"det", det}});
    return 0;
}

int convergence_study(const RunConfig& config, double p, const std::vector<int>& mesh_sizes,
                      const fs::path& output_path) {
    if (!(p >= 2.0)) throw InvalidArgumentError("convergence: p must be >= 2");
    if (mesh_sizes.empty()) throw InvalidArgumentError("convergence: no mesh sizes given");
    for (int m : mesh_sizes) {
        if (m < 2) throw InvalidArgumentError("convergence: mesh sizes must be >= 2");
    }

    const ProblemSpec problem = build_problem(config);
    SolverConfig solver = config.solver;
    solver.p_schedule = geometric_schedule(p);

    const bool has_oracle = static_cast<bool>(problem.K);
    MapFn oracle;
    if (has_oracle) {
        oracle = [&problem, &config](double x, double y) {
            return Eigen::VectorXd(problem.scale *
                                   exact_map(x, y, problem.K, config.analysis.quad_tol));
        };
    }

    std::vector<double> col_m, col_h, col_dofs, col_energy, col_omega1;
    std::vector<double> col_sup, col_l2, col_cauchy;
    VectorField previous(std::make_shared<const TriMesh>(TriMesh::structured(2)), 1);
    int previous_m = 0;

    for (int m : mesh_sizes) {
        auto mesh = std::make_shared<const TriMesh>(TriMesh::structured(m));
        const ContinuationState state = continue_in_p(problem, mesh, solver);
        const VectorField& u = state.solution;

        const PhaseField phase = rank_classify(u, config.analysis.tau);
        const DofMap dofs = make_dof_map(*mesh, problem.n_components);

        col_m.push_back(m);
        col_h.push_back(mesh->h_max());
        col_dofs.push_back(dofs.n_dofs());
        col_energy.push_back(state.history.back().energy_root);
        col_omega1.push_back(phase.omega1_area);
        if (has_oracle) {
            col_sup.push_back(sup_vertex_distance(u, oracle));
            col_l2.push_back(l2_distance(u, oracle));
        }

        double cauchy = std::nan("");
        if (previous_m > 0 && m % previous_m == 0) {
            const int r = m / previous_m;
            double worst = 0.0;
            for (int j = 0; j <= previous_m; ++j) {
                for (int i = 0; i <= previous_m; ++i) {
                    const int coarse = j * (previous_m + 1) + i;
                    const int fine = (j * r) * (m + 1) + i * r;
                    const double d = (u.values().row(fine) -
                                      previous.values().row(coarse))
                                         .norm();
                    worst = std::max(worst, d);
                }
            }
            cauchy = worst;
        }
        col_cauchy.push_back(cauchy);

        std::cout << "m=" << m << " h=" << mesh->h_max() << " dofs=" << dofs.n_dofs()
                  << " energy_root=" << state.history.back().energy_root
                  << " omega1=" << phase.omega1_area;
        if (has_oracle) {
            std::cout << " sup_error=" << col_sup.back() << " l2_error=" << col_l2.back();
        }
        if (!std::isnan(cauchy)) std::cout << " cauchy_sup=" << cauchy;
        std::cout << std::endl;

        previous = u;
        previous_m = m;
    }

    std::vector<CsvColumn> cols = {{"m", col_m},
                                   {"h_max", col_h},
                                   {"dofs", col_dofs},
                                   {"energy_root", col_energy},
                                   {"omega1_area", col_omega1}};
    if (has_oracle) {
        cols.push_back({"sup_error", col_sup});
        cols.push_back({"l2_error", col_l2});
    }
    cols.push_back({"cauchy_sup", col_cauchy});
    if (output_path.has_parent_path()) fs::create_directories(output_path.parent_path());
    write_csv(output_path, cols);
    return 0;
}

} // namespace infharm
