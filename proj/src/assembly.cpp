#include "infharm/assembly.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "infharm/exceptions.hpp"
#include "infharm/quadrature.hpp"

namespace infharm {

DofMap make_dof_map(const TriMesh& mesh, int n_components) {
    DofMap dofs;
    dofs.n_components = n_components;
    dofs.vertex_to_free.assign(mesh.num_vertices(), -1);
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        if (mesh.is_boundary_vertex(v)) continue;
        dofs.vertex_to_free[v] = static_cast<int>(dofs.free_vertices.size());
        dofs.free_vertices.push_back(v);
    }
    return dofs;
}

double regularized_norm(const Eigen::MatrixXd& G, double epsilon) {
    if (epsilon < 0.0) throw InvalidArgumentError("epsilon must be nonnegative");
    return std::sqrt(G.squaredNorm() + epsilon * epsilon);
}

namespace {

// (n / M)^(p-2), evaluated in log space. Underflow to zero is harmless.
double element_weight(double n, double scale, double p) {
    if (p == 2.0) return 1.0;
    if (n == 0.0) return 0.0;
    return std::exp((p - 2.0) * (std::log(n) - std::log(scale)));
}

} // namespace

NonlinearSystem assemble(const VectorField& field, double p, double epsilon,
                         const AssemblyOptions& options) {
    if (p < 2.0) throw InvalidArgumentError("exponent p must be at least 2");
    if (epsilon < 0.0) throw InvalidArgumentError("epsilon must be nonnegative");
    if (!field.values().allFinite()) {
        throw IterateCorruptionError("field contains non-finite nodal values");
    }

    const TriMesh& mesh = field.mesh();
    const int N = field.n_components();
    const int nt = mesh.num_triangles();

    NonlinearSystem sys;
    sys.p = p;
    sys.epsilon = epsilon;
    sys.dofs = make_dof_map(mesh, N);
    const int ndof = sys.dofs.n_dofs();

    std::vector<Eigen::MatrixXd> grads(nt);
    std::vector<double> norms(nt);
    double scale = 0.0;
    for (int k = 0; k < nt; ++k) {
        grads[k] = element_gradient(field, k);
        norms[k] = regularized_norm(grads[k], epsilon);
        if (!std::isfinite(norms[k])) {
            std::ostringstream msg;
            msg << "non-finite gradient norm on element " << k;
            throw IterateCorruptionError(msg.str());
        }
        scale = std::max(scale, norms[k]);
    }
    if (options.fixed_scale) {
        scale = *options.fixed_scale;
        if (!(scale > 0.0)) throw InvalidArgumentError("fixed_scale must be positive");
    } else if (scale == 0.0) {
        scale = 1.0;
    }
    sys.scale_M = scale;

    sys.residual = Eigen::VectorXd::Zero(ndof);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(nt) * 9 * N * N);

    for (int k = 0; k < nt; ++k) {
        const auto& t = mesh.triangle(k);
        const ElementGeometry& geo = mesh.geometry(k);
        const Eigen::MatrixXd& G = grads[k];
        const double n_k = norms[k];
        const double w = element_weight(n_k, scale, p);
        const double wa = w * geo.area;

        // s(a, c) = (G : grad of the c-component hat at local vertex a) / n_K.
        Eigen::MatrixXd s = Eigen::MatrixXd::Zero(3, N);
        Eigen::MatrixXd gdot = Eigen::MatrixXd::Zero(3, N);
        for (int a = 0; a < 3; ++a) {
            for (int c = 0; c < N; ++c) {
                gdot(a, c) = G.row(c).dot(geo.grad_basis[a].transpose());
                s(a, c) = n_k > 0.0 ? gdot(a, c) / n_k : 0.0;
            }
        }

        for (int a = 0; a < 3; ++a) {
            const int fa = sys.dofs.vertex_to_free[t[a]];
            if (fa < 0) continue;
            for (int c = 0; c < N; ++c) {
                sys.residual[sys.dofs.dof(fa, c)] += wa * gdot(a, c);
            }
            for (int b = 0; b < 3; ++b) {
                const int fb = sys.dofs.vertex_to_free[t[b]];
                if (fb < 0) continue;
                const double lap = geo.grad_basis[a].dot(geo.grad_basis[b]);
                for (int c = 0; c < N; ++c) {
                    const int row = sys.dofs.dof(fa, c);
                    trips.emplace_back(row, sys.dofs.dof(fb, c), wa * lap);
                    if (p > 2.0) {
                        for (int d = 0; d < N; ++d) {
                            trips.emplace_back(row, sys.dofs.dof(fb, d),
                                               wa * (p - 2.0) * s(a, c) * s(b, d));
                        }
                    }
                }
            }
        }
    }

    if (options.load) {
        // Normalized load: scale_M^(2-p) * integral of f against each hat.
        const double load_factor = std::exp((2.0 - p) * std::log(scale));
        if (!std::isfinite(load_factor)) {
            throw InvalidArgumentError(
                "load term not representable at this exponent and scale");
        }
        const MapFn& f = *options.load;
        for (int k = 0; k < nt; ++k) {
            const auto& t = mesh.triangle(k);
            const ElementGeometry& geo = mesh.geometry(k);
            const Eigen::Vector2d& v0 = mesh.vertex(t[0]);
            const Eigen::Vector2d& v1 = mesh.vertex(t[1]);
            const Eigen::Vector2d& v2 = mesh.vertex(t[2]);
            for (int a = 0; a < 3; ++a) {
                const int fa = sys.dofs.vertex_to_free[t[a]];
                if (fa < 0) continue;
                const Eigen::Vector2d va = mesh.vertex(t[a]);
                for (int c = 0; c < N; ++c) {
                    const double lc = integrate_triangle(
                        [&](double x, double y) {
                            const double hat =
                                1.0 + geo.grad_basis[a].dot(Eigen::Vector2d(x, y) - va);
                            Eigen::VectorXd fv = f(x, y);
                            if (fv.size() != N || !fv.allFinite()) {
                                throw EvaluationError("load produced an unusable value");
                            }
                            return hat * fv[c];
                        },
                        v0, v1, v2);
                    sys.residual[sys.dofs.dof(fa, c)] -= load_factor * lc;
                }
            }
        }
    }

    sys.jacobian.resize(ndof, ndof);
    sys.jacobian.setFromTriplets(trips.begin(), trips.end());

    if (!sys.residual.allFinite()) {
        throw IterateCorruptionError("assembled residual contains non-finite entries");
    }
    for (int col = 0; col < sys.jacobian.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(sys.jacobian, col); it; ++it) {
            if (!std::isfinite(it.value())) {
                throw IterateCorruptionError("assembled Jacobian contains non-finite entries");
            }
        }
    }
    return sys;
}

EnergyValue energy(const VectorField& field, double p, double epsilon) {
    if (p < 2.0) throw InvalidArgumentError("exponent p must be at least 2");
    const TriMesh& mesh = field.mesh();

    // log(sum_K |K| n_K^p) via log-sum-exp over the element terms.
    double max_term = -std::numeric_limits<double>::infinity();
    std::vector<double> terms;
    terms.reserve(mesh.num_triangles());
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        const double n_k = regularized_norm(element_gradient(field, k), epsilon);
        if (!std::isfinite(n_k)) {
            throw IterateCorruptionError("non-finite gradient norm in energy");
        }
        if (n_k == 0.0) continue;
        const double term = std::log(mesh.geometry(k).area) + p * std::log(n_k);
        terms.push_back(term);
        max_term = std::max(max_term, term);
    }

    EnergyValue ev;
    if (terms.empty()) {
        ev.log_energy = -std::numeric_limits<double>::infinity();
        ev.energy_root = 0.0;
        return ev;
    }
    double acc = 0.0;
    for (double term : terms) acc += std::exp(term - max_term);
    ev.log_energy = max_term + std::log(acc);
    ev.energy_root = std::exp(ev.log_energy / p);
    return ev;
}

} // namespace infharm
