#include "infharm/fespace.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <sstream>

#include "infharm/exceptions.hpp"
#include "infharm/quadrature.hpp"

namespace infharm {

VectorField::VectorField(std::shared_ptr<const TriMesh> mesh, int n_components)
    : mesh_(std::move(mesh)) {
    if (!mesh_) throw InvalidArgumentError("VectorField needs a mesh");
    if (n_components < 1) throw InvalidArgumentError("VectorField needs n_components >= 1");
    values_ = Eigen::MatrixXd::Zero(mesh_->num_vertices(), n_components);
}

VectorField interpolate(std::shared_ptr<const TriMesh> mesh, const MapFn& f,
                        int n_components) {
    VectorField field(mesh, n_components);
    for (int v = 0; v < field.mesh().num_vertices(); ++v) {
        const Eigen::Vector2d& x = field.mesh().vertex(v);
        Eigen::VectorXd val = f(x.x(), x.y());
        if (val.size() != n_components) {
            std::ostringstream msg;
            msg << "map returned " << val.size() << " components at vertex " << v
                << ", expected " << n_components;
            throw EvaluationError(msg.str());
        }
        if (!val.allFinite()) {
            std::ostringstream msg;
            msg << "map returned a non-finite value at vertex " << v << " ("
                << x.x() << ", " << x.y() << ")";
            throw EvaluationError(msg.str());
        }
        field.values().row(v) = val.transpose();
    }
    return field;
}

BoundaryValues l2_project_boundary(const TriMesh& mesh, const MapFn& g,
                                   int n_components) {
    const std::vector<int>& loop = mesh.boundary_loop();
    const int nb = static_cast<int>(loop.size());

    std::vector<double> edge_len(nb);
    for (int i = 0; i < nb; ++i) {
        const Eigen::Vector2d& a = mesh.vertex(loop[i]);
        const Eigen::Vector2d& b = mesh.vertex(loop[(i + 1) % nb]);
        edge_len[i] = (b - a).norm();
        if (!(edge_len[i] > 0.0)) throw MeshCorruptionError("zero-length boundary edge");
    }

    // Cyclic tridiagonal mass matrix of the 1D trace space.
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(3) * nb);
    for (int i = 0; i < nb; ++i) {
        const int j = (i + 1) % nb;
        const int prev = (i + nb - 1) % nb;
        trips.emplace_back(i, i, (edge_len[prev] + edge_len[i]) / 3.0);
        trips.emplace_back(i, j, edge_len[i] / 6.0);
        trips.emplace_back(j, i, edge_len[i] / 6.0);
    }
    Eigen::SparseMatrix<double> mass(nb, nb);
    mass.setFromTriplets(trips.begin(), trips.end());

    // Edge loads with a fixed Gauss rule, exact well beyond piecewise-smooth g.
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nb, n_components);
    constexpr int gauss_points = 16;
    for (int i = 0; i < nb; ++i) {
        const int j = (i + 1) % nb;
        const Eigen::Vector2d a = mesh.vertex(loop[i]);
        const Eigen::Vector2d b = mesh.vertex(loop[j]);
        LineIntegrand integrand = [&](double t) {
            const Eigen::Vector2d x = (1.0 - t) * a + t * b;
            Eigen::VectorXd gv = g(x.x(), x.y());
            if (gv.size() != n_components || !gv.allFinite()) {
                throw EvaluationError("boundary datum produced an unusable value");
            }
            Eigen::VectorXd out(2 * n_components);
            out.head(n_components) = (1.0 - t) * gv;
            out.tail(n_components) = t * gv;
            return out;
        };
        Eigen::VectorXd contrib =
            integrate_gauss(integrand, 2 * n_components, 0.0, 1.0, gauss_points) * edge_len[i];
        rhs.row(i) += contrib.head(n_components).transpose();
        rhs.row(j) += contrib.tail(n_components).transpose();
    }

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(mass);
    if (chol.info() != Eigen::Success) {
        throw MeshCorruptionError("boundary mass matrix factorization failed");
    }
    BoundaryValues bv;
    bv.vertices = loop;
    bv.values = chol.solve(rhs);
    if (chol.info() != Eigen::Success || !bv.values.allFinite()) {
        throw MeshCorruptionError("boundary mass solve failed");
    }
    return bv;
}

Eigen::MatrixXd l2_project_domain(const TriMesh& mesh, const MapFn& g,
                                  int n_components) {
    const int nv = mesh.num_vertices();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(9) * mesh.num_triangles());
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nv, n_components);

    for (int k = 0; k < mesh.num_triangles(); ++k) {
        const auto& t = mesh.triangle(k);
        const ElementGeometry& geo = mesh.geometry(k);
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                trips.emplace_back(t[a], t[b], geo.area / 12.0 * (a == b ? 2.0 : 1.0));
            }
        }
        const Eigen::Vector2d& v0 = mesh.vertex(t[0]);
        const Eigen::Vector2d& v1 = mesh.vertex(t[1]);
        const Eigen::Vector2d& v2 = mesh.vertex(t[2]);
        for (int a = 0; a < 3; ++a) {
            const Eigen::Vector2d va = mesh.vertex(t[a]);
            for (int c = 0; c < n_components; ++c) {
                rhs(t[a], c) += integrate_triangle(
                    [&](double x, double y) {
                        const double hat =
                            1.0 + geo.grad_basis[a].dot(Eigen::Vector2d(x, y) - va);
                        Eigen::VectorXd gv = g(x, y);
                        if (gv.size() != n_components || !gv.allFinite()) {
                            throw EvaluationError("map produced an unusable value");
                        }
                        return hat * gv[c];
                    },
                    v0, v1, v2);
            }
        }
    }

    Eigen::SparseMatrix<double> mass(nv, nv);
    mass.setFromTriplets(trips.begin(), trips.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(mass);
    if (chol.info() != Eigen::Success) {
        throw MeshCorruptionError("mass matrix factorization failed");
    }
    Eigen::MatrixXd out = chol.solve(rhs);
    if (chol.info() != Eigen::Success || !out.allFinite()) {
        throw MeshCorruptionError("mass solve failed");
    }
    return out;
}

void apply_boundary_values(VectorField& field, const BoundaryValues& bv) {
    if (bv.values.cols() != field.n_components()) {
        throw InvalidArgumentError("boundary values have the wrong component count");
    }
    for (size_t i = 0; i < bv.vertices.size(); ++i) {
        field.values().row(bv.vertices[i]) = bv.values.row(static_cast<int>(i));
    }
}

Eigen::VectorXd evaluate(const VectorField& field, double x, double y) {
    const TriMesh& mesh = field.mesh();
    const int k = mesh.locate(x, y);
    const Eigen::Vector3d lambda = mesh.barycentric(k, x, y);
    const auto& t = mesh.triangle(k);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(field.n_components());
    for (int a = 0; a < 3; ++a) {
        out += lambda[a] * field.values().row(t[a]).transpose();
    }
    return out;
}

Eigen::MatrixXd element_gradient(const VectorField& field, int k) {
    const TriMesh& mesh = field.mesh();
    const auto& t = mesh.triangle(k);
    const ElementGeometry& geo = mesh.geometry(k);
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(field.n_components(), 2);
    for (int a = 0; a < 3; ++a) {
        grad += field.values().row(t[a]).transpose() * geo.grad_basis[a].transpose();
    }
    return grad;
}

double max_nodal_difference(const VectorField& a, const VectorField& b) {
    if (a.values().rows() != b.values().rows() || a.values().cols() != b.values().cols()) {
        throw InvalidArgumentError("fields are not comparable");
    }
    return (a.values() - b.values()).cwiseAbs().maxCoeff();
}

} // namespace infharm
