#include "infharm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "infharm/exceptions.hpp"
#include "infharm/quadrature.hpp"

namespace infharm {

GradientField recover_nodal_gradient(const VectorField& field) {
    const TriMesh& mesh = field.mesh();
    const int N = field.n_components();
    const int nv = mesh.num_vertices();

    GradientField out;
    out.mesh = field.mesh_ptr();
    out.n_components = N;
    out.values = Eigen::MatrixXd::Zero(nv, 2 * N);

    Eigen::VectorXd weight = Eigen::VectorXd::Zero(nv);
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        const Eigen::MatrixXd G = element_gradient(field, k);
        const double area = mesh.geometry(k).area;
        for (int a : mesh.triangle(k)) {
            weight[a] += area;
            for (int c = 0; c < N; ++c) {
                out.values(a, 2 * c) += area * G(c, 0);
                out.values(a, 2 * c + 1) += area * G(c, 1);
            }
        }
    }
    for (int v = 0; v < nv; ++v) {
        out.values.row(v) /= weight[v];
    }
    return out;
}

std::vector<double> det_field(const VectorField& field) {
    if (field.n_components() != 2) {
        throw InvalidArgumentError(
            "determinant field needs a two-component map; use rank_classify for others");
    }
    const TriMesh& mesh = field.mesh();
    std::vector<double> det(mesh.num_triangles());
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        const Eigen::MatrixXd G = element_gradient(field, k);
        det[k] = G(0, 0) * G(1, 1) - G(0, 1) * G(1, 0);
    }
    return det;
}

Eigen::VectorXd nodal_average(const TriMesh& mesh, const std::vector<double>& per_element) {
    if (static_cast<int>(per_element.size()) != mesh.num_triangles()) {
        throw InvalidArgumentError("element field size does not match the mesh");
    }
    Eigen::VectorXd nodal = Eigen::VectorXd::Zero(mesh.num_vertices());
    Eigen::VectorXd weight = Eigen::VectorXd::Zero(mesh.num_vertices());
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        const double area = mesh.geometry(k).area;
        for (int a : mesh.triangle(k)) {
            nodal[a] += area * per_element[k];
            weight[a] += area;
        }
    }
    return (nodal.array() / weight.array()).matrix();
}

namespace {

using EdgeKey = std::pair<int, int>;

EdgeKey edge_key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

// Segments of one level inside the mesh, keyed by the crossed edges.
struct LevelSegments {
    std::map<EdgeKey, Eigen::Vector2d> cross_point;
    std::map<EdgeKey, std::vector<EdgeKey>> adjacency;
};

} // namespace

std::vector<Polyline> contour_extract(const TriMesh& mesh,
                                      const Eigen::VectorXd& nodal,
                                      const std::vector<double>& levels) {
    if (nodal.size() != mesh.num_vertices()) {
        throw InvalidArgumentError("nodal field size does not match the mesh");
    }
    for (double level : levels) {
        if (!std::isfinite(level)) throw InvalidArgumentError("contour level must be finite");
    }

    std::vector<Polyline> result;
    for (double requested : levels) {
        // Deterministic nudge while the level collides with a nodal value.
        double level = requested;
        for (int attempt = 0; attempt < 60; ++attempt) {
            bool collision = false;
            for (int v = 0; v < nodal.size(); ++v) {
                if (nodal[v] == level) {
                    collision = true;
                    break;
                }
            }
            if (!collision) break;
            level += 1e-13 * std::max(1.0, std::abs(requested)) * (attempt + 1);
        }

        LevelSegments seg;
        for (int k = 0; k < mesh.num_triangles(); ++k) {
            const auto& t = mesh.triangle(k);
            std::vector<EdgeKey> crossed;
            for (int i = 0; i < 3; ++i) {
                const int a = t[i];
                const int b = t[(i + 1) % 3];
                if ((nodal[a] - level) * (nodal[b] - level) < 0.0) {
                    const EdgeKey key = edge_key(a, b);
                    crossed.push_back(key);
                    if (!seg.cross_point.count(key)) {
                        const double tt = (level - nodal[a]) / (nodal[b] - nodal[a]);
                        seg.cross_point[key] =
                            (1.0 - tt) * mesh.vertex(a) + tt * mesh.vertex(b);
                    }
                }
            }
            if (crossed.size() == 2) {
                seg.adjacency[crossed[0]].push_back(crossed[1]);
                seg.adjacency[crossed[1]].push_back(crossed[0]);
            }
        }

        // Chain segments into polylines: open chains first (from endpoints of
        // degree one), then the remaining closed loops.
        std::map<EdgeKey, bool> used;
        for (const auto& [key, pt] : seg.cross_point) used[key] = false;

        auto walk = [&](const EdgeKey& start, bool closed) {
            Polyline line;
            line.level = requested;
            line.closed = closed;
            EdgeKey cur = start;
            EdgeKey prev = start;
            bool first = true;
            while (true) {
                used[cur] = true;
                line.points.push_back(seg.cross_point[cur]);
                const auto& nbrs = seg.adjacency[cur];
                EdgeKey next;
                bool found = false;
                for (const auto& nb : nbrs) {
                    if (!used[nb] && (first || nb != prev)) {
                        next = nb;
                        found = true;
                        break;
                    }
                }
                if (!found) break;
                prev = cur;
                cur = next;
                first = false;
            }
            if (closed && line.points.size() > 2) {
                line.points.push_back(line.points.front());
            }
            return line;
        };

        for (const auto& [key, nbrs] : seg.adjacency) {
            if (used[key] || nbrs.size() != 1) continue;
            result.push_back(walk(key, false));
        }
        for (const auto& [key, nbrs] : seg.adjacency) {
            if (used[key]) continue;
            result.push_back(walk(key, true));
        }
    }
    return result;
}

Eigen::MatrixXd ortho_projection(const Eigen::MatrixXd& G, double rank_tol) {
    if (!(rank_tol > 0.0)) throw InvalidArgumentError("rank_tol must be positive");
    const int N = static_cast<int>(G.rows());
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(G, Eigen::ComputeThinU);
    const Eigen::VectorXd& sigma = svd.singularValues();
    const double sigma_max = sigma.size() > 0 ? sigma[0] : 0.0;
    Eigen::MatrixXd P = Eigen::MatrixXd::Identity(N, N);
    if (sigma_max <= 0.0) return P;
    for (int i = 0; i < sigma.size(); ++i) {
        if (sigma[i] > rank_tol * sigma_max) {
            const Eigen::VectorXd q = svd.matrixU().col(i);
            P -= q * q.transpose();
        }
    }
    return P;
}

PhaseField rank_classify(const VectorField& field, double tau,
                         const std::vector<double>& contour_levels) {
    if (!(tau > 0.0)) throw InvalidArgumentError("tau must be positive");
    const TriMesh& mesh = field.mesh();
    const int nt = mesh.num_triangles();

    PhaseField phase;
    phase.tau = tau;
    phase.grad_norm.resize(nt);
    phase.singular_values.resize(nt);
    phase.rank_class.resize(nt);
    const bool planar = field.n_components() == 2;
    if (planar) phase.det.resize(nt);

    for (int k = 0; k < nt; ++k) {
        const Eigen::MatrixXd G = element_gradient(field, k);
        phase.grad_norm[k] = G.norm();
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(G);
        const Eigen::VectorXd& sigma = svd.singularValues();
        const double s1 = sigma.size() > 0 ? sigma[0] : 0.0;
        const double s2 = sigma.size() > 1 ? sigma[1] : 0.0;
        phase.singular_values[k] = {s1, s2};
        if (planar) {
            phase.det[k] = G(0, 0) * G(1, 1) - G(0, 1) * G(1, 0);
        }
        const double threshold = tau * std::max(1.0, s1);
        int rank = 0;
        if (s1 > threshold) ++rank;
        if (s2 > threshold) ++rank;
        phase.rank_class[k] = rank;
        const double area = mesh.geometry(k).area;
        if (rank <= 1) {
            phase.omega1_area += area;
        } else {
            phase.omega2_area += area;
        }
    }

    if (planar && !contour_levels.empty()) {
        const Eigen::VectorXd nodal_det = nodal_average(mesh, phase.det);
        phase.contours = contour_extract(mesh, nodal_det, contour_levels);
    }
    return phase;
}

ResidualField infinity_residuals(const VectorField& field) {
    const TriMesh& mesh = field.mesh();
    const int N = field.n_components();
    const int nt = mesh.num_triangles();

    const GradientField recovered = recover_nodal_gradient(field);

    // The recovered gradient is itself piecewise linear; its element-constant
    // gradient provides the second derivatives H[c](i, j) = d2 u_c / dxi dxj.
    VectorField grad_as_field(field.mesh_ptr(), 2 * N);
    grad_as_field.values() = recovered.values;

    ResidualField res;
    res.tangential.resize(nt);
    res.normal.resize(nt);
    double acc_t = 0.0;
    double acc_n = 0.0;

    for (int k = 0; k < nt; ++k) {
        // Gradient at the element barycenter (mean of the vertex values).
        const auto& t = mesh.triangle(k);
        Eigen::MatrixXd G = Eigen::MatrixXd::Zero(N, 2);
        for (int a : t) {
            for (int c = 0; c < N; ++c) {
                G(c, 0) += recovered.values(a, 2 * c) / 3.0;
                G(c, 1) += recovered.values(a, 2 * c + 1) / 3.0;
            }
        }

        const Eigen::MatrixXd H2 = element_gradient(grad_as_field, k); // (2N) x 2
        auto hess = [&](int c, int i, int j) { return H2(2 * c + i, j); };

        // Tangential part: T_alpha = G(alpha, i) * w_i with
        // w_i = sum_{c, j} G(c, j) H[c](i, j).
        Eigen::Vector2d w = Eigen::Vector2d::Zero();
        for (int i = 0; i < 2; ++i) {
            for (int c = 0; c < N; ++c) {
                for (int j = 0; j < 2; ++j) {
                    w[i] += G(c, j) * hess(c, i, j);
                }
            }
        }
        const Eigen::VectorXd tangential = G * w;
        res.tangential[k] = tangential.norm();

        // Normal part: |G|^2 * P * (Lap u) with P the projection onto the
        // complement of the range of G.
        Eigen::VectorXd lap(N);
        for (int c = 0; c < N; ++c) lap[c] = hess(c, 0, 0) + hess(c, 1, 1);
        const Eigen::MatrixXd P = ortho_projection(G);
        const Eigen::VectorXd normal = G.squaredNorm() * (P * lap);
        res.normal[k] = normal.norm();

        const double area = mesh.geometry(k).area;
        acc_t += area * res.tangential[k] * res.tangential[k];
        acc_n += area * res.normal[k] * res.normal[k];
        res.max_tangential = std::max(res.max_tangential, res.tangential[k]);
        res.max_normal = std::max(res.max_normal, res.normal[k]);
    }
    res.l2_tangential = std::sqrt(acc_t);
    res.l2_normal = std::sqrt(acc_n);
    return res;
}

std::vector<double> angle_field(const VectorField& field) {
    const TriMesh& mesh = field.mesh();
    std::vector<double> angles(mesh.num_triangles());
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        const Eigen::MatrixXd G = element_gradient(field, k);
        const Eigen::VectorXd dx = G.col(0);
        const Eigen::VectorXd dy = G.col(1);
        const double nx = dx.norm();
        const double ny = dy.norm();
        if (nx <= 1e-14 || ny <= 1e-14) {
            angles[k] = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        const double c = std::clamp(dx.dot(dy) / (nx * ny), -1.0, 1.0);
        angles[k] = std::acos(c);
    }
    return angles;
}

AngleStats angle_stats(const TriMesh& mesh, const std::vector<double>& angles) {
    if (static_cast<int>(angles.size()) != mesh.num_triangles()) {
        throw InvalidArgumentError("angle field size does not match the mesh");
    }
    AngleStats stats;
    double wsum = 0.0;
    double mean = 0.0;
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        if (std::isnan(angles[k])) {
            ++stats.undefined_elements;
            continue;
        }
        const double area = mesh.geometry(k).area;
        wsum += area;
        mean += area * angles[k];
    }
    if (wsum == 0.0) return stats;
    mean /= wsum;
    double var = 0.0;
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        if (std::isnan(angles[k])) continue;
        const double d = angles[k] - mean;
        var += mesh.geometry(k).area * d * d;
    }
    stats.mean = mean;
    stats.stddev = std::sqrt(var / wsum);
    return stats;
}

SurfaceMesh image_surface(const VectorField& field) {
    SurfaceMesh surf;
    surf.vertices = field.values();
    surf.triangles.reserve(field.mesh().num_triangles());
    for (int k = 0; k < field.mesh().num_triangles(); ++k) {
        surf.triangles.push_back(field.mesh().triangle(k));
    }
    return surf;
}

double l2_distance(const VectorField& field, const MapFn& reference) {
    const TriMesh& mesh = field.mesh();
    const int N = field.n_components();
    double acc = 0.0;
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        const auto& t = mesh.triangle(k);
        const Eigen::Vector2d& v0 = mesh.vertex(t[0]);
        const Eigen::Vector2d& v1 = mesh.vertex(t[1]);
        const Eigen::Vector2d& v2 = mesh.vertex(t[2]);
        acc += integrate_triangle(
            [&](double x, double y) {
                const Eigen::Vector3d lambda = mesh.barycentric(k, x, y);
                Eigen::VectorXd u = Eigen::VectorXd::Zero(N);
                for (int a = 0; a < 3; ++a) {
                    u += lambda[a] * field.values().row(t[a]).transpose();
                }
                Eigen::VectorXd r = reference(x, y);
                if (r.size() != N || !r.allFinite()) {
                    throw EvaluationError("reference map produced an unusable value");
                }
                return (u - r).squaredNorm();
            },
            v0, v1, v2);
    }
    return std::sqrt(acc);
}

double sup_vertex_distance(const VectorField& field, const MapFn& reference) {
    const TriMesh& mesh = field.mesh();
    double sup = 0.0;
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        const Eigen::Vector2d& x = mesh.vertex(v);
        Eigen::VectorXd r = reference(x.x(), x.y());
        if (r.size() != field.n_components() || !r.allFinite()) {
            throw EvaluationError("reference map produced an unusable value");
        }
        sup = std::max(sup, (field.values().row(v).transpose() - r).norm());
    }
    return sup;
}

double integral_sigma2(const VectorField& field) {
    const TriMesh& mesh = field.mesh();
    double acc = 0.0;
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        const Eigen::MatrixXd G = element_gradient(field, k);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(G);
        const Eigen::VectorXd& sigma = svd.singularValues();
        if (sigma.size() > 1) acc += mesh.geometry(k).area * sigma[1];
    }
    return acc;
}

double region_mean(const TriMesh& mesh, const std::vector<double>& per_element,
                   double xmin, double xmax, double ymin, double ymax) {
    if (static_cast<int>(per_element.size()) != mesh.num_triangles()) {
        throw InvalidArgumentError("element field size does not match the mesh");
    }
    double acc = 0.0;
    double area_acc = 0.0;
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        const auto& t = mesh.triangle(k);
        const Eigen::Vector2d bc =
            (mesh.vertex(t[0]) + mesh.vertex(t[1]) + mesh.vertex(t[2])) / 3.0;
        if (bc.x() <= xmin || bc.x() >= xmax || bc.y() <= ymin || bc.y() >= ymax) continue;
        const double area = mesh.geometry(k).area;
        acc += area * per_element[k];
        area_acc += area;
    }
    if (area_acc == 0.0) throw InvalidArgumentError("region contains no element barycenter");
    return acc / area_acc;
}

} // namespace infharm
