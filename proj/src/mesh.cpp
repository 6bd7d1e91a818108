#include "infharm/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "infharm/exceptions.hpp"

namespace infharm {

namespace {

using EdgeKey = std::pair<int, int>;

EdgeKey edge_key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

} // namespace

TriMesh::TriMesh(std::vector<Eigen::Vector2d> vertices,
                 std::vector<std::array<int, 3>> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
    const int nv = num_vertices();
    const int nt = num_triangles();
    if (nv < 3 || nt < 1) throw MeshCorruptionError("mesh needs at least one triangle");

    geometry_.resize(nt);
    vertex_elements_.assign(nv, {});
    total_area_ = 0.0;
    h_max_ = 0.0;
    mu_ = std::numeric_limits<double>::infinity();

    for (int k = 0; k < nt; ++k) {
        const auto& t = triangles_[k];
        for (int a : t) {
            if (a < 0 || a >= nv) throw MeshCorruptionError("triangle vertex index out of range");
        }
        const Eigen::Vector2d& p0 = vertices_[t[0]];
        const Eigen::Vector2d& p1 = vertices_[t[1]];
        const Eigen::Vector2d& p2 = vertices_[t[2]];
        const Eigen::Vector2d e1 = p1 - p0;
        const Eigen::Vector2d e2 = p2 - p0;
        const double twice_area = e1.x() * e2.y() - e1.y() * e2.x();
        if (!(twice_area > 0.0)) {
            std::ostringstream msg;
            msg << "element " << k << " degenerate or not counterclockwise (2|K| = "
                << twice_area << ")";
            throw MeshCorruptionError(msg.str());
        }

        ElementGeometry g;
        g.area = 0.5 * twice_area;
        const double l0 = (p2 - p1).norm();
        const double l1 = (p0 - p2).norm();
        const double l2 = (p1 - p0).norm();
        g.h = std::max({l0, l1, l2});
        g.rho = twice_area / (l0 + l1 + l2);

        // grad of the hat at local vertex a: rotate the opposite edge by 90
        // degrees and scale by 1/(2|K|).
        const Eigen::Vector2d d0 = p2 - p1;
        const Eigen::Vector2d d1 = p0 - p2;
        const Eigen::Vector2d d2 = p1 - p0;
        g.grad_basis[0] = Eigen::Vector2d(-d0.y(), d0.x()) / twice_area;
        g.grad_basis[1] = Eigen::Vector2d(-d1.y(), d1.x()) / twice_area;
        g.grad_basis[2] = Eigen::Vector2d(-d2.y(), d2.x()) / twice_area;

        geometry_[k] = g;
        total_area_ += g.area;
        h_max_ = std::max(h_max_, g.h);
        mu_ = std::min(mu_, g.rho / g.h);
        for (int a : t) vertex_elements_[a].push_back(k);
    }

    // Boundary edges appear in exactly one triangle. Directed edges of a
    // counterclockwise triangle traverse the domain boundary counterclockwise.
    std::map<EdgeKey, int> edge_count;
    std::map<EdgeKey, std::pair<int, int>> edge_directed;
    for (int k = 0; k < nt; ++k) {
        const auto& t = triangles_[k];
        for (int i = 0; i < 3; ++i) {
            const int a = t[i];
            const int b = t[(i + 1) % 3];
            auto key = edge_key(a, b);
            auto [it, inserted] = edge_count.emplace(key, 0);
            it->second += 1;
            if (it->second > 2) throw MeshCorruptionError("edge shared by more than two triangles");
            if (inserted) edge_directed[key] = {a, b};
        }
    }

    is_boundary_.assign(nv, 0);
    std::map<int, int> loop_next;
    for (const auto& [key, count] : edge_count) {
        if (count != 1) continue;
        const auto [a, b] = edge_directed[key];
        is_boundary_[a] = 1;
        is_boundary_[b] = 1;
        loop_next[a] = b;
    }
    for (int v = 0; v < nv; ++v) {
        if (is_boundary_[v]) boundary_vertices_.push_back(v);
    }
    if (boundary_vertices_.empty()) throw MeshCorruptionError("mesh has no boundary");

    // Walk the boundary cycle from the smallest boundary vertex.
    boundary_loop_.clear();
    const int start = boundary_vertices_.front();
    int cur = start;
    for (size_t step = 0; step <= loop_next.size(); ++step) {
        boundary_loop_.push_back(cur);
        auto it = loop_next.find(cur);
        if (it == loop_next.end()) {
            boundary_loop_.clear();
            break;
        }
        cur = it->second;
        if (cur == start) break;
    }
    if (!boundary_loop_.empty() && (cur != start || boundary_loop_.size() != loop_next.size())) {
        boundary_loop_.clear();
    }
}

const std::vector<int>& TriMesh::boundary_loop() const {
    if (boundary_loop_.empty()) {
        throw MeshCorruptionError("boundary is not a single closed loop");
    }
    return boundary_loop_;
}

TriMesh TriMesh::structured(int m) {
    if (m < 1) throw InvalidArgumentError("structured mesh needs m >= 1");
    const int n = m + 1;
    std::vector<Eigen::Vector2d> vertices(static_cast<size_t>(n) * n);
    for (int j = 0; j <= m; ++j) {
        for (int i = 0; i <= m; ++i) {
            vertices[static_cast<size_t>(j) * n + i] =
                Eigen::Vector2d(-1.0 + 2.0 * i / m, -1.0 + 2.0 * j / m);
        }
    }
    std::vector<std::array<int, 3>> triangles;
    triangles.reserve(static_cast<size_t>(2) * m * m);
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < m; ++i) {
            const int bl = j * n + i;
            const int br = bl + 1;
            const int tl = bl + n;
            const int tr = tl + 1;
            triangles.push_back({bl, br, tr});
            triangles.push_back({bl, tr, tl});
        }
    }
    TriMesh mesh(std::move(vertices), std::move(triangles));
    mesh.structured_m_ = m;
    return mesh;
}

Eigen::Vector3d TriMesh::barycentric(int k, double x, double y) const {
    const auto& t = triangles_[k];
    const Eigen::Vector2d& p0 = vertices_[t[0]];
    const Eigen::Vector2d& p1 = vertices_[t[1]];
    const Eigen::Vector2d& p2 = vertices_[t[2]];
    const double twice_area = 2.0 * geometry_[k].area;
    const double l0 = ((p1.x() - x) * (p2.y() - y) - (p2.x() - x) * (p1.y() - y)) / twice_area;
    const double l1 = ((p2.x() - x) * (p0.y() - y) - (p0.x() - x) * (p2.y() - y)) / twice_area;
    return {l0, l1, 1.0 - l0 - l1};
}

int TriMesh::locate(double x, double y) const {
    constexpr double tol = 1e-12;
    if (structured_m_ > 0) {
        const int m = structured_m_;
        if (x < -1.0 - tol || x > 1.0 + tol || y < -1.0 - tol || y > 1.0 + tol) {
            std::ostringstream msg;
            msg << "point (" << x << ", " << y << ") outside the domain";
            throw OutOfDomainError(msg.str());
        }
        const double gx = std::clamp((x + 1.0) * 0.5 * m, 0.0, static_cast<double>(m));
        const double gy = std::clamp((y + 1.0) * 0.5 * m, 0.0, static_cast<double>(m));
        int i = std::min(static_cast<int>(gx), m - 1);
        int j = std::min(static_cast<int>(gy), m - 1);
        const double xi = gx - i;
        const double eta = gy - j;
        int k = 2 * (j * m + i) + (eta > xi ? 1 : 0);
        if (barycentric(k, x, y).minCoeff() >= -1e-10) return k;
        // Rounding near a cell edge: try the cell's twin and neighbours.
        for (int dj = -1; dj <= 1; ++dj) {
            for (int di = -1; di <= 1; ++di) {
                const int ii = i + di;
                const int jj = j + dj;
                if (ii < 0 || ii >= m || jj < 0 || jj >= m) continue;
                for (int half = 0; half < 2; ++half) {
                    const int kk = 2 * (jj * m + ii) + half;
                    if (barycentric(kk, x, y).minCoeff() >= -1e-10) return kk;
                }
            }
        }
    }
    // General fallback: scan all elements with a scaled tolerance.
    int best = -1;
    double best_min = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < num_triangles(); ++k) {
        const double mc = barycentric(k, x, y).minCoeff();
        if (mc > best_min) {
            best_min = mc;
            best = k;
        }
        if (mc >= 0.0) return k;
    }
    if (best >= 0 && best_min >= -tol / geometry_[best].h) return best;
    std::ostringstream msg;
    msg << "point (" << x << ", " << y << ") outside the domain";
    throw OutOfDomainError(msg.str());
}

} // namespace infharm
