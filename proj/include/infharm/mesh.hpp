#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

namespace infharm {

// Per-element data precomputed at construction: area, diameter, inradius and
// the constant gradients of the three local hat basis functions.
struct ElementGeometry {
    double area;
    double h;
    double rho;
    std::array<Eigen::Vector2d, 3> grad_basis;
};

// Conforming triangulation of a planar domain, by default the square
// (-1,1) x (-1,1). Immutable after construction.
class TriMesh {
public:
    TriMesh(std::vector<Eigen::Vector2d> vertices,
            std::vector<std::array<int, 3>> triangles);

    // Structured mesh: m x m grid of squares on (-1,1)^2, each split along the
    // diagonal running from its bottom-left to its top-right corner.
    static TriMesh structured(int m);

    int num_vertices() const { return static_cast<int>(vertices_.size()); }
    int num_triangles() const { return static_cast<int>(triangles_.size()); }
    const Eigen::Vector2d& vertex(int v) const { return vertices_[v]; }
    const std::array<int, 3>& triangle(int k) const { return triangles_[k]; }
    const ElementGeometry& geometry(int k) const { return geometry_[k]; }

    const std::vector<int>& boundary_vertices() const { return boundary_vertices_; }
    bool is_boundary_vertex(int v) const { return is_boundary_[v]; }

    // Boundary vertices walked as a single closed loop, in the orientation
    // induced by the counterclockwise triangles. Throws MeshCorruptionError
    // if the boundary is not one cycle.
    const std::vector<int>& boundary_loop() const;

    double h_max() const { return h_max_; }
    double mu() const { return mu_; }
    double total_area() const { return total_area_; }

    // Grid resolution for structured meshes, 0 otherwise.
    int structured_m() const { return structured_m_; }

    // Index of an element containing (x, y); points within 1e-12 of the
    // domain are accepted, anything farther throws OutOfDomainError.
    int locate(double x, double y) const;

    // Barycentric coordinates of (x, y) within element k.
    Eigen::Vector3d barycentric(int k, double x, double y) const;

    // Elements adjacent to each vertex.
    const std::vector<std::vector<int>>& vertex_elements() const { return vertex_elements_; }

private:
    std::vector<Eigen::Vector2d> vertices_;
    std::vector<std::array<int, 3>> triangles_;
    std::vector<ElementGeometry> geometry_;
    std::vector<int> boundary_vertices_;
    std::vector<char> is_boundary_;
    std::vector<int> boundary_loop_;
    std::vector<std::vector<int>> vertex_elements_;
    double h_max_ = 0.0;
    double mu_ = 0.0;
    double total_area_ = 0.0;
    int structured_m_ = 0;
};

} // namespace infharm
