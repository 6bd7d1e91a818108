#pragma once

#include <Eigen/Dense>
#include <vector>

#include "infharm/fespace.hpp"

namespace infharm {

// Nodal gradient recovered by area-weighted averaging of the element-constant
// gradients; entry layout per vertex row: (d1/dx, d1/dy, d2/dx, d2/dy, ...).
struct GradientField {
    std::shared_ptr<const TriMesh> mesh;
    int n_components = 0;
    Eigen::MatrixXd values;

    Eigen::MatrixXd at_vertex(int v) const {
        Eigen::MatrixXd G(n_components, 2);
        for (int c = 0; c < n_components; ++c) {
            G(c, 0) = values(v, 2 * c);
            G(c, 1) = values(v, 2 * c + 1);
        }
        return G;
    }
};

GradientField recover_nodal_gradient(const VectorField& field);

// Per-element determinant of the constant gradient (two components only).
std::vector<double> det_field(const VectorField& field);

// Area-weighted average of an element-constant scalar field to the vertices.
Eigen::VectorXd nodal_average(const TriMesh& mesh, const std::vector<double>& per_element);

// One extracted level line: chained edge-crossing points of the linear
// interpolant. `level` is the requested value (before any tie-break nudge).
struct Polyline {
    double level = 0.0;
    bool closed = false;
    std::vector<Eigen::Vector2d> points;
};

// Marching triangles on a nodal scalar field. Levels colliding exactly with
// a nodal value are nudged by 1e-13 deterministically.
std::vector<Polyline> contour_extract(const TriMesh& mesh,
                                      const Eigen::VectorXd& nodal,
                                      const std::vector<double>& levels);

// Orthogonal projection onto the complement of the range of G, via the
// singular value decomposition with a relative rank threshold.
Eigen::MatrixXd ortho_projection(const Eigen::MatrixXd& G, double rank_tol = 1e-8);

// Per-element phase data: rank classes split the domain into the full-rank
// region (rank 2), the rank-deficient region, and their areas.
struct PhaseField {
    std::vector<double> det;                      // empty unless N = 2
    std::vector<double> grad_norm;                // Frobenius norm per element
    std::vector<Eigen::Vector2d> singular_values; // (sigma1 >= sigma2)
    std::vector<int> rank_class;
    double omega1_area = 0.0; // rank <= 1
    double omega2_area = 0.0; // rank = 2
    double tau = 0.0;
    std::vector<Polyline> contours;
};

// Element rank = number of singular values exceeding tau * max(1, sigma_max).
// For two-component fields, contours of the nodal-averaged determinant are
// extracted at the given levels.
PhaseField rank_classify(const VectorField& field, double tau = 0.05,
                         const std::vector<double>& contour_levels = {});

// Residuals of the limit system, split into the tangential part
// |Du (Du : D^2u)| and the normal part ||Du|^2 [Du]perp (Lap u)|, evaluated
// per element from the recovered gradient and its element-constant gradient.
struct ResidualField {
    std::vector<double> tangential;
    std::vector<double> normal;
    double max_tangential = 0.0;
    double max_normal = 0.0;
    // sqrt(sum |K| r_K^2), the domain L2 aggregate.
    double l2_tangential = 0.0;
    double l2_normal = 0.0;
};

ResidualField infinity_residuals(const VectorField& field);

// Angle between the two partial-derivative columns per element, in [0, pi];
// NaN marks elements where a column vanishes.
std::vector<double> angle_field(const VectorField& field);

struct AngleStats {
    double mean = 0.0;
    double stddev = 0.0;
    int undefined_elements = 0;
};

AngleStats angle_stats(const TriMesh& mesh, const std::vector<double>& angles);

// Vertices pushed through the field, same connectivity: a polyhedral surface
// for three components, a deformed planar mesh for two.
struct SurfaceMesh {
    Eigen::MatrixXd vertices;
    std::vector<std::array<int, 3>> triangles;
};

SurfaceMesh image_surface(const VectorField& field);

// Aggregates used by convergence studies and trend gates.
double l2_distance(const VectorField& field, const MapFn& reference);
double sup_vertex_distance(const VectorField& field, const MapFn& reference);
double integral_sigma2(const VectorField& field);
double region_mean(const TriMesh& mesh, const std::vector<double>& per_element,
                   double xmin, double xmax, double ymin, double ymax);

} // namespace infharm
