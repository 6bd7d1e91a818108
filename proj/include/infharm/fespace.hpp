#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

#include "infharm/mesh.hpp"

namespace infharm {

// A map from the plane into R^N, evaluated pointwise.
using MapFn = std::function<Eigen::VectorXd(double, double)>;

// Continuous piecewise-linear vector field on a TriMesh, stored as one nodal
// value row per vertex.
class VectorField {
public:
    VectorField(std::shared_ptr<const TriMesh> mesh, int n_components);

    const TriMesh& mesh() const { return *mesh_; }
    const std::shared_ptr<const TriMesh>& mesh_ptr() const { return mesh_; }
    int n_components() const { return static_cast<int>(values_.cols()); }

    Eigen::MatrixXd& values() { return values_; }
    const Eigen::MatrixXd& values() const { return values_; }

private:
    std::shared_ptr<const TriMesh> mesh_;
    Eigen::MatrixXd values_;
};

// Nodal interpolant of f. Throws EvaluationError if f returns a non-finite
// or mis-sized value at some vertex.
VectorField interpolate(std::shared_ptr<const TriMesh> mesh, const MapFn& f,
                        int n_components);

// Boundary nodal values, aligned with the vertices listed in `vertices`.
struct BoundaryValues {
    std::vector<int> vertices;
    Eigen::MatrixXd values;
};

// L2 projection of g onto the trace space of the piecewise-linear space on
// the boundary loop, one cyclic tridiagonal mass system per component.
BoundaryValues l2_project_boundary(const TriMesh& mesh, const MapFn& g,
                                   int n_components);

// L2 projection of g onto the full piecewise-linear space over the domain.
// Exposed for completeness; the solver consumes only the boundary projection.
Eigen::MatrixXd l2_project_domain(const TriMesh& mesh, const MapFn& g,
                                  int n_components);

// Overwrite the field rows listed in bv with the projected values.
void apply_boundary_values(VectorField& field, const BoundaryValues& bv);

// Pointwise evaluation by barycentric interpolation.
Eigen::VectorXd evaluate(const VectorField& field, double x, double y);

// Constant gradient of the field on element k, one row per component.
Eigen::MatrixXd element_gradient(const VectorField& field, int k);

// Largest absolute nodal difference between two fields on the same mesh.
double max_nodal_difference(const VectorField& a, const VectorField& b);

} // namespace infharm
