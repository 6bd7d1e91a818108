#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

#include "infharm/fespace.hpp"

namespace infharm {

// One experiment: target dimension, boundary datum (defined on the closed
// square so it can double as a cold-start initial guess), and, where the
// datum comes from the explicit integral map, its parametrisation K.
struct ProblemSpec {
    std::string id;
    std::string name;
    int n_components = 2;
    MapFn g;
    std::function<double(double)> K;
    std::function<double(double)> K_deriv;
    double scale = 1.0;
};

// Parametrisation with a single flat region on the negative axis:
// K(t) = 1 - 1/(1 + t^2) for t > 0, 0 otherwise. C^1 at the origin.
double K_triple(double t);
double K_triple_deriv(double t);

// Odd parametrisation flat on [-1, 1]:
// K(t) = 1 - 1/(2 + (t-1)^2) for t > 1, 1/(2 + (t+1)^2) - 1 for t < -1,
// 0 otherwise. Note the jump at |t| = 1 (the formula is kept as written);
// the smoothed variant replaces the denominator by 1 + (t∓1)^2, which makes
// K continuous.
double K_box(double t);
double K_box_deriv(double t);
double K_box_smoothed(double t);
double K_box_smoothed_deriv(double t);

// The explicit map u(x, y) = integral from y to x of (cos K(t), sin K(t)) dt,
// evaluated by adaptive quadrature to absolute tolerance quad_tol per
// component. Antisymmetric in (x, y).
Eigen::Vector2d exact_map(double x, double y, const std::function<double(double)>& K,
                          double quad_tol);

// Arc-length fraction in [0, 1) along the boundary of (-1,1)^2, measured
// counterclockwise from (-1,-1), and its inverse.
double boundary_parameter(double x, double y);
Eigen::Vector2d boundary_point(double s);

// Build one of the named experiments: mixed2d, mixed3d, rank1, triple, box.
// quad_tol controls the integral-map data; smoothed_box selects the
// continuous variant of the box parametrisation.
ProblemSpec make_problem(const std::string& id, double quad_tol = 1e-12,
                         bool smoothed_box = false);

// Custom datum tabulated against the boundary arc-length fraction, linearly
// interpolated and wrapped cyclically. Each file line: s v1 ... vN.
ProblemSpec make_custom_problem(const std::string& table_path);

// The datum of a spec at a point (same as spec.g, with argument checks).
Eigen::VectorXd boundary_datum(const ProblemSpec& spec, double x, double y);

} // namespace infharm
