#pragma once

#include <Eigen/Dense>
#include <functional>

namespace infharm {

using LineIntegrand = std::function<Eigen::VectorXd(double)>;

// Adaptive Gauss-Kronrod 7/15 integration of a vector-valued integrand over
// [a, b]. Subdivides the worst interval until the estimated absolute error of
// every component is at most abs_tol, or throws QuadratureError once the
// interval budget is exhausted. Reversed limits negate the result.
Eigen::VectorXd integrate_adaptive(const LineIntegrand& f, int n_components,
                                   double a, double b, double abs_tol,
                                   int max_intervals = 4000);

// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussRule {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};

// Computed by Newton iteration on the Legendre polynomial and cached per n.
const GaussRule& gauss_legendre_rule(int n_points);

// Fixed n-point Gauss-Legendre quadrature on [a, b].
Eigen::VectorXd integrate_gauss(const LineIntegrand& f, int n_components,
                                double a, double b, int n_points);

// Seven-point degree-5 rule on the triangle with vertices v0, v1, v2.
double integrate_triangle(const std::function<double(double, double)>& f,
                          const Eigen::Vector2d& v0,
                          const Eigen::Vector2d& v1,
                          const Eigen::Vector2d& v2);

} // namespace infharm
