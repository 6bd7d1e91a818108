#include "infharm/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <sstream>
#include <vector>

#include "infharm/exceptions.hpp"

namespace infharm {

namespace {

// 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
// xgk holds the nonnegative abscissae in decreasing order; even indices are
// Kronrod-only points, odd indices the embedded Gauss points, index 7 is 0.
const double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

const double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

const double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

struct Panel {
    double a;
    double b;
    Eigen::VectorXd integral;
    Eigen::VectorXd err;
    double err_max;
};

Eigen::VectorXd checked_eval(const LineIntegrand& f, int n_components, double t) {
    Eigen::VectorXd v = f(t);
    if (v.size() != n_components) {
        std::ostringstream msg;
        msg << "integrand returned " << v.size() << " components, expected "
            << n_components;
        throw InvalidArgumentError(msg.str());
    }
    if (!v.allFinite()) {
        std::ostringstream msg;
        msg << "integrand non-finite at t = " << t;
        throw QuadratureError(msg.str());
    }
    return v;
}

Panel eval_panel(const LineIntegrand& f, int n_components, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    Eigen::VectorXd fc = checked_eval(f, n_components, center);
    Eigen::VectorXd resg = kWg[3] * fc;
    Eigen::VectorXd resk = kWgk[7] * fc;

    for (int j = 0; j < 7; ++j) {
        const double x = half * kXgk[j];
        Eigen::VectorXd fsum = checked_eval(f, n_components, center - x) +
                               checked_eval(f, n_components, center + x);
        resk += kWgk[j] * fsum;
        if (j % 2 == 1) resg += kWg[(j - 1) / 2] * fsum;
    }

    Panel p;
    p.a = a;
    p.b = b;
    p.integral = resk * half;
    p.err = ((resk - resg) * half).cwiseAbs();
    p.err_max = p.err.size() > 0 ? p.err.maxCoeff() : 0.0;
    return p;
}

} // namespace

Eigen::VectorXd integrate_adaptive(const LineIntegrand& f, int n_components,
                                   double a, double b, double abs_tol,
                                   int max_intervals) {
    if (n_components < 1) throw InvalidArgumentError("n_components must be positive");
    if (!(abs_tol > 0.0)) throw InvalidArgumentError("abs_tol must be positive");
    if (a == b) return Eigen::VectorXd::Zero(n_components);

    double lo = a, hi = b;
    double sign = 1.0;
    if (lo > hi) {
        std::swap(lo, hi);
        sign = -1.0;
    }

    auto worse = [](const Panel& x, const Panel& y) { return x.err_max < y.err_max; };
    std::priority_queue<Panel, std::vector<Panel>, decltype(worse)> heap(worse);

    Eigen::VectorXd total = Eigen::VectorXd::Zero(n_components);
    Eigen::VectorXd total_err = Eigen::VectorXd::Zero(n_components);

    Panel root = eval_panel(f, n_components, lo, hi);
    total += root.integral;
    total_err += root.err;
    heap.push(std::move(root));
    int n_panels = 1;

    while (total_err.maxCoeff() > abs_tol) {
        if (n_panels >= max_intervals) {
            std::ostringstream msg;
            msg << "adaptive quadrature: tolerance " << abs_tol
                << " not reached with " << max_intervals << " intervals"
                << " (remaining error " << total_err.maxCoeff() << ")";
            throw QuadratureError(msg.str());
        }
        Panel worst = heap.top();
        heap.pop();
        total -= worst.integral;
        total_err -= worst.err;

        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            // Interval collapsed to machine precision; accept its estimate.
            total += worst.integral;
            total_err += worst.err;
            heap.push(std::move(worst));
            break;
        }
        Panel left = eval_panel(f, n_components, worst.a, mid);
        Panel right = eval_panel(f, n_components, mid, worst.b);
        total += left.integral + right.integral;
        total_err += left.err + right.err;
        heap.push(std::move(left));
        heap.push(std::move(right));
        ++n_panels;
    }

    return sign * total;
}

const GaussRule& gauss_legendre_rule(int n_points) {
    if (n_points < 1) throw InvalidArgumentError("Gauss rule needs n >= 1");
    static std::map<int, GaussRule> cache;
    auto it = cache.find(n_points);
    if (it != cache.end()) return it->second;

    GaussRule rule;
    rule.nodes.resize(n_points);
    rule.weights.resize(n_points);
    const int half = (n_points + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n_points + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 1; j <= n_points; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = n_points * (z * p1 - p2) / (z * z - 1.0);
            const double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        rule.nodes[i] = -z;
        rule.nodes[n_points - 1 - i] = z;
        const double w = 2.0 / ((1.0 - z * z) * pp * pp);
        rule.weights[i] = w;
        rule.weights[n_points - 1 - i] = w;
    }
    auto [pos, inserted] = cache.emplace(n_points, std::move(rule));
    (void)inserted;
    return pos->second;
}

Eigen::VectorXd integrate_gauss(const LineIntegrand& f, int n_components,
                                double a, double b, int n_points) {
    if (n_components < 1) throw InvalidArgumentError("n_components must be positive");
    const GaussRule& rule = gauss_legendre_rule(n_points);
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(n_components);
    for (int i = 0; i < n_points; ++i) {
        sum += rule.weights[i] * checked_eval(f, n_components, center + half * rule.nodes[i]);
    }
    return sum * half;
}

double integrate_triangle(const std::function<double(double, double)>& f,
                          const Eigen::Vector2d& v0,
                          const Eigen::Vector2d& v1,
                          const Eigen::Vector2d& v2) {
    const double s15 = std::sqrt(15.0);
    const double a = (6.0 + s15) / 21.0;
    const double b = (6.0 - s15) / 21.0;
    const double wa = (155.0 + s15) / 1200.0;
    const double wb = (155.0 - s15) / 1200.0;

    // Barycentric coordinates and weights of the degree-5 rule.
    const double pts[7][3] = {
        {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
        {a, a, 1.0 - 2.0 * a},
        {a, 1.0 - 2.0 * a, a},
        {1.0 - 2.0 * a, a, a},
        {b, b, 1.0 - 2.0 * b},
        {b, 1.0 - 2.0 * b, b},
        {1.0 - 2.0 * b, b, b}};
    const double wts[7] = {9.0 / 40.0, wa, wa, wa, wb, wb, wb};

    const Eigen::Vector2d e1 = v1 - v0;
    const Eigen::Vector2d e2 = v2 - v0;
    const double area = 0.5 * std::abs(e1.x() * e2.y() - e1.y() * e2.x());

    double sum = 0.0;
    for (int q = 0; q < 7; ++q) {
        const Eigen::Vector2d x = pts[q][0] * v0 + pts[q][1] * v1 + pts[q][2] * v2;
        sum += wts[q] * f(x.x(), x.y());
    }
    return sum * area;
}

} // namespace infharm
