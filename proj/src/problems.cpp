#include "infharm/problems.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "infharm/exceptions.hpp"
#include "infharm/quadrature.hpp"

namespace infharm {

double K_triple(double t) {
    if (t > 0.0) return 1.0 - 1.0 / (1.0 + t * t);
    return 0.0;
}

double K_triple_deriv(double t) {
    if (t > 0.0) {
        const double d = 1.0 + t * t;
        return 2.0 * t / (d * d);
    }
    return 0.0;
}

double K_box(double t) {
    if (t > 1.0) return 1.0 - 1.0 / (2.0 + (t - 1.0) * (t - 1.0));
    if (t < -1.0) return 1.0 / (2.0 + (t + 1.0) * (t + 1.0)) - 1.0;
    return 0.0;
}

double K_box_deriv(double t) {
    if (t > 1.0) {
        const double d = 2.0 + (t - 1.0) * (t - 1.0);
        return 2.0 * (t - 1.0) / (d * d);
    }
    if (t < -1.0) {
        const double d = 2.0 + (t + 1.0) * (t + 1.0);
        return -2.0 * (t + 1.0) / (d * d);
    }
    return 0.0;
}

double K_box_smoothed(double t) {
    if (t > 1.0) return 1.0 - 1.0 / (1.0 + (t - 1.0) * (t - 1.0));
    if (t < -1.0) return 1.0 / (1.0 + (t + 1.0) * (t + 1.0)) - 1.0;
    return 0.0;
}

double K_box_smoothed_deriv(double t) {
    if (t > 1.0) {
        const double d = 1.0 + (t - 1.0) * (t - 1.0);
        return 2.0 * (t - 1.0) / (d * d);
    }
    if (t < -1.0) {
        const double d = 1.0 + (t + 1.0) * (t + 1.0);
        return -2.0 * (t + 1.0) / (d * d);
    }
    return 0.0;
}

Eigen::Vector2d exact_map(double x, double y, const std::function<double(double)>& K,
                          double quad_tol) {
    if (!K) throw InvalidArgumentError("exact_map needs a parametrisation");
    if (!(quad_tol > 0.0)) throw InvalidArgumentError("quad_tol must be positive");
    if (x == y) return Eigen::Vector2d::Zero();
    LineIntegrand f = [&K](double t) {
        const double k = K(t);
        Eigen::VectorXd v(2);
        v << std::cos(k), std::sin(k);
        return v;
    };
    const Eigen::VectorXd v = integrate_adaptive(f, 2, y, x, quad_tol);
    return {v[0], v[1]};
}

double boundary_parameter(double x, double y) {
    const double cx = std::clamp(x, -1.0, 1.0);
    const double cy = std::clamp(y, -1.0, 1.0);
    // Perimeter 8, sides of length 2, fractions of 1/4 per side.
    double s;
    if (cy <= -1.0 + 1e-14 && cx < 1.0) {
        s = (cx + 1.0) / 2.0 * 0.25;
    } else if (cx >= 1.0 - 1e-14 && cy < 1.0) {
        s = 0.25 + (cy + 1.0) / 2.0 * 0.25;
    } else if (cy >= 1.0 - 1e-14) {
        s = 0.5 + (1.0 - cx) / 2.0 * 0.25;
    } else if (cx <= -1.0 + 1e-14) {
        s = 0.75 + (1.0 - cy) / 2.0 * 0.25;
    } else {
        throw InvalidArgumentError("point is not on the boundary of the square");
    }
    return s >= 1.0 ? s - 1.0 : s;
}

Eigen::Vector2d boundary_point(double s) {
    double u = s - std::floor(s);
    const double along = u * 8.0;
    if (along < 2.0) return {-1.0 + along, -1.0};
    if (along < 4.0) return {1.0, -1.0 + (along - 2.0)};
    if (along < 6.0) return {1.0 - (along - 4.0), 1.0};
    return {-1.0, 1.0 - (along - 6.0)};
}

Eigen::VectorXd boundary_datum(const ProblemSpec& spec, double x, double y) {
    if (!spec.g) throw InvalidArgumentError("problem has no boundary datum");
    Eigen::VectorXd v = spec.g(x, y);
    if (v.size() != spec.n_components || !v.allFinite()) {
        throw EvaluationError("boundary datum produced an unusable value");
    }
    return v;
}

namespace {

Eigen::VectorXd vec2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}

Eigen::VectorXd vec3(double a, double b, double c) {
    Eigen::VectorXd v(3);
    v << a, b, c;
    return v;
}

// Half identity on {x >= 0 or y <= 0}, the rank-one affine map
// (x + y - 1, x + y + 1)/4 on the remaining open quadrant.
Eigen::VectorXd mixed2d_datum(double x, double y) {
    if (x >= 0.0 || y <= 0.0) return vec2(0.5 * x, 0.5 * y);
    return vec2(0.25 * (x + y - 1.0), 0.25 * (x + y + 1.0));
}

Eigen::VectorXd mixed3d_datum(double x, double y) {
    if (x >= 0.0 || y <= 0.0) return vec3(0.5 * x, 0.5 * y, 0.5 * x);
    return vec3(0.25 * (x + y - 1.0), 0.25 * (x + y + 1.0), 0.25 * (x + y - 1.0));
}

// x times the first axis for x < 0, x times the second axis for x >= 0;
// continuous across x = 0.
Eigen::VectorXd rank1_datum(double x, double /*y*/) {
    if (x < 0.0) return vec2(x, 0.0);
    return vec2(0.0, x);
}

} // namespace

ProblemSpec make_problem(const std::string& id, double quad_tol, bool smoothed_box) {
    ProblemSpec spec;
    spec.id = id;
    if (id == "mixed2d") {
        spec.name = "mixed rank-2/rank-1 data, planar target";
        spec.n_components = 2;
        spec.g = [](double x, double y) { return mixed2d_datum(x, y); };
    } else if (id == "mixed3d") {
        spec.name = "mixed rank data, three-component target";
        spec.n_components = 3;
        spec.g = [](double x, double y) { return mixed3d_datum(x, y); };
    } else if (id == "rank1") {
        spec.name = "rank-one data, axis switch at x = 0";
        spec.n_components = 2;
        spec.g = [](double x, double y) { return rank1_datum(x, y); };
    } else if (id == "triple") {
        spec.name = "scaled integral map, triple junction interface";
        spec.n_components = 2;
        spec.scale = 0.75;
        spec.K = [](double t) { return K_triple(t); };
        spec.K_deriv = [](double t) { return K_triple_deriv(t); };
        auto K = spec.K;
        const double scale = spec.scale;
        spec.g = [K, scale, quad_tol](double x, double y) {
            const Eigen::Vector2d u = exact_map(x, y, K, quad_tol);
            return Eigen::VectorXd(scale * u);
        };
    } else if (id == "box") {
        spec.name = "scaled integral map, rectangular interface";
        spec.n_components = 2;
        spec.scale = 0.75;
        if (smoothed_box) {
            spec.K = [](double t) { return K_box_smoothed(t); };
            spec.K_deriv = [](double t) { return K_box_smoothed_deriv(t); };
        } else {
            spec.K = [](double t) { return K_box(t); };
            spec.K_deriv = [](double t) { return K_box_deriv(t); };
        }
        auto K = spec.K;
        const double scale = spec.scale;
        spec.g = [K, scale, quad_tol](double x, double y) {
            const Eigen::Vector2d u = exact_map(x, y, K, quad_tol);
            return Eigen::VectorXd(scale * u);
        };
    } else {
        throw InvalidArgumentError("unknown experiment id: " + id);
    }
    return spec;
}

ProblemSpec make_custom_problem(const std::string& table_path) {
    std::ifstream in(table_path);
    if (!in) throw IoError("cannot open boundary table: " + table_path);

    std::vector<double> params;
    std::vector<Eigen::VectorXd> values;
    int n_components = -1;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream row(line);
        std::vector<double> nums;
        double v;
        while (row >> v) nums.push_back(v);
        if (nums.empty()) continue;
        if (nums.size() < 3 || nums.size() > 4) {
            std::ostringstream msg;
            msg << table_path << ":" << line_no
                << ": expected 's v1 v2' or 's v1 v2 v3'";
            throw IoError(msg.str());
        }
        const int nc = static_cast<int>(nums.size()) - 1;
        if (n_components < 0) n_components = nc;
        if (nc != n_components) {
            throw IoError(table_path + ": inconsistent component counts");
        }
        if (!(nums[0] >= 0.0) || nums[0] >= 1.0) {
            throw IoError(table_path + ": parameter must lie in [0, 1)");
        }
        if (!params.empty() && nums[0] <= params.back()) {
            throw IoError(table_path + ": parameters must increase strictly");
        }
        for (double x : nums) {
            if (!std::isfinite(x)) throw IoError(table_path + ": non-finite entry");
        }
        params.push_back(nums[0]);
        Eigen::VectorXd val(nc);
        for (int c = 0; c < nc; ++c) val[c] = nums[c + 1];
        values.push_back(val);
    }
    if (params.size() < 2) throw IoError(table_path + ": need at least two rows");

    ProblemSpec spec;
    spec.id = "custom";
    spec.name = "tabulated boundary datum";
    spec.n_components = n_components;
    spec.g = [params, values, n_components](double x, double y) -> Eigen::VectorXd {
        // Extend the boundary table into the square along sup-norm rays so the
        // datum can also serve as an initial guess.
        const double radius = std::max(std::abs(x), std::abs(y));
        double s;
        if (radius < 1e-14) {
            Eigen::VectorXd mean = Eigen::VectorXd::Zero(n_components);
            for (const auto& v : values) mean += v;
            return mean / static_cast<double>(values.size());
        }
        s = boundary_parameter(x / radius, y / radius);
        const size_t n = params.size();
        const size_t hi =
            std::upper_bound(params.begin(), params.end(), s) - params.begin();
        const size_t lo = (hi + n - 1) % n;
        const size_t hi_idx = hi % n;
        double s0 = params[lo];
        double s1 = params[hi_idx];
        if (hi == 0) s0 -= 1.0;
        if (hi == n) s1 += 1.0;
        const double t = (s - s0) / (s1 - s0);
        return (1.0 - t) * values[lo] + t * values[hi_idx];
    };
    return spec;
}

} // namespace infharm
