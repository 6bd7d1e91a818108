#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "helpers.hpp"
#include "infharm/exceptions.hpp"
#include "infharm/fespace.hpp"
#include "infharm/quadrature.hpp"

using namespace infharm;
using namespace infharm::testing;

TEST_SUITE("fespace") {

TEST_CASE("interpolation and evaluation reproduce affine maps") {
    const auto mesh = square_mesh(6);
    Eigen::Matrix2d A;
    A << 0.3, -1.1, 0.7, 0.2;
    const Eigen::Vector2d b(0.05, -0.4);
    const MapFn affine = vec_fn([&](double x, double y) -> Eigen::Vector2d {
        return A * Eigen::Vector2d(x, y) + b;
    });
    const VectorField field = interpolate(mesh, affine, 2);
    for (int i = 0; i < 100; ++i) {
        const double x = uniform(-1.0, 1.0);
        const double y = uniform(-1.0, 1.0);
        const Eigen::VectorXd got = evaluate(field, x, y);
        const Eigen::VectorXd want = affine(x, y);
        CHECK((got - want).norm() <= 1e-13);
    }
}

TEST_CASE("nodal values of a difference map") {
    const auto mesh = square_mesh(2);
    const VectorField field = interpolate(
        mesh, vec_fn([](double x, double y) { return Eigen::Vector2d(x - y, 0.0); }), 2);
    for (int v = 0; v < mesh->num_vertices(); ++v) {
        const Eigen::Vector2d& pt = mesh->vertex(v);
        CHECK(field.values()(v, 0) == doctest::Approx(pt.x() - pt.y()).epsilon(1e-15));
        CHECK_EQ(field.values()(v, 1), 0.0);
    }
}

TEST_CASE("evaluation at vertices and edge midpoints") {
    const auto mesh = square_mesh(4);
    const VectorField field = interpolate(
        mesh, vec_fn([](double x, double y) { return Eigen::Vector2d(x * y, x + y); }), 2);
    const int v = 7;
    const Eigen::Vector2d& pt = mesh->vertex(v);
    CHECK((evaluate(field, pt.x(), pt.y()) -
           field.values().row(v).transpose()).norm() <= 1e-14);

    const auto& tri = mesh->triangle(3);
    const Eigen::Vector2d& a = mesh->vertex(tri[0]);
    const Eigen::Vector2d& b = mesh->vertex(tri[1]);
    const Eigen::Vector2d mid = 0.5 * (a + b);
    const Eigen::VectorXd want =
        0.5 * (field.values().row(tri[0]) + field.values().row(tri[1])).transpose();
    CHECK((evaluate(field, mid.x(), mid.y()) - want).norm() <= 1e-13);
}

TEST_CASE("element gradients of simple fields") {
    const auto mesh = square_mesh(5);
    const VectorField half_id = interpolate(
        mesh, vec_fn([](double x, double y) { return Eigen::Vector2d(0.5 * x, 0.5 * y); }), 2);
    const VectorField rank_one = interpolate(
        mesh, vec_fn([](double x, double y) {
            return Eigen::Vector2d(0.25 * (x + y - 1.0), 0.25 * (x + y + 1.0));
        }), 2);
    for (int k = 0; k < mesh->num_triangles(); ++k) {
        const Eigen::MatrixXd g1 = element_gradient(half_id, k);
        CHECK((g1 - 0.5 * Eigen::Matrix2d::Identity()).norm() <= 1e-13);
        const Eigen::MatrixXd g2 = element_gradient(rank_one, k);
        CHECK((g2.row(0) - Eigen::RowVector2d(0.25, 0.25)).norm() <= 1e-13);
        CHECK((g2.row(1) - Eigen::RowVector2d(0.25, 0.25)).norm() <= 1e-13);
        CHECK(std::abs(g2.determinant()) <= 1e-14);
    }
}

TEST_CASE("unusable map values are rejected") {
    const auto mesh = square_mesh(2);
    const MapFn bad_nan = [](double, double) {
        Eigen::VectorXd v(2);
        v << std::nan(""), 0.0;
        return v;
    };
    CHECK_THROWS_AS(interpolate(mesh, bad_nan, 2), EvaluationError);
    const MapFn bad_size = [](double, double) { return Eigen::VectorXd::Zero(3); };
    CHECK_THROWS_AS(interpolate(mesh, bad_size, 2), EvaluationError);
}

TEST_CASE("boundary projection is the identity on traces") {
    const auto mesh = square_mesh(6);
    VectorField field(mesh, 2);
    for (int v = 0; v < mesh->num_vertices(); ++v) {
        field.values()(v, 0) = uniform(-1.0, 1.0);
        field.values()(v, 1) = uniform(-1.0, 1.0);
    }
    const MapFn trace = [&](double x, double y) { return evaluate(field, x, y); };
    const BoundaryValues bv = l2_project_boundary(*mesh, trace, 2);
    for (size_t i = 0; i < bv.vertices.size(); ++i) {
        const int v = bv.vertices[i];
        CHECK((bv.values.row(i) - field.values().row(v)).norm() <= 1e-12);
    }
}

TEST_CASE("boundary projection of affine data is nodal") {
    const auto mesh = square_mesh(5);
    const MapFn affine = vec_fn([](double x, double y) {
        return Eigen::Vector2d(0.2 * x - 0.9 * y + 0.1, 1.3 * x + 0.4 * y);
    });
    const BoundaryValues bv = l2_project_boundary(*mesh, affine, 2);
    for (size_t i = 0; i < bv.vertices.size(); ++i) {
        const Eigen::Vector2d& pt = mesh->vertex(bv.vertices[i]);
        CHECK((bv.values.row(i).transpose() - affine(pt.x(), pt.y())).norm() <= 1e-12);
    }
}

TEST_CASE("boundary projection matches a dense cyclic mass solve") {
    const auto mesh = square_mesh(8);
    const MapFn g = vec_fn([](double x, double y) {
        return Eigen::Vector2d(std::sin(x + 2.0 * y), std::cos(x * y) - 0.5);
    });
    const std::vector<int>& loop = mesh->boundary_loop();
    const int nb = static_cast<int>(loop.size());
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(nb, nb);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nb, 2);
    for (int i = 0; i < nb; ++i) {
        const int j = (i + 1) % nb;
        const Eigen::Vector2d a = mesh->vertex(loop[i]);
        const Eigen::Vector2d b = mesh->vertex(loop[j]);
        const double len = (b - a).norm();
        M(i, i) += len / 3.0;
        M(j, j) += len / 3.0;
        M(i, j) += len / 6.0;
        M(j, i) += len / 6.0;
        const auto seg = [&](double t) {
            const Eigen::Vector2d pt = (1.0 - t) * a + t * b;
            const Eigen::VectorXd gv = g(pt.x(), pt.y());
            Eigen::VectorXd out(4);
            out << (1.0 - t) * gv[0], (1.0 - t) * gv[1], t * gv[0], t * gv[1];
            return out;
        };
        const Eigen::VectorXd contrib = integrate_gauss(seg, 4, 0.0, 1.0, 24) * len;
        rhs(i, 0) += contrib[0];
        rhs(i, 1) += contrib[1];
        rhs(j, 0) += contrib[2];
        rhs(j, 1) += contrib[3];
    }
    const Eigen::MatrixXd dense = M.fullPivLu().solve(rhs);

    const BoundaryValues bv = l2_project_boundary(*mesh, g, 2);
    REQUIRE_EQ(bv.vertices.size(), static_cast<size_t>(nb));
    for (int i = 0; i < nb; ++i) {
        // bv rows follow bv.vertices; find the loop position of that vertex.
        int pos = -1;
        for (int q = 0; q < nb; ++q) {
            if (loop[q] == bv.vertices[i]) pos = q;
        }
        REQUIRE(pos >= 0);
        CHECK((bv.values.row(i) - dense.row(pos)).norm() <= 1e-10);
    }
}

TEST_CASE("domain projection is the identity on the space") {
    const auto mesh = square_mesh(4);
    VectorField field(mesh, 2);
    for (int v = 0; v < mesh->num_vertices(); ++v) {
        field.values()(v, 0) = uniform(-2.0, 2.0);
        field.values()(v, 1) = uniform(-2.0, 2.0);
    }
    const MapFn fn = [&](double x, double y) { return evaluate(field, x, y); };
    const Eigen::MatrixXd projected = l2_project_domain(*mesh, fn, 2);
    CHECK((projected - field.values()).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("boundary rows are overwritten in place") {
    const auto mesh = square_mesh(3);
    VectorField field(mesh, 2);
    const MapFn g = vec_fn([](double x, double y) { return Eigen::Vector2d(x, -y); });
    const BoundaryValues bv = l2_project_boundary(*mesh, g, 2);
    apply_boundary_values(field, bv);
    for (size_t i = 0; i < bv.vertices.size(); ++i) {
        CHECK((field.values().row(bv.vertices[i]) - bv.values.row(i)).norm() == 0.0);
    }
    for (int v = 0; v < mesh->num_vertices(); ++v) {
        if (!mesh->is_boundary_vertex(v)) {
            CHECK_EQ(field.values().row(v).norm(), 0.0);
        }
    }
}

TEST_CASE("nodal distance between fields") {
    const auto mesh = square_mesh(3);
    VectorField a(mesh, 2), b(mesh, 2);
    b.values()(5, 1) = 0.25;
    CHECK_EQ(max_nodal_difference(a, b), 0.25);
}

TEST_CASE("element gradients converge at the barycenters") {
    const MapFn smooth = vec_fn([](double x, double y) {
        return Eigen::Vector2d(std::sin(x) * std::cos(y), x * x * y);
    });
    const auto exact_grad = [](double x, double y) {
        Eigen::Matrix2d G;
        G << std::cos(x) * std::cos(y), -std::sin(x) * std::sin(y),
            2.0 * x * y, x * x;
        return G;
    };
    double prev_err = 0.0;
    for (int step = 0; step < 2; ++step) {
        const int m = step == 0 ? 16 : 32;
        const auto mesh = square_mesh(m);
        const VectorField field = interpolate(mesh, smooth, 2);
        double err = 0.0;
        for (int k = 0; k < mesh->num_triangles(); ++k) {
            const auto& t = mesh->triangle(k);
            const Eigen::Vector2d bc =
                (mesh->vertex(t[0]) + mesh->vertex(t[1]) + mesh->vertex(t[2])) / 3.0;
            err = std::max(err, (element_gradient(field, k) -
                                 exact_grad(bc.x(), bc.y())).norm());
        }
        if (step == 1) {
            CHECK(err <= 0.75 * prev_err);
        }
        prev_err = err;
    }
    CHECK(prev_err <= 0.2);
}

} // TEST_SUITE("fespace")
