#include "twf/errors.hpp"
#include "twf/fem.hpp"
#include "twf/grid.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

using namespace twf;

TEST_CASE("grid counts")
{
    const Grid g = build_grid(2, 2, 2, 2);
    CHECK(g.num_nodes() == 9);
    CHECK(g.num_triangles() == 8);
    const Grid g1 = build_grid(2, 2, 1, 1);
    CHECK(g1.num_nodes() == 4);
    CHECK(g1.num_triangles() == 2);
    CHECK_THROWS_AS(build_grid(0, 2, 1, 1), InvalidInput);
    CHECK_THROWS_AS(build_grid(2, 2, 0, 1), InvalidInput);
}

TEST_CASE("corner tags")
{
    const Grid g = build_grid(2, 2, 4, 4);
    const Index first = g.node(0, 0);
    const Index last = g.node(4, 4);
    CHECK(g.tags(first) == (BoundaryTag::Bottom | BoundaryTag::Left));
    CHECK(g.tags(last) == (BoundaryTag::Top | BoundaryTag::Right));
    CHECK(g.y(last) == 2.0);
    CHECK(g.z(last) == 2.0);
    CHECK(g.tags(g.node(2, 2)) == 0u);
}

TEST_CASE("triangles tile the rectangle with positive area")
{
    const Grid g = build_grid(2.0, 1.5, 6, 5);
    double total = 0.0;
    for (Index t = 0; t < g.num_triangles(); ++t) {
        CHECK(g.signed_area(t) > 0.0);
        total += g.signed_area(t);
    }
    CHECK(total == doctest::Approx(3.0).epsilon(1e-14));
    for (Index n = 0; n < g.num_nodes(); ++n) {
        CHECK(g.y(n) == doctest::Approx(static_cast<double>(g.column(n)) * 2.0 / 6));
        CHECK(g.z(n) == doctest::Approx(static_cast<double>(g.row(n)) * 1.5 / 5));
    }
}

TEST_CASE("mesh maps onto itself under reflection for even nx")
{
    for (Index nx : {2, 4, 8}) {
        const Grid g = build_grid(2, 2, nx, 3);
        CHECK(g.reflection_symmetric());
        std::set<std::array<Index, 3>> tris;
        for (Index t = 0; t < g.num_triangles(); ++t) {
            auto v = g.triangle(t);
            std::sort(v.begin(), v.end());
            tris.insert(v);
        }
        for (Index t = 0; t < g.num_triangles(); ++t) {
            auto v = g.triangle(t);
            for (auto& n : v)
                n = g.reflect(n);
            std::sort(v.begin(), v.end());
            CHECK(tris.count(v) == 1);
        }
    }
}

TEST_CASE("unit weight mass sums to the area")
{
    const Grid g = build_grid(1, 1, 1, 1);
    CHECK(assemble_mass(g, 1.0).sum() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(assemble_mass(g, 0.0).norm() == 0.0);
    const Grid g2 = build_grid(2, 3, 5, 4);
    CHECK(assemble_mass(g2, 1.0).sum() == doctest::Approx(6.0).epsilon(1e-14));
}

TEST_CASE("mass row sums against edge midpoint quadrature")
{
    const Grid g = build_grid(1, 1, 4, 4);
    Eigen::VectorXd w(g.num_nodes());
    for (Index n = 0; n < g.num_nodes(); ++n)
        w[n] = 1.0 + g.y(n) * g.y(n) + 0.5 * g.z(n);
    const SparseMatrix m = assemble_mass(g, Field(g, w));

    // int wbar phi_i, with wbar the vertex mean; midpoint rule is exact here
    Eigen::VectorXd oracle = Eigen::VectorXd::Zero(g.num_nodes());
    for (Index t = 0; t < g.num_triangles(); ++t) {
        const auto tri = support::triangle(g, t);
        const auto& v = g.triangle(t);
        const double wbar = (w[v[0]] + w[v[1]] + w[v[2]]) / 3.0;
        for (int e = 0; e < 3; ++e) {
            const double my = 0.5 * (tri.y[e] + tri.y[(e + 1) % 3]);
            const double mz = 0.5 * (tri.z[e] + tri.z[(e + 1) % 3]);
            const auto b = tri.barycentric(my, mz);
            for (std::size_t k = 0; k < 3; ++k)
                oracle[v[k]] += wbar * b[k] * tri.area() / 3.0;
        }
    }
    const Eigen::VectorXd rows = m * Eigen::VectorXd::Ones(g.num_nodes());
    CHECK((rows - oracle).lpNorm<Eigen::Infinity>() <= 1e-15);
}

TEST_CASE("stiffness of the two-triangle unit square")
{
    const Grid g = build_grid(1, 1, 1, 1);
    const Eigen::MatrixXd k = support::dense(assemble_stiffness(g, Field(g, 1.0)));
    // nodes (0,0), (1,0), (0,1), (1,1); diagonal from (0,0) to (1,1)
    Eigen::Matrix4d hand;
    hand << 1.0, -0.5, -0.5, 0.0,
           -0.5, 1.0, 0.0, -0.5,
           -0.5, 0.0, 1.0, -0.5,
            0.0, -0.5, -0.5, 1.0;
    CHECK((k - hand).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("stiffness properties")
{
    const Grid g = build_grid(2, 1, 6, 4);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    Eigen::VectorXd a(g.num_nodes());
    for (Index n = 0; n < g.num_nodes(); ++n)
        a[n] = u(rng);
    const SparseMatrix k = assemble_stiffness(g, Field(g, a));
    const Eigen::MatrixXd kd = support::dense(k);
    CHECK((kd.rowwise().sum()).cwiseAbs().maxCoeff() <= 1e-13);
    CHECK((kd - kd.transpose()).cwiseAbs().maxCoeff() == 0.0);
    const Eigen::MatrixXd k2 = support::dense(assemble_stiffness(g, Field(g, Eigen::VectorXd(2.0 * a))));
    CHECK((k2 - 2.0 * kd).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK_THROWS_AS(assemble_stiffness(g, Field(g, 0.0)), InvalidInput);

    // with a constant coefficient affine functions leave only boundary residuals
    Eigen::VectorXd lin(g.num_nodes());
    for (Index n = 0; n < g.num_nodes(); ++n)
        lin[n] = 0.3 + 1.7 * g.y(n) - 0.4 * g.z(n);
    const Eigen::VectorXd r = assemble_stiffness(g, Field(g, 0.7)) * lin;
    for (Index n = 0; n < g.num_nodes(); ++n)
        if (g.tags(n) == 0u)
            CHECK(std::abs(r[n]) <= 1e-13);

    const SparseMatrix m = assemble_mass(g, Field(g, a));
    const Eigen::MatrixXd md = support::dense(m);
    CHECK((md - md.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("operators commute with the reflection for symmetric data")
{
    const Grid g = build_grid(2, 1, 8, 3);
    Eigen::VectorXd a(g.num_nodes());
    for (Index n = 0; n < g.num_nodes(); ++n)
        a[n] = 1.0 + std::cos(3.0 * (g.y(n) - 1.0)) + g.z(n);
    const Eigen::MatrixXd k = support::dense(assemble_stiffness(g, Field(g, a)));
    const Eigen::MatrixXd m = support::dense(assemble_mass(g, Field(g, a)));
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(g.num_nodes(), g.num_nodes());
    for (Index n = 0; n < g.num_nodes(); ++n)
        p(g.reflect(n), n) = 1.0;
    CHECK((p * k * p.transpose() - k).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((p * m * p.transpose() - m).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("dz of the height function integrates the basis")
{
    const Grid g = build_grid(2, 1, 5, 4);
    Eigen::VectorXd z(g.num_nodes());
    for (Index n = 0; n < g.num_nodes(); ++n)
        z[n] = g.z(n);
    const Eigen::VectorXd lhs = assemble_dz(g) * z;
    const Eigen::VectorXd rhs = assemble_mass(g, 1.0) * Eigen::VectorXd::Ones(g.num_nodes());
    CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() <= 1e-15);
}

TEST_CASE("gravity load against quadrature")
{
    const Grid g = build_grid(2, 1, 4, 3);
    const double a0 = 0.7;
    const double grav = 1.3;
    const Eigen::VectorXd load = assemble_gravity_load(g, Field(g, a0), grav);
    Eigen::VectorXd oracle = Eigen::VectorXd::Zero(g.num_nodes());
    for (Index t = 0; t < g.num_triangles(); ++t) {
        const auto tri = support::triangle(g, t);
        const auto& v = g.triangle(t);
        for (int k = 0; k < 3; ++k)
            oracle[v[static_cast<std::size_t>(k)]] += a0 * grav * tri.gradient(k)[1] * tri.area();
    }
    CHECK((load - oracle).lpNorm<Eigen::Infinity>() <= 1e-14);
    CHECK(std::abs(load.sum()) <= 1e-14);
    for (Index n = 0; n < g.num_nodes(); ++n)
        if (!g.on(n, BoundaryTag::Bottom) && !g.on(n, BoundaryTag::Top))
            CHECK(std::abs(load[n]) <= 1e-14);
    CHECK(assemble_gravity_load(g, Field(g, a0), 0.0).norm() == 0.0);
}

TEST_CASE("reduce_system passthrough and counting")
{
    const Grid g = build_grid(1, 1, 2, 2);
    const SparseMatrix k = assemble_stiffness(g, Field(g, 1.0));
    const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(g.num_nodes(), 0.0, 1.0);
    const LinearSystem plain = reduce_system(k, b, g, {}, false, 0.0);
    CHECK(plain.matrix.rows() == g.num_nodes());
    CHECK((support::dense(plain.matrix) - support::dense(k)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((plain.rhs - b).norm() == 0.0);

    const Grid col = build_grid(1, 2, 1, 2);
    DirichletValues bottom;
    for (Index n : col.bottom_nodes())
        bottom.emplace_back(n, 0.0);
    const SparseMatrix kc = assemble_stiffness(col, Field(col, 1.0));
    const LinearSystem red =
        reduce_system(kc, Eigen::VectorXd::Zero(col.num_nodes()), col, bottom, true, 1.0);
    CHECK(red.matrix.rows() == col.num_nodes() - 2 - 1);
    for (Index n : col.top_nodes())
        CHECK(red.dof_of_node[static_cast<std::size_t>(n)] == red.top_dof);
    for (Index n : col.bottom_nodes())
        CHECK(red.dof_of_node[static_cast<std::size_t>(n)] == DofMap::kEliminated);
}

TEST_CASE("merged top with total flux reproduces the linear profile")
{
    const double L = 2.0;
    const double H = 1.5;
    const double a0 = 0.3;
    const double Q = 0.8;
    const Grid g = build_grid(L, H, 4, 8);
    DirichletValues bottom;
    for (Index n : g.bottom_nodes())
        bottom.emplace_back(n, 0.0);
    const SparseMatrix k = assemble_stiffness(g, Field(g, a0));
    const LinearSystem sys = reduce_system(k, Eigen::VectorXd::Zero(g.num_nodes()), g, bottom, true, Q);
    const Eigen::VectorXd x = Eigen::MatrixXd(sys.matrix).ldlt().solve(sys.rhs);
    const Eigen::VectorXd p = expand_solution(sys, x);
    // p(z) = Q z / (a0 L)
    CHECK(x[sys.top_dof] == doctest::Approx(Q * H / (a0 * L)).epsilon(1e-12));
    for (Index n = 0; n < g.num_nodes(); ++n)
        CHECK(p[n] == doctest::Approx(Q * g.z(n) / (a0 * L)).epsilon(1e-11));
}

TEST_CASE("nonzero Dirichlet data is folded into the right-hand side")
{
    const Grid g = build_grid(1, 1, 3, 3);
    DirichletValues bottom;
    for (Index n : g.bottom_nodes())
        bottom.emplace_back(n, 2.0);
    const SparseMatrix k = assemble_stiffness(g, Field(g, 1.0));
    const LinearSystem sys = reduce_system(k, Eigen::VectorXd::Zero(g.num_nodes()), g, bottom, true, 0.0);
    const Eigen::VectorXd x = Eigen::MatrixXd(sys.matrix).ldlt().solve(sys.rhs);
    const Eigen::VectorXd p = expand_solution(sys, x);
    CHECK((p.array() - 2.0).abs().maxCoeff() <= 1e-13);
}

TEST_CASE("dirichlet on the merged top is rejected")
{
    const Grid g = build_grid(1, 1, 2, 2);
    const SparseMatrix k = assemble_stiffness(g, Field(g, 1.0));
    DirichletValues top;
    top.emplace_back(g.node(1, 2), 0.0);
    CHECK_THROWS_AS(reduce_system(k, Eigen::VectorXd::Zero(g.num_nodes()), g, top, true, 0.0),
                    InvalidInput);
}

TEST_CASE("field validation")
{
    const Grid g = build_grid(1, 1, 2, 2);
    CHECK_THROWS_AS(Field(g, Eigen::VectorXd::Zero(3)), InvalidInput);
    Eigen::VectorXd bad = Eigen::VectorXd::Zero(g.num_nodes());
    bad[2] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(Field(g, bad), InvalidInput);
    const Grid other = build_grid(1, 1, 3, 2);
    CHECK_THROWS_AS(assemble_mass(other, Field(g, 1.0)), InvalidInput);
}
