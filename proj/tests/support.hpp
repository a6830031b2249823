#pragma once

#include "twf/fem.hpp"
#include "twf/grid.hpp"
#include "twf/params.hpp"

#include <Eigen/Dense>

#include <array>

namespace support {

inline Eigen::MatrixXd dense(const twf::SparseMatrix& m) { return Eigen::MatrixXd(m); }

// Barycentric coordinates and gradients of a triangle from its vertex
// coordinates alone.
struct Triangle {
    std::array<double, 3> y{};
    std::array<double, 3> z{};

    double area() const
    {
        return 0.5 * std::abs((y[1] - y[0]) * (z[2] - z[0]) - (y[2] - y[0]) * (z[1] - z[0]));
    }

    std::array<double, 3> barycentric(double py, double pz) const
    {
        const double det = (z[1] - z[2]) * (y[0] - y[2]) + (y[2] - y[1]) * (z[0] - z[2]);
        const double l0 = ((z[1] - z[2]) * (py - y[2]) + (y[2] - y[1]) * (pz - z[2])) / det;
        const double l1 = ((z[2] - z[0]) * (py - y[2]) + (y[0] - y[2]) * (pz - z[2])) / det;
        return {l0, l1, 1.0 - l0 - l1};
    }

    // gradient of the k-th barycentric coordinate by differencing
    std::array<double, 2> gradient(int k) const
    {
        const auto b0 = barycentric(0.0, 0.0);
        const auto by = barycentric(1.0, 0.0);
        const auto bz = barycentric(0.0, 1.0);
        return {by[static_cast<std::size_t>(k)] - b0[static_cast<std::size_t>(k)],
                bz[static_cast<std::size_t>(k)] - b0[static_cast<std::size_t>(k)]};
    }
};

inline Triangle triangle(const twf::Grid& g, twf::Index t)
{
    Triangle out;
    const auto& v = g.triangle(t);
    for (std::size_t k = 0; k < 3; ++k) {
        out.y[k] = g.y(v[k]);
        out.z[k] = g.z(v[k]);
    }
    return out;
}

// Constant state: flat bottom data and a top flux that exactly balances
// gravity, started on the fixed point.
inline twf::Params constant_state(twf::Index n)
{
    twf::Params p;
    p.nx = n;
    p.nz = n;
    p.delta = 0.0;
    p.F_inf = p.g * p.kappa * p.L;
    p.p_init = p.s0_base;
    p.s_init = p.s0_base;
    return p;
}

// Coarse run that converges quickly; slow waves need the fine mesh.
inline twf::Params coarse_run(twf::Index n = 16)
{
    twf::Params p;
    p.nx = n;
    p.nz = n;
    p.c = 0.5;
    return p;
}

} // namespace support
