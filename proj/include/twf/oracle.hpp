#pragma once

#include "twf/scheme.hpp"

#include <vector>

namespace twf {

/// Discrete energy of the pressure subproblem with frozen saturation,
///   A(p) = sum_i m_i [p_i - pc(s_i)]_+^2 / (2 tau)
///        + 1/2 int k(s) |grad p + g e_z|^2 - F p*,
/// with lumped weights m_i and F the top load. p must be constant on the top.
double energy(const TravellingWaveSolver& solver, const Field& p, const Field& s);
double energy(const Field& p, const Field& s, const Params& params);

/// Gradient of the energy on all nodes, without the top load. Summing the
/// top entries and subtracting the load gives the derivative in p*.
Eigen::VectorXd energy_gradient(const TravellingWaveSolver& solver, const Field& p,
                                const Field& s);

/// Euler-Lagrange residual restricted to the free pressure unknowns.
Eigen::VectorXd euler_lagrange_residual(const TravellingWaveSolver& solver, const Field& p,
                                        const Field& s);

enum class VariationalMethod { Newton, Damped };

struct VariationalOptions {
    VariationalMethod method = VariationalMethod::Newton;
    int max_iter = 200;
    double tol = 1e-12; ///< on the residual relative to the gravity load
};

struct VariationalResult {
    Field p;
    double p_star = 0.0;
    int iters = 0;
    bool converged = false;
    double residual = 0.0;
    std::vector<double> energy_history;
    bool monotone = true; ///< energy never rose by more than rounding
};

/// Minimizes the energy over pressures with p = p0 on the bottom and a
/// constant top value. Newton: semismooth Newton on the active set of the
/// positive part with backtracking on A. Damped: repeats the M-damped
/// pressure step with the saturation held fixed.
VariationalResult variational_pressure_solve(TravellingWaveSolver& solver, const Field& s_frozen,
                                             const Field& p_start,
                                             const VariationalOptions& opts = {});
VariationalResult variational_pressure_solve(const Field& s_frozen, const Params& params,
                                             const VariationalOptions& opts = {});

/// Column-wise implicit Euler for c tau ds/dz = [p - pc(s)]_+, s(0) = s0.
Field ode_transport(const TravellingWaveSolver& solver, const Field& p);
Field ode_transport(const Field& p, const Params& params);

} // namespace twf
