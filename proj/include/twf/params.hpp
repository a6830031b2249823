#pragma once

#include "twf/constitutive.hpp"
#include "twf/grid.hpp"

#include <optional>
#include <string>
#include <vector>

namespace twf {

/// How the prescribed top flux enters the merged top equation.
enum class FluxConvention {
    Total,     ///< the merged top DOF receives F_inf
    PerLength, ///< the merged top DOF receives F_inf * L
};

/// Linear solver used in the pressure step.
enum class PressureSolver {
    Direct,        ///< fresh Cholesky factorization every step
    ReusedFactor,  ///< PCG preconditioned by the last factorization, refactored on demand
};

/// Every physical and numerical parameter of a run. Defaults are the
/// reference finger configuration on (0,2) x (0,2) at 128 x 128 cells.
struct Params {
    // geometry
    double L = 2.0;
    double H = 2.0;
    Index nx = 128;
    Index nz = 128;

    // physics
    double g = 1.0;
    double tau = 2.0;
    double c = 0.04;
    double F_inf = 0.056;

    // constitutive instance
    double kappa = 0.001;
    double a = 0.32;
    double pc_shift = 0.0; ///< constant added to pc (pressure gauge)

    // bottom boundary data
    double s0_base = 1e-5;
    double delta = 0.078;
    double d = 0.25;
    std::optional<double> y_c; ///< perturbation centre, defaults to L / 2

    // scheme
    double M = 4.0;
    double epsilon = 0.0008;
    double tol_fp = 1e-9;
    int max_iter = 20000;
    double rtol_lin = 1e-12;
    double p_init = 4.5;
    double s_init = 1e-5;
    FluxConvention flux_convention = FluxConvention::Total;
    PressureSolver pressure_solver = PressureSolver::ReusedFactor;
    int refactor_after = 8; ///< PCG iterations that trigger a refactorization
    int accel_depth = 5;       ///< Anderson history length, 0 for the plain iteration
    double accel_start = 1e-3; ///< update size below which Anderson mixing starts

    double y_center() const { return y_c.value_or(0.5 * L); }
    double top_load() const { return flux_convention == FluxConvention::Total ? F_inf : F_inf * L; }
    ConstitutiveLaws laws() const
    {
        const ConstitutiveLaws base = ConstitutiveLaws::kinked_quadratic(kappa, a);
        return pc_shift == 0.0 ? base : base.shifted(pc_shift);
    }

    /// Throws InvalidInput on values that make the scheme meaningless.
    void validate() const;

    /// Non-fatal observations (bounds window, damping below 1/tau, ...).
    std::vector<std::string> warnings() const;
};

/// validate_bounds with s_* taken as the bottom saturation level.
ParamBounds validate_bounds(const Params& params);

} // namespace twf
