#pragma once

#include "twf/constitutive.hpp"
#include "twf/fem.hpp"
#include "twf/grid.hpp"
#include "twf/linsolve.hpp"
#include "twf/params.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace twf {

/// Dirichlet data on the bottom row.
struct BottomData {
    std::vector<Index> nodes;
    Eigen::VectorXd s0;
    Eigen::VectorXd p0;
};

/// s0 = s0_base and p0(y) = pc(s0_base) + delta * exp(-((y - y_c) / d)^2).
BottomData boundary_data(const Params& params, const Grid& grid);

struct Solution {
    Field s;
    Field p;
    double p_star = 0.0;
    int iters = 0;
    bool converged = false;
    std::vector<double> residual_history; ///< ||dp||_inf + ||ds||_inf per iteration
    Params params;
    ClampCounter clamps;
    int factorizations = 0;
    long linear_iterations = 0;
};

struct PressureStepResult {
    Field p;
    double p_star = 0.0;
    SolveReport report;
};

struct StrongResidual {
    double r_pde = 0.0; ///< sup of the weak Richards residual, scaled per unit area
    double r_hys = 0.0; ///< sup of c tau (Dz s - eps Lap s) - [p - pc(s)]_+, nodal
};

/// Damped fixed-point iteration for the truncated travelling-wave problem.
///
/// One iteration maps (s, p) to (s', p') by
///   M p' - div(k(s) (grad p' + g e_z)) = M p - [p - pc(s)]_+ / tau,
///   d_z s' - eps Lap s'               = [p' - pc(s)]_+ / (c tau),
/// with p' = p0 and s' = s0 on the bottom, p' constant on the top with total
/// top flux F_inf, and natural conditions elsewhere. The positive-part
/// sources use nodal quadrature.
///
/// Once the update drops below accel_start, Anderson mixing over the last
/// accel_depth iterates replaces the plain step. Fixed points are unchanged;
/// accel_depth = 0 gives the plain iteration.
///
/// The solver owns the assembled operators. The saturation matrix does not
/// depend on the iterate and is factored once; changing c only rescales the
/// saturation source.
class TravellingWaveSolver {
public:
    explicit TravellingWaveSolver(const Params& params);
    ~TravellingWaveSolver();

    TravellingWaveSolver(const TravellingWaveSolver&) = delete;
    TravellingWaveSolver& operator=(const TravellingWaveSolver&) = delete;

    const Params& params() const noexcept { return params_; }
    const Grid& grid() const noexcept { return *grid_; }
    const Assembler& assembler() const noexcept { return *assembler_; }
    const ConstitutiveLaws& laws() const noexcept { return laws_; }
    const BottomData& bottom() const noexcept { return bottom_; }

    void set_wave_speed(double c);

    using Progress = std::function<void(int iteration, double update)>;
    void set_progress(Progress cb, int every = 100);

    /// Cold start from the constant initial guess (p_init, s_init).
    Solution solve();
    /// Start from the given iterate (warm start).
    Solution solve(const Field& s_start, const Field& p_start);

    PressureStepResult pressure_step(const Field& s_prev, const Field& p_prev,
                                     ClampCounter* clamps = nullptr);
    Field saturation_step(const Field& s_prev, const Field& p_new,
                          ClampCounter* clamps = nullptr) const;

    StrongResidual strong_residual(const Field& s, const Field& p) const;

    Field permeability(const Field& s, ClampCounter* clamps = nullptr) const;
    Field capillary_pressure(const Field& s, ClampCounter* clamps = nullptr) const;
    /// Nodal [p - pc(s)]_+.
    Field hysteresis_source(const Field& s, const Field& p) const;

    /// Unit-weight consistent mass matrix on all nodes.
    const SparseMatrix& mass_matrix() const noexcept { return mass_; }
    /// d_z + eps * stiffness on all nodes.
    const SparseMatrix& saturation_matrix() const noexcept { return sat_full_; }
    const SystemReducer& pressure_reducer() const noexcept { return *p_reducer_; }
    const SystemReducer& saturation_reducer() const noexcept { return *s_reducer_; }
    /// Full-node vector carrying p0 on the bottom row.
    const Eigen::VectorXd& pressure_dirichlet() const noexcept { return p_dirichlet_; }

    /// Assemble the pressure system of one step without solving it.
    LinearSystem pressure_system(const Field& s_prev, const Field& p_prev,
                                 ClampCounter* clamps = nullptr) const;

    int factorizations() const noexcept { return factorizations_; }

private:
    void assemble_pressure(const Field& s_prev, const Field& p_prev, ClampCounter* clamps,
                           LinearSystem& out) const;
    Eigen::VectorXd gather(const Eigen::VectorXd& full) const;

    Params params_;
    std::unique_ptr<Grid> grid_;
    std::unique_ptr<Assembler> assembler_;
    ConstitutiveLaws laws_;
    BottomData bottom_;

    SparseMatrix mass_;
    SparseMatrix mass_scaled_; ///< M * mass
    SparseMatrix sat_full_;
    std::unique_ptr<SystemReducer> p_reducer_;
    std::unique_ptr<SystemReducer> s_reducer_;
    Eigen::VectorXd p_dirichlet_;
    Eigen::VectorXd s_dirichlet_;

    LinearSystem sat_system_;
    std::unique_ptr<Factorization> sat_factor_;
    Eigen::VectorXd sat_rhs_offset_;

    LinearSystem p_system_;
    std::unique_ptr<Factorization> p_factor_;
    int pcg_failures_ = 0; ///< consecutive PCG attempts that needed a refactorization
    int pcg_skip_ = 0;     ///< upcoming steps that refactor without trying PCG
    int factorizations_ = 0;
    long linear_iterations_ = 0;

    Progress progress_;
    int progress_every_ = 100;
};

PressureStepResult pressure_step(const Field& s_prev, const Field& p_prev, const Params& params);
Field saturation_step(const Field& s_prev, const Field& p_new, const Params& params);
Solution fixed_point_solve(const Params& params);
StrongResidual strong_residual(const Solution& sol, const Params& params);

} // namespace twf
