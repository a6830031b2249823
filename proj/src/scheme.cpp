#include "twf/scheme.hpp"

#include "twf/errors.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace twf {

BottomData boundary_data(const Params& params, const Grid& grid)
{
    if (params.delta < 0.0)
        throw InvalidInput("boundary_data: delta must be non-negative");
    const ConstitutiveLaws laws = params.laws();
    BottomData b;
    b.nodes = grid.bottom_nodes();
    const auto n = static_cast<Index>(b.nodes.size());
    b.s0 = Eigen::VectorXd::Constant(n, params.s0_base);
    b.p0.resize(n);
    const double base = laws.pc(params.s0_base);
    const double yc = params.y_center();
    for (Index i = 0; i < n; ++i) {
        const double r = (grid.y(b.nodes[static_cast<std::size_t>(i)]) - yc) / params.d;
        b.p0[i] = base + params.delta * std::exp(-r * r);
    }
    return b;
}

TravellingWaveSolver::TravellingWaveSolver(const Params& params)
    : params_(params), laws_(params.laws())
{
    params_.validate();
    grid_ = std::make_unique<Grid>(params_.L, params_.H, params_.nx, params_.nz);
    assembler_ = std::make_unique<Assembler>(*grid_);
    bottom_ = boundary_data(params_, *grid_);

    const Index n = grid_->num_nodes();
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);

    mass_ = assembler_->zero_matrix();
    assembler_->add_mass(mass_, ones);
    mass_scaled_ = assembler_->zero_matrix();
    assembler_->add_mass(mass_scaled_, ones, params_.M);

    sat_full_ = assembler_->zero_matrix();
    assembler_->add_dz(sat_full_);
    if (params_.epsilon > 0.0)
        assembler_->add_stiffness(sat_full_, ones, params_.epsilon);

    p_dirichlet_ = Eigen::VectorXd::Zero(n);
    s_dirichlet_ = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < bottom_.nodes.size(); ++i) {
        p_dirichlet_[bottom_.nodes[i]] = bottom_.p0[static_cast<Index>(i)];
        s_dirichlet_[bottom_.nodes[i]] = bottom_.s0[static_cast<Index>(i)];
    }

    p_reducer_ = std::make_unique<SystemReducer>(mass_, DofMap(*grid_, bottom_.nodes, true));
    s_reducer_ = std::make_unique<SystemReducer>(mass_, DofMap(*grid_, bottom_.nodes, false));

    s_reducer_->reduce(sat_full_, Eigen::VectorXd::Zero(n), s_dirichlet_, 0.0, sat_system_);
    sat_rhs_offset_ = sat_system_.rhs;
    sat_factor_ = std::make_unique<Factorization>(sat_system_.matrix, false);
}

TravellingWaveSolver::~TravellingWaveSolver() = default;

void TravellingWaveSolver::set_wave_speed(double c)
{
    if (!(c > 0.0) || !std::isfinite(c))
        throw InvalidInput("wave speed c must be positive");
    params_.c = c;
}

void TravellingWaveSolver::set_progress(Progress cb, int every)
{
    progress_ = std::move(cb);
    progress_every_ = every > 0 ? every : 1;
}

Field TravellingWaveSolver::permeability(const Field& s, ClampCounter* clamps) const
{
    require_on_grid(s, *grid_, "permeability");
    Eigen::VectorXd k(s.size());
    for (Index i = 0; i < s.size(); ++i)
        k[i] = laws_.k(s[i], clamps);
    return Field(*grid_, std::move(k));
}

Field TravellingWaveSolver::capillary_pressure(const Field& s, ClampCounter* clamps) const
{
    require_on_grid(s, *grid_, "capillary_pressure");
    Eigen::VectorXd pc(s.size());
    for (Index i = 0; i < s.size(); ++i)
        pc[i] = laws_.pc(s[i], clamps);
    return Field(*grid_, std::move(pc));
}

Field TravellingWaveSolver::hysteresis_source(const Field& s, const Field& p) const
{
    require_on_grid(s, *grid_, "hysteresis_source");
    require_on_grid(p, *grid_, "hysteresis_source");
    Eigen::VectorXd out(s.size());
    for (Index i = 0; i < s.size(); ++i)
        out[i] = pos_part(p[i] - laws_.pc(s[i]));
    return Field(*grid_, std::move(out));
}

Eigen::VectorXd TravellingWaveSolver::gather(const Eigen::VectorXd& full) const
{
    const DofMap& dofs = p_reducer_->dofs();
    Eigen::VectorXd x(dofs.size());
    for (Index n = 0; n < dofs.num_nodes(); ++n) {
        const Index d = dofs(n);
        if (d != DofMap::kEliminated)
            x[d] = full[n];
    }
    return x;
}

void TravellingWaveSolver::assemble_pressure(const Field& s_prev, const Field& p_prev,
                                             ClampCounter* clamps, LinearSystem& out) const
{
    require_on_grid(s_prev, *grid_, "pressure_step");
    require_on_grid(p_prev, *grid_, "pressure_step");
    const Index n = grid_->num_nodes();
    const Eigen::VectorXd& lumped = assembler_->lumped_mass();

    Eigen::VectorXd k(n);
    Eigen::VectorXd rhs(n);
    for (Index i = 0; i < n; ++i) {
        k[i] = laws_.k(s_prev[i], clamps);
        rhs[i] = -lumped[i] * pos_part(p_prev[i] - laws_.pc(s_prev[i])) / params_.tau;
    }
    rhs.noalias() += mass_scaled_ * p_prev.values();
    rhs -= assembler_->gravity_load(k, params_.g);

    SparseMatrix a = mass_scaled_;
    assembler_->add_stiffness(a, k);
    p_reducer_->reduce(a, rhs, p_dirichlet_, params_.top_load(), out);
    out.symmetric = true;
}

LinearSystem TravellingWaveSolver::pressure_system(const Field& s_prev, const Field& p_prev,
                                                   ClampCounter* clamps) const
{
    LinearSystem sys;
    assemble_pressure(s_prev, p_prev, clamps, sys);
    return sys;
}

PressureStepResult TravellingWaveSolver::pressure_step(const Field& s_prev, const Field& p_prev,
                                                       ClampCounter* clamps)
{
    assemble_pressure(s_prev, p_prev, clamps, p_system_);
    const double rtol = params_.rtol_lin;

    SolveResult res;
    bool solved = false;
    const bool have_factor = p_factor_ && p_factor_->size() == p_system_.matrix.rows();
    if (params_.pressure_solver == PressureSolver::ReusedFactor && have_factor) {
        if (pcg_skip_ > 0) {
            // the matrix is still moving fast; a PCG attempt would be wasted
            --pcg_skip_;
        } else {
            try {
                res = pcg(p_system_.matrix, p_system_.rhs, gather(p_prev.values()), *p_factor_,
                          rtol, params_.refactor_after);
                solved = true;
                pcg_failures_ = 0;
            } catch (const SolverFailure&) {
                ++pcg_failures_;
                pcg_skip_ = std::min(1 << std::min(pcg_failures_ - 1, 3), 8);
            }
        }
    }
    if (!solved) {
        if (have_factor)
            p_factor_->refactor(p_system_.matrix);
        else
            p_factor_ = std::make_unique<Factorization>(p_system_.matrix, true);
        ++factorizations_;
        res = solve_factored(*p_factor_, p_system_.matrix, p_system_.rhs, rtol);
    }
    linear_iterations_ += res.report.iterations;

    PressureStepResult out;
    out.p = Field(*grid_, expand_solution(p_system_, res.x));
    out.p_star = res.x[p_system_.top_dof];
    out.report = res.report;
    return out;
}

Field TravellingWaveSolver::saturation_step(const Field& s_prev, const Field& p_new,
                                            ClampCounter* clamps) const
{
    require_on_grid(s_prev, *grid_, "saturation_step");
    require_on_grid(p_new, *grid_, "saturation_step");
    const Index n = grid_->num_nodes();
    const Eigen::VectorXd& lumped = assembler_->lumped_mass();
    const double scale = 1.0 / (params_.c * params_.tau);

    Eigen::VectorXd src(n);
    for (Index i = 0; i < n; ++i)
        src[i] = lumped[i] * scale * pos_part(p_new[i] - laws_.pc(s_prev[i], clamps));

    const Eigen::VectorXd rhs = s_reducer_->restrict_vector(src) + sat_rhs_offset_;
    const SolveResult res = solve_factored(*sat_factor_, sat_system_.matrix, rhs, params_.rtol_lin);
    return Field(*grid_, expand_solution(sat_system_, res.x));
}

Solution TravellingWaveSolver::solve()
{
    return solve(Field(*grid_, params_.s_init), Field(*grid_, params_.p_init));
}

namespace {

// Anderson mixing on the stacked iterate x = (p, s) with residual f = G(x) - x.
class AndersonMixer {
public:
    explicit AndersonMixer(int depth) : depth_(depth) {}

    void reset()
    {
        dx_.clear();
        df_.clear();
        have_prev_ = false;
    }

    Eigen::VectorXd next(const Eigen::VectorXd& x, const Eigen::VectorXd& gx)
    {
        const Eigen::VectorXd f = gx - x;
        if (have_prev_) {
            dx_.push_back(x - x_prev_);
            df_.push_back(f - f_prev_);
            if (static_cast<int>(dx_.size()) > depth_) {
                dx_.erase(dx_.begin());
                df_.erase(df_.begin());
            }
        }
        x_prev_ = x;
        f_prev_ = f;
        have_prev_ = true;
        if (df_.empty())
            return gx;

        const auto m = static_cast<Index>(df_.size());
        Eigen::MatrixXd dfm(f.size(), m);
        for (Index j = 0; j < m; ++j)
            dfm.col(j) = df_[static_cast<std::size_t>(j)];
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(dfm);
        qr.setThreshold(1e-10);
        if (qr.rank() < m) {
            reset();
            x_prev_ = x;
            f_prev_ = f;
            have_prev_ = true;
            return gx;
        }
        const Eigen::VectorXd gamma = qr.solve(f);
        Eigen::VectorXd out = gx;
        for (Index j = 0; j < m; ++j)
            out -= gamma[j] * (dx_[static_cast<std::size_t>(j)] + df_[static_cast<std::size_t>(j)]);
        return out;
    }

private:
    int depth_;
    std::vector<Eigen::VectorXd> dx_;
    std::vector<Eigen::VectorXd> df_;
    Eigen::VectorXd x_prev_;
    Eigen::VectorXd f_prev_;
    bool have_prev_ = false;
};

} // namespace

Solution TravellingWaveSolver::solve(const Field& s_start, const Field& p_start)
{
    require_on_grid(s_start, *grid_, "solve");
    require_on_grid(p_start, *grid_, "solve");

    Solution sol;
    sol.params = params_;
    Field s = s_start;
    Field p = p_start;
    const int fact0 = factorizations_;
    const long lin0 = linear_iterations_;
    const Index n = grid_->num_nodes();
    const Index top = grid_->node(0, grid_->nz());

    AndersonMixer mixer(params_.accel_depth);
    double best_mixed = std::numeric_limits<double>::infinity();

    for (int it = 1; it <= params_.max_iter; ++it) {
        PressureStepResult ps = pressure_step(s, p, &sol.clamps);
        Field s_new = saturation_step(s, ps.p, &sol.clamps);
        if (!ps.p.all_finite() || !s_new.all_finite())
            throw SolverFailure("fixed-point iterate became non-finite at iteration " +
                                    std::to_string(it),
                                std::numeric_limits<double>::infinity());
        const double update = (ps.p.values() - p.values()).lpNorm<Eigen::Infinity>() +
                              (s_new.values() - s.values()).lpNorm<Eigen::Infinity>();
        sol.residual_history.push_back(update);
        sol.iters = it;
        if (progress_ && it % progress_every_ == 0)
            progress_(it, update);
        if (update < params_.tol_fp) {
            p = std::move(ps.p);
            s = std::move(s_new);
            sol.converged = true;
            break;
        }

        const bool mix = params_.accel_depth > 0 && update < params_.accel_start &&
                         update < 10.0 * best_mixed;
        if (!mix) {
            mixer.reset();
            best_mixed = std::numeric_limits<double>::infinity();
            p = std::move(ps.p);
            s = std::move(s_new);
            continue;
        }
        best_mixed = std::min(best_mixed, update);
        Eigen::VectorXd x(2 * n);
        Eigen::VectorXd gx(2 * n);
        x << p.values(), s.values();
        gx << ps.p.values(), s_new.values();
        const Eigen::VectorXd next = mixer.next(x, gx);
        p = Field(*grid_, next.head(n));
        s = Field(*grid_, next.tail(n));
    }
    sol.p_star = p[top];
    sol.s = std::move(s);
    sol.p = std::move(p);
    sol.factorizations = factorizations_ - fact0;
    sol.linear_iterations = linear_iterations_ - lin0;
    return sol;
}

StrongResidual TravellingWaveSolver::strong_residual(const Field& s, const Field& p) const
{
    require_on_grid(s, *grid_, "strong_residual");
    require_on_grid(p, *grid_, "strong_residual");
    const Index n = grid_->num_nodes();
    const Eigen::VectorXd& lumped = assembler_->lumped_mass();
    const double c = params_.c;

    const Eigen::VectorXd transport = sat_full_ * s.values();
    Eigen::VectorXd k(n);
    Eigen::VectorXd src(n);
    for (Index i = 0; i < n; ++i) {
        k[i] = laws_.k(s[i]);
        src[i] = lumped[i] * pos_part(p[i] - laws_.pc(s[i]));
    }
    SparseMatrix stiff = assembler_->zero_matrix();
    assembler_->add_stiffness(stiff, k);
    const Eigen::VectorXd flux = stiff * p.values() + assembler_->gravity_load(k, params_.g);

    StrongResidual out;
    {
        Eigen::VectorXd r = p_reducer_->restrict_vector(c * transport + flux);
        const Index top = p_reducer_->dofs().top_dof();
        r[top] -= params_.top_load();
        const Eigen::VectorXd w = p_reducer_->restrict_vector(lumped);
        out.r_pde = (r.array() / w.array()).abs().maxCoeff();
    }
    {
        const Eigen::VectorXd r =
            s_reducer_->restrict_vector(c * params_.tau * transport - src);
        const Eigen::VectorXd w = s_reducer_->restrict_vector(lumped);
        out.r_hys = (r.array() / w.array()).abs().maxCoeff();
    }
    return out;
}

PressureStepResult pressure_step(const Field& s_prev, const Field& p_prev, const Params& params)
{
    TravellingWaveSolver solver(params);
    return solver.pressure_step(s_prev, p_prev);
}

Field saturation_step(const Field& s_prev, const Field& p_new, const Params& params)
{
    TravellingWaveSolver solver(params);
    return solver.saturation_step(s_prev, p_new);
}

Solution fixed_point_solve(const Params& params)
{
    TravellingWaveSolver solver(params);
    return solver.solve();
}

StrongResidual strong_residual(const Solution& sol, const Params& params)
{
    TravellingWaveSolver solver(params);
    return solver.strong_residual(sol.s, sol.p);
}

} // namespace twf
