#include "twf/oracle.hpp"

#include "twf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace twf {

namespace {

double top_value(const Grid& grid, const Field& p)
{
    const std::vector<Index> top = grid.top_nodes();
    const double v = p[top.front()];
    for (Index n : top)
        if (std::abs(p[n] - v) > 1e-12 * (1.0 + std::abs(v)))
            throw InvalidInput("energy: pressure is not constant on the top boundary");
    return v;
}

Eigen::VectorXd nodal_k(const TravellingWaveSolver& solver, const Field& s)
{
    return solver.permeability(s).values();
}

} // namespace

double energy(const TravellingWaveSolver& solver, const Field& p, const Field& s)
{
    const Grid& grid = solver.grid();
    require_on_grid(p, grid, "energy");
    require_on_grid(s, grid, "energy");
    const Params& prm = solver.params();
    const Assembler& as = solver.assembler();
    const double p_star = top_value(grid, p);

    const Eigen::VectorXd& lumped = as.lumped_mass();
    const ConstitutiveLaws& laws = solver.laws();
    double obstacle = 0.0;
    for (Index i = 0; i < p.size(); ++i) {
        const double e = pos_part(p[i] - laws.pc(s[i]));
        obstacle += lumped[i] * e * e;
    }
    obstacle /= 2.0 * prm.tau;

    const Eigen::VectorXd k = nodal_k(solver, s);
    double dirichlet = 0.0;
    for (Index t = 0; t < grid.num_triangles(); ++t) {
        const auto& tri = grid.triangle(t);
        const double kbar = (k[tri[0]] + k[tri[1]] + k[tri[2]]) / 3.0;
        const auto gr = as.element_gradient(t, p.values());
        const double gz = gr[1] + prm.g;
        dirichlet += kbar * as.area(t) * (gr[0] * gr[0] + gz * gz);
    }
    return obstacle + 0.5 * dirichlet - prm.top_load() * p_star;
}

double energy(const Field& p, const Field& s, const Params& params)
{
    const TravellingWaveSolver solver(params);
    return energy(solver, p, s);
}

Eigen::VectorXd energy_gradient(const TravellingWaveSolver& solver, const Field& p,
                                const Field& s)
{
    const Grid& grid = solver.grid();
    require_on_grid(p, grid, "energy_gradient");
    require_on_grid(s, grid, "energy_gradient");
    const Assembler& as = solver.assembler();
    const Params& prm = solver.params();
    const Eigen::VectorXd k = nodal_k(solver, s);

    SparseMatrix stiff = as.zero_matrix();
    as.add_stiffness(stiff, k);
    Eigen::VectorXd out = stiff * p.values() + as.gravity_load(k, prm.g);
    const Eigen::VectorXd& lumped = as.lumped_mass();
    for (Index i = 0; i < p.size(); ++i)
        out[i] += lumped[i] * pos_part(p[i] - solver.laws().pc(s[i])) / prm.tau;
    return out;
}

Eigen::VectorXd euler_lagrange_residual(const TravellingWaveSolver& solver, const Field& p,
                                        const Field& s)
{
    const SystemReducer& red = solver.pressure_reducer();
    Eigen::VectorXd r = red.restrict_vector(energy_gradient(solver, p, s));
    r[red.dofs().top_dof()] -= solver.params().top_load();
    return r;
}

namespace {

double residual_scale(const TravellingWaveSolver& solver, const Field& s)
{
    const Eigen::VectorXd k = nodal_k(solver, s);
    const Eigen::VectorXd load = solver.assembler().gravity_load(k, solver.params().g);
    return std::max({load.lpNorm<Eigen::Infinity>(), std::abs(solver.params().top_load()),
                     std::numeric_limits<double>::min()});
}

bool energy_rose(double before, double after)
{
    return after > before + 1e-12 * std::max(1.0, std::abs(before));
}

VariationalResult newton_solve(TravellingWaveSolver& solver, const Field& s, const Field& p_start,
                               const VariationalOptions& opts)
{
    const Grid& grid = solver.grid();
    const Params& prm = solver.params();
    const Assembler& as = solver.assembler();
    const SystemReducer& red = solver.pressure_reducer();
    const Eigen::VectorXd& lumped = as.lumped_mass();
    const Index n = grid.num_nodes();

    const Eigen::VectorXd k = nodal_k(solver, s);
    const Eigen::VectorXd b = solver.capillary_pressure(s).values();
    const Eigen::VectorXd grav = as.gravity_load(k, prm.g);
    SparseMatrix stiff = as.zero_matrix();
    as.add_stiffness(stiff, k);
    const double scale = residual_scale(solver, s);

    // Minimizer of the quadratic model for a given active set.
    const auto model_minimizer = [&](const Field& p) {
        SparseMatrix jac = stiff;
        Eigen::VectorXd rhs = -grav;
        for (Index i = 0; i < n; ++i) {
            if (p[i] > b[i]) {
                jac.coeffRef(i, i) += lumped[i] / prm.tau;
                rhs[i] += lumped[i] * b[i] / prm.tau;
            }
        }
        const LinearSystem sys = red.reduce(jac, rhs, solver.pressure_dirichlet(), prm.top_load());
        const SolveResult res = solve(sys.matrix, sys.rhs, prm.rtol_lin, true);
        return Field(grid, expand_solution(sys, res.x));
    };

    VariationalResult out;
    Field p = model_minimizer(p_start);
    double a = energy(solver, p, s);
    out.energy_history.push_back(a);
    for (int it = 1; it <= opts.max_iter; ++it) {
        out.residual = euler_lagrange_residual(solver, p, s).lpNorm<Eigen::Infinity>() / scale;
        out.iters = it - 1;
        if (out.residual <= opts.tol) {
            out.converged = true;
            break;
        }
        const Field target = model_minimizer(p);
        const Eigen::VectorXd dir = target.values() - p.values();
        if (dir.lpNorm<Eigen::Infinity>() <= 1e-15 * (1.0 + p.values().lpNorm<Eigen::Infinity>())) {
            // the linear solve cannot improve any further
            out.converged = out.residual <= std::sqrt(opts.tol);
            break;
        }
        const Eigen::VectorXd grad = energy_gradient(solver, p, s);
        const double slope = grad.dot(dir) - prm.top_load() * dir[grid.top_nodes().front()];
        double t = 1.0;
        Field trial(grid);
        double a_trial = a;
        for (int ls = 0; ls < 60; ++ls) {
            trial = Field(grid, Eigen::VectorXd(p.values() + t * dir));
            a_trial = energy(solver, trial, s);
            if (a_trial <= a + 1e-4 * t * std::min(slope, 0.0))
                break;
            t *= 0.5;
        }
        if (energy_rose(a, a_trial))
            out.monotone = false;
        p = std::move(trial);
        a = a_trial;
        out.energy_history.push_back(a);
    }
    out.p_star = p[grid.top_nodes().front()];
    out.p = std::move(p);
    return out;
}

VariationalResult damped_solve(TravellingWaveSolver& solver, const Field& s, const Field& p_start,
                               const VariationalOptions& opts)
{
    const Grid& grid = solver.grid();
    const double scale = residual_scale(solver, s);
    VariationalResult out;
    PressureStepResult step = solver.pressure_step(s, p_start);
    Field p = std::move(step.p);
    double a = energy(solver, p, s);
    out.energy_history.push_back(a);
    for (int it = 1; it <= opts.max_iter; ++it) {
        out.residual = euler_lagrange_residual(solver, p, s).lpNorm<Eigen::Infinity>() / scale;
        out.iters = it - 1;
        if (out.residual <= opts.tol) {
            out.converged = true;
            break;
        }
        step = solver.pressure_step(s, p);
        const double a_new = energy(solver, step.p, s);
        if (energy_rose(a, a_new))
            out.monotone = false;
        p = std::move(step.p);
        a = a_new;
        out.energy_history.push_back(a);
    }
    out.p_star = p[grid.top_nodes().front()];
    out.p = std::move(p);
    return out;
}

} // namespace

VariationalResult variational_pressure_solve(TravellingWaveSolver& solver, const Field& s_frozen,
                                             const Field& p_start, const VariationalOptions& opts)
{
    require_on_grid(s_frozen, solver.grid(), "variational_pressure_solve");
    require_on_grid(p_start, solver.grid(), "variational_pressure_solve");
    if (opts.method == VariationalMethod::Newton)
        return newton_solve(solver, s_frozen, p_start, opts);
    return damped_solve(solver, s_frozen, p_start, opts);
}

VariationalResult variational_pressure_solve(const Field& s_frozen, const Params& params,
                                             const VariationalOptions& opts)
{
    TravellingWaveSolver solver(params);
    return variational_pressure_solve(solver, s_frozen, Field(solver.grid(), params.p_init), opts);
}

namespace {

// Root of c tau (s - s_prev) / hz = [p - pc(s)]_+, which is increasing in s.
double implicit_euler_step(const ConstitutiveLaws& laws, double s_prev, double p, double rate)
{
    const auto f = [&](double s) { return rate * (s - s_prev) - pos_part(p - laws.pc(s)); };
    const double drive = p - laws.pc(s_prev);
    if (!(drive > 0.0))
        return s_prev;
    double lo = s_prev;
    double hi = s_prev + drive / rate;
    if (f(hi) <= 0.0)
        return hi;
    double s = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double fs = f(s);
        if (fs == 0.0)
            return s;
        if (fs < 0.0)
            lo = s;
        else
            hi = s;
        if (hi - lo <= 1e-15 * std::max(1.0, std::abs(hi)))
            break;
        const double active = p - laws.pc(s) > 0.0 ? laws.pc_prime(s) : 0.0;
        double next = s - fs / (rate + active);
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        s = next;
    }
    return s;
}

} // namespace

Field ode_transport(const TravellingWaveSolver& solver, const Field& p)
{
    const Grid& grid = solver.grid();
    require_on_grid(p, grid, "ode_transport");
    const Params& prm = solver.params();
    const double rate = prm.c * prm.tau / grid.hz();
    const BottomData& bottom = solver.bottom();

    Field s(grid);
    for (Index i = 0; i <= grid.nx(); ++i) {
        double cur = bottom.s0[i];
        s[grid.node(i, 0)] = cur;
        for (Index j = 1; j <= grid.nz(); ++j) {
            const Index n = grid.node(i, j);
            cur = implicit_euler_step(solver.laws(), cur, p[n], rate);
            s[n] = cur;
        }
    }
    return s;
}

Field ode_transport(const Field& p, const Params& params)
{
    const TravellingWaveSolver solver(params);
    return ode_transport(solver, p);
}

} // namespace twf
