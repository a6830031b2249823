#include "twf/diagnostics.hpp"

#include "twf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace twf {

namespace {

Grid grid_of(const Solution& sol, const Params& params)
{
    Grid grid(params.L, params.H, params.nx, params.nz);
    require_on_grid(sol.s, grid, "diagnostic");
    require_on_grid(sol.p, grid, "diagnostic");
    return grid;
}

double weight(const Grid& grid, Index i)
{
    return (i == 0 || i == grid.nx()) ? 0.5 * grid.hy() : grid.hy();
}

double line_flux(const Grid& grid, const Solution& sol, const Params& params,
                 const ConstitutiveLaws& laws, Index j, Index below, Index above)
{
    const double dz = static_cast<double>(above - below) * grid.hz();
    double out = 0.0;
    for (Index i = 0; i <= grid.nx(); ++i) {
        const Index n = grid.node(i, j);
        const double dp = (sol.p[grid.node(i, above)] - sol.p[grid.node(i, below)]) / dz;
        out += weight(grid, i) * (laws.k(sol.s[n]) * (dp + params.g) - params.c * sol.s[n]);
    }
    return out;
}

double integrate_row(const Grid& grid, const std::vector<double>& v)
{
    double out = 0.0;
    for (Index i = 0; i <= grid.nx(); ++i)
        out += weight(grid, i) * v[static_cast<std::size_t>(i)];
    return out;
}

} // namespace

double FluxProfile::relative_deviation() const
{
    return mean != 0.0 ? max_deviation / std::abs(mean) : max_deviation;
}

FluxProfile flux_profile(const Solution& sol, const Params& params)
{
    const Grid grid = grid_of(sol, params);
    const ConstitutiveLaws laws = params.laws();
    const Index nz = grid.nz();
    FluxProfile out;
    out.bottom = line_flux(grid, sol, params, laws, 0, 0, 1);
    out.top = line_flux(grid, sol, params, laws, nz, nz - 1, nz);
    for (Index j = 1; j < nz; ++j) {
        out.z.push_back(static_cast<double>(j) * grid.hz());
        out.value.push_back(line_flux(grid, sol, params, laws, j, j - 1, j + 1));
    }
    if (out.value.empty())
        return out;
    double sum = 0.0;
    for (double v : out.value)
        sum += v;
    out.mean = sum / static_cast<double>(out.value.size());
    for (double v : out.value)
        out.max_deviation = std::max(out.max_deviation, std::abs(v - out.mean));
    return out;
}

std::vector<double> free_boundary(const Solution& sol, const Params& params,
                                  std::optional<double> threshold)
{
    const Grid grid = grid_of(sol, params);
    const ConstitutiveLaws laws = params.laws();
    const double scale = 1.0 / (params.c * params.tau);
    Eigen::VectorXd rate(grid.num_nodes());
    for (Index n = 0; n < grid.num_nodes(); ++n)
        rate[n] = scale * pos_part(sol.p[n] - laws.pc(sol.s[n]));
    const double thr = threshold.value_or(std::max(1e-8 * rate.maxCoeff(), 1e-12));

    std::vector<double> psi(static_cast<std::size_t>(grid.nx() + 1), 0.0);
    for (Index n = 0; n < grid.num_nodes(); ++n) {
        if (rate[n] > thr) {
            double& v = psi[static_cast<std::size_t>(grid.column(n))];
            v = std::max(v, grid.z(n));
        }
    }
    return psi;
}

std::vector<double> s_star(const Solution& sol, const Params& params)
{
    const Grid grid = grid_of(sol, params);
    std::vector<double> out;
    for (Index n : grid.top_nodes())
        out.push_back(sol.s[n]);
    return out;
}

double g_F(const Solution& sol, const Params& params)
{
    const Grid grid = grid_of(sol, params);
    const ConstitutiveLaws laws = params.laws();
    std::vector<double> k = s_star(sol, params);
    for (double& v : k)
        v = laws.k(v);
    return params.g - params.top_load() / integrate_row(grid, k);
}

double c_mass_balance(const Solution& sol, const Params& params, std::optional<double> s_ref)
{
    const Grid grid = grid_of(sol, params);
    const ConstitutiveLaws laws = params.laws();
    const double ss = s_ref.value_or(params.s0_base);
    std::vector<double> excess = s_star(sol, params);
    for (double& v : excess)
        v -= ss;
    const double denom = integrate_row(grid, excess);
    if (!(std::abs(denom) > 1e-12 * params.L) || !std::isfinite(denom))
        throw UndefinedResult("c_mass_balance: s_star equals s_* on the whole top line");
    return (params.top_load() - laws.k(ss) * params.g * params.L) / denom;
}

namespace {

struct GradientMax {
    double y = 0.0;
    double z = 0.0;
    double norm = 0.0;
};

GradientMax max_gradient(const Assembler& as, const Eigen::VectorXd& u)
{
    GradientMax out;
    for (Index t = 0; t < as.grid().num_triangles(); ++t) {
        const auto g = as.element_gradient(t, u);
        out.y = std::max(out.y, std::abs(g[0]));
        out.z = std::max(out.z, std::abs(g[1]));
        out.norm = std::max(out.norm, std::hypot(g[0], g[1]));
    }
    return out;
}

} // namespace

LipschitzReport lipschitz_check(const Solution& sol, const Params& params)
{
    const Grid grid = grid_of(sol, params);
    const Assembler as(grid);
    const ConstitutiveLaws laws = params.laws();
    const BottomData bottom = boundary_data(params, grid);

    LipschitzReport r;
    r.C_P = max_gradient(as, sol.p.values()).norm;
    r.rho = validate_bounds(params).rho;
    for (Index i = 0; i + 1 < bottom.s0.size(); ++i)
        r.dy_s0 = std::max(r.dy_s0, std::abs(bottom.s0[i + 1] - bottom.s0[i]) / grid.hy());
    for (Index i = 0; i < bottom.p0.size(); ++i)
        r.source0 = std::max(r.source0, std::abs(bottom.p0[i] - laws.pc(bottom.s0[i])));
    r.source0 /= params.c * params.tau;
    r.C_s = (r.rho > 0.0 ? r.C_P / r.rho : std::numeric_limits<double>::infinity()) + r.dy_s0 +
            r.source0;
    const GradientMax gs = max_gradient(as, sol.s.values());
    r.max_dy_s = gs.y;
    r.max_dz_s = gs.z;
    r.margin = r.C_s - std::max(r.max_dy_s, r.max_dz_s);
    r.holds = r.margin >= 0.0;
    return r;
}

BoundReport bound_report(const Solution& sol, const Params& params)
{
    const Grid grid = grid_of(sol, params);
    const Assembler as(grid);
    const ConstitutiveLaws laws = params.laws();
    BoundReport r;
    r.max_p = sol.p.values().maxCoeff();
    r.max_grad_p = max_gradient(as, sol.p.values()).norm;
    r.max_s = sol.s.values().maxCoeff();
    r.pc_inv_max_p = laws.pc_inv(r.max_p);
    r.max_overpressure = -std::numeric_limits<double>::infinity();
    for (Index n = 0; n < grid.num_nodes(); ++n)
        r.max_overpressure = std::max(r.max_overpressure, sol.p[n] - laws.pc(sol.s[n]));
    r.c_tau_C_s = params.c * params.tau * lipschitz_check(sol, params).C_s;
    for (Index j = 0; j < grid.nz(); ++j)
        for (Index i = 0; i <= grid.nx(); ++i)
            r.min_dz_s = std::min(r.min_dz_s, (sol.s[grid.node(i, j + 1)] - sol.s[grid.node(i, j)]) /
                                                  grid.hz());
    std::vector<double> k = s_star(sol, params);
    for (double& v : k)
        v = laws.k(v);
    r.flux_excess = params.g * integrate_row(grid, k) - params.top_load();
    return r;
}

} // namespace twf
