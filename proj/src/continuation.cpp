#include "twf/continuation.hpp"

#include "twf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace twf {

std::string_view to_string(SolutionType type)
{
    switch (type) {
    case SolutionType::TypeI:
        return "TypeI";
    case SolutionType::TypeII:
        return "TypeII";
    case SolutionType::Unclassified:
        break;
    }
    return "Unclassified";
}

SolutionType solution_type_from_string(std::string_view name)
{
    if (name == "TypeI")
        return SolutionType::TypeI;
    if (name == "TypeII")
        return SolutionType::TypeII;
    if (name == "Unclassified")
        return SolutionType::Unclassified;
    throw InvalidInput("unknown solution type '" + std::string(name) + "'");
}

namespace {

Grid grid_of(const Solution& sol, const Params& params)
{
    Grid grid(params.L, params.H, params.nx, params.nz);
    require_on_grid(sol.s, grid, "diagnostic");
    require_on_grid(sol.p, grid, "diagnostic");
    return grid;
}

double trapezoid_weight(const Grid& grid, Index i)
{
    return (i == 0 || i == grid.nx()) ? 0.5 * grid.hy() : grid.hy();
}

} // namespace

double eval_G1(const Solution& sol, const Params& params)
{
    if (params.s0_base == 0.0)
        throw InvalidInput("eval_G1: s0_base must be nonzero");
    const Grid grid = grid_of(sol, params);
    double flux = 0.0;
    for (Index i = 0; i <= grid.nx(); ++i)
        flux += trapezoid_weight(grid, i) * (sol.p[grid.node(i, 1)] - sol.p[grid.node(i, 0)]) /
                grid.hz();
    return params.c - params.kappa * flux / (params.L * params.s0_base);
}

double eval_G_general(const Solution& sol, const Params& params, std::optional<double> s_star)
{
    const Grid grid = grid_of(sol, params);
    const ConstitutiveLaws laws = params.laws();
    const double ss = s_star.value_or(params.s0_base);
    double flux = 0.0;
    for (Index i = 0; i <= grid.nx(); ++i) {
        const Index n0 = grid.node(i, 0);
        const double s0 = sol.s[n0];
        const double dz = (sol.p[grid.node(i, 1)] - sol.p[n0]) / grid.hz();
        flux += trapezoid_weight(grid, i) * (laws.k(s0) * (dz + params.g) - params.c * s0);
    }
    return flux - (params.g * laws.k(ss) - params.c * ss) * params.L;
}

double eval_G2(const Solution& sol, const Params& params)
{
    const Grid grid = grid_of(sol, params);
    const ConstitutiveLaws laws = params.laws();
    const Index nz = grid.nz();
    double out = 0.0;
    for (Index i = 0; i <= grid.nx(); ++i) {
        const Index top = grid.node(i, nz);
        const double dz = (sol.p[top] - sol.p[grid.node(i, nz - 1)]) / grid.hz();
        out += trapezoid_weight(grid, i) * laws.k(sol.s[top]) * dz;
    }
    return out;
}

Classification classify(const Solution& sol, const Params& params,
                        std::optional<double> dz_threshold, int margin_rows)
{
    const Grid grid = grid_of(sol, params);
    const ConstitutiveLaws laws = params.laws();
    const double scale = 1.0 / (params.c * params.tau);
    Eigen::VectorXd rate(grid.num_nodes());
    for (Index n = 0; n < grid.num_nodes(); ++n)
        rate[n] = scale * pos_part(sol.p[n] - laws.pc(sol.s[n]));

    Classification out;
    out.G2 = eval_G2(sol, params);
    const double peak = rate.maxCoeff();
    out.threshold = dz_threshold.value_or(std::max(1e-8 * peak, 1e-12));
    if (!(peak > 0.0) || !(peak > out.threshold))
        return out;
    for (Index n = 0; n < grid.num_nodes(); ++n)
        if (rate[n] > out.threshold)
            out.h_row = std::max(out.h_row, grid.row(n));
    out.h = static_cast<double>(out.h_row) * grid.hz();
    out.reaches_top = out.h_row >= grid.nz() - margin_rows;
    if (!out.reaches_top && out.G2 <= 0.0)
        out.type = SolutionType::TypeI;
    else if (out.reaches_top && out.G2 > 0.0)
        out.type = SolutionType::TypeII;
    return out;
}

SweepRecord make_record(const Solution& sol, const Params& params)
{
    SweepRecord r;
    r.c = params.c;
    r.converged = sol.converged;
    r.iters = sol.iters;
    r.G1 = eval_G1(sol, params);
    r.G2 = eval_G2(sol, params);
    const Classification cl = classify(sol, params);
    r.type = cl.type;
    r.h = cl.h;
    r.reaches_top = cl.reaches_top;
    r.p_star = sol.p_star;
    r.max_s = sol.s.values().maxCoeff();
    r.last_update = sol.residual_history.empty() ? 0.0 : sol.residual_history.back();
    return r;
}

std::optional<std::size_t> find_transition(const std::vector<SweepRecord>& records)
{
    std::optional<SolutionType> first;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const SweepRecord& r = records[i];
        if (!r.error.empty() || !r.converged)
            continue;
        if (!first) {
            if (r.type != SolutionType::Unclassified)
                first = r.type;
        } else if (r.type != *first) {
            return i;
        }
    }
    return std::nullopt;
}

namespace {

SweepRecord solve_one(TravellingWaveSolver& solver, double c, const Solution* warm,
                      std::optional<Solution>& out)
{
    SweepRecord rec;
    rec.c = c;
    try {
        solver.set_wave_speed(c);
        Solution sol = warm ? solver.solve(warm->s, warm->p) : solver.solve();
        rec = make_record(sol, solver.params());
        out = std::move(sol);
    } catch (const Error& e) {
        rec.error = e.what();
    }
    return rec;
}

} // namespace

SweepResult sweep_c(TravellingWaveSolver& solver, const std::vector<double>& c_values,
                    bool warm_start, const std::optional<Solution>& start,
                    const SweepProgress& progress)
{
    if (!std::is_sorted(c_values.begin(), c_values.end()))
        throw InvalidInput("sweep_c: wave speeds must be sorted");
    SweepResult out;
    out.last = start;
    for (double c : c_values) {
        const Solution* warm = (warm_start && out.last) ? &*out.last : nullptr;
        std::optional<Solution> sol;
        SweepRecord rec = solve_one(solver, c, warm, sol);
        if (sol)
            out.last = std::move(sol);
        if (progress)
            progress(rec);
        out.records.push_back(std::move(rec));
    }
    out.transition = find_transition(out.records);
    return out;
}

SweepResult sweep_c(const Params& params, const std::vector<double>& c_values, bool warm_start,
                    const SweepProgress& progress)
{
    TravellingWaveSolver solver(params);
    return sweep_c(solver, c_values, warm_start, std::nullopt, progress);
}

BisectionResult bisect(const std::function<double(double)>& f, double lo, double hi, double tol)
{
    if (!(lo < hi))
        throw InvalidInput("bisect: empty bracket");
    if (!(tol > 0.0))
        throw InvalidInput("bisect: tolerance must be positive");
    BisectionResult out;
    out.lo = lo;
    out.hi = hi;
    out.value_lo = f(lo);
    out.value_hi = f(hi);
    out.steps.push_back({lo, out.value_lo});
    out.steps.push_back({hi, out.value_hi});
    if (!std::isfinite(out.value_lo) || !std::isfinite(out.value_hi) ||
        std::signbit(out.value_lo) == std::signbit(out.value_hi))
        throw BracketError("no sign change between " + std::to_string(lo) + " and " +
                           std::to_string(hi));
    while (out.hi - out.lo >= tol) {
        const double mid = 0.5 * (out.lo + out.hi);
        if (mid <= out.lo || mid >= out.hi)
            break;
        const double v = f(mid);
        out.steps.push_back({mid, v});
        if (!std::isfinite(v))
            throw SolverFailure("bisect: non-finite value at " + std::to_string(mid), v);
        if (std::signbit(v) == std::signbit(out.value_lo)) {
            out.lo = mid;
            out.value_lo = v;
        } else {
            out.hi = mid;
            out.value_hi = v;
        }
    }
    out.root = 0.5 * (out.lo + out.hi);
    return out;
}

WaveSpeedResult find_wave_speed(TravellingWaveSolver& solver, double c_lo, double c_hi,
                                double tol_c, const SweepProgress& progress)
{
    WaveSpeedResult out;
    const auto g1 = [&](double c) {
        std::optional<Solution> sol;
        SweepRecord rec = solve_one(solver, c, nullptr, sol);
        if (progress)
            progress(rec);
        out.records.push_back(rec);
        if (!rec.error.empty())
            throw SolverFailure("find_wave_speed: solve failed at c = " + std::to_string(c) +
                                    ": " + rec.error,
                                std::numeric_limits<double>::quiet_NaN());
        if (!rec.converged)
            throw SolverFailure("find_wave_speed: solve did not converge at c = " +
                                    std::to_string(c),
                                rec.last_update);
        return rec.G1;
    };
    const BisectionResult b = bisect(g1, c_lo, c_hi, tol_c);
    out.c_bar = b.root;
    out.c_lo = b.lo;
    out.c_hi = b.hi;
    out.G1_lo = b.value_lo;
    out.G1_hi = b.value_hi;
    return out;
}

WaveSpeedResult find_wave_speed(const Params& params, double c_lo, double c_hi, double tol_c,
                                const SweepProgress& progress)
{
    TravellingWaveSolver solver(params);
    return find_wave_speed(solver, c_lo, c_hi, tol_c, progress);
}

TransitionBracket refine_transition(TravellingWaveSolver& solver, const SweepRecord& lo,
                                    const SweepRecord& hi, double tol_c,
                                    const SweepProgress& progress)
{
    if (lo.type == hi.type)
        throw BracketError("refine_transition: both ends carry the same type");
    TransitionBracket out;
    out.c_lo = lo.c;
    out.c_hi = hi.c;
    out.type_lo = lo.type;
    out.type_hi = hi.type;
    while (out.c_hi - out.c_lo >= tol_c) {
        const double mid = 0.5 * (out.c_lo + out.c_hi);
        std::optional<Solution> sol;
        SweepRecord rec = solve_one(solver, mid, nullptr, sol);
        if (progress)
            progress(rec);
        out.records.push_back(rec);
        if (!rec.error.empty() || !rec.converged)
            throw SolverFailure("refine_transition: solve failed at c = " + std::to_string(mid),
                                rec.last_update);
        if (rec.type == out.type_lo) {
            out.c_lo = mid;
        } else if (rec.type == out.type_hi) {
            out.c_hi = mid;
        } else {
            // an unclassified midpoint splits the bracket; keep the lower half
            out.c_hi = mid;
            out.type_hi = rec.type;
        }
    }
    return out;
}

} // namespace twf
