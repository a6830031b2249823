#include "twf/run.hpp"

#include "twf/continuation.hpp"
#include "twf/diagnostics.hpp"
#include "twf/errors.hpp"
#include "twf/export.hpp"
#include "twf/oracle.hpp"

#include <spdlog/spdlog.h>

#include <filesystem>
#include <fstream>
#include <random>

namespace twf {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json number_or_null(double v)
{
    return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error("cannot open '" + path.string() + "' for writing");
    out << text;
    out.flush();
    if (!out)
        throw Error("write to '" + path.string() + "' failed");
}

void export_field(const RunConfig& cfg, const fs::path& dir, const std::string& name,
                  const Field& field, const Grid& grid)
{
    for (ExportFormat f : cfg.formats) {
        if (f == ExportFormat::Csv)
            write_field_csv((dir / (name + ".csv")).string(), field, grid);
        else
            write_field_vtk((dir / (name + ".vtk")).string(), field, grid, name);
    }
}

ordered_json record_json(const SweepRecord& r)
{
    ordered_json j;
    j["c"] = r.c;
    j["converged"] = r.converged;
    j["iters"] = r.iters;
    j["G1"] = number_or_null(r.G1);
    j["G2"] = number_or_null(r.G2);
    j["type"] = std::string(to_string(r.type));
    j["h"] = r.h;
    j["reaches_top"] = r.reaches_top;
    j["p_star"] = number_or_null(r.p_star);
    j["max_s"] = number_or_null(r.max_s);
    j["last_update"] = number_or_null(r.last_update);
    if (!r.error.empty())
        j["error"] = r.error;
    return j;
}

CsvTable records_table(const std::vector<SweepRecord>& records)
{
    CsvTable t({"c", "converged", "iters", "G1", "G2", "type", "h", "reaches_top", "p_star",
                "max_s", "last_update", "error"});
    for (const SweepRecord& r : records)
        t.add_row({cell(r.c), cell(r.converged), cell(r.iters), cell(r.G1), cell(r.G2),
                   cell(to_string(r.type)), cell(r.h), cell(r.reaches_top), cell(r.p_star),
                   cell(r.max_s), cell(r.last_update), cell(std::string_view(r.error))});
    return t;
}

SweepProgress log_record()
{
    return [](const SweepRecord& r) {
        if (r.error.empty())
            spdlog::info("c = {}: {} after {} iterations, G1 = {}, G2 = {}, {}", format_double(r.c),
                         r.converged ? "converged" : "not converged", r.iters,
                         format_double(r.G1), format_double(r.G2), to_string(r.type));
        else
            spdlog::warn("c = {}: {}", format_double(r.c), r.error);
    };
}

void attach_progress(TravellingWaveSolver& solver, const RunConfig& cfg)
{
    solver.set_progress(
        [](int it, double update) {
            spdlog::debug("iteration {}: update {}", it, format_double(update));
        },
        cfg.progress_every);
}

ordered_json describe_solution(const Solution& sol, const RunConfig& cfg, const fs::path& dir,
                               bool write_files)
{
    const Params& prm = cfg.params;
    const Grid grid(prm.L, prm.H, prm.nx, prm.nz);
    const ConstitutiveLaws laws = prm.laws();

    const Classification cl = classify(sol, prm, cfg.dz_threshold, cfg.margin_rows);
    const FluxProfile flux = flux_profile(sol, prm);
    const std::vector<double> psi = free_boundary(sol, prm, cfg.dz_threshold);
    const LipschitzReport lip = lipschitz_check(sol, prm);
    const BoundReport bounds = bound_report(sol, prm);
    const StrongResidual res = strong_residual(sol, prm);
    double c_hat = std::numeric_limits<double>::quiet_NaN();
    try {
        c_hat = c_mass_balance(sol, prm);
    } catch (const UndefinedResult&) {
    }
    const double G1 = eval_G1(sol, prm);
    const double G = eval_G_general(sol, prm);
    const double gF = g_F(sol, prm);

    ordered_json j;
    j["converged"] = sol.converged;
    j["iters"] = sol.iters;
    j["last_update"] = number_or_null(sol.residual_history.empty() ? 0.0
                                                                   : sol.residual_history.back());
    j["p_star"] = sol.p_star;
    j["type"] = std::string(to_string(cl.type));
    j["G1"] = G1;
    j["G"] = G;
    j["G2"] = cl.G2;
    j["h"] = cl.h;
    j["h_row"] = cl.h_row;
    j["reaches_top"] = cl.reaches_top;
    j["dz_threshold"] = cl.threshold;
    j["max_psi"] = psi.empty() ? 0.0 : *std::max_element(psi.begin(), psi.end());
    j["flux"] = {{"mean", flux.mean},
                 {"max_deviation", flux.max_deviation},
                 {"relative_deviation", flux.relative_deviation()},
                 {"bottom", flux.bottom},
                 {"top", flux.top}};
    j["infinite_domain_estimates"] = {{"g_F", gF}, {"c_mass_balance", number_or_null(c_hat)}};
    j["strong_residual"] = {{"r_pde", res.r_pde}, {"r_hys", res.r_hys}};
    j["lipschitz"] = {{"C_P", lip.C_P},       {"rho", lip.rho},         {"C_s", lip.C_s},
                      {"max_dz_s", lip.max_dz_s}, {"max_dy_s", lip.max_dy_s}, {"holds", lip.holds}};
    j["bounds"] = {{"max_p", bounds.max_p},
                   {"max_grad_p", bounds.max_grad_p},
                   {"max_s", bounds.max_s},
                   {"pc_inv_max_p", bounds.pc_inv_max_p},
                   {"max_overpressure", bounds.max_overpressure},
                   {"c_tau_C_s", bounds.c_tau_C_s},
                   {"min_dz_s", bounds.min_dz_s},
                   {"flux_excess", bounds.flux_excess}};
    j["clamps"] = {{"below", sol.clamps.below}, {"above", sol.clamps.above}};
    j["factorizations"] = sol.factorizations;
    j["linear_iterations"] = sol.linear_iterations;

    if (!write_files)
        return j;

    export_field(cfg, dir, "s", sol.s, grid);
    export_field(cfg, dir, "p", sol.p, grid);
    Eigen::VectorXd src(grid.num_nodes());
    for (Index n = 0; n < grid.num_nodes(); ++n)
        src[n] = pos_part(sol.p[n] - laws.pc(sol.s[n]));
    export_field(cfg, dir, "source", Field(grid, std::move(src)), grid);

    CsvTable psi_t({"y", "psi"});
    for (Index i = 0; i <= grid.nx(); ++i)
        psi_t.add_row({cell(grid.y(grid.node(i, 0))), cell(psi[static_cast<std::size_t>(i)])});
    psi_t.write((dir / "psi.csv").string());

    CsvTable flux_t({"z", "F_c"});
    flux_t.add_row({cell(0.0), cell(flux.bottom)});
    for (std::size_t k = 0; k < flux.z.size(); ++k)
        flux_t.add_row({cell(flux.z[k]), cell(flux.value[k])});
    flux_t.add_row({cell(prm.H), cell(flux.top)});
    flux_t.write((dir / "flux.csv").string());

    CsvTable hist({"iteration", "update"});
    for (std::size_t k = 0; k < sol.residual_history.size(); ++k)
        hist.add_row({cell(static_cast<long long>(k + 1)), cell(sol.residual_history[k])});
    hist.write((dir / "history.csv").string());

    CsvTable diag({"quantity", "value"});
    diag.add_row({"c", cell(prm.c)})
        .add_row({"converged", cell(sol.converged)})
        .add_row({"iters", cell(sol.iters)})
        .add_row({"p_star", cell(sol.p_star)})
        .add_row({"G1", cell(G1)})
        .add_row({"G", cell(G)})
        .add_row({"G2", cell(cl.G2)})
        .add_row({"type", cell(to_string(cl.type))})
        .add_row({"h", cell(cl.h)})
        .add_row({"g_F", cell(gF)})
        .add_row({"c_mass_balance", cell(c_hat)})
        .add_row({"flux_mean", cell(flux.mean)})
        .add_row({"flux_relative_deviation", cell(flux.relative_deviation())})
        .add_row({"r_pde", cell(res.r_pde)})
        .add_row({"r_hys", cell(res.r_hys)})
        .add_row({"lipschitz_C_s", cell(lip.C_s)})
        .add_row({"max_grad_s", cell(std::max(lip.max_dz_s, lip.max_dy_s))});
    diag.write((dir / "diagnostics.csv").string());
    return j;
}

ordered_json oracle_json(const OracleReport& r)
{
    ordered_json gaps = ordered_json::array();
    for (std::size_t k = 0; k < r.epsilons.size(); ++k)
        gaps.push_back({{"epsilon", r.epsilons[k]}, {"transport_gap", r.transport_gap[k]}});
    ordered_json j;
    j["transport"] = gaps;
    j["fd_max_relative"] = r.fd_max_relative;
    j["fd_directions"] = r.fd_directions;
    j["variational_residual"] = r.variational_residual;
    j["variational_converged"] = r.variational_converged;
    j["variational_vs_scheme"] = r.variational_vs_scheme;
    j["two_start_gap"] = r.two_start_gap;
    j["damped_monotone"] = r.damped_monotone;
    return j;
}

int run_solve(const RunConfig& cfg, const fs::path& dir, ordered_json& summary, bool oracle)
{
    TravellingWaveSolver solver(cfg.params);
    attach_progress(solver, cfg);
    const Solution sol = solver.solve();
    spdlog::info("{} after {} iterations (last update {})",
                 sol.converged ? "converged" : "not converged", sol.iters,
                 format_double(sol.residual_history.empty() ? 0.0 : sol.residual_history.back()));
    summary["result"] = describe_solution(sol, cfg, dir, true);
    if (oracle) {
        const OracleReport r = oracle_check(sol, cfg.params, cfg.oracle_epsilons,
                                            cfg.oracle_directions, cfg.oracle_seed);
        summary["oracle"] = oracle_json(r);
    }
    return sol.converged ? kExitOk : kExitNotConverged;
}

int run_sweep(const RunConfig& cfg, const fs::path& dir, ordered_json& summary)
{
    if (cfg.c_values.empty())
        throw ConfigError("sweep needs a non-empty c_values list");
    TravellingWaveSolver solver(cfg.params);
    attach_progress(solver, cfg);
    SweepResult sweep = sweep_c(solver, cfg.c_values, cfg.warm_start, std::nullopt, log_record());
    std::vector<SweepRecord> all = sweep.records;

    ordered_json j;
    j["warm_start"] = cfg.warm_start;
    ordered_json recs = ordered_json::array();
    for (const SweepRecord& r : sweep.records)
        recs.push_back(record_json(r));
    j["records"] = recs;
    if (sweep.transition) {
        const std::size_t i = *sweep.transition;
        // the last classified record before the flip
        std::size_t before = i;
        while (before > 0) {
            --before;
            const SweepRecord& r = sweep.records[before];
            if (r.error.empty() && r.converged && r.type != SolutionType::Unclassified)
                break;
        }
        ordered_json t;
        t["index"] = i;
        t["c_below"] = sweep.records[before].c;
        t["c_above"] = sweep.records[i].c;
        if (cfg.refine_tol > 0.0 && !cfg.warm_start) {
            const TransitionBracket b = refine_transition(solver, sweep.records[before],
                                                          sweep.records[i], cfg.refine_tol,
                                                          log_record());
            t["refined"] = {{"c_lo", b.c_lo},
                            {"c_hi", b.c_hi},
                            {"type_lo", std::string(to_string(b.type_lo))},
                            {"type_hi", std::string(to_string(b.type_hi))}};
            all.insert(all.end(), b.records.begin(), b.records.end());
        }
        j["transition"] = t;
    } else {
        j["transition"] = nullptr;
    }
    summary["result"] = j;
    records_table(all).write((dir / "sweep.csv").string());

    for (const SweepRecord& r : all)
        if (!r.error.empty() || !r.converged)
            return kExitNotConverged;
    return kExitOk;
}

int run_find_speed(const RunConfig& cfg, const fs::path& dir, ordered_json& summary)
{
    TravellingWaveSolver solver(cfg.params);
    attach_progress(solver, cfg);
    std::vector<SweepRecord> records;
    ordered_json j;
    int code = kExitOk;
    try {
        const WaveSpeedResult r =
            find_wave_speed(solver, cfg.c_lo, cfg.c_hi, cfg.tol_c, [&](const SweepRecord& rec) {
                log_record()(rec);
                records.push_back(rec);
            });
        j["c_bar"] = r.c_bar;
        j["bracket"] = {{"c_lo", r.c_lo}, {"c_hi", r.c_hi}, {"G1_lo", r.G1_lo}, {"G1_hi", r.G1_hi}};
    } catch (const BracketError& e) {
        spdlog::error("{}", e.what());
        j["error"] = e.what();
        code = kExitFailure;
    } catch (const SolverFailure& e) {
        spdlog::error("{}", e.what());
        j["error"] = e.what();
        code = kExitNotConverged;
    }
    ordered_json recs = ordered_json::array();
    for (const SweepRecord& r : records)
        recs.push_back(record_json(r));
    j["records"] = recs;
    summary["result"] = j;
    records_table(records).write((dir / "find_speed.csv").string());
    return code;
}

} // namespace

OracleReport oracle_check(const Solution& sol, const Params& params,
                          const std::vector<double>& epsilons, int directions, unsigned seed)
{
    OracleReport r;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    TravellingWaveSolver solver(params);
    const Grid& grid = solver.grid();
    const Field s_ode = ode_transport(solver, sol.p);
    for (double eps : epsilons) {
        Params pe = params;
        pe.epsilon = eps;
        const TravellingWaveSolver se(pe);
        const Field s_step = se.saturation_step(sol.s, sol.p);
        r.epsilons.push_back(eps);
        r.transport_gap.push_back((s_step.values() - s_ode.values()).lpNorm<Eigen::Infinity>());
    }

    const VariationalResult var =
        variational_pressure_solve(solver, sol.s, Field(grid, params.p_init));
    r.variational_residual = var.residual;
    r.variational_converged = var.converged;
    r.variational_vs_scheme = (var.p.values() - sol.p.values()).lpNorm<Eigen::Infinity>();

    // random feasible start: bottom data fixed, top constant
    Field start(grid);
    const BottomData& bottom = solver.bottom();
    for (Index n = 0; n < grid.num_nodes(); ++n)
        start[n] = 2.0 * unit(rng);
    const double top = unit(rng);
    for (Index n : grid.top_nodes())
        start[n] = top;
    for (std::size_t i = 0; i < bottom.nodes.size(); ++i)
        start[bottom.nodes[i]] = bottom.p0[static_cast<Index>(i)];
    const VariationalResult var2 = variational_pressure_solve(solver, sol.s, start);
    r.two_start_gap = (var2.p.values() - var.p.values()).lpNorm<Eigen::Infinity>();

    // directional derivatives at the minimizer, relative to the size of the
    // terms that cancel there
    const Assembler& as = solver.assembler();
    const Eigen::VectorXd k = solver.permeability(sol.s).values();
    SparseMatrix stiff = as.zero_matrix();
    as.add_stiffness(stiff, k);
    const Eigen::VectorXd kp = stiff * var.p.values();
    const Eigen::VectorXd grav = as.gravity_load(k, params.g);
    const std::vector<Index> top_nodes = grid.top_nodes();
    const double a0 = energy(solver, var.p, sol.s);
    for (int dnum = 0; dnum < directions; ++dnum) {
        Eigen::VectorXd d(grid.num_nodes());
        for (Index n = 0; n < grid.num_nodes(); ++n)
            d[n] = unit(rng);
        const double dt = unit(rng);
        for (Index n : top_nodes)
            d[n] = dt;
        for (Index n : bottom.nodes)
            d[n] = 0.0;
        const double h = 1e-6 * (1.0 + var.p.values().lpNorm<Eigen::Infinity>());
        const double ap = energy(solver, Field(grid, Eigen::VectorXd(var.p.values() + h * d)), sol.s);
        const double am = energy(solver, Field(grid, Eigen::VectorXd(var.p.values() - h * d)), sol.s);
        const double deriv = (ap - am) / (2.0 * h);
        const double ref = (kp.cwiseProduct(d)).cwiseAbs().sum() +
                           (grav.cwiseProduct(d)).cwiseAbs().sum() +
                           std::abs(params.top_load() * dt) +
                           std::numeric_limits<double>::epsilon() * std::abs(a0) / h;
        r.fd_max_relative = std::max(r.fd_max_relative, std::abs(deriv) / ref);
        ++r.fd_directions;
    }

    VariationalOptions damped;
    damped.method = VariationalMethod::Damped;
    damped.max_iter = 20;
    r.damped_monotone =
        variational_pressure_solve(solver, sol.s, Field(grid, params.p_init), damped).monotone;
    return r;
}

RunOutcome run(const RunConfig& config, const std::string& out_dir)
{
    RunOutcome out;
    out.summary["mode"] = std::string(to_string(config.mode));
    out.summary["config"] = to_json(config);
    ordered_json warnings = ordered_json::array();
    for (const std::string& w : config.params.warnings())
        warnings.push_back(w);
    out.summary["warnings"] = warnings;

    const fs::path dir(out_dir);
    try {
        fs::create_directories(dir);
        switch (config.mode) {
        case RunMode::Solve:
        case RunMode::Classify:
            out.exit_code = run_solve(config, dir, out.summary, false);
            break;
        case RunMode::OracleCheck:
            out.exit_code = run_solve(config, dir, out.summary, true);
            break;
        case RunMode::Sweep:
            out.exit_code = run_sweep(config, dir, out.summary);
            break;
        case RunMode::FindSpeed:
            out.exit_code = run_find_speed(config, dir, out.summary);
            break;
        }
    } catch (const ConfigError& e) {
        spdlog::error("{}", e.what());
        out.summary["error"] = e.what();
        out.exit_code = kExitConfigError;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        out.summary["error"] = e.what();
        out.exit_code = kExitFailure;
    }
    out.summary["exit_code"] = out.exit_code;
    try {
        fs::create_directories(dir);
        write_text(dir / "summary.json", out.summary.dump(2) + "\n");
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        if (out.exit_code == kExitOk)
            out.exit_code = kExitFailure;
    }
    return out;
}

} // namespace twf
