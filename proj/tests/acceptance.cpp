// Acceptance run on the reference parameters at 128x128. Prints one line per
// criterion. Arguments select criteria by number; no arguments runs all.

#include "twf/continuation.hpp"
#include "twf/diagnostics.hpp"
#include "twf/errors.hpp"
#include "twf/run.hpp"
#include "twf/scheme.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace twf;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string g(double v) { return fmt("%.6g", v); }

Params reference(double c, Index n = 128)
{
    Params p;
    p.nx = n;
    p.nz = n;
    p.c = c;
    return p;
}

double reflection_gap(const Field& f, const Grid& grid)
{
    double gap = 0.0;
    for (Index n = 0; n < grid.num_nodes(); ++n)
        gap = std::max(gap, std::abs(f[n] - f[grid.reflect(n)]));
    return gap;
}

std::string describe(const SweepRecord& r)
{
    std::ostringstream os;
    os << "c=" << g(r.c) << " " << to_string(r.type) << " G1=" << g(r.G1) << " G2=" << g(r.G2)
       << " h=" << g(r.h) << (r.converged ? "" : " not-converged");
    return os.str();
}

void trace(const SweepRecord& r) { std::printf("    %s\n", describe(r).c_str()); std::fflush(stdout); }

// last converged, classified record before index i
std::optional<std::size_t> classified_before(const std::vector<SweepRecord>& recs, std::size_t i)
{
    while (i > 0) {
        --i;
        const SweepRecord& r = recs[i];
        if (r.error.empty() && r.converged && r.type != SolutionType::Unclassified)
            return i;
    }
    return std::nullopt;
}

struct State {
    std::optional<Solution> finger; // c = 0.04
    double finger_seconds = 0.0;
    std::optional<double> cold_lo, cold_hi; // refined cold transition
};

const Solution& finger(State& st)
{
    if (!st.finger) {
        const auto t0 = Clock::now();
        st.finger = fixed_point_solve(reference(0.04));
        st.finger_seconds = seconds_since(t0);
    }
    return *st.finger;
}

Outcome c1_constant_state(State&)
{
    Params p = reference(0.04);
    p.delta = 0.0;
    const ConstitutiveLaws laws = p.laws();
    p.F_inf = p.g * laws.k(p.s0_base) * p.L;
    p.p_init = laws.pc(p.s0_base);
    p.s_init = p.s0_base;
    const auto t0 = Clock::now();
    const Solution sol = fixed_point_solve(p);
    const double t = seconds_since(t0);
    const double es = (sol.s.values().array() - p.s0_base).abs().maxCoeff();
    const double ep = (sol.p.values().array() - laws.pc(p.s0_base)).abs().maxCoeff();
    Outcome o;
    o.pass = sol.converged && sol.iters <= 2 && es <= 1e-10 && ep <= 1e-10 && t < 5.0;
    o.detail = "iters=" + std::to_string(sol.iters) + " |s-s0|=" + g(es) + " |p-pc(s0)|=" + g(ep) +
               " time=" + fmt("%.2fs", t);
    return o;
}

Outcome c2_finger(State& st)
{
    const Solution& sol = finger(st);
    const Params& p = sol.params;
    const Classification cl = classify(sol, p);
    const std::vector<double> psi = free_boundary(sol, p);
    const double psi_max = *std::max_element(psi.begin(), psi.end());
    Outcome o;
    o.pass = sol.converged && cl.type == SolutionType::TypeI && psi_max < p.H && cl.G2 < 0.0 &&
             st.finger_seconds < 300.0;
    o.detail = "iters=" + std::to_string(sol.iters) + " type=" + std::string(to_string(cl.type)) +
               " max Psi=" + g(psi_max) + " G2=" + g(cl.G2) + " (paper -0.1948) time=" +
               fmt("%.1fs", st.finger_seconds);
    return o;
}

Outcome c3_small(State&)
{
    const Params p = reference(0.0625);
    const auto t0 = Clock::now();
    const Solution sol = fixed_point_solve(p);
    const double t = seconds_since(t0);
    const Classification cl = classify(sol, p);
    Outcome o;
    o.pass = sol.converged && cl.type == SolutionType::TypeII && cl.G2 > 0.0 && t < 300.0;
    o.detail = "iters=" + std::to_string(sol.iters) + " type=" + std::string(to_string(cl.type)) +
               " G2=" + g(cl.G2) + " (paper 0.0183) time=" + fmt("%.1fs", t);
    return o;
}

Outcome c4_cold_transition(State& st)
{
    std::vector<double> cs;
    for (int i = 0; i < 10; ++i)
        cs.push_back(0.04 + 0.0025 * i);
    const auto t0 = Clock::now();
    TravellingWaveSolver solver(reference(cs.front()));
    const SweepResult sweep = sweep_c(solver, cs, false, std::nullopt, trace);
    Outcome o;
    if (!sweep.transition) {
        o.detail = "no type flip on the cold sweep";
        return o;
    }
    const std::size_t i = *sweep.transition;
    const std::optional<std::size_t> before = classified_before(sweep.records, i);
    if (!before) {
        o.detail = "flip without a classified record below it";
        return o;
    }
    const TransitionBracket b =
        refine_transition(solver, sweep.records[*before], sweep.records[i], 5e-4, trace);
    const double t = seconds_since(t0);
    st.cold_lo = b.c_lo;
    st.cold_hi = b.c_hi;

    bool all_converged = true;
    for (const SweepRecord& r : sweep.records)
        all_converged = all_converged && r.converged && r.error.empty();
    std::optional<double> g2_positive;
    for (const SweepRecord& r : sweep.records)
        if (r.converged && r.G2 > 0.0) {
            g2_positive = r.c;
            break;
        }
    o.pass = all_converged && b.c_lo >= 0.045 && b.c_hi <= 0.052 && t < 1800.0;
    o.detail = std::string(to_string(b.type_lo)) + " -> " + std::string(to_string(b.type_hi)) +
               " in [" + g(b.c_lo) + ", " + g(b.c_hi) + "] (paper 0.04785/0.04786)";
    o.detail += g2_positive ? ", first G2 > 0 at c=" + g(*g2_positive) : ", G2 < 0 on the whole sweep";
    o.detail += " time=" + fmt("%.0fs", t);
    return o;
}

Outcome c5_wave_speed(State&)
{
    const auto t0 = Clock::now();
    TravellingWaveSolver solver(reference(0.045));
    Outcome o;
    try {
        const WaveSpeedResult w = find_wave_speed(solver, 0.045, 0.050, 0.005, trace);
        const double t = seconds_since(t0);
        o.pass = w.G1_lo * w.G1_hi < 0.0 && w.c_lo >= 0.045 && w.c_hi <= 0.050 &&
                 w.c_hi - w.c_lo <= 0.005 && t < 1800.0;
        o.detail = "bracket [" + g(w.c_lo) + ", " + g(w.c_hi) + "] G1 = " + g(w.G1_lo) + " / " +
                   g(w.G1_hi) + " (paper +0.0218 / -0.3304) time=" + fmt("%.0fs", t);
    } catch (const Error& e) {
        o.detail = e.what();
    }
    return o;
}

Outcome c6_warm_transition(State& st)
{
    Outcome o;
    if (!st.cold_hi) {
        o.detail = "needs the cold transition (criterion 4)";
        return o;
    }
    const Solution& start = finger(st);
    std::vector<double> cs;
    for (int i = 1; i <= 20; ++i)
        cs.push_back(0.04 + 0.001 * i);
    const auto t0 = Clock::now();
    TravellingWaveSolver solver(start.params);
    const SweepResult sweep = sweep_c(solver, cs, true, start, trace);
    const double t = seconds_since(t0);

    // last TypeI record of the warm branch with G2 < 0 throughout
    std::optional<double> last_type1;
    double g2_past = -INFINITY;
    const std::size_t end = sweep.transition.value_or(sweep.records.size());
    for (std::size_t i = 0; i < end; ++i) {
        const SweepRecord& r = sweep.records[i];
        if (!r.converged || r.type != SolutionType::TypeI)
            continue;
        last_type1 = r.c;
        if (r.c > *st.cold_hi)
            g2_past = std::max(g2_past, r.G2);
    }
    const double c2 = sweep.transition ? sweep.records[*sweep.transition].c : INFINITY;
    const double c1 = 0.5 * (*st.cold_lo + *st.cold_hi);
    o.pass = last_type1 && *last_type1 > *st.cold_hi && g2_past < 0.0 && c2 > c1 && t < 3600.0;
    o.detail = "cold c1=" + g(c1) + " warm c2=" + (sweep.transition ? g(c2) : "none up to " + g(cs.back())) +
               " (paper 0.0478 / 0.0501), warm TypeI up to " + (last_type1 ? g(*last_type1) : "none") +
               " max G2 past c1=" + g(g2_past) + " time=" + fmt("%.0fs", t);
    return o;
}

Outcome c7_flux(State& st)
{
    const Solution& sol = finger(st);
    const double d128 = flux_profile(sol, sol.params).relative_deviation();
    const auto t0 = Clock::now();
    const Solution fine = fixed_point_solve(reference(0.04, 256));
    const double t = seconds_since(t0);
    Outcome o;
    if (!fine.converged) {
        o.detail = "256x256 solve did not converge in " + std::to_string(fine.iters) + " iterations";
        return o;
    }
    const double d256 = flux_profile(fine, fine.params).relative_deviation();
    o.pass = d128 <= 0.05 && d128 >= 1.5 * d256;
    o.detail = "deviation 128=" + g(d128) + " 256=" + g(d256) + " ratio=" + g(d128 / d256) +
               " (256 solve " + fmt("%.0fs", t) + ")";
    return o;
}

Outcome c8_oracles(State& st)
{
    const Solution& sol = finger(st);
    const OracleReport r = oracle_check(sol, sol.params, {0.0002, 0.0008}, 8, 12345u);
    Outcome o;
    o.pass = r.transport_gap[0] < r.transport_gap[1] && r.fd_max_relative <= 1e-6 &&
             r.variational_converged;
    o.detail = "transport gap eps=0.0002: " + g(r.transport_gap[0]) + " eps=0.0008: " +
               g(r.transport_gap[1]) + " fd relative=" + g(r.fd_max_relative) +
               (r.variational_converged ? "" : " variational solve not converged");
    return o;
}

Outcome c9_symmetry(State& st)
{
    const Solution& sol = finger(st);
    const Grid grid(sol.params.L, sol.params.H, sol.params.nx, sol.params.nz);
    const double gs = reflection_gap(sol.s, grid);
    const double gp = reflection_gap(sol.p, grid);
    Outcome o;
    o.pass = grid.reflection_symmetric() && gs <= 1e-9 && gp <= 1e-9;
    o.detail = "asymmetry s=" + g(gs) + " p=" + g(gp);
    return o;
}

Outcome c10_suites(State&)
{
    std::vector<std::string> failed;
    std::istringstream list(TWF_UNIT_TESTS);
    std::string exe;
    int n = 0;
    while (std::getline(list, exe, ';')) {
        ++n;
        const std::string cmd = "\"" + exe + "\" > /dev/null 2>&1";
        if (std::system(cmd.c_str()) != 0)
            failed.push_back(exe.substr(exe.find_last_of('/') + 1));
    }
    Outcome o;
    o.pass = n > 0 && failed.empty();
    o.detail = std::to_string(n - static_cast<int>(failed.size())) + "/" + std::to_string(n) +
               " suites pass";
    for (const std::string& f : failed)
        o.detail += " " + f + ":FAIL";
    return o;
}

} // namespace

int main(int argc, char** argv)
{
    const std::map<int, std::pair<const char*, std::function<Outcome(State&)>>> criteria = {
        {1, {"constant state", c1_constant_state}},
        {2, {"finger at c=0.04", c2_finger}},
        {3, {"small solution at c=0.0625", c3_small}},
        {4, {"cold transition", c4_cold_transition}},
        {5, {"wave-speed bracket", c5_wave_speed}},
        {6, {"warm transition", c6_warm_transition}},
        {7, {"flux constancy", c7_flux}},
        {8, {"oracle equivalence", c8_oracles}},
        {9, {"reflection symmetry", c9_symmetry}},
        {10, {"property suites", c10_suites}},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i)
        selected.insert(std::atoi(argv[i]));
    if (selected.count(6))
        selected.insert(4);

    State st;
    int failures = 0;
    for (const auto& [id, item] : criteria) {
        if (!selected.empty() && !selected.count(id))
            continue;
        Outcome o;
        try {
            o = item.second(st);
        } catch (const std::exception& e) {
            o.detail = std::string("error: ") + e.what();
        }
        failures += o.pass ? 0 : 1;
        std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, item.first, o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
