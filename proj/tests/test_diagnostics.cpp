#include "twf/diagnostics.hpp"
#include "twf/errors.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace twf;

TEST_CASE("constant state diagnostics")
{
    const Params p = support::constant_state(8);
    const Solution sol = fixed_point_solve(p);
    REQUIRE(sol.converged);

    const FluxProfile f = flux_profile(sol, p);
    const double expected = (p.g * p.kappa - p.c * p.s0_base) * p.L;
    CHECK(f.z.size() == 7);
    for (double v : f.value)
        CHECK(v == doctest::Approx(expected).epsilon(1e-12));
    CHECK(f.bottom == doctest::Approx(expected).epsilon(1e-12));
    CHECK(f.top == doctest::Approx(expected).epsilon(1e-12));
    CHECK(f.relative_deviation() <= 1e-12);

    for (double psi : free_boundary(sol, p))
        CHECK(psi == 0.0);
    for (double s : s_star(sol, p))
        CHECK(s == doctest::Approx(p.s0_base).epsilon(1e-12));
    CHECK(std::abs(g_F(sol, p)) <= 1e-12);
    CHECK_THROWS_AS(c_mass_balance(sol, p), UndefinedResult);

    const BoundReport b = bound_report(sol, p);
    CHECK(b.max_s == doctest::Approx(p.s0_base).epsilon(1e-12));
    CHECK(b.max_grad_p <= 1e-10);
    CHECK(std::abs(b.flux_excess) <= 1e-14);
}

TEST_CASE("mass balance estimate on a synthetic top state")
{
    Params p;
    p.nx = 4;
    p.nz = 4;
    p.F_inf = 0.01;
    const Grid g = build_grid(p.L, p.H, p.nx, p.nz);
    Solution sol;
    sol.params = p;
    sol.s = Field(g, p.s0_base);
    sol.p = Field(g, 0.0);
    for (Index n : g.top_nodes())
        sol.s[n] = p.s0_base + 0.1;
    const double expected = (p.F_inf - p.kappa * p.g * p.L) / (0.1 * p.L);
    CHECK(c_mass_balance(sol, p) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("free boundary shrinks as the threshold grows")
{
    const Params p = support::coarse_run(16);
    const Solution sol = fixed_point_solve(p);
    REQUIRE(sol.converged);
    const std::vector<double> base = free_boundary(sol, p);
    double prev_max = 1e300;
    for (double thr : {1e-10, 1e-4, 1e-2, 1e-1, 1.0}) {
        const std::vector<double> psi = free_boundary(sol, p, thr);
        REQUIRE(psi.size() == base.size());
        double mx = 0.0;
        for (std::size_t i = 0; i < psi.size(); ++i) {
            CHECK(psi[i] <= base[i] + 1e-15);
            mx = std::max(mx, psi[i]);
        }
        CHECK(mx <= prev_max);
        prev_max = mx;
    }
}

TEST_CASE("pressure gauge shift")
{
    // shifting pc, and with it the bottom pressure, plus the initial pressure
    // moves p by the same constant and leaves everything else alone
    const double shift = 0.7;
    const Params p = support::coarse_run(16);
    Params q = p;
    q.pc_shift = shift;
    q.p_init = p.p_init + shift;
    const Solution a = fixed_point_solve(p);
    const Solution b = fixed_point_solve(q);
    REQUIRE(a.converged);
    REQUIRE(b.converged);

    CHECK((a.s.values() - b.s.values()).lpNorm<Eigen::Infinity>() <= 1e-8);
    CHECK((b.p.values().array() - a.p.values().array() - shift).abs().maxCoeff() <= 1e-8);
    CHECK(b.p_star - a.p_star == doctest::Approx(shift).epsilon(1e-8));

    const std::vector<double> psi_a = free_boundary(a, p);
    const std::vector<double> psi_b = free_boundary(b, q);
    CHECK(psi_a == psi_b);
    const FluxProfile fa = flux_profile(a, p);
    const FluxProfile fb = flux_profile(b, q);
    for (std::size_t i = 0; i < fa.value.size(); ++i)
        CHECK(fb.value[i] == doctest::Approx(fa.value[i]).epsilon(1e-7));
    CHECK(g_F(b, q) == doctest::Approx(g_F(a, p)).epsilon(1e-8));
}

TEST_CASE("Lipschitz report")
{
    const Params p = support::coarse_run(16);
    const Solution sol = fixed_point_solve(p);
    REQUIRE(sol.converged);
    const LipschitzReport r = lipschitz_check(sol, p);
    CHECK(r.rho == doctest::Approx(1.0));
    CHECK(r.C_P > 0.0);
    CHECK(r.max_dz_s >= 0.0);
    CHECK(r.holds == (r.margin >= 0.0));
}
