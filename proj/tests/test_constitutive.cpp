#include "twf/constitutive.hpp"
#include "twf/errors.hpp"
#include "twf/params.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace twf;

namespace {

const ConstitutiveLaws paper = ConstitutiveLaws::kinked_quadratic(0.001, 0.32);

} // namespace

TEST_CASE("permeability of the kinked quadratic law")
{
    CHECK(eval_k(paper, 0.1) == 0.001);
    // 0.001 + 0.18^2
    CHECK(eval_k(paper, 0.5) == doctest::Approx(0.0334).epsilon(1e-14));
    CHECK(eval_k(paper, 0.32) == 0.001);
    CHECK(paper.k_prime(0.1) == 0.0);
    CHECK(paper.k_prime(0.5) == doctest::Approx(0.36));
}

TEST_CASE("capillary pressure is the identity and inverts")
{
    CHECK(eval_pc(paper, 0.3) == 0.3);
    CHECK(eval_pc_inv(paper, eval_pc(paper, 0.7)) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(eval_pc(paper, 0.0) == 0.0);
    CHECK(paper.pc_prime(0.4) == 1.0);
}

TEST_CASE("positive part")
{
    CHECK(pos_part(-1.0) == 0.0);
    CHECK(pos_part(0.0) == 0.0);
    CHECK(pos_part(2.5) == 2.5);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int i = 0; i < 1000; ++i) {
        const double x = u(rng);
        CHECK(pos_part(x) + pos_part(-x) == std::abs(x));
    }
}

TEST_CASE("out of range saturation is clamped and counted")
{
    ClampCounter cc;
    CHECK(paper.k(1.2, &cc) == doctest::Approx(0.001 + 0.68 * 0.68));
    CHECK(paper.pc(-0.1, &cc) == 0.0);
    CHECK(cc.above == 1);
    CHECK(cc.below == 1);
    CHECK_THROWS_AS(paper.k(std::numeric_limits<double>::quiet_NaN()), InvalidInput);
    CHECK_THROWS_AS(paper.pc(std::numeric_limits<double>::infinity()), InvalidInput);
}

TEST_CASE("monotonicity on random samples")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(1e-9, 1.0 - 1e-9);
    for (int i = 0; i < 2000; ++i) {
        double s1 = u(rng);
        double s2 = u(rng);
        if (s1 == s2)
            continue;
        if (s1 > s2)
            std::swap(s1, s2);
        CHECK(paper.pc(s1) < paper.pc(s2));
        CHECK(paper.k(s1) <= paper.k(s2));
    }
}

TEST_CASE("derivatives match central differences")
{
    const double h = 1e-4;
    for (double s = 0.05; s < 0.96; s += 0.01) {
        if (std::abs(s - 0.32) < 2 * h)
            continue;
        CHECK(std::abs((paper.pc(s + h) - paper.pc(s - h)) / (2 * h) - paper.pc_prime(s)) <=
              1e-8);
        CHECK(std::abs((paper.k(s + h) - paper.k(s - h)) / (2 * h) - paper.k_prime(s)) <= 1e-8);
    }
}

TEST_CASE("bisection inverse for a law without closed form")
{
    const ConstitutiveLaws cubic([](double s) { return s * s * s + s; },
                                 [](double s) { return 3 * s * s + 1; },
                                 [](double s) { return 0.01 + s * s; },
                                 [](double s) { return 2 * s; });
    for (double s = 0.01; s < 1.0; s += 0.07)
        CHECK(std::abs(cubic.pc_inv(cubic.pc(s)) - s) <= 1e-12);
}

TEST_CASE("parameter bounds of the reference run")
{
    BoundsInput in;
    in.g = 1.0;
    in.L = 2.0;
    in.s_star = 0.0;
    in.F_inf = 0.056;
    in.c = 0.04;
    const ParamBounds b = validate_bounds(paper, in);
    // c1 = g k'(0) = 0, c2 = g (k(1) - k(0)) / 1 = 0.68^2
    CHECK(b.c1 == 0.0);
    CHECK(b.c2 == doctest::Approx(0.4624).epsilon(1e-12));
    // F_lo = g L (k(0) + k'(0)), F_hi = g L k(1)
    CHECK(b.F_lo == doctest::Approx(0.002).epsilon(1e-12));
    CHECK(b.F_hi == doctest::Approx(0.9268).epsilon(1e-12));
    CHECK(b.F_admissible);
    CHECK(b.c_admissible);
    CHECK(b.rho == doctest::Approx(1.0));
    CHECK_FALSE(b.violations.empty()); // k' vanishes below the kink

    in.F_inf = b.F_hi + 1.0;
    CHECK_FALSE(validate_bounds(paper, in).F_admissible);
}

TEST_CASE("linear permeability collapses the wave speed window")
{
    const ConstitutiveLaws lin([](double s) { return s; }, [](double) { return 1.0; },
                               [](double s) { return s; }, [](double) { return 1.0; });
    BoundsInput in;
    in.g = 1.0;
    in.L = 1.0;
    in.s_star = 0.5;
    const ParamBounds b = validate_bounds(lin, in);
    CHECK(b.c1 == doctest::Approx(1.0));
    CHECK(b.c2 == doctest::Approx(1.0));
}

TEST_CASE("parameter validation")
{
    Params p;
    CHECK_NOTHROW(p.validate());
    p.tau = 0.0;
    CHECK_THROWS_AS(p.validate(), InvalidInput);
    p = Params{};
    p.M = 0.1;
    bool warned = false;
    for (const auto& w : p.warnings())
        warned = warned || w.find("M") != std::string::npos;
    CHECK(warned);
}
