#include "twf/params.hpp"

#include "twf/errors.hpp"

#include <cmath>
#include <sstream>

namespace twf {

namespace {

void require(bool ok, const char* msg)
{
    if (!ok)
        throw InvalidInput(msg);
}

bool finite_all(std::initializer_list<double> xs)
{
    for (double x : xs)
        if (!std::isfinite(x))
            return false;
    return true;
}

} // namespace

void Params::validate() const
{
    require(finite_all({L, H, g, tau, c, F_inf, kappa, a, s0_base, delta, d, M, epsilon, tol_fp,
                        rtol_lin, p_init, s_init, accel_start, pc_shift}),
            "parameters must be finite");
    require(L > 0.0 && H > 0.0, "L and H must be positive");
    require(nx >= 1 && nz >= 1, "nx and nz must be at least 1");
    require(tau > 0.0, "tau must be positive");
    require(c > 0.0, "wave speed c must be positive");
    require(kappa > 0.0, "kappa must be positive");
    require(a >= 0.0 && a <= 1.0, "kink saturation a must lie in [0, 1]");
    require(s0_base >= 0.0 && s0_base <= 1.0, "s0_base must lie in [0, 1]");
    require(delta >= 0.0, "delta must be non-negative");
    require(d > 0.0, "perturbation width d must be positive");
    require(M > 0.0, "damping M must be positive");
    require(epsilon >= 0.0, "epsilon must be non-negative");
    require(tol_fp > 0.0, "tol_fp must be positive");
    require(max_iter >= 1, "max_iter must be at least 1");
    require(rtol_lin > 0.0, "rtol_lin must be positive");
    require(refactor_after >= 1, "refactor_after must be at least 1");
    require(accel_depth >= 0, "accel_depth must be non-negative");
    require(accel_start >= 0.0, "accel_start must be non-negative");
    if (y_c)
        require(std::isfinite(*y_c), "y_c must be finite");
}

std::vector<std::string> Params::warnings() const
{
    std::vector<std::string> out = validate_bounds(*this).violations;
    if (M < 1.0 / tau) {
        std::ostringstream os;
        os << "damping M=" << M << " is below 1/tau=" << 1.0 / tau
           << "; the fixed-point iteration may not converge";
        out.push_back(os.str());
    }
    if (epsilon == 0.0)
        out.push_back("epsilon = 0: the saturation equation is pure transport");
    if (nx % 2 != 0)
        out.push_back("odd nx: the triangulation is not mirror symmetric");
    return out;
}

ParamBounds validate_bounds(const Params& params)
{
    BoundsInput in;
    in.g = params.g;
    in.L = params.L;
    in.s_star = params.s0_base;
    in.F_inf = params.F_inf;
    in.c = params.c;
    return validate_bounds(params.laws(), in);
}

} // namespace twf
