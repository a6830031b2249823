#include "twf/constitutive.hpp"

#include "twf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace twf {

double clamp_saturation(double s, ClampCounter* counter)
{
    if (!std::isfinite(s))
        throw InvalidInput("non-finite saturation passed to a constitutive law");
    if (s < 0.0) {
        if (counter)
            ++counter->below;
        return 0.0;
    }
    if (s > 1.0) {
        if (counter)
            ++counter->above;
        return 1.0;
    }
    return s;
}

ConstitutiveLaws::ConstitutiveLaws(Fn pc, Fn pc_prime, Fn k, Fn k_prime, Fn pc_inv)
    : pc_(std::move(pc)), pc_prime_(std::move(pc_prime)), k_(std::move(k)),
      k_prime_(std::move(k_prime)), pc_inv_(std::move(pc_inv))
{
    if (!pc_ || !pc_prime_ || !k_ || !k_prime_)
        throw InvalidInput("constitutive laws require pc, pc', k and k'");
}

ConstitutiveLaws ConstitutiveLaws::kinked_quadratic(double kappa, double a)
{
    if (!(kappa > 0.0) || !std::isfinite(kappa))
        throw InvalidInput("kappa must be positive");
    if (!(a >= 0.0 && a <= 1.0))
        throw InvalidInput("kink saturation a must lie in [0, 1]");
    ConstitutiveLaws laws(
        [](double s) { return s; },
        [](double) { return 1.0; },
        [kappa, a](double s) { return s < a ? kappa : kappa + (s - a) * (s - a); },
        [a](double s) { return s < a ? 0.0 : 2.0 * (s - a); },
        [](double p) { return std::clamp(p, 0.0, 1.0); });
    laws.kappa_ = kappa;
    laws.kink_ = a;
    return laws;
}

ConstitutiveLaws ConstitutiveLaws::shifted(double offset) const
{
    if (!std::isfinite(offset))
        throw InvalidInput("pc offset must be finite");
    ConstitutiveLaws out = *this;
    out.pc_ = [f = pc_, offset](double s) { return f(s) + offset; };
    if (pc_inv_)
        out.pc_inv_ = [f = pc_inv_, offset](double p) { return f(p - offset); };
    return out;
}

double ConstitutiveLaws::pc(double s, ClampCounter* counter) const
{
    return pc_(clamp_saturation(s, counter));
}

double ConstitutiveLaws::pc_prime(double s, ClampCounter* counter) const
{
    return pc_prime_(clamp_saturation(s, counter));
}

double ConstitutiveLaws::k(double s, ClampCounter* counter) const
{
    return k_(clamp_saturation(s, counter));
}

double ConstitutiveLaws::k_prime(double s, ClampCounter* counter) const
{
    return k_prime_(clamp_saturation(s, counter));
}

double ConstitutiveLaws::pc_inv(double p) const
{
    if (!std::isfinite(p))
        throw InvalidInput("non-finite pressure passed to pc_inv");
    if (pc_inv_)
        return pc_inv_(p);

    // pc is increasing; endpoints are treated as -inf / +inf.
    double lo = 0.0;
    double hi = 1.0;
    while (hi - lo > 1e-13) {
        const double mid = 0.5 * (lo + hi);
        if (pc_(mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

ParamBounds validate_bounds(const ConstitutiveLaws& laws, const BoundsInput& in)
{
    ParamBounds b;
    const double ss = in.s_star;
    const double k_star = laws.k(ss);
    const double dk_star = laws.k_prime(ss);
    const double k_one = laws.k(1.0);

    b.c1 = in.g * dk_star;
    b.c2 = ss < 1.0 ? in.g * (k_one - k_star) / (1.0 - ss)
                    : std::numeric_limits<double>::quiet_NaN();
    b.F_lo = in.g * in.L * (k_star + dk_star * (1.0 - ss));
    b.F_hi = in.g * in.L * k_one;
    b.c_admissible = in.c > b.c1 && in.c < b.c2;
    b.F_admissible = in.F_inf > b.F_lo && in.F_inf < b.F_hi;

    auto warn = [&b](const std::string& msg) { b.violations.push_back(msg); };
    std::ostringstream os;
    os.precision(17);

    if (!b.c_admissible) {
        os.str("");
        os << "wave speed c=" << in.c << " outside (" << b.c1 << ", " << b.c2 << ")";
        warn(os.str());
    }
    if (!b.F_admissible) {
        os.str("");
        os << "flux F_inf=" << in.F_inf << " outside (" << b.F_lo << ", " << b.F_hi << ")";
        warn(os.str());
    }
    if (!(ss > 0.0 && ss < 1.0))
        warn("reference saturation s_* is not inside (0, 1)");

    constexpr int samples = 1000;
    double rho = std::numeric_limits<double>::infinity();
    bool k_flat = false;
    bool k_not_convex = false;
    bool k_decreasing = false;
    double prev_k = laws.k(0.0);
    for (int i = 1; i < samples; ++i) {
        const double s = static_cast<double>(i) / samples;
        rho = std::min(rho, laws.pc_prime(s));
        const double ks = laws.k(s);
        if (ks < prev_k)
            k_decreasing = true;
        prev_k = ks;
        if (!(laws.k_prime(s) > 0.0))
            k_flat = true;
        const double h = 0.5 / samples;
        if (!(laws.k_prime(std::min(s + h, 1.0)) - laws.k_prime(std::max(s - h, 0.0)) > 0.0))
            k_not_convex = true;
    }
    b.rho = rho;
    if (!(rho > 0.0))
        warn("pc' is not bounded below by a positive constant on (0, 1)");
    if (k_decreasing)
        warn("k is not nondecreasing on [0, 1]");
    if (k_flat)
        warn("k' is not strictly positive on (0, 1)");
    if (k_not_convex)
        warn("k'' is not strictly positive on (0, 1)");
    return b;
}

} // namespace twf
