#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace twf {

/// Positive part max(0, x).
constexpr double pos_part(double x) noexcept { return x > 0.0 ? x : 0.0; }

/// Counts saturation values that had to be clamped into [0, 1] before a
/// constitutive evaluation. Owned by one solve; not synchronized.
struct ClampCounter {
    std::size_t below = 0;
    std::size_t above = 0;
    std::size_t total() const noexcept { return below + above; }
};

/// Clamp s into [0, 1]; throws InvalidInput for non-finite s.
double clamp_saturation(double s, ClampCounter* counter = nullptr);

/// Capillary pressure and permeability laws together with their derivatives.
///
/// Saturation arguments outside [0, 1] are clamped (and counted when a
/// counter is supplied). The inverse capillary pressure falls back to
/// bisection when no closed form is given.
class ConstitutiveLaws {
public:
    using Fn = std::function<double(double)>;

    ConstitutiveLaws(Fn pc, Fn pc_prime, Fn k, Fn k_prime, Fn pc_inv = {});

    /// pc(s) = s, k(s) = kappa for s < a and kappa + (s - a)^2 otherwise.
    static ConstitutiveLaws kinked_quadratic(double kappa, double a);

    double pc(double s, ClampCounter* counter = nullptr) const;
    double pc_prime(double s, ClampCounter* counter = nullptr) const;
    double k(double s, ClampCounter* counter = nullptr) const;
    double k_prime(double s, ClampCounter* counter = nullptr) const;

    /// Same laws with pc replaced by pc + offset.
    ConstitutiveLaws shifted(double offset) const;

    /// Saturation with pc(s) = p, restricted to [0, 1].
    double pc_inv(double p) const;

    /// Base permeability and kink location of the kinked-quadratic instance.
    std::optional<double> kappa() const noexcept { return kappa_; }
    std::optional<double> kink() const noexcept { return kink_; }

private:
    Fn pc_;
    Fn pc_prime_;
    Fn k_;
    Fn k_prime_;
    Fn pc_inv_;
    std::optional<double> kappa_;
    std::optional<double> kink_;
};

inline double eval_k(const ConstitutiveLaws& laws, double s) { return laws.k(s); }
inline double eval_pc(const ConstitutiveLaws& laws, double s) { return laws.pc(s); }
inline double eval_pc_inv(const ConstitutiveLaws& laws, double p) { return laws.pc_inv(p); }

struct BoundsInput {
    double g = 1.0;
    double L = 2.0;
    double s_star = 0.0;
    double F_inf = 0.056;
    double c = 0.04;
};

/// Admissible windows for wave speed and flux, plus everything that violates
/// the structural assumptions on the laws. Violations are warnings.
struct ParamBounds {
    double c1 = 0.0;
    double c2 = 0.0;
    double F_lo = 0.0;
    double F_hi = 0.0;
    double rho = 0.0; ///< sampled min of pc' on (0, 1)
    bool c_admissible = false;
    bool F_admissible = false;
    std::vector<std::string> violations;
};

ParamBounds validate_bounds(const ConstitutiveLaws& laws, const BoundsInput& in);

} // namespace twf
