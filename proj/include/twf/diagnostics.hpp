#pragma once

#include "twf/scheme.hpp"

#include <optional>
#include <vector>

namespace twf {

struct FluxProfile {
    std::vector<double> z;     ///< interior mesh lines
    std::vector<double> value; ///< F_c(z) = int k(s) (d_z p + g) - c s dy
    double bottom = 0.0;       ///< one-sided value on the bottom line
    double top = 0.0;          ///< one-sided value on the top line
    double mean = 0.0;         ///< mean over interior lines
    double max_deviation = 0.0; ///< max |value - mean| over interior lines
    double relative_deviation() const;
};

/// Interior lines use central differences in z (the mean of the two adjacent
/// element rows), boundary lines one-sided differences; trapezoid rule in y.
FluxProfile flux_profile(const Solution& sol, const Params& params);

/// Per column, the highest z where [p - pc(s)]_+ / (c tau) exceeds threshold;
/// 0 when the source is never active. The default threshold is 1e-8 times the
/// largest scaled source, and at least 1e-12.
std::vector<double> free_boundary(const Solution& sol, const Params& params,
                                  std::optional<double> threshold = std::nullopt);

/// Top-row saturation, one value per column.
std::vector<double> s_star(const Solution& sol, const Params& params);

/// g - F / int k(s_star) dy (infinite-domain estimate).
double g_F(const Solution& sol, const Params& params);

/// (F - k(s_*) g L) / int (s_star - s_*) dy (infinite-domain estimate).
/// s_* defaults to s0_base. Throws UndefinedResult when the denominator
/// vanishes (below 1e-12 L).
double c_mass_balance(const Solution& sol, const Params& params,
                      std::optional<double> s_ref = std::nullopt);

struct LipschitzReport {
    double C_P = 0.0;  ///< max |grad p|
    double rho = 0.0;  ///< min pc'
    double dy_s0 = 0.0;
    double source0 = 0.0; ///< max (p0 - pc(s0)) / (c tau)
    double C_s = 0.0;
    double max_dz_s = 0.0;
    double max_dy_s = 0.0;
    bool holds = false;
    double margin = 0.0; ///< C_s - max(max_dz_s, max_dy_s)
};

LipschitzReport lipschitz_check(const Solution& sol, const Params& params);

struct BoundReport {
    double max_p = 0.0;
    double max_grad_p = 0.0;
    double max_s = 0.0;
    double pc_inv_max_p = 0.0;
    double max_overpressure = 0.0; ///< max (p - pc(s))
    double c_tau_C_s = 0.0;
    double min_dz_s = 0.0;         ///< most negative nodal increment of s in z, per unit length
    double flux_excess = 0.0;      ///< g int k(s_star) - F
};

BoundReport bound_report(const Solution& sol, const Params& params);

} // namespace twf
