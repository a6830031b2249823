#pragma once

#include "twf/scheme.hpp"

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace twf {

enum class SolutionType { TypeI, TypeII, Unclassified };

std::string_view to_string(SolutionType type);
SolutionType solution_type_from_string(std::string_view name);

/// c - kappa int_bottom d_z p / (L s0_base), with one-sided nodal differences
/// on the bottom row and the trapezoid rule.
double eval_G1(const Solution& sol, const Params& params);

/// F_c(bottom) - (g k(s_*) - c s_*) L. s_* defaults to s0_base.
double eval_G_general(const Solution& sol, const Params& params,
                      std::optional<double> s_star = std::nullopt);

/// int_top k(s) d_z p with one-sided differences on the top row.
double eval_G2(const Solution& sol, const Params& params);

struct Classification {
    SolutionType type = SolutionType::Unclassified;
    double h = 0.0;          ///< highest z with an active hysteresis source
    Index h_row = -1;        ///< its mesh row, -1 when the source is inactive everywhere
    bool reaches_top = false; ///< h >= H - margin
    double G2 = 0.0;
    double threshold = 0.0;  ///< threshold applied to [p - pc(s)]_+ / (c tau)
};

/// dz_threshold defaults to 1e-8 times the largest scaled source, and at
/// least 1e-12.
Classification classify(const Solution& sol, const Params& params,
                        std::optional<double> dz_threshold = std::nullopt, int margin_rows = 2);

struct SweepRecord {
    double c = 0.0;
    bool converged = false;
    int iters = 0;
    double G1 = 0.0;
    double G2 = 0.0;
    SolutionType type = SolutionType::Unclassified;
    double h = 0.0;
    bool reaches_top = false;
    double p_star = 0.0;
    double max_s = 0.0;
    double last_update = 0.0;
    std::string error; ///< non-empty when the solve failed
};

SweepRecord make_record(const Solution& sol, const Params& params);

struct SweepResult {
    std::vector<SweepRecord> records;
    /// First record whose label differs from the first classified label.
    /// Unclassified counts as different once a classified label was seen.
    std::optional<std::size_t> transition;
    std::optional<Solution> last; ///< final successful solution
};

using SweepProgress = std::function<void(const SweepRecord&)>;

/// Solves for each c in order. Warm starts reuse the previous solution; cold
/// starts begin from (s_init, p_init). Failures are recorded and skipped.
SweepResult sweep_c(const Params& params, const std::vector<double>& c_values, bool warm_start,
                    const SweepProgress& progress = {});
SweepResult sweep_c(TravellingWaveSolver& solver, const std::vector<double>& c_values,
                    bool warm_start, const std::optional<Solution>& start = std::nullopt,
                    const SweepProgress& progress = {});

std::optional<std::size_t> find_transition(const std::vector<SweepRecord>& records);

struct BisectionStep {
    double x = 0.0;
    double value = 0.0;
};

struct BisectionResult {
    double root = 0.0; ///< midpoint of the final bracket
    double lo = 0.0;
    double hi = 0.0;
    double value_lo = 0.0;
    double value_hi = 0.0;
    std::vector<BisectionStep> steps;
};

/// Plain bisection on a sign change of f over [lo, hi] until hi - lo < tol.
/// Throws BracketError when f(lo) and f(hi) have the same sign.
BisectionResult bisect(const std::function<double(double)>& f, double lo, double hi, double tol);

struct WaveSpeedResult {
    double c_bar = 0.0;
    double c_lo = 0.0;
    double c_hi = 0.0;
    double G1_lo = 0.0;
    double G1_hi = 0.0;
    std::vector<SweepRecord> records;
};

/// Bisection on G1 with cold-started solves.
WaveSpeedResult find_wave_speed(const Params& params, double c_lo, double c_hi, double tol_c,
                                const SweepProgress& progress = {});
WaveSpeedResult find_wave_speed(TravellingWaveSolver& solver, double c_lo, double c_hi,
                                double tol_c, const SweepProgress& progress = {});

struct TransitionBracket {
    double c_lo = 0.0;
    double c_hi = 0.0;
    SolutionType type_lo = SolutionType::Unclassified;
    SolutionType type_hi = SolutionType::Unclassified;
    std::vector<SweepRecord> records;
};

/// Bisection on the type label between two cold-started solves of
/// different type.
TransitionBracket refine_transition(TravellingWaveSolver& solver, const SweepRecord& lo,
                                    const SweepRecord& hi, double tol_c,
                                    const SweepProgress& progress = {});

} // namespace twf
