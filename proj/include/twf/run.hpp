#pragma once

#include "twf/config.hpp"
#include "twf/scheme.hpp"

#include <json.hpp>

#include <string>

namespace twf {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitNotConverged = 2,
    kExitConfigError = 3,
};

struct RunOutcome {
    int exit_code = kExitOk;
    nlohmann::ordered_json summary;
};

struct OracleReport {
    std::vector<double> epsilons;
    std::vector<double> transport_gap; ///< ||saturation_step - ode_transport||_inf per epsilon
    double fd_max_relative = 0.0;      ///< largest relative directional derivative of A
    int fd_directions = 0;
    double variational_residual = 0.0;
    bool variational_converged = false;
    double variational_vs_scheme = 0.0; ///< ||p_variational - p_solution||_inf
    double two_start_gap = 0.0;         ///< Newton from p_init vs a random feasible start
    bool damped_monotone = true;        ///< M-damped steps never raised A
};

/// Oracle comparisons on a converged solution. Directions and the random
/// start use a fixed seed.
OracleReport oracle_check(const Solution& sol, const Params& params,
                          const std::vector<double>& epsilons, int directions, unsigned seed);

/// Runs the configured mode and writes every artifact into out_dir, which is
/// created if needed. Errors are reported through the exit code and the
/// summary, not thrown.
RunOutcome run(const RunConfig& config, const std::string& out_dir);

} // namespace twf
