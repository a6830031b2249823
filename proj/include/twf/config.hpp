#pragma once

#include "twf/params.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace twf {

enum class RunMode { Solve, Sweep, FindSpeed, Classify, OracleCheck };

std::string_view to_string(RunMode mode);
RunMode run_mode_from_string(std::string_view name);

enum class ExportFormat { Csv, Vtk };

struct RunConfig {
    RunMode mode = RunMode::Solve;
    Params params;

    // sweep
    std::vector<double> c_values;
    bool warm_start = false;
    double refine_tol = 0.0; ///< bisection on the type label after the sweep, 0 disables

    // find-speed
    double c_lo = 0.0476;
    double c_hi = 0.0477;
    double tol_c = 1e-5;

    // classification
    std::optional<double> dz_threshold;
    int margin_rows = 2;

    // oracle-check
    std::vector<double> oracle_epsilons{0.0008, 0.0002};
    int oracle_directions = 10;
    unsigned oracle_seed = 12345;

    std::vector<ExportFormat> formats{ExportFormat::Csv};
    int progress_every = 500;
};

/// Accepts a JSON object or flat `key = value` lines (TOML style: `#`
/// comments, quoted strings, [a, b] arrays). Unknown keys are errors.
/// Numeric values may be given as strings and are then parsed exactly.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

/// Applies `key=value` overrides with the same typing rules as the
/// TOML-style format.
void apply_override(RunConfig& config, std::string_view assignment);

/// Every key with its effective value.
nlohmann::ordered_json to_json(const RunConfig& config);
RunConfig from_json(const nlohmann::json& j);

std::vector<std::string> config_keys();

} // namespace twf
