#include "twf/config.hpp"
#include "twf/errors.hpp"
#include "twf/run.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>

namespace {

// TWF_LOG_LEVEL=trace|debug|info|warn|error|off, default info
void setup_logging()
{
    auto logger = spdlog::stderr_color_mt("twfinger");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::info);
    if (const char* env = std::getenv("TWF_LOG_LEVEL")) {
        const auto level = spdlog::level::from_str(env);
        if (level == spdlog::level::off && std::string(env) != "off")
            spdlog::warn("ignoring unknown TWF_LOG_LEVEL '{}'", env);
        else
            spdlog::set_level(level);
    }
}

} // namespace

int main(int argc, char** argv)
{
    setup_logging();

    CLI::App app{"Travelling-wave finger solver"};
    app.require_subcommand(1, 1);
    std::string config_path;
    std::string out_dir;
    std::vector<std::string> overrides;

    for (const char* mode : {"solve", "sweep", "find-speed", "classify", "oracle-check"}) {
        CLI::App* sub = app.add_subcommand(mode);
        sub->add_option("--config", config_path, "configuration file (JSON or key = value)");
        sub->add_option("--out", out_dir, "output directory")->required();
        sub->add_option("--set", overrides, "override, key=value")->take_all();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : twf::kExitConfigError;
    }
    const std::string mode = app.get_subcommands().front()->get_name();

    twf::RunConfig cfg;
    try {
        if (!config_path.empty())
            cfg = twf::load_config(config_path);
        for (const std::string& o : overrides)
            twf::apply_override(cfg, o);
        // the subcommand wins over a mode key in the file
        cfg.mode = twf::run_mode_from_string(mode);
    } catch (const twf::Error& e) {
        spdlog::error("{}", e.what());
        return twf::kExitConfigError;
    }

    const twf::RunOutcome outcome = twf::run(cfg, out_dir);
    spdlog::info("wrote {}/summary.json (exit code {})", out_dir, outcome.exit_code);
    return outcome.exit_code;
}
