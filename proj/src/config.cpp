#include "twf/config.hpp"

#include "twf/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace twf {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view to_string(RunMode mode)
{
    switch (mode) {
    case RunMode::Solve:
        return "solve";
    case RunMode::Sweep:
        return "sweep";
    case RunMode::FindSpeed:
        return "find-speed";
    case RunMode::Classify:
        return "classify";
    case RunMode::OracleCheck:
        return "oracle-check";
    }
    return "solve";
}

RunMode run_mode_from_string(std::string_view name)
{
    for (RunMode m : {RunMode::Solve, RunMode::Sweep, RunMode::FindSpeed, RunMode::Classify,
                      RunMode::OracleCheck})
        if (to_string(m) == name)
            return m;
    throw ConfigError("unknown mode '" + std::string(name) + "'");
}

namespace {

std::string trim(std::string_view s)
{
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return std::string(s.substr(b, e - b));
}

double parse_double(const std::string& key, std::string_view text)
{
    const std::string t = trim(text);
    double v = 0.0;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    if (!t.empty() && *first == '+')
        ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || t.empty())
        throw ConfigError("key '" + key + "': '" + t + "' is not a number");
    return v;
}

double as_double(const std::string& key, const json& v)
{
    if (v.is_number())
        return v.get<double>();
    if (v.is_string())
        return parse_double(key, v.get<std::string>());
    throw ConfigError("key '" + key + "' expects a number");
}

long long as_integer(const std::string& key, const json& v)
{
    if (v.is_number_integer())
        return v.get<long long>();
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (d == static_cast<double>(static_cast<long long>(d)))
            return static_cast<long long>(d);
    }
    if (v.is_string()) {
        const std::string t = trim(v.get<std::string>());
        long long out = 0;
        const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
        if (ec == std::errc() && ptr == t.data() + t.size() && !t.empty())
            return out;
    }
    throw ConfigError("key '" + key + "' expects an integer");
}

bool as_bool(const std::string& key, const json& v)
{
    if (v.is_boolean())
        return v.get<bool>();
    if (v.is_string()) {
        const std::string t = v.get<std::string>();
        if (t == "true")
            return true;
        if (t == "false")
            return false;
    }
    throw ConfigError("key '" + key + "' expects true or false");
}

std::string as_string(const std::string& key, const json& v)
{
    if (!v.is_string())
        throw ConfigError("key '" + key + "' expects a string");
    return v.get<std::string>();
}

std::vector<double> as_double_list(const std::string& key, const json& v)
{
    if (!v.is_array())
        return {as_double(key, v)};
    std::vector<double> out;
    for (const json& e : v)
        out.push_back(as_double(key, e));
    return out;
}

std::vector<std::string> as_string_list(const std::string& key, const json& v)
{
    if (!v.is_array())
        return {as_string(key, v)};
    std::vector<std::string> out;
    for (const json& e : v)
        out.push_back(as_string(key, e));
    return out;
}

int as_int(const std::string& key, const json& v)
{
    const long long x = as_integer(key, v);
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
        throw ConfigError("key '" + key + "' is out of range");
    return static_cast<int>(x);
}

std::string_view format_name(ExportFormat f) { return f == ExportFormat::Csv ? "csv" : "vtk"; }

struct Key {
    std::string name;
    std::function<void(RunConfig&, const json&)> set;
    std::function<ordered_json(const RunConfig&)> get;
};

#define TWF_DOUBLE(name, field)                                                                  \
    Key                                                                                          \
    {                                                                                            \
        name, [](RunConfig& c, const json& v) { c.field = as_double(name, v); },                 \
            [](const RunConfig& c) { return ordered_json(c.field); }                             \
    }
#define TWF_INT(name, field)                                                                     \
    Key                                                                                          \
    {                                                                                            \
        name, [](RunConfig& c, const json& v) { c.field = as_int(name, v); },                    \
            [](const RunConfig& c) { return ordered_json(c.field); }                             \
    }

const std::vector<Key>& keys()
{
    static const std::vector<Key> table = {
        {"mode", [](RunConfig& c, const json& v) { c.mode = run_mode_from_string(as_string("mode", v)); },
         [](const RunConfig& c) { return ordered_json(std::string(to_string(c.mode))); }},
        TWF_DOUBLE("L", params.L),
        TWF_DOUBLE("H", params.H),
        {"nx", [](RunConfig& c, const json& v) { c.params.nx = as_integer("nx", v); },
         [](const RunConfig& c) { return ordered_json(c.params.nx); }},
        {"nz", [](RunConfig& c, const json& v) { c.params.nz = as_integer("nz", v); },
         [](const RunConfig& c) { return ordered_json(c.params.nz); }},
        TWF_DOUBLE("g", params.g),
        TWF_DOUBLE("tau", params.tau),
        TWF_DOUBLE("c", params.c),
        TWF_DOUBLE("F_inf", params.F_inf),
        TWF_DOUBLE("kappa", params.kappa),
        TWF_DOUBLE("a", params.a),
        TWF_DOUBLE("pc_shift", params.pc_shift),
        TWF_DOUBLE("s0_base", params.s0_base),
        TWF_DOUBLE("delta", params.delta),
        TWF_DOUBLE("d", params.d),
        {"y_c",
         [](RunConfig& c, const json& v) {
             if (v.is_null())
                 c.params.y_c.reset();
             else
                 c.params.y_c = as_double("y_c", v);
         },
         [](const RunConfig& c) { return ordered_json(c.params.y_center()); }},
        TWF_DOUBLE("M", params.M),
        TWF_DOUBLE("epsilon", params.epsilon),
        TWF_DOUBLE("tol_fp", params.tol_fp),
        TWF_INT("max_iter", params.max_iter),
        TWF_DOUBLE("rtol_lin", params.rtol_lin),
        TWF_DOUBLE("p_init", params.p_init),
        TWF_DOUBLE("s_init", params.s_init),
        {"flux_convention",
         [](RunConfig& c, const json& v) {
             const std::string s = as_string("flux_convention", v);
             if (s == "total")
                 c.params.flux_convention = FluxConvention::Total;
             else if (s == "per_length")
                 c.params.flux_convention = FluxConvention::PerLength;
             else
                 throw ConfigError("flux_convention must be 'total' or 'per_length'");
         },
         [](const RunConfig& c) {
             return ordered_json(c.params.flux_convention == FluxConvention::Total ? "total"
                                                                                   : "per_length");
         }},
        {"pressure_solver",
         [](RunConfig& c, const json& v) {
             const std::string s = as_string("pressure_solver", v);
             if (s == "direct")
                 c.params.pressure_solver = PressureSolver::Direct;
             else if (s == "reused_factor")
                 c.params.pressure_solver = PressureSolver::ReusedFactor;
             else
                 throw ConfigError("pressure_solver must be 'direct' or 'reused_factor'");
         },
         [](const RunConfig& c) {
             return ordered_json(c.params.pressure_solver == PressureSolver::Direct
                                     ? "direct"
                                     : "reused_factor");
         }},
        TWF_INT("refactor_after", params.refactor_after),
        TWF_INT("accel_depth", params.accel_depth),
        TWF_DOUBLE("accel_start", params.accel_start),
        {"c_values", [](RunConfig& c, const json& v) { c.c_values = as_double_list("c_values", v); },
         [](const RunConfig& c) { return ordered_json(c.c_values); }},
        {"warm_start", [](RunConfig& c, const json& v) { c.warm_start = as_bool("warm_start", v); },
         [](const RunConfig& c) { return ordered_json(c.warm_start); }},
        TWF_DOUBLE("refine_tol", refine_tol),
        TWF_DOUBLE("c_lo", c_lo),
        TWF_DOUBLE("c_hi", c_hi),
        TWF_DOUBLE("tol_c", tol_c),
        {"dz_threshold",
         [](RunConfig& c, const json& v) {
             if (v.is_null())
                 c.dz_threshold.reset();
             else
                 c.dz_threshold = as_double("dz_threshold", v);
         },
         [](const RunConfig& c) {
             return c.dz_threshold ? ordered_json(*c.dz_threshold) : ordered_json(nullptr);
         }},
        TWF_INT("margin_rows", margin_rows),
        {"oracle_epsilons",
         [](RunConfig& c, const json& v) { c.oracle_epsilons = as_double_list("oracle_epsilons", v); },
         [](const RunConfig& c) { return ordered_json(c.oracle_epsilons); }},
        TWF_INT("oracle_directions", oracle_directions),
        {"oracle_seed",
         [](RunConfig& c, const json& v) {
             const long long s = as_integer("oracle_seed", v);
             if (s < 0 || s > std::numeric_limits<unsigned>::max())
                 throw ConfigError("oracle_seed is out of range");
             c.oracle_seed = static_cast<unsigned>(s);
         },
         [](const RunConfig& c) { return ordered_json(c.oracle_seed); }},
        {"formats",
         [](RunConfig& c, const json& v) {
             c.formats.clear();
             for (const std::string& f : as_string_list("formats", v)) {
                 if (f == "csv")
                     c.formats.push_back(ExportFormat::Csv);
                 else if (f == "vtk")
                     c.formats.push_back(ExportFormat::Vtk);
                 else
                     throw ConfigError("unknown export format '" + f + "'");
             }
         },
         [](const RunConfig& c) {
             ordered_json out = ordered_json::array();
             for (ExportFormat f : c.formats)
                 out.push_back(std::string(format_name(f)));
             return out;
         }},
        TWF_INT("progress_every", progress_every),
    };
    return table;
}

#undef TWF_DOUBLE
#undef TWF_INT

const Key& find_key(const std::string& name)
{
    for (const Key& k : keys())
        if (k.name == name)
            return k;
    throw ConfigError("unknown key '" + name + "'");
}

// Scalar in the TOML-style format: quoted string, boolean, or bare number.
json parse_scalar(const std::string& key, const std::string& text)
{
    const std::string t = trim(text);
    if (t.empty())
        throw ConfigError("key '" + key + "' has no value");
    if (t.front() == '"' || t.front() == '\'') {
        if (t.size() < 2 || t.back() != t.front())
            throw ConfigError("key '" + key + "': unterminated string");
        return json(t.substr(1, t.size() - 2));
    }
    if (t == "true")
        return json(true);
    if (t == "false")
        return json(false);
    if (t.find_first_of(".eEn") == std::string::npos) {
        long long i = 0;
        const char* first = t.data() + (t.front() == '+' ? 1 : 0);
        const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), i);
        if (ec == std::errc() && ptr == t.data() + t.size())
            return json(i);
    }
    return json(parse_double(key, t));
}

json parse_value(const std::string& key, const std::string& text)
{
    const std::string t = trim(text);
    if (t.empty() || t.front() != '[')
        return parse_scalar(key, t);
    if (t.back() != ']')
        throw ConfigError("key '" + key + "': unterminated array");
    json out = json::array();
    const std::string inner = trim(std::string_view(t).substr(1, t.size() - 2));
    if (inner.empty())
        return out;
    std::stringstream ss(inner);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(parse_scalar(key, item));
    return out;
}

std::string strip_comment(const std::string& line)
{
    char quote = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quote) {
            if (ch == quote)
                quote = 0;
        } else if (ch == '"' || ch == '\'') {
            quote = ch;
        } else if (ch == '#') {
            return line.substr(0, i);
        }
    }
    return line;
}

json parse_key_value(std::string_view text)
{
    json out = json::object();
    std::stringstream ss{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const std::string body = trim(strip_comment(line));
        if (body.empty())
            continue;
        const std::size_t eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(std::string_view(body).substr(0, eq));
        if (key.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": missing key");
        if (out.contains(key))
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        out[key] = parse_value(key, body.substr(eq + 1));
    }
    return out;
}

void validate_config(const RunConfig& cfg)
{
    try {
        cfg.params.validate();
    } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
    }
    if (!(cfg.tol_c > 0.0))
        throw ConfigError("tol_c must be positive");
    if (cfg.refine_tol < 0.0)
        throw ConfigError("refine_tol must be non-negative");
    if (cfg.margin_rows < 0)
        throw ConfigError("margin_rows must be non-negative");
    if (cfg.oracle_directions < 0)
        throw ConfigError("oracle_directions must be non-negative");
    if (cfg.formats.empty())
        throw ConfigError("formats must name at least one format");
}

} // namespace

RunConfig from_json(const json& j)
{
    if (!j.is_object())
        throw ConfigError("configuration must be an object of key/value pairs");
    RunConfig cfg;
    for (const auto& [name, value] : j.items())
        find_key(name).set(cfg, value);
    validate_config(cfg);
    return cfg;
}

RunConfig parse_config(std::string_view text)
{
    const std::string t = trim(text);
    json j;
    if (!t.empty() && t.front() == '{') {
        try {
            j = json::parse(t);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("invalid JSON: ") + e.what());
        }
    } else {
        j = parse_key_value(t);
    }
    return from_json(j);
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot read configuration file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

void apply_override(RunConfig& config, std::string_view assignment)
{
    const std::size_t eq = assignment.find('=');
    if (eq == std::string_view::npos)
        throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
    const std::string key = trim(assignment.substr(0, eq));
    const Key& k = find_key(key);
    RunConfig updated = config;
    k.set(updated, parse_value(key, std::string(assignment.substr(eq + 1))));
    validate_config(updated);
    config = std::move(updated);
}

ordered_json to_json(const RunConfig& config)
{
    ordered_json out = ordered_json::object();
    for (const Key& k : keys())
        out[k.name] = k.get(config);
    return out;
}

std::vector<std::string> config_keys()
{
    std::vector<std::string> out;
    for (const Key& k : keys())
        out.push_back(k.name);
    return out;
}

} // namespace twf
