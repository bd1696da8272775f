#include "hetpol/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hetpol/errors.hpp"

namespace hetpol {

namespace {

const std::vector<std::pair<Command, std::string>> kCommands{
    {Command::kernel, "kernel"},           {Command::free_energy, "free-energy"}, {Command::phase_scan, "phase-scan"},
    {Command::critical_curve, "critical-curve"}, {Command::sample_paths, "sample-paths"}, {Command::observables, "observables"},
    {Command::verify, "verify"},
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string normalize_key(std::string key) {
    std::replace(key.begin(), key.end(), '-', '_');
    return key;
}

void check_key(const std::string& key) {
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ConfigError("unknown config key '" + key + "'");
}

// Splits "a, b" into values; empty items are errors.
void append_values(ConfigMap& map, const std::string& key, const std::string& raw) {
    std::stringstream ss(raw);
    std::string item;
    bool any = false;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ConfigError("empty value for key '" + key + "'");
        map[key].push_back(item);
        any = true;
    }
    if (!any) throw ConfigError("missing value for key '" + key + "'");
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
    T value{};
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (!text.empty() && text.front() == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw ConfigError("invalid value '" + text + "' for key '" + key + "'");
    return value;
}

template <class T>
std::vector<T> numbers(const ConfigMap& m, const std::string& key) {
    std::vector<T> out;
    for (const auto& v : m.at(key)) out.push_back(parse_number<T>(key, v));
    return out;
}

const std::string& single(const ConfigMap& m, const std::string& key) {
    const auto& vals = m.at(key);
    if (vals.size() != 1) throw ConfigError("key '" + key + "' takes a single value but " + std::to_string(vals.size()) + " were given");
    return vals.front();
}

// Keys whose grids a command can consume.
std::vector<std::string> grid_keys_for(Command c) {
    switch (c) {
        case Command::free_energy:
            return {"lambda", "h", "p", "d", "n"};
        case Command::phase_scan:
            return {"lambda", "h"};
        case Command::critical_curve:
            return {"lambda"};
        case Command::observables:
            return {"horizons"};
        case Command::kernel:
        case Command::sample_paths:
        case Command::verify:
            break;
    }
    return {};
}

}  // namespace

std::string to_string(Command c) {
    for (const auto& [cmd, name] : kCommands)
        if (cmd == c) return name;
    return "unknown";
}

Command command_from_string(const std::string& text) {
    for (const auto& [cmd, name] : kCommands)
        if (name == text) return cmd;
    std::string names;
    for (const auto& [cmd, name] : kCommands) names += (names.empty() ? "" : ", ") + name;
    throw ConfigError("unknown command '" + text + "' (expected one of: " + names + ")");
}

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys{"command", "lambda", "h",       "p",     "d",     "n",
                                               "n_max",   "horizons", "replicas", "samples", "paths", "base_seed",
                                               "workers", "output", "kappa",   "shrink_ratio", "tol", "mode"};
    return keys;
}

bool is_grid_key(const std::string& key) {
    return key == "lambda" || key == "h" || key == "p" || key == "d" || key == "n" || key == "horizons";
}

ConfigMap parse_config_text(const std::string& text) {
    ConfigMap map;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = normalize_key(trim(line.substr(0, eq)));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": missing key");
        check_key(key);
        append_values(map, key, trim(line.substr(eq + 1)));
    }
    return map;
}

ConfigMap load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || text[first] != '{') return parse_config_text(text);

    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed manifest '" + path + "': " + e.what());
    }
    if (!j.contains("config") || !j["config"].is_object()) throw ConfigError("manifest '" + path + "' has no config object");
    ConfigMap map;
    for (const auto& [key, value] : j["config"].items()) {
        const std::string k = normalize_key(key);
        check_key(k);
        if (!value.is_array()) throw ConfigError("manifest key '" + key + "' must hold an array of strings");
        for (const auto& v : value) {
            if (!v.is_string()) throw ConfigError("manifest key '" + key + "' must hold an array of strings");
            map[k].push_back(v.get<std::string>());
        }
    }
    return map;
}

ConfigMap merge_config(const ConfigMap& file, const ConfigMap& flags) {
    ConfigMap out = file;
    for (const auto& [key, values] : flags) out[key] = values;
    return out;
}

RunConfig build_config(const ConfigMap& merged) {
    for (const auto& [key, values] : merged) {
        check_key(key);
        if (values.empty()) throw ConfigError("key '" + key + "' has no value");
        if (!is_grid_key(key) && values.size() > 1)
            throw ConfigError("key '" + key + "' takes a single value but " + std::to_string(values.size()) + " were given");
    }
    if (!merged.count("command")) throw ConfigError("no command given");

    RunConfig c;
    c.settings = merged;
    c.command = command_from_string(single(merged, "command"));

    const auto allowed = grid_keys_for(c.command);
    for (const auto& [key, values] : merged) {
        if (is_grid_key(key) && values.size() > 1 && std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError("conflicting grid spec: command '" + to_string(c.command) + "' takes a single value for '" + key +
                              "' but " + std::to_string(values.size()) + " were given");
    }

    if (merged.count("lambda")) c.lambda = numbers<double>(merged, "lambda");
    if (merged.count("h")) c.h = numbers<double>(merged, "h");
    if (merged.count("p")) c.p = numbers<double>(merged, "p");
    if (merged.count("d")) c.d = numbers<int>(merged, "d");
    if (merged.count("n")) c.n = numbers<int>(merged, "n");
    if (merged.count("horizons")) c.horizons = numbers<int>(merged, "horizons");
    if (merged.count("n_max")) c.n_max = parse_number<int>("n_max", single(merged, "n_max"));
    if (merged.count("replicas")) c.replicas = parse_number<int>("replicas", single(merged, "replicas"));
    if (merged.count("samples")) c.samples = parse_number<int>("samples", single(merged, "samples"));
    if (merged.count("paths")) c.paths = parse_number<int>("paths", single(merged, "paths"));
    if (merged.count("base_seed")) c.base_seed = parse_number<std::uint64_t>("base_seed", single(merged, "base_seed"));
    if (merged.count("workers")) c.workers = parse_number<int>("workers", single(merged, "workers"));
    if (merged.count("output")) c.output = single(merged, "output");
    if (merged.count("kappa")) c.kappa = parse_number<double>("kappa", single(merged, "kappa"));
    if (merged.count("shrink_ratio")) c.shrink_ratio = parse_number<double>("shrink_ratio", single(merged, "shrink_ratio"));
    if (merged.count("tol")) c.tol = parse_number<double>("tol", single(merged, "tol"));
    if (merged.count("mode")) {
        try {
            c.mode = endpoint_mode_from_string(single(merged, "mode"));
        } catch (const InvalidArgument& e) {
            throw ConfigError(e.what());
        }
    }

    auto require = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(msg);
    };
    for (double v : c.lambda) require(std::isfinite(v) && v >= 0.0, "lambda must be finite and >= 0");
    for (double v : c.h) require(std::isfinite(v), "h must be finite");
    for (double v : c.p) require(v >= 0.0 && v <= 1.0, "p must lie in [0, 1]");
    for (int v : c.d) require(v >= 1, "d must be >= 1");
    for (int v : c.n) require(v >= 1, "n must be >= 1");
    for (int v : c.horizons) require(v >= 1, "horizons must be >= 1");
    require(c.n_max >= 1, "n_max must be >= 1");
    require(c.replicas >= 1, "replicas must be >= 1");
    require(c.samples >= 1, "samples must be >= 1");
    require(c.paths >= 0, "paths must be >= 0");
    require(c.workers >= 0, "workers must be >= 0");
    require(c.kappa > 0.0, "kappa must be > 0");
    require(c.shrink_ratio > 0.0 && c.shrink_ratio < 1.0, "shrink_ratio must lie in (0, 1)");
    require(c.tol > 0.0, "tol must be > 0");
    require(!c.output.empty(), "output must not be empty");

    const bool randomized = c.command != Command::kernel && c.command != Command::verify;
    require(!randomized || c.base_seed.has_value(), "base_seed is required for command '" + to_string(c.command) + "'");
    if (c.command == Command::phase_scan || c.command == Command::critical_curve) require(c.replicas >= 2, "replicas must be >= 2 for classification");
    return c;
}

RunConfig parse_config(const std::vector<std::string>& args) {
    CLI::App app{"Heteropolymer in a random droplet medium"};
    app.set_help_flag();
    std::string command;
    std::string config_path;
    app.add_option("command", command, "kernel | free-energy | phase-scan | critical-curve | sample-paths | observables | verify")
        ->required();
    app.add_option("--config", config_path, "key = value file or manifest.json");

    std::map<std::string, std::vector<std::string>> flag_values;
    for (const auto& key : known_keys()) {
        if (key == "command") continue;
        std::string names = "--" + key;
        std::string dashed = key;
        std::replace(dashed.begin(), dashed.end(), '_', '-');
        if (dashed != key) names += ",--" + dashed;
        app.add_option(names, flag_values[key], "")->allow_extra_args(false)->expected(1)->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        throw ConfigError(std::string("command line: ") + e.what());
    }

    ConfigMap file;
    if (!config_path.empty()) file = load_config_file(config_path);
    ConfigMap flags;
    flags["command"] = {command};
    for (const auto& [key, values] : flag_values) {
        for (const auto& v : values) append_values(flags, key, v);
    }
    if (file.count("command") && file.at("command") != flags.at("command"))
        throw ConfigError("command '" + command + "' conflicts with config file command '" + file.at("command").front() + "'");
    return build_config(merge_config(file, flags));
}

}  // namespace hetpol
