#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hetpol/path_sampler.hpp"

namespace hetpol {

enum class Command { kernel, free_energy, phase_scan, critical_curve, sample_paths, observables, verify };

std::string to_string(Command c);
Command command_from_string(const std::string& text);

/// Raw settings: key -> values in the order given. Keys use underscores.
using ConfigMap = std::map<std::string, std::vector<std::string>>;

/// Every accepted key.
const std::vector<std::string>& known_keys();

/// Keys that may take several values (grids).
bool is_grid_key(const std::string& key);

/// Parses flat `key = value` text. Repeated keys and comma-separated
/// values accumulate; '#' starts a comment. Throws ConfigError on
/// malformed lines or unknown keys.
ConfigMap parse_config_text(const std::string& text);

/// Reads a config file: `key = value` text, or a manifest.json written by
/// a previous run (its "config" object is used).
ConfigMap load_config_file(const std::string& path);

/// Fully resolved run description. Every run is a pure function of it.
struct RunConfig {
    Command command = Command::verify;
    std::vector<double> lambda{1.0};
    std::vector<double> h{0.0};
    std::vector<double> p{0.5};
    std::vector<int> d{1};
    std::vector<int> n{100};
    std::vector<int> horizons;  ///< observables: horizons for E_Q[N_n] (default: n)
    int n_max = 1000;
    int replicas = 100;
    int samples = 10000;
    int paths = 0;  ///< sample-paths: number of full paths exported
    std::optional<std::uint64_t> base_seed;
    int workers = 0;  ///< 0: HETPOL_WORKERS or 1
    std::string output = "hetpol_out";
    double kappa = 3.0;
    double shrink_ratio = 0.65;
    double tol = 0.05;
    EndpointMode mode = EndpointMode::quenched;

    ConfigMap settings;  ///< the merged key/values this config was built from
};

/// Builds and validates a RunConfig. Throws ConfigError naming the
/// offending key.
RunConfig build_config(const ConfigMap& merged);

/// `file` values first, then `flags` replace whole keys.
ConfigMap merge_config(const ConfigMap& file, const ConfigMap& flags);

/// Command line: `<command> [--config FILE] [--key value ...]`.
/// Flags accept dashes or underscores (--n-max, --n_max).
RunConfig parse_config(const std::vector<std::string>& args);

}  // namespace hetpol
