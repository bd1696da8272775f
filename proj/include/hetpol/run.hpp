#pragma once

#include <cstdint>
#include <ostream>

#include "hetpol/config.hpp"

namespace hetpol {

/// Seed used by `verify` when none is given.
inline constexpr std::uint64_t kDefaultVerifySeed = 20240917;

/// Every key of `config` with its resolved value, formatted so that
/// build_config(resolved_settings(c)) reproduces c.
ConfigMap resolved_settings(const RunConfig& config);

/// Executes one command and writes manifest.json, results.csv and
/// aggregate.json (plus command-specific files) under config.output.
/// Returns 0 on success, 1 when a job fails or `verify` finds a failing
/// property, 2 on configuration errors. Progress and errors go to `log`.
int run(const RunConfig& config, std::ostream& log);

}  // namespace hetpol
