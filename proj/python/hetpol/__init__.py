"""Directed polymer in a random droplet medium: exact partition sums,
exact path sampling and phase classification."""

from ._hetpol import (
    ConfigError,
    InvalidArgument,
    PartitionTables,
    WalkKernel,
    FreeEnergyEstimate,
    __version__,
    bound_delocalized,
    bound_localized,
    brute_force_log_z,
    build_kernel,
    classify,
    endpoint_law_1d,
    free_energy,
    partition_tables,
    run_cli,
    sample_endpoints,
    verify,
)

__all__ = [
    "ConfigError",
    "InvalidArgument",
    "PartitionTables",
    "WalkKernel",
    "FreeEnergyEstimate",
    "__version__",
    "bound_delocalized",
    "bound_localized",
    "brute_force_log_z",
    "build_kernel",
    "classify",
    "endpoint_law_1d",
    "free_energy",
    "partition_tables",
    "run_cli",
    "sample_endpoints",
    "verify",
]
