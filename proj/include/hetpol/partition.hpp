#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "hetpol/model.hpp"
#include "hetpol/walk_kernel.hpp"

namespace hetpol {

/// Largest horizon accepted by the quadratic-cost engine.
inline constexpr int kMaxHorizon = 100'000;

/// Log-space partition sums of one disorder realization, started at the
/// origin at time 0.
///
/// Pinned quantities exist only at even times (walk parity), so
/// `log_zhat[k]` and `log_psi_hat[k]` refer to time 2k. Free quantities
/// are indexed by time m = 0..n.
struct PartitionTables {
    int n = 0;
    std::vector<double> log_zhat;     ///< log of the sum restricted to paths pinned at the origin at 2k
    std::vector<double> log_z;        ///< log of the full partition sum at time m
    std::vector<double> log_psi;      ///< log_z[m] - cum_field[m]
    std::vector<double> cum_field;    ///< lambda * sum_{i<=m} (omega_i + h)
    std::vector<double> log_psi_hat;  ///< log_zhat[k] - cum_field[2k], kept separately for precision

    double log_zhat_at_time(int time) const;
};

/// Prefix sums lambda * sum_{i<=m} (omega_i + h), m = 0..n.
std::vector<double> cumulative_field(const DisorderView& disorder, const ModelParams& params, int n);

/// Exponent added at time i when the walk sits on the axis, relative to
/// the off-axis weight: -2 lambda (omega_i + h) on a droplet, else 0.
inline double origin_exponent(const DisorderView& disorder, const ModelParams& params, int i) {
    return disorder.droplet_at(i) ? -2.0 * params.lambda * (disorder.omega_at(i) + params.h) : 0.0;
}

/// Fused renewal recursion over times 0..params.n producing every table.
/// Uses a shared-exponent linear accumulator, so the inner loops are
/// plain axpy kernels; cost O(n^2).
PartitionTables compute_tables(const DisorderView& disorder, const ModelParams& params, const WalkKernel& kernel);
PartitionTables compute_tables(const Disorder& disorder, const ModelParams& params, const WalkKernel& kernel);

/// Terminal values only, at each requested horizon (each <= params.n).
struct TerminalValues {
    std::vector<int> horizons;
    std::vector<double> log_z;
    std::vector<double> log_psi;
    std::vector<double> log_zhat;  ///< at the largest even time <= horizon (-inf when that is 0 and no pinned value exists)
    std::vector<double> cum_field;
};

TerminalValues compute_terminal(const DisorderView& disorder, const ModelParams& params, const WalkKernel& kernel,
                                std::span<const int> horizons);

/// Pinned sums by the last-return renewal recursion, evaluated term by
/// term with streaming log-sum-exp. Index k refers to time 2k <= params.n.
std::vector<double> pinned_log_partition(const Disorder& disorder, const ModelParams& params, const WalkKernel& kernel);

/// Free sums from the pinned ones by decomposing over the last return,
/// with a_0 = 1. Index m = 0..params.n.
std::vector<double> free_log_partition(const Disorder& disorder, const ModelParams& params, const WalkKernel& kernel,
                                       std::span<const double> log_zhat);

/// log_psi[m] = log_z[m] - cum_field[m].
std::vector<double> psi(const PartitionTables& tables);

/// Conditional one-step factor E[Psi^{m+1} | F_m] / Psi^m when the walk
/// reaches the origin with probability `origin_probability`.
double supermartingale_step_check(const ModelParams& params, double origin_probability);

/// Exhaustive path enumeration; independent of the renewal engine.
struct BruteForceResult {
    double log_z = 0.0;
    double log_zhat = 0.0;  ///< -inf when n is odd
    double log_psi = 0.0;
    double mean_returns = 0.0;                                ///< E_Q[N_n]
    std::map<std::vector<std::int32_t>, double> endpoint_law;  ///< Q[w(n) = z]
    std::map<std::uint64_t, double> skeleton_law;              ///< bit t-1 set iff w(t) = 0
};

/// Requires d * n <= 24.
BruteForceResult brute_force_partition(const Disorder& disorder, const ModelParams& params, int n);

/// Pinning every block boundary can only lose weight:
/// log Z^{kN} >= sum_j log Zhat(block j), and likewise for the pinned
/// sum at kN. Slacks are the differences (>= 0 up to rounding).
struct SuperadditivityResult {
    double slack = 0.0;         ///< log Z^{kN} - sum of block logs
    double pinned_slack = 0.0;  ///< log Zhat^{kN} - sum of block logs
    bool holds = false;
};

SuperadditivityResult superadditivity_check(const Disorder& disorder, const ModelParams& params, const WalkKernel& kernel,
                                            int block, int blocks);

/// Upper envelope log Z^{2k} - log Zhat^{2k} <= log(1 + c1 k^d e^{f lambda (1+|h|)})
/// from the last-return decomposition. `exponent_factor` = 2 is the
/// constant the decomposition actually delivers (a pinned endpoint on a
/// droplet costs up to 2 lambda (1 + |h|) relative to an unpinned one).
double sandwich_log_gap(const ModelParams& params, int k, double c1, double exponent_factor = 2.0);

struct SandwichReport {
    double min_lower_slack = 0.0;  ///< min_k (log_z[2k] - log_zhat[k])
    double min_upper_slack = 0.0;  ///< min_k (bound - (log_z[2k] - log_zhat[k]))
    bool holds = false;
};

SandwichReport check_sandwich(const PartitionTables& tables, const ModelParams& params, double c1,
                              double exponent_factor = 2.0, double tolerance = 1e-9);

/// Per-replica record of a free energy run.
struct ReplicaRecord {
    std::uint64_t seed = 0;
    double log_z_n = 0.0;
    double log_zhat_n = 0.0;  ///< at the largest even time <= n
    double log_psi_n = 0.0;
    double phi = 0.0;  ///< log_z_n / n
};

/// Replica average of (1/n) log Z^n.
///
/// `psi_p_hat` is `phi_hat - lambda*h` as defined; `excess_hat` is the
/// replica mean of (1/n) log Psi^n, the same quantity with the exact
/// field term lambda*sum(omega_i+h)/n removed per replica (its mean is
/// lambda*h), which has far smaller variance.
struct FreeEnergyEstimate {
    ModelParams params;
    int n = 0;
    int replicas = 0;
    double phi_hat = 0.0;
    double std_err = 0.0;
    double psi_p_hat = 0.0;
    std::vector<double> per_replica;
    int pinned_n = 0;
    double pinned_hat = 0.0;
    double pinned_std_err = 0.0;
    double excess_hat = 0.0;
    double excess_std_err = 0.0;
    std::vector<ReplicaRecord> records;
};

FreeEnergyEstimate free_energy_estimate(const ModelParams& params, int replicas, std::uint64_t base_seed, int workers = 1);

/// Replica statistics of (1/m) log Z^m and (1/m) log Psi^m at several
/// horizons, each replica evaluated once up to the largest horizon.
struct HorizonSummary {
    int m = 0;
    std::vector<double> phi;     ///< (1/m) log Z^m per replica
    std::vector<double> excess;  ///< (1/m) log Psi^m per replica
    double phi_hat = 0.0;
    double phi_std_err = 0.0;
    double excess_hat = 0.0;
    double excess_std_err = 0.0;
};

std::vector<HorizonSummary> free_energy_profile(const ModelParams& params, std::span<const int> horizons, int replicas,
                                                std::uint64_t base_seed, int workers = 1);

}  // namespace hetpol
