#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hetpol/model.hpp"
#include "hetpol/partition.hpp"
#include "hetpol/rng.hpp"
#include "hetpol/stats.hpp"
#include "hetpol/walk_kernel.hpp"

namespace hetpol {

/// Attempts at drawing a fresh skeleton when filling a path runs out of
/// its rejection budget.
inline constexpr int kSkeletonRetries = 100;

/// A polymer configuration drawn from the quenched Gibbs measure.
struct PathSample {
    std::vector<int> returns;  ///< sorted times in (0, n] with w = 0
    WalkPath path;             ///< empty when only the endpoint was sampled
    std::vector<std::int32_t> endpoint;
    int last_hit = 0;  ///< max(returns, 0)
    int n_returns = 0;
    int skeleton_retries = 0;  ///< skeletons discarded after budget exhaustion
};

/// Exact sampler for one disorder realization at horizons up to the
/// tables' length. Return times are drawn backward: first the last return
/// L from the free decomposition, then each earlier return from the
/// pinned renewal terms. Excursions between returns are then uniform.
class GibbsSampler {
public:
    /// Last-return tables are precomputed for params.n and for every
    /// entry of `horizons`; other horizons are handled at O(m) per draw.
    GibbsSampler(const Disorder& disorder, const ModelParams& params, std::vector<int> horizons = {});
    GibbsSampler(const Disorder& disorder, const ModelParams& params, WalkKernel kernel, std::vector<int> horizons = {});

    const PartitionTables& tables() const noexcept { return tables_; }
    const WalkKernel& kernel() const noexcept { return kernel_; }
    const ModelParams& params() const noexcept { return params_; }

    /// Return times in (0, m], m <= params.n (default: params.n).
    std::vector<int> sample_skeleton(Rng& rng, int m = -1) const;

    /// Full path at horizon m.
    PathSample sample(Rng& rng, int m = -1) const;

    /// Skeleton and endpoint at horizon m, without materializing the path.
    PathSample sample_endpoint(Rng& rng, int m = -1) const;

    /// Q[no return in (0, m]].
    double no_return_probability(int m = -1) const;

private:
    int horizon(int m) const;
    int sample_last_return(Rng& rng, int m) const;
    std::vector<double> last_return_cdf(int m) const;

    ModelParams params_;
    WalkKernel kernel_;
    PartitionTables tables_;
    std::vector<double> field_exponent_;  ///< origin_exponent at each even time 2k
    std::vector<int> cdf_horizons_;
    std::vector<std::vector<double>> cdfs_;
};

/// Skeleton via a one-off sampler; see GibbsSampler.
std::vector<int> sample_return_skeleton(const PartitionTables& tables, const Disorder& disorder, const ModelParams& params,
                                        const WalkKernel& kernel, Rng& rng);

/// Fills a skeleton with uniform excursions and a uniform origin-avoiding
/// tail. Throws RejectionBudgetExceeded when a gap exhausts its budget.
PathSample fill_path(const std::vector<int>& skeleton, const WalkKernel& kernel, int n, Rng& rng,
                     std::uint64_t budget = kRejectionBudget);

/// Law of w(n) under Q for d = 1 by forward dynamic programming over
/// (time, position); index z + n holds position z. Requires n <= 4000.
std::vector<double> exact_endpoint_law_1d(const Disorder& disorder, const ModelParams& params, int n);

/// Q[no return in (0, n]] = a[n] / Psi^n.
double no_return_probability(const PartitionTables& tables, const WalkKernel& kernel, int n);

enum class EndpointMode { quenched, annealed };

std::string to_string(EndpointMode mode);
EndpointMode endpoint_mode_from_string(const std::string& text);

/// Pooled endpoint histogram. For d = 1 bin i is the position
/// bin_lower[i] (width 1); for d >= 2 bin i is the shell
/// [bin_lower[i], bin_lower[i] + 0.1) of |w(n)|/sqrt(n).
struct EndpointHistogram {
    EndpointMode mode = EndpointMode::quenched;
    bool reversed_time = true;  ///< tails of the pinned-at-0 reversed measure, read forward
    int d = 1;
    int n = 0;
    std::uint64_t samples = 0;
    double bin_width = 1.0;
    std::vector<double> bin_lower;
    std::vector<std::uint64_t> counts;
    std::vector<double> radii;  ///< |w(n)|/sqrt(n) per sample, in sample order
    std::vector<std::uint64_t> disorder_seeds;
    std::uint64_t skeleton_retries = 0;

    Interval interval(std::size_t bin, double z = 1.959963984540054) const;
};

/// Endpoint histogram at horizon n. Quenched: one disorder (replica 0),
/// replicas * samples_per_replica draws in `replicas` independent chunks.
/// Annealed: one fresh disorder per replica.
EndpointHistogram endpoint_distribution(const ModelParams& params, int n, int replicas, int samples_per_replica,
                                        EndpointMode mode, std::uint64_t base_seed, int workers = 1);

struct ReturnCountSummary {
    int n = 0;
    double mean = 0.0;
    double std_err = 0.0;  ///< across replicas of the per-replica sample means
    Interval ci;           ///< mean +- 1.96 std_err
};

/// Mean number of returns E_Q[N_n] averaged over disorder, at each n.
/// One table per replica at the largest n serves every horizon.
std::vector<ReturnCountSummary> return_count_stats(const ModelParams& params, const std::vector<int>& n_list, int replicas,
                                                   int samples, std::uint64_t base_seed, int workers = 1);

}  // namespace hetpol
