#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hetpol/errors.hpp"
#include "hetpol/rng.hpp"

namespace hetpol {

/// Default attempt budget for the rejection samplers.
inline constexpr std::uint64_t kRejectionBudget = 1'000'000;

/// Series terms summed for alpha(d) when the table is shorter.
inline constexpr int kEscapeTerms = 1 << 18;

/// Escape probability of the directed walk (probability of never
/// revisiting the origin) with a rigorous error bound.
struct EscapeProbability {
    double alpha = 0.0;
    double error = 0.0;
    bool tolerance_met = true;
};

/// Disorder-free return statistics of the walk whose d coordinates each
/// move by +-1 per step.
///
/// Indexing: `p[k]` and `b[k]` refer to time 2k (k = 0..n_max);
/// `a[m]` is defined at every integer time m = 0..2*n_max.
struct WalkKernel {
    int d = 1;
    int n_max = 0;
    std::vector<double> p;  ///< P[w(2k) = 0]
    std::vector<double> b;  ///< P[first return at 2k]; b[0] = 0
    std::vector<double> a;  ///< P[no return within m steps]
    std::vector<double> log_b;
    std::vector<double> log_a;
    EscapeProbability escape;  ///< alpha(d); zero for d <= 2
    bool clamped = false;      ///< some b[k] fell below 1e-300 and was set to 0

    double alpha() const noexcept { return escape.alpha; }
    int max_time() const noexcept { return 2 * n_max; }
};

/// Builds p by the ratio recurrence on C(2k,k)/4^k raised to the d-th
/// power, b by renewal inversion, a by partial sums of b.
WalkKernel build_kernel(int d, int n_max);

/// Kernel large enough for a polymer of length n.
inline WalkKernel kernel_for_horizon(int d, int n) { return build_kernel(d, (n + 1) / 2); }

/// alpha(d) = 1 / sum_k p_k for d >= 3, summing `n_max` terms and
/// bracketing the remainder with integral bounds; 0 for d <= 2.
EscapeProbability escape_probability(int d, int n_max, double tail_tol);

/// Lattice path of `steps` steps in Z^d, stored row-major with
/// (steps + 1) rows of d coordinates.
struct WalkPath {
    int d = 1;
    std::vector<std::int32_t> coords;

    int steps() const noexcept { return static_cast<int>(coords.size()) / d - 1; }
    std::span<const std::int32_t> at(int t) const {
        return std::span(coords).subspan(static_cast<std::size_t>(t) * static_cast<std::size_t>(d), static_cast<std::size_t>(d));
    }
    bool at_origin(int t) const;
};

/// Uniform excursion of `length` (even, >= 2) steps: starts and ends at
/// the origin and avoids it strictly in between. Bridges are drawn
/// coordinate-wise and rejected until the joint path avoids the origin.
/// `attempts` (optional) receives the number of draws used.
WalkPath sample_excursion(const WalkKernel& kernel, int length, Rng& rng, std::uint64_t budget = kRejectionBudget,
                          std::uint64_t* attempts = nullptr);

/// Uniform walk of `length` steps from the origin that never revisits it.
WalkPath sample_avoiding_segment(const WalkKernel& kernel, int length, Rng& rng,
                                 std::uint64_t budget = kRejectionBudget, std::uint64_t* attempts = nullptr);

/// Same law as sample_avoiding_segment but only the endpoint is kept.
std::vector<std::int32_t> sample_avoiding_endpoint(int d, int length, Rng& rng, std::uint64_t budget = kRejectionBudget,
                                                   std::uint64_t* attempts = nullptr);

/// Growth of a_{2k}/b_k over the table.
struct RatioGrowth {
    std::vector<double> ratio;  ///< ratio[k-1] = a[2k]/b[k], k = 1..k_max
    double slope = 0.0;         ///< least-squares slope of log ratio vs log k on the upper decade
    double c1 = 0.0;            ///< smallest c with a[2k]/b[k] <= c k^d for all tabulated k
};

RatioGrowth ratio_growth_check(const WalkKernel& kernel, int k_max);

/// Probability that all d coordinates stay nonzero for m steps,
/// (a^{(1)}_m)^d, from a d = 1 kernel.
double axis_avoidance_probability(const WalkKernel& kernel_1d, int d, int m);

/// Measured decay exponent of the axis-avoidance probability: minus the
/// least-squares slope of its log against log m over the upper decade of
/// even m <= 2 * kernel_1d.n_max.
double axis_avoidance_exponent(const WalkKernel& kernel_1d, int d);

}  // namespace hetpol
