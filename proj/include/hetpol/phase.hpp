#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hetpol/model.hpp"
#include "hetpol/path_sampler.hpp"
#include "hetpol/stats.hpp"
#include "hetpol/walk_kernel.hpp"

namespace hetpol {

/// Largest h for which positivity of the excess free energy follows from
/// the entropy-counting lower bound: 1 - (2d - (1-p)) log 2 / (p lambda).
/// Requires p > 0 and lambda > 0.
double bound_localized(double lambda, double p, int d);

/// (1/2 lambda) log cosh(2 lambda): at or above it the annealed bound
/// forces delocalization. At lambda = 0 the limit 0 is returned and
/// `*at_limit` (if given) is set.
double bound_delocalized(double lambda, bool* at_limit = nullptr);

/// max(bound_delocalized(lambda), 1 - (1/2 lambda) log(1/(1 - alpha))).
/// Requires d >= 3 and lambda > 0.
double diffusive_threshold(double lambda, int d, double alpha);
double diffusive_threshold(double lambda, int d, const WalkKernel& kernel);

enum class Verdict { localized, delocalized, uncertain };

std::string to_string(Verdict v);

/// Classification thresholds.
struct ClassifierSettings {
    double kappa = 3.0;
    /// Delocalized needs the excess at 2n to be at most this fraction of
    /// the excess at n (plus noise); Localized needs it to stay above.
    double shrink_ratio = 0.65;
};

/// Classification of one (lambda, h) point. psi_p_hat is the replica mean
/// of (1/n) log Psi^n, an estimator of Phi_p - lambda*h in which the
/// per-replica field average (mean lambda*h) is taken exactly;
/// raw_psi_p_hat is mean (1/n) log Z^n - lambda*h on the same replicas.
struct PhasePoint {
    double lambda = 0.0;
    double h = 0.0;
    double p = 0.0;
    int d = 1;
    int n = 0;
    int replicas = 0;
    double psi_p_hat = 0.0;
    double std_err = 0.0;
    double psi_p_hat_2n = 0.0;
    double std_err_2n = 0.0;
    double raw_psi_p_hat = 0.0;
    double raw_std_err = 0.0;
    Verdict verdict = Verdict::uncertain;
    bool simulated = true;  ///< false for points decided without disorder sampling
};

/// Classifies from replica estimates at horizons n and 2n, each replica
/// evaluated once at 2n.
PhasePoint classify_point(const ModelParams& params, int n, int replicas, std::uint64_t base_seed,
                          const ClassifierSettings& settings = {}, int workers = 1);

/// Verdict from the two-horizon estimates (exposed for tests).
Verdict decide(double psi_n, double se_n, double psi_2n, double se_2n, const ClassifierSettings& settings);

/// Row-major scan (lambda outer). Grid point g uses the seed
/// derive_seed(base_seed, g, StreamTag::job).
std::vector<PhasePoint> phase_scan(const std::vector<double>& lambdas, const std::vector<double>& hs, double p, int d, int n,
                                   int replicas, std::uint64_t base_seed, const ClassifierSettings& settings = {},
                                   int workers = 1);

/// Bisection bracket for the critical h at one lambda.
struct CriticalBracket {
    double lambda = 0.0;
    double h_low = 0.0;   ///< largest h classified Localized
    double h_high = 0.0;  ///< smallest h classified Delocalized
    double bound_localized = 0.0;
    double bound_delocalized = 0.0;
    bool stopped_uncertain = false;  ///< bisection halted on an Uncertain midpoint
    std::vector<PhasePoint> probes;

    double estimate() const noexcept { return 0.5 * (h_low + h_high); }
};

/// Bisection on h between bound_localized and bound_delocalized with the
/// same disorder replicas at every probe. Stops when the bracket is
/// narrower than `tol`; on an Uncertain midpoint both quarter points are
/// probed once and the search ends. Throws Error if the lower end is not
/// Localized or the upper end is not Delocalized.
CriticalBracket critical_h(double lambda, double p, int d, int n, int replicas, double tol, std::uint64_t base_seed,
                           const ClassifierSettings& settings = {}, int workers = 1);

struct CriticalCurve {
    std::vector<CriticalBracket> brackets;

    /// Intervals admit a nondecreasing curve: no bracket lies entirely
    /// above a bracket at larger lambda.
    bool admits_nondecreasing() const;
    /// Every bracket lies inside [bound_localized, bound_delocalized].
    bool within_envelopes() const;
};

/// Lambda i uses the seed derive_seed(base_seed, i, StreamTag::job).
CriticalCurve critical_curve(const std::vector<double>& lambdas, double p, int d, int n, int replicas, double tol,
                             std::uint64_t base_seed, const ClassifierSettings& settings = {}, int workers = 1);

/// Settings of the exponential tail fit.
struct TailFitSettings {
    std::uint64_t min_count = 5;
    int min_bins = 5;
    double max_quadratic_t = 3.0;
    double min_log_drop = 4.605170185988091;  ///< ln 100
};

/// Exponential fit of the endpoint tail, mass(|z| = x) ~ c exp(-epsilon x).
struct TailFit {
    bool accepted = false;  ///< an onset with a linear log-tail was found
    std::string diagnostic;
    double epsilon_hat = 0.0;
    double epsilon_std_err = 0.0;
    Interval epsilon_ci;  ///< epsilon_hat +- 1.96 std_err
    double c_hat = 0.0;   ///< prefactor on probability scale
    double onset = 0.0;   ///< smallest |z| of the fitted window
    int bins_used = 0;
    double quadratic_t = 0.0;  ///< t statistic of the quadratic term in the window
    double log_drop = 0.0;     ///< log count range over the window
    double ratio_to_half_delta = 0.0;  ///< epsilon_hat / (delta/2), 0 if delta unknown
};

/// `delta` is an excess free energy estimate used only for the reported
/// ratio (pass 0 to skip). For d = 1 the histogram is folded onto |z|;
/// for d >= 2 shell midpoints scaled by sqrt(n) are used.
TailFit tail_fit(const EndpointHistogram& histogram, double delta = 0.0, const TailFitSettings& settings = {});

struct TailProbability {
    double threshold = 0.0;  ///< a in P[|w(n)| > a sqrt(n)]
    double empirical = 0.0;
    Interval ci;
    double free_walk = 0.0;  ///< 1 - chi2_d(a^2)
};

struct DiffusiveReport {
    int d = 0;
    std::size_t samples = 0;
    std::vector<TailProbability> lower;  ///< at each a0; positive floor expected
    TailProbability far_tail;           ///< at c0; small mass expected
    bool floor_holds = false;           ///< every lower Wilson bound > 0
    bool far_tail_small = false;        ///< far_tail.empirical <= far_tail_max
    double ks_distance = 0.0;           ///< sup |F_emp - chi2_d| of |w|^2/n (reported only)
};

/// Compares |w(n)|/sqrt(n) samples with the free-walk radial law.
/// Requires d >= 3 and, for lambda > 0, h >= diffusive_threshold.
DiffusiveReport diffusive_check(std::span<const double> radii, const ModelParams& params, double alpha,
                                const std::vector<double>& a0 = {0.5, 1.0}, double c0 = 4.0, double far_tail_max = 0.01);

}  // namespace hetpol
