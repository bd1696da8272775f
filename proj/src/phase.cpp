#include "hetpol/phase.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hetpol/errors.hpp"
#include "hetpol/partition.hpp"
#include "hetpol/rng.hpp"

namespace hetpol {

namespace {

constexpr double kZ95 = 1.959963984540054;

// log cosh x without overflow.
double log_cosh(double x) {
    x = std::abs(x);
    return x + std::log1p(std::exp(-2.0 * x)) - std::numbers::ln2;
}

std::string describe(const PhasePoint& pt) {
    std::ostringstream os;
    os << "h = " << pt.h << " classified " << to_string(pt.verdict) << " (psi_n = " << pt.psi_p_hat << " +- "
       << pt.std_err << ", psi_2n = " << pt.psi_p_hat_2n << " +- " << pt.std_err_2n << ")";
    return os.str();
}

}  // namespace

double bound_localized(double lambda, double p, int d) {
    HETPOL_REQUIRE(lambda > 0.0, "bound_localized: lambda must be > 0");
    HETPOL_REQUIRE(p > 0.0 && p <= 1.0, "bound_localized: p must lie in (0, 1]");
    HETPOL_REQUIRE(d >= 1, "bound_localized: d must be >= 1");
    return 1.0 - (2.0 * d - (1.0 - p)) * std::numbers::ln2 / (p * lambda);
}

double bound_delocalized(double lambda, bool* at_limit) {
    HETPOL_REQUIRE(lambda >= 0.0 && std::isfinite(lambda), "bound_delocalized: lambda must be finite and >= 0");
    if (at_limit) *at_limit = lambda == 0.0;
    if (lambda == 0.0) return 0.0;
    return log_cosh(2.0 * lambda) / (2.0 * lambda);
}

double diffusive_threshold(double lambda, int d, double alpha) {
    HETPOL_REQUIRE(d >= 3, "diffusive_threshold requires d >= 3");
    HETPOL_REQUIRE(lambda > 0.0, "diffusive_threshold requires lambda > 0");
    HETPOL_REQUIRE(alpha > 0.0 && alpha < 1.0, "diffusive_threshold: alpha must lie in (0, 1)");
    const double escape_branch = 1.0 + std::log1p(-alpha) / (2.0 * lambda);
    return std::max(bound_delocalized(lambda), escape_branch);
}

double diffusive_threshold(double lambda, int d, const WalkKernel& kernel) {
    HETPOL_REQUIRE(kernel.d == d, "diffusive_threshold: kernel dimension mismatch");
    return diffusive_threshold(lambda, d, kernel.alpha());
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::localized:
            return "Localized";
        case Verdict::delocalized:
            return "Delocalized";
        case Verdict::uncertain:
            break;
    }
    return "Uncertain";
}

Verdict decide(double psi_n, double se_n, double psi_2n, double se_2n, const ClassifierSettings& s) {
    const bool positive = psi_n > s.kappa * se_n;
    if (positive && psi_2n > s.shrink_ratio * psi_n) return Verdict::localized;
    if (!positive && std::abs(psi_2n) <= s.shrink_ratio * std::abs(psi_n) + s.kappa * se_2n) return Verdict::delocalized;
    return Verdict::uncertain;
}

PhasePoint classify_point(const ModelParams& params, int n, int replicas, std::uint64_t base_seed,
                          const ClassifierSettings& settings, int workers) {
    HETPOL_REQUIRE(n >= 1, "classify_point: n must be >= 1");
    HETPOL_REQUIRE(replicas >= 2, "classify_point: need at least 2 replicas for an error estimate");
    PhasePoint pt;
    pt.lambda = params.lambda;
    pt.h = params.h;
    pt.p = params.p;
    pt.d = params.d;
    pt.n = n;
    pt.replicas = replicas;
    // Without interaction or without droplets Phi = lambda*h exactly.
    if (params.lambda == 0.0 || params.p == 0.0) {
        ModelParams check = params;
        check.n = n;
        check.validate();
        pt.verdict = Verdict::delocalized;
        pt.simulated = false;
        return pt;
    }

    ModelParams run = params;
    run.n = 2 * n;
    const std::vector<int> horizons{n, 2 * n};
    const auto prof = free_energy_profile(run, horizons, replicas, base_seed, workers);
    pt.psi_p_hat = prof[0].excess_hat;
    pt.std_err = prof[0].excess_std_err;
    pt.psi_p_hat_2n = prof[1].excess_hat;
    pt.std_err_2n = prof[1].excess_std_err;
    pt.raw_psi_p_hat = prof[0].phi_hat - params.lambda * params.h;
    pt.raw_std_err = prof[0].phi_std_err;
    pt.verdict = decide(pt.psi_p_hat, pt.std_err, pt.psi_p_hat_2n, pt.std_err_2n, settings);
    return pt;
}

std::vector<PhasePoint> phase_scan(const std::vector<double>& lambdas, const std::vector<double>& hs, double p, int d, int n,
                                   int replicas, std::uint64_t base_seed, const ClassifierSettings& settings, int workers) {
    std::vector<PhasePoint> out;
    std::uint64_t g = 0;
    for (double lambda : lambdas) {
        for (double h : hs) {
            ModelParams params{lambda, h, p, d, n};
            out.push_back(classify_point(params, n, replicas, derive_seed(base_seed, g, StreamTag::job), settings, workers));
            ++g;
        }
    }
    return out;
}

CriticalBracket critical_h(double lambda, double p, int d, int n, int replicas, double tol, std::uint64_t base_seed,
                           const ClassifierSettings& settings, int workers) {
    HETPOL_REQUIRE(lambda > 0.0, "critical_h: lambda must be > 0");
    HETPOL_REQUIRE(p > 0.0, "critical_h: p must be > 0");
    HETPOL_REQUIRE(tol > 0.0, "critical_h: tol must be > 0");
    CriticalBracket br;
    br.lambda = lambda;
    br.bound_localized = bound_localized(lambda, p, d);
    br.bound_delocalized = bound_delocalized(lambda);

    auto probe = [&](double h) {
        const ModelParams params{lambda, h, p, d, n};
        br.probes.push_back(classify_point(params, n, replicas, base_seed, settings, workers));
        return br.probes.back();
    };

    const auto low = probe(br.bound_localized);
    if (low.verdict != Verdict::localized)
        throw Error("critical_h at lambda = " + std::to_string(lambda) + ": lower bracket end " + describe(low));
    const auto high = probe(br.bound_delocalized);
    if (high.verdict != Verdict::delocalized)
        throw Error("critical_h at lambda = " + std::to_string(lambda) + ": upper bracket end " + describe(high));

    double lo = br.bound_localized;
    double hi = br.bound_delocalized;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const auto v = probe(mid).verdict;
        if (v == Verdict::localized) {
            lo = mid;
        } else if (v == Verdict::delocalized) {
            hi = mid;
        } else {
            const double q_low = 0.5 * (lo + mid);
            const double q_high = 0.5 * (mid + hi);
            if (probe(q_low).verdict == Verdict::localized) lo = q_low;
            if (probe(q_high).verdict == Verdict::delocalized) hi = q_high;
            br.stopped_uncertain = true;
            break;
        }
    }
    br.h_low = lo;
    br.h_high = hi;
    return br;
}

bool CriticalCurve::admits_nondecreasing() const {
    for (std::size_t i = 0; i < brackets.size(); ++i)
        for (std::size_t j = i + 1; j < brackets.size(); ++j)
            if (brackets[i].lambda < brackets[j].lambda && brackets[i].h_low > brackets[j].h_high) return false;
    return true;
}

bool CriticalCurve::within_envelopes() const {
    return std::all_of(brackets.begin(), brackets.end(), [](const CriticalBracket& b) {
        return b.h_low >= b.bound_localized && b.h_high <= b.bound_delocalized && b.h_low <= b.h_high;
    });
}

CriticalCurve critical_curve(const std::vector<double>& lambdas, double p, int d, int n, int replicas, double tol,
                             std::uint64_t base_seed, const ClassifierSettings& settings, int workers) {
    CriticalCurve curve;
    for (std::size_t i = 0; i < lambdas.size(); ++i)
        curve.brackets.push_back(
            critical_h(lambdas[i], p, d, n, replicas, tol, derive_seed(base_seed, i, StreamTag::job), settings, workers));
    return curve;
}

TailFit tail_fit(const EndpointHistogram& histogram, double delta, const TailFitSettings& settings) {
    HETPOL_REQUIRE(histogram.counts.size() == histogram.bin_lower.size(), "tail_fit: malformed histogram");
    HETPOL_REQUIRE(histogram.samples > 0, "tail_fit: empty histogram");
    std::vector<double> xs;
    std::vector<double> cs;
    if (histogram.d == 1) {
        // Fold onto |z|; only the parity of n is reachable.
        const int n = histogram.n;
        HETPOL_REQUIRE(histogram.counts.size() == 2 * static_cast<std::size_t>(n) + 1, "tail_fit: d = 1 histogram has the wrong size");
        for (int x = n % 2; x <= n; x += 2) {
            double c = static_cast<double>(histogram.counts[static_cast<std::size_t>(n + x)]);
            if (x > 0) c += static_cast<double>(histogram.counts[static_cast<std::size_t>(n - x)]);
            xs.push_back(x);
            cs.push_back(c);
        }
    } else {
        const double scale = std::sqrt(static_cast<double>(histogram.n));
        for (std::size_t i = 0; i < histogram.counts.size(); ++i) {
            xs.push_back((histogram.bin_lower[i] + 0.5 * histogram.bin_width) * scale);
            cs.push_back(static_cast<double>(histogram.counts[i]));
        }
    }

    const auto mode = static_cast<std::size_t>(std::max_element(cs.begin(), cs.end()) - cs.begin());
    std::size_t end = mode;
    while (end + 1 < cs.size() && cs[end + 1] >= static_cast<double>(settings.min_count)) ++end;
    const auto min_bins = static_cast<std::size_t>(settings.min_bins);
    if (end + 1 - mode < min_bins)
        throw InvalidArgument("tail_fit: too few tail bins (" + std::to_string(end + 1 - mode) + " with count >= " +
                              std::to_string(settings.min_count) + " beyond the mode)");

    TailFit fit;
    fit.diagnostic = "no window beyond the mode has a linear log-tail";
    for (std::size_t s = mode; s + min_bins <= end + 1; ++s) {
        const std::span<const double> x(xs.data() + s, end + 1 - s);
        const std::span<const double> c(cs.data() + s, end + 1 - s);
        std::vector<double> y(c.size());
        std::transform(c.begin(), c.end(), y.begin(), [](double v) { return std::log(v); });
        const auto [ymin, ymax] = std::minmax_element(y.begin(), y.end());
        const double drop = *ymax - *ymin;
        if (drop < settings.min_log_drop) break;  // later windows only shrink
        const auto quad = weighted_polyfit(x, y, c, 2);
        const double t = quad.std_err[2] > 0.0 ? quad.coef[2] / quad.std_err[2] : 0.0;
        if (t <= -settings.max_quadratic_t) continue;

        const auto lin = weighted_polyfit(x, y, c, 1);
        // A Gaussian tail a - b x^2 must not explain the window better.
        std::vector<double> x2(x.size());
        std::transform(x.begin(), x.end(), x2.begin(), [](double v) { return v * v; });
        const auto gauss = weighted_polyfit(x2, y, c, 1);
        if (gauss.chi2 < lin.chi2) continue;
        fit.accepted = true;
        fit.diagnostic = "ok";
        fit.epsilon_hat = -lin.coef[1];
        fit.epsilon_std_err = lin.std_err[1];
        fit.epsilon_ci = {fit.epsilon_hat - kZ95 * fit.epsilon_std_err, fit.epsilon_hat + kZ95 * fit.epsilon_std_err};
        fit.c_hat = std::exp(lin.coef[0]) / static_cast<double>(histogram.samples);
        fit.onset = x.front();
        fit.bins_used = static_cast<int>(x.size());
        fit.quadratic_t = t;
        fit.log_drop = drop;
        if (delta > 0.0) fit.ratio_to_half_delta = fit.epsilon_hat / (0.5 * delta);
        return fit;
    }
    return fit;
}

DiffusiveReport diffusive_check(std::span<const double> radii, const ModelParams& params, double alpha,
                                const std::vector<double>& a0, double c0, double far_tail_max) {
    HETPOL_REQUIRE(params.d >= 3, "diffusive_check: regime precondition violated (d >= 3 required)");
    if (params.lambda > 0.0) {
        const double threshold = diffusive_threshold(params.lambda, params.d, alpha);
        HETPOL_REQUIRE(params.h >= threshold - 1e-12, "diffusive_check: regime precondition violated (h = " +
                                                          std::to_string(params.h) + " below the diffusive threshold " +
                                                          std::to_string(threshold) + ")");
    }
    HETPOL_REQUIRE(!radii.empty(), "diffusive_check: no samples");

    DiffusiveReport rep;
    rep.d = params.d;
    rep.samples = radii.size();
    auto tail = [&](double a) {
        TailProbability tp;
        tp.threshold = a;
        const auto hits = static_cast<std::uint64_t>(std::count_if(radii.begin(), radii.end(), [a](double r) { return r > a; }));
        tp.empirical = static_cast<double>(hits) / static_cast<double>(radii.size());
        tp.ci = wilson_interval(hits, radii.size(), kZ95);
        tp.free_walk = 1.0 - chi2_cdf(a * a, params.d);
        return tp;
    };
    rep.floor_holds = true;
    for (double a : a0) {
        rep.lower.push_back(tail(a));
        rep.floor_holds = rep.floor_holds && rep.lower.back().ci.lower > 0.0;
    }
    rep.far_tail = tail(c0);
    rep.far_tail_small = rep.far_tail.empirical <= far_tail_max;

    std::vector<double> sq(radii.begin(), radii.end());
    for (auto& r : sq) r *= r;
    std::sort(sq.begin(), sq.end());
    const double N = static_cast<double>(sq.size());
    for (std::size_t i = 0; i < sq.size(); ++i) {
        const double F = chi2_cdf(sq[i], params.d);
        rep.ks_distance = std::max({rep.ks_distance, std::abs(static_cast<double>(i + 1) / N - F), std::abs(static_cast<double>(i) / N - F)});
    }
    return rep;
}

}  // namespace hetpol
