#include "hetpol/walk_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hetpol/errors.hpp"
#include "hetpol/stats.hpp"

namespace hetpol {

namespace {

constexpr double kClampBelow = 1e-300;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

// Integral of (pi (x + shift))^{-d/2} over [from, inf), d >= 3.
double tail_integral(int d, double from, double shift) {
    const double half_d = 0.5 * d;
    return std::pow(std::numbers::pi, -half_d) * std::pow(from + shift, 1.0 - half_d) / (half_d - 1.0);
}

}  // namespace

bool WalkPath::at_origin(int t) const {
    const auto pos = at(t);
    return std::all_of(pos.begin(), pos.end(), [](std::int32_t x) { return x == 0; });
}

WalkKernel build_kernel(int d, int n_max) {
    HETPOL_REQUIRE(d >= 1, "build_kernel: d must be >= 1");
    HETPOL_REQUIRE(n_max >= 1, "build_kernel: n_max must be >= 1");

    WalkKernel kernel;
    kernel.d = d;
    kernel.n_max = n_max;
    const auto K = static_cast<std::size_t>(n_max);

    // r_k = C(2k,k)/4^k via r_{k+1} = r_k (2k+1)/(2k+2).
    kernel.p.resize(K + 1);
    double r = 1.0;
    for (std::size_t k = 0; k <= K; ++k) {
        kernel.p[k] = std::pow(r, d);
        r *= (2.0 * static_cast<double>(k) + 1.0) / (2.0 * static_cast<double>(k) + 2.0);
    }

    // Renewal inversion b_k = p_k - sum_{j<k} b_j p_{k-j}, accumulated
    // forward so the inner loop is a contiguous axpy.
    kernel.b.assign(K + 1, 0.0);
    std::vector<double> acc(K + 1, 0.0);
    const double* p = kernel.p.data();
    for (std::size_t k = 1; k <= K; ++k) {
        double bk = kernel.p[k] - acc[k];
        if (bk < kClampBelow) {
            if (bk != 0.0) kernel.clamped = true;
            bk = 0.0;
        }
        kernel.b[k] = bk;
        double* out = acc.data() + k;
        const std::size_t len = K - k;
        for (std::size_t m = 1; m <= len; ++m) out[m] += bk * p[m];
    }

    // a_m = 1 - sum_{2j <= m} b_j for every integer m.
    kernel.a.resize(2 * K + 1);
    double survival = 1.0;
    for (std::size_t m = 0; m <= 2 * K; ++m) {
        if (m >= 2 && m % 2 == 0) survival -= kernel.b[m / 2];
        kernel.a[m] = std::max(survival, 0.0);
    }

    kernel.log_b.resize(K + 1);
    std::transform(kernel.b.begin(), kernel.b.end(), kernel.log_b.begin(), safe_log);
    kernel.log_a.resize(2 * K + 1);
    std::transform(kernel.a.begin(), kernel.a.end(), kernel.log_a.begin(), safe_log);

    kernel.escape = escape_probability(d, std::max(n_max, kEscapeTerms), 1e-9);
    return kernel;
}

EscapeProbability escape_probability(int d, int n_max, double tail_tol) {
    HETPOL_REQUIRE(n_max >= 1, "escape_probability: n_max must be >= 1");
    // Recurrent for d <= 2: the return series diverges.
    if (d <= 2) return {0.0, 0.0, true};

    NeumaierSum sum;
    double r = 1.0;
    for (int k = 0; k <= n_max; ++k) {
        sum.add(std::pow(r, d));
        r *= (2.0 * k + 1.0) / (2.0 * k + 2.0);
    }
    // For k >= 1, (pi (k + 1/2))^{-1/2} < C(2k,k)/4^k <= (pi (k + 1/4))^{-1/2};
    // the decreasing envelopes are bracketed by their integrals.
    const double K = static_cast<double>(n_max);
    const double tail_low = tail_integral(d, K + 1.0, 0.5);
    const double tail_high = tail_integral(d, K, 0.25);
    const double series = sum.value() + 0.5 * (tail_low + tail_high);
    const double series_error = 0.5 * (tail_high - tail_low) + 4.0 * K * std::numeric_limits<double>::epsilon() * series;

    EscapeProbability out;
    out.alpha = 1.0 / series;
    out.error = series_error / ((series - series_error) * (series - series_error));
    out.tolerance_met = out.error <= tail_tol;
    return out;
}

WalkPath sample_excursion(const WalkKernel& kernel, int length, Rng& rng, std::uint64_t budget,
                          std::uint64_t* attempts) {
    HETPOL_REQUIRE(length >= 2 && length % 2 == 0, "sample_excursion: length must be even and >= 2");
    const int half = length / 2;
    if (half <= kernel.n_max) HETPOL_REQUIRE(kernel.b[static_cast<std::size_t>(half)] > 0.0, "sample_excursion: zero first-return probability");

    const int d = kernel.d;
    const auto L = static_cast<std::size_t>(length);
    const auto D = static_cast<std::size_t>(d);
    WalkPath path{d, std::vector<std::int32_t>((L + 1) * D, 0)};
    std::vector<char> joint_zero(L + 1);

    for (std::uint64_t attempt = 1; attempt <= budget; ++attempt) {
        std::fill(joint_zero.begin(), joint_zero.end(), 1);
        for (std::size_t c = 0; c < D; ++c) {
            // Uniform bridge: step up with probability (ups left)/(steps left).
            std::uint64_t ups = static_cast<std::uint64_t>(half);
            std::int32_t x = 0;
            for (std::size_t t = 1; t <= L; ++t) {
                const std::uint64_t remaining = L - t + 1;
                if (rng.below(remaining) < ups) {
                    --ups;
                    ++x;
                } else {
                    --x;
                }
                path.coords[t * D + c] = x;
                if (x != 0) joint_zero[t] = 0;
            }
        }
        bool ok = true;
        for (std::size_t t = 1; t < L; ++t) {
            if (joint_zero[t]) {
                ok = false;
                break;
            }
        }
        if (ok) {
            if (attempts) *attempts = attempt;
            return path;
        }
    }
    if (attempts) *attempts = budget;
    throw RejectionBudgetExceeded("sample_excursion: length " + std::to_string(length), budget);
}

namespace {

// One step of all coordinates; returns true if the walk is at the origin.
bool step_all(std::span<std::int32_t> pos, Rng& rng) {
    bool origin = true;
    for (auto& x : pos) {
        x += rng.sign();
        origin = origin && x == 0;
    }
    return origin;
}

}  // namespace

WalkPath sample_avoiding_segment(const WalkKernel& kernel, int length, Rng& rng, std::uint64_t budget,
                                 std::uint64_t* attempts) {
    HETPOL_REQUIRE(length >= 1, "sample_avoiding_segment: length must be >= 1");
    const int d = kernel.d;
    const auto D = static_cast<std::size_t>(d);
    const auto L = static_cast<std::size_t>(length);
    WalkPath path{d, std::vector<std::int32_t>((L + 1) * D, 0)};

    for (std::uint64_t attempt = 1; attempt <= budget; ++attempt) {
        bool ok = true;
        for (std::size_t t = 1; t <= L; ++t) {
            std::span<std::int32_t> cur(path.coords.data() + t * D, D);
            std::copy_n(path.coords.data() + (t - 1) * D, D, cur.begin());
            if (step_all(cur, rng)) {
                ok = false;
                break;
            }
        }
        if (ok) {
            if (attempts) *attempts = attempt;
            return path;
        }
    }
    if (attempts) *attempts = budget;
    throw RejectionBudgetExceeded("sample_avoiding_segment: length " + std::to_string(length), budget);
}

std::vector<std::int32_t> sample_avoiding_endpoint(int d, int length, Rng& rng, std::uint64_t budget,
                                                   std::uint64_t* attempts) {
    HETPOL_REQUIRE(d >= 1, "sample_avoiding_endpoint: d must be >= 1");
    HETPOL_REQUIRE(length >= 0, "sample_avoiding_endpoint: length must be >= 0");
    std::vector<std::int32_t> pos(static_cast<std::size_t>(d), 0);
    if (length == 0) {
        if (attempts) *attempts = 1;
        return pos;
    }
    for (std::uint64_t attempt = 1; attempt <= budget; ++attempt) {
        std::fill(pos.begin(), pos.end(), 0);
        bool ok = true;
        for (int t = 1; t <= length; ++t) {
            if (step_all(pos, rng)) {
                ok = false;
                break;
            }
        }
        if (ok) {
            if (attempts) *attempts = attempt;
            return pos;
        }
    }
    if (attempts) *attempts = budget;
    throw RejectionBudgetExceeded("sample_avoiding_endpoint: length " + std::to_string(length), budget);
}

RatioGrowth ratio_growth_check(const WalkKernel& kernel, int k_max) {
    HETPOL_REQUIRE(k_max >= 1 && k_max <= kernel.n_max, "ratio_growth_check: k_max outside the kernel table");
    RatioGrowth out;
    out.ratio.reserve(static_cast<std::size_t>(k_max));
    std::vector<double> xs;
    std::vector<double> ys;
    const int fit_from = k_max >= 10 ? std::max(1, k_max / 10) : 1;
    for (int k = 1; k <= k_max; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        const double ratio = kernel.b[ku] > 0.0 ? kernel.a[2 * ku] / kernel.b[ku] : std::numeric_limits<double>::infinity();
        out.ratio.push_back(ratio);
        out.c1 = std::max(out.c1, ratio / std::pow(static_cast<double>(k), kernel.d));
        if (k >= fit_from && std::isfinite(ratio)) {
            xs.push_back(std::log(static_cast<double>(k)));
            ys.push_back(std::log(ratio));
        }
    }
    out.slope = xs.size() >= 2 ? least_squares_line(xs, ys).slope : 0.0;
    return out;
}

double axis_avoidance_probability(const WalkKernel& kernel_1d, int d, int m) {
    HETPOL_REQUIRE(kernel_1d.d == 1, "axis_avoidance_probability needs a d = 1 kernel");
    HETPOL_REQUIRE(m >= 0 && m <= kernel_1d.max_time(), "axis_avoidance_probability: m outside the kernel table");
    return std::pow(kernel_1d.a[static_cast<std::size_t>(m)], d);
}

double axis_avoidance_exponent(const WalkKernel& kernel_1d, int d) {
    HETPOL_REQUIRE(kernel_1d.d == 1, "axis_avoidance_exponent needs a d = 1 kernel");
    const int m_max = kernel_1d.max_time();
    std::vector<double> xs, ys;
    for (int m = std::max(2, m_max / 10); m <= m_max; m += 2) {
        xs.push_back(std::log(static_cast<double>(m)));
        ys.push_back(std::log(axis_avoidance_probability(kernel_1d, d, m)));
    }
    return xs.size() >= 2 ? -least_squares_line(xs, ys).slope : 0.0;
}

}  // namespace hetpol
