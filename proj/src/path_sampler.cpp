#include "hetpol/path_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "hetpol/errors.hpp"
#include "hetpol/parallel.hpp"

namespace hetpol {

namespace {

constexpr double kShellWidth = 0.1;

double norm(std::span<const std::int32_t> z) {
    double s = 0.0;
    for (auto x : z) s += static_cast<double>(x) * x;
    return std::sqrt(s);
}

}  // namespace

GibbsSampler::GibbsSampler(const Disorder& disorder, const ModelParams& params, std::vector<int> horizons)
    : GibbsSampler(disorder, params, kernel_for_horizon(params.d, params.n), std::move(horizons)) {}

GibbsSampler::GibbsSampler(const Disorder& disorder, const ModelParams& params, WalkKernel kernel, std::vector<int> horizons)
    : params_(params), kernel_(std::move(kernel)) {
    tables_ = compute_tables(disorder.view(), params_, kernel_);
    const auto K = static_cast<std::size_t>(params_.n / 2);
    field_exponent_.assign(K + 1, 0.0);
    const auto view = disorder.view();
    for (std::size_t k = 1; k <= K; ++k) field_exponent_[k] = origin_exponent(view, params_, static_cast<int>(2 * k));

    horizons.push_back(params_.n);
    std::sort(horizons.begin(), horizons.end());
    horizons.erase(std::unique(horizons.begin(), horizons.end()), horizons.end());
    for (int m : horizons) {
        cdf_horizons_.push_back(horizon(m));
        cdfs_.push_back(last_return_cdf(m));
    }
}

int GibbsSampler::horizon(int m) const {
    if (m < 0) return params_.n;
    HETPOL_REQUIRE(m >= 1 && m <= params_.n, "sampler horizon outside [1, n]");
    return m;
}

std::vector<double> GibbsSampler::last_return_cdf(int m) const {
    // P[L = 2j] = Psihat^{2j} a_{m-2j} / Psi^m.
    const auto mm = static_cast<std::size_t>(m);
    const double norm_log = tables_.log_psi[mm];
    std::vector<double> cdf(mm / 2 + 1);
    double acc = 0.0;
    for (std::size_t j = 0; j <= mm / 2; ++j) {
        acc += std::exp(tables_.log_psi_hat[j] + kernel_.log_a[mm - 2 * j] - norm_log);
        cdf[j] = acc;
    }
    return cdf;
}

int GibbsSampler::sample_last_return(Rng& rng, int m) const {
    const auto it = std::lower_bound(cdf_horizons_.begin(), cdf_horizons_.end(), m);
    std::vector<double> local;
    const std::vector<double>* cdf = nullptr;
    if (it != cdf_horizons_.end() && *it == m) {
        cdf = &cdfs_[static_cast<std::size_t>(it - cdf_horizons_.begin())];
    } else {
        local = last_return_cdf(m);
        cdf = &local;
    }
    const double u = rng.uniform() * cdf->back();
    const auto pos = std::upper_bound(cdf->begin(), cdf->end(), u);
    const auto j = pos == cdf->end() ? cdf->size() - 1 : static_cast<std::size_t>(pos - cdf->begin());
    return static_cast<int>(2 * j);
}

std::vector<int> GibbsSampler::sample_skeleton(Rng& rng, int m) const {
    m = horizon(m);
    std::vector<int> returns;
    auto k = static_cast<std::size_t>(sample_last_return(rng, m) / 2);
    const auto& lph = tables_.log_psi_hat;
    while (k > 0) {
        returns.push_back(static_cast<int>(2 * k));
        // P[previous return = 2j | return at 2k] = Psihat^{2j} b_{k-j} e^{g(2k)} / Psihat^{2k}.
        const double base = field_exponent_[k] - lph[k];
        const double u = rng.uniform();
        double acc = 0.0;
        std::size_t chosen = k;
        std::size_t last_positive = k;
        for (std::size_t j = k; j-- > 0;) {
            const double w = std::exp(lph[j] + kernel_.log_b[k - j] + base);
            if (w > 0.0) last_positive = j;
            acc += w;
            if (acc > u) {
                chosen = j;
                break;
            }
        }
        // Rounding can leave the total a hair below u.
        k = chosen == k ? (last_positive == k ? 0 : last_positive) : chosen;
    }
    std::reverse(returns.begin(), returns.end());
    return returns;
}

PathSample GibbsSampler::sample(Rng& rng, int m) const {
    m = horizon(m);
    for (int retry = 0; retry <= kSkeletonRetries; ++retry) {
        const auto skeleton = sample_skeleton(rng, m);
        try {
            auto out = fill_path(skeleton, kernel_, m, rng);
            out.skeleton_retries = retry;
            return out;
        } catch (const RejectionBudgetExceeded&) {
        }
    }
    throw Error("path sampling failed: " + std::to_string(kSkeletonRetries) + " skeleton retries exhausted the rejection budget");
}

PathSample GibbsSampler::sample_endpoint(Rng& rng, int m) const {
    m = horizon(m);
    for (int retry = 0; retry <= kSkeletonRetries; ++retry) {
        auto skeleton = sample_skeleton(rng, m);
        const int last = skeleton.empty() ? 0 : skeleton.back();
        try {
            PathSample out;
            out.endpoint = sample_avoiding_endpoint(params_.d, m - last, rng);
            out.last_hit = last;
            out.n_returns = static_cast<int>(skeleton.size());
            out.returns = std::move(skeleton);
            out.skeleton_retries = retry;
            return out;
        } catch (const RejectionBudgetExceeded&) {
        }
    }
    throw Error("endpoint sampling failed: " + std::to_string(kSkeletonRetries) + " skeleton retries exhausted the rejection budget");
}

double GibbsSampler::no_return_probability(int m) const { return hetpol::no_return_probability(tables_, kernel_, horizon(m)); }

std::vector<int> sample_return_skeleton(const PartitionTables& tables, const Disorder& disorder, const ModelParams& params,
                                        const WalkKernel& kernel, Rng& rng) {
    HETPOL_REQUIRE(tables.n == params.n, "sample_return_skeleton: tables do not match the horizon");
    const GibbsSampler sampler(disorder, params, kernel);
    return sampler.sample_skeleton(rng);
}

PathSample fill_path(const std::vector<int>& skeleton, const WalkKernel& kernel, int n, Rng& rng, std::uint64_t budget) {
    HETPOL_REQUIRE(n >= 1, "fill_path: n must be >= 1");
    int prev = 0;
    for (int t : skeleton) {
        HETPOL_REQUIRE(t > prev && t <= n && (t - prev) % 2 == 0, "fill_path: invalid skeleton");
        prev = t;
    }
    const int d = kernel.d;
    const auto D = static_cast<std::size_t>(d);
    PathSample out;
    out.path = WalkPath{d, std::vector<std::int32_t>((static_cast<std::size_t>(n) + 1) * D, 0)};
    prev = 0;
    for (int t : skeleton) {
        const auto exc = sample_excursion(kernel, t - prev, rng, budget);
        std::copy(exc.coords.begin(), exc.coords.end(), out.path.coords.begin() + static_cast<std::ptrdiff_t>(prev) * d);
        prev = t;
    }
    if (prev < n) {
        const auto seg = sample_avoiding_segment(kernel, n - prev, rng, budget);
        std::copy(seg.coords.begin(), seg.coords.end(), out.path.coords.begin() + static_cast<std::ptrdiff_t>(prev) * d);
    }
    out.returns = skeleton;
    out.n_returns = static_cast<int>(skeleton.size());
    out.last_hit = skeleton.empty() ? 0 : skeleton.back();
    const auto end = out.path.at(n);
    out.endpoint.assign(end.begin(), end.end());
    return out;
}

std::vector<double> exact_endpoint_law_1d(const Disorder& disorder, const ModelParams& params, int n) {
    HETPOL_REQUIRE(params.d == 1, "exact_endpoint_law_1d requires d = 1");
    HETPOL_REQUIRE(n >= 1 && n <= 4000, "exact_endpoint_law_1d requires 1 <= n <= 4000");
    HETPOL_REQUIRE(n <= disorder.n(), "exact_endpoint_law_1d: disorder shorter than n");
    const auto view = disorder.view();
    const auto N = static_cast<std::size_t>(n);
    std::vector<double> cur(2 * N + 3, 0.0);
    std::vector<double> next(cur.size(), 0.0);
    // Index x + n + 1 holds position x, with a zero guard cell on each side.
    const std::size_t origin = N + 1;
    cur[origin] = 1.0;
    for (int i = 1; i <= n; ++i) {
        const auto lo = origin - static_cast<std::size_t>(i);
        const auto hi = origin + static_cast<std::size_t>(i);
        double total = 0.0;
        for (std::size_t x = lo; x <= hi; ++x) {
            next[x] = 0.5 * (cur[x - 1] + cur[x + 1]);
        }
        next[origin] *= std::exp(origin_exponent(view, params, i));
        for (std::size_t x = lo; x <= hi; ++x) total += next[x];
        for (std::size_t x = lo; x <= hi; ++x) next[x] /= total;
        std::swap(cur, next);
    }
    return std::vector<double>(cur.begin() + 1, cur.end() - 1);
}

double no_return_probability(const PartitionTables& tables, const WalkKernel& kernel, int n) {
    HETPOL_REQUIRE(n >= 0 && n <= tables.n, "no_return_probability: n outside the tables");
    return kernel.a[static_cast<std::size_t>(n)] * std::exp(-tables.log_psi[static_cast<std::size_t>(n)]);
}

std::string to_string(EndpointMode mode) { return mode == EndpointMode::quenched ? "quenched" : "annealed"; }

EndpointMode endpoint_mode_from_string(const std::string& text) {
    if (text == "quenched") return EndpointMode::quenched;
    if (text == "annealed") return EndpointMode::annealed;
    throw InvalidArgument("unknown endpoint mode '" + text + "' (expected quenched or annealed)");
}

Interval EndpointHistogram::interval(std::size_t bin, double z) const {
    HETPOL_REQUIRE(bin < counts.size(), "histogram bin out of range");
    return wilson_interval(counts[bin], samples, z);
}

EndpointHistogram endpoint_distribution(const ModelParams& params, int n, int replicas, int samples_per_replica,
                                        EndpointMode mode, std::uint64_t base_seed, int workers) {
    HETPOL_REQUIRE(replicas >= 1, "endpoint_distribution: replicas must be >= 1");
    HETPOL_REQUIRE(samples_per_replica >= 1, "endpoint_distribution: samples_per_replica must be >= 1");
    ModelParams run = params;
    run.n = n;
    run.validate();
    const auto kernel = kernel_for_horizon(run.d, n);
    const auto D = static_cast<std::size_t>(run.d);

    std::unique_ptr<GibbsSampler> shared;
    if (mode == EndpointMode::quenched) shared = std::make_unique<GibbsSampler>(sample_disorder(run, replica_seed(base_seed, 0)), run, kernel);

    struct Chunk {
        std::vector<std::int32_t> endpoints;
        std::uint64_t retries = 0;
    };
    auto chunks = parallel_map(static_cast<std::size_t>(replicas), workers, [&](std::size_t r) {
        std::unique_ptr<GibbsSampler> own;
        const GibbsSampler* sampler = shared.get();
        if (!sampler) {
            own = std::make_unique<GibbsSampler>(sample_disorder(run, replica_seed(base_seed, r)), run, kernel);
            sampler = own.get();
        }
        Rng rng(base_seed, r, StreamTag::skeleton);
        Chunk c;
        c.endpoints.reserve(static_cast<std::size_t>(samples_per_replica) * D);
        for (int s = 0; s < samples_per_replica; ++s) {
            const auto sample = sampler->sample_endpoint(rng);
            c.endpoints.insert(c.endpoints.end(), sample.endpoint.begin(), sample.endpoint.end());
            c.retries += static_cast<std::uint64_t>(sample.skeleton_retries);
        }
        return c;
    });

    EndpointHistogram hist;
    hist.mode = mode;
    hist.d = run.d;
    hist.n = n;
    hist.samples = static_cast<std::uint64_t>(replicas) * static_cast<std::uint64_t>(samples_per_replica);
    if (mode == EndpointMode::quenched)
        hist.disorder_seeds.push_back(replica_seed(base_seed, 0));
    else
        for (int r = 0; r < replicas; ++r) hist.disorder_seeds.push_back(replica_seed(base_seed, static_cast<std::uint64_t>(r)));

    const double scale = std::sqrt(static_cast<double>(n));
    hist.radii.reserve(hist.samples);
    for (const auto& c : chunks) {
        hist.skeleton_retries += c.retries;
        for (std::size_t i = 0; i < c.endpoints.size(); i += D) hist.radii.push_back(norm(std::span(c.endpoints).subspan(i, D)) / scale);
    }

    if (run.d == 1) {
        hist.bin_width = 1.0;
        hist.counts.assign(2 * static_cast<std::size_t>(n) + 1, 0);
        hist.bin_lower.resize(hist.counts.size());
        for (std::size_t i = 0; i < hist.bin_lower.size(); ++i) hist.bin_lower[i] = static_cast<double>(i) - n;
        for (const auto& c : chunks)
            for (auto z : c.endpoints) ++hist.counts[static_cast<std::size_t>(z + n)];
    } else {
        hist.bin_width = kShellWidth;
        const double max_radius = hist.radii.empty() ? 0.0 : *std::max_element(hist.radii.begin(), hist.radii.end());
        const auto bins = static_cast<std::size_t>(std::floor(max_radius / kShellWidth)) + 1;
        hist.counts.assign(bins, 0);
        hist.bin_lower.resize(bins);
        for (std::size_t i = 0; i < bins; ++i) hist.bin_lower[i] = kShellWidth * static_cast<double>(i);
        for (double r : hist.radii) ++hist.counts[std::min(bins - 1, static_cast<std::size_t>(std::floor(r / kShellWidth)))];
    }
    return hist;
}

std::vector<ReturnCountSummary> return_count_stats(const ModelParams& params, const std::vector<int>& n_list, int replicas,
                                                   int samples, std::uint64_t base_seed, int workers) {
    HETPOL_REQUIRE(!n_list.empty(), "return_count_stats: empty horizon list");
    HETPOL_REQUIRE(replicas >= 1 && samples >= 1, "return_count_stats: replicas and samples must be >= 1");
    ModelParams run = params;
    run.n = *std::max_element(n_list.begin(), n_list.end());
    run.validate();
    const auto kernel = kernel_for_horizon(run.d, run.n);

    auto per_replica = parallel_map(static_cast<std::size_t>(replicas), workers, [&](std::size_t r) {
        const std::uint64_t seed = replica_seed(base_seed, r);
        const GibbsSampler sampler(sample_disorder(run, seed), run, kernel, n_list);
        std::vector<double> means;
        for (std::size_t i = 0; i < n_list.size(); ++i) {
            Rng rng(seed, i, StreamTag::skeleton);
            double total = 0.0;
            for (int s = 0; s < samples; ++s) total += static_cast<double>(sampler.sample_skeleton(rng, n_list[i]).size());
            means.push_back(total / samples);
        }
        return means;
    });

    std::vector<ReturnCountSummary> out;
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        std::vector<double> xs;
        for (const auto& m : per_replica) xs.push_back(m[i]);
        const auto s = summarize(xs);
        ReturnCountSummary r;
        r.n = n_list[i];
        r.mean = s.mean;
        r.std_err = s.std_err;
        r.ci = {s.mean - 1.959963984540054 * s.std_err, s.mean + 1.959963984540054 * s.std_err};
        out.push_back(r);
    }
    return out;
}

}  // namespace hetpol
