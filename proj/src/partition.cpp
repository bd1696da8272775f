#include "hetpol/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hetpol/errors.hpp"
#include "hetpol/parallel.hpp"
#include "hetpol/rng.hpp"
#include "hetpol/stats.hpp"

namespace hetpol {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// The accumulator is rescaled once a new term exceeds e^300.
constexpr double kRescaleAbove = 300.0;

void check_horizon(const DisorderView& disorder, const ModelParams& params, const WalkKernel& kernel) {
    params.validate();
    HETPOL_REQUIRE(params.n <= kMaxHorizon, "horizon n = " + std::to_string(params.n) + " exceeds the limit of " +
                                                std::to_string(kMaxHorizon) + "; reduce n (cost is quadratic in n)");
    HETPOL_REQUIRE(disorder.length() >= params.n, "disorder shorter than the horizon");
    HETPOL_REQUIRE(kernel.max_time() >= params.n, "kernel horizon too short: need n_max >= n/2");
    HETPOL_REQUIRE(kernel.d == params.d, "kernel dimension does not match params.d");
}

// One streaming pass of the renewal recursion in the Psi normalization:
//   y_k = e^{g(2k)} sum_{j<k} y_j b_{k-j},   y_0 = 1,
//   Psi^m = sum_{2j<=m} y_j a_{m-2j},
// where y_k = Zhat^{2k} e^{-F(2k)}. All y share one exponent `scale`.
class RenewalPass {
public:
    RenewalPass(const DisorderView& disorder, const ModelParams& params, const WalkKernel& kernel, bool free_all)
        : disorder_(disorder),
          params_(params),
          kernel_(kernel),
          K_(static_cast<std::size_t>(params.n / 2)),
          N_(static_cast<std::size_t>(params.n)),
          y_(K_ + 1, 0.0),
          acc_(K_ + 1, 0.0),
          log_psi_hat_(K_ + 1, 0.0) {
        if (free_all) psi_acc_.assign(N_ + 1, 0.0);
    }

    // Runs the recursion; calls on_free(k) after y_k has been pushed so
    // Psi at times 2k and 2k+1 can be finalized.
    template <class OnStep>
    void run(OnStep&& on_step) {
        y_[0] = 1.0;
        push(0);
        on_step(std::size_t{0});
        for (std::size_t k = 1; k <= K_; ++k) {
            const double s = acc_[k];
            const double g = origin_exponent(disorder_, params_, static_cast<int>(2 * k));
            const double lv = (s > 0.0 ? std::log(s) : kNegInf) + g;
            log_psi_hat_[k] = scale_ + lv;
            if (lv > kRescaleAbove) {
                rescale(k, lv);
                y_[k] = 1.0;
            } else {
                y_[k] = std::exp(lv);
            }
            push(k);
            on_step(k);
        }
    }

    // log Psi^m using j <= m/2 (valid once step floor(m/2) has run).
    double log_psi_direct(std::size_t m) const {
        const std::size_t jmax = m / 2;
        double s = 0.0;
        const double* a = kernel_.a.data();
        for (std::size_t j = 0; j <= jmax; ++j) s += y_[j] * a[m - 2 * j];
        return scale_ + std::log(s);
    }

    double log_psi_accumulated(std::size_t m) const { return scale_ + std::log(psi_acc_[m]); }

    const std::vector<double>& log_psi_hat() const { return log_psi_hat_; }
    std::vector<double> take_log_psi_hat() { return std::move(log_psi_hat_); }

private:
    void push(std::size_t k) {
        const double yk = y_[k];
        const double* b = kernel_.b.data();
        double* acc = acc_.data() + k;
        const std::size_t len = K_ - k;
        for (std::size_t m = 1; m <= len; ++m) acc[m] += yk * b[m];
        if (!psi_acc_.empty()) {
            const double* a = kernel_.a.data();
            double* out = psi_acc_.data() + 2 * k;
            const std::size_t flen = N_ - 2 * k;
            for (std::size_t m = 0; m <= flen; ++m) out[m] += yk * a[m];
        }
    }

    void rescale(std::size_t k, double lv) {
        const double f = std::exp(-lv);
        for (std::size_t j = 0; j < k; ++j) y_[j] *= f;
        for (std::size_t j = k; j <= K_; ++j) acc_[j] *= f;
        for (std::size_t m = 2 * k; m < psi_acc_.size(); ++m) psi_acc_[m] *= f;
        scale_ += lv;
    }

    const DisorderView& disorder_;
    const ModelParams& params_;
    const WalkKernel& kernel_;
    std::size_t K_;
    std::size_t N_;
    std::vector<double> y_;
    std::vector<double> acc_;
    std::vector<double> psi_acc_;
    std::vector<double> log_psi_hat_;
    double scale_ = 0.0;
};

}  // namespace

double PartitionTables::log_zhat_at_time(int time) const {
    HETPOL_REQUIRE(time >= 0 && time <= n && time % 2 == 0, "pinned sums exist only at even times in [0, n]");
    return log_zhat[static_cast<std::size_t>(time / 2)];
}

std::vector<double> cumulative_field(const DisorderView& disorder, const ModelParams& params, int n) {
    HETPOL_REQUIRE(n >= 0 && n <= disorder.length(), "cumulative_field: horizon outside the disorder");
    std::vector<double> F(static_cast<std::size_t>(n) + 1, 0.0);
    // Integer partial sums keep the field exact up to the final multiply.
    long long omega_sum = 0;
    for (int i = 1; i <= n; ++i) {
        omega_sum += disorder.omega_at(i);
        F[static_cast<std::size_t>(i)] = params.lambda * (static_cast<double>(omega_sum) + params.h * i);
    }
    return F;
}

PartitionTables compute_tables(const Disorder& disorder, const ModelParams& params, const WalkKernel& kernel) {
    return compute_tables(disorder.view(), params, kernel);
}

PartitionTables compute_tables(const DisorderView& disorder, const ModelParams& params, const WalkKernel& kernel) {
    check_horizon(disorder, params, kernel);
    const auto N = static_cast<std::size_t>(params.n);
    const std::size_t K = N / 2;

    PartitionTables t;
    t.n = params.n;
    t.cum_field = cumulative_field(disorder, params, params.n);
    t.log_psi.assign(N + 1, 0.0);

    if (params.lambda == 0.0) {
        // Every Gibbs weight is 1: Z is a probability total, Zhat a return probability.
        t.log_psi_hat.resize(K + 1);
        for (std::size_t k = 0; k <= K; ++k) t.log_psi_hat[k] = std::log(kernel.p[k]);
    } else {
        RenewalPass pass(disorder, params, kernel, true);
        pass.run([&](std::size_t k) {
            t.log_psi[2 * k] = pass.log_psi_accumulated(2 * k);
            if (2 * k + 1 <= N) t.log_psi[2 * k + 1] = pass.log_psi_accumulated(2 * k + 1);
        });
        t.log_psi_hat = pass.take_log_psi_hat();
    }

    t.log_z.resize(N + 1);
    for (std::size_t m = 0; m <= N; ++m) t.log_z[m] = t.cum_field[m] + t.log_psi[m];
    t.log_zhat.resize(K + 1);
    for (std::size_t k = 0; k <= K; ++k) t.log_zhat[k] = t.cum_field[2 * k] + t.log_psi_hat[k];
    return t;
}

TerminalValues compute_terminal(const DisorderView& disorder, const ModelParams& params, const WalkKernel& kernel,
                                std::span<const int> horizons) {
    check_horizon(disorder, params, kernel);
    for (int m : horizons) HETPOL_REQUIRE(m >= 1 && m <= params.n, "compute_terminal: horizon outside [1, n]");

    TerminalValues out;
    out.horizons.assign(horizons.begin(), horizons.end());
    const std::size_t H = horizons.size();
    out.log_z.assign(H, 0.0);
    out.log_psi.assign(H, 0.0);
    out.log_zhat.assign(H, kNegInf);
    out.cum_field.assign(H, 0.0);
    const auto F = cumulative_field(disorder, params, params.n);

    std::vector<double> log_psi_hat;
    if (params.lambda == 0.0) {
        log_psi_hat.resize(static_cast<std::size_t>(params.n / 2) + 1);
        for (std::size_t k = 0; k < log_psi_hat.size(); ++k) log_psi_hat[k] = std::log(kernel.p[k]);
    } else {
        RenewalPass pass(disorder, params, kernel, false);
        pass.run([&](std::size_t k) {
            for (std::size_t i = 0; i < H; ++i) {
                const auto m = static_cast<std::size_t>(horizons[i]);
                if (m / 2 == k) out.log_psi[i] = pass.log_psi_direct(m);
            }
        });
        log_psi_hat = pass.take_log_psi_hat();
    }
    for (std::size_t i = 0; i < H; ++i) {
        const auto m = static_cast<std::size_t>(horizons[i]);
        out.cum_field[i] = F[m];
        out.log_z[i] = F[m] + out.log_psi[i];
        const std::size_t k = m / 2;
        if (k >= 1) out.log_zhat[i] = F[2 * k] + log_psi_hat[k];
    }
    return out;
}

std::vector<double> pinned_log_partition(const Disorder& disorder, const ModelParams& params, const WalkKernel& kernel) {
    const auto view = disorder.view();
    check_horizon(view, params, kernel);
    const auto F = cumulative_field(view, params, params.n);
    const std::size_t K = static_cast<std::size_t>(params.n) / 2;
    std::vector<double> log_zhat(K + 1, 0.0);
    for (std::size_t k = 1; k <= K; ++k) {
        const int t = static_cast<int>(2 * k);
        // Field along the excursion (2j, 2k) off the axis, then the
        // pinned step at 2k with sign -1 on a droplet.
        const double last = (F[2 * k] - F[2 * k - 1]) + origin_exponent(view, params, t);
        LogSumExp lse;
        for (std::size_t j = 0; j < k; ++j)
            lse.add(log_zhat[j] + kernel.log_b[k - j] + (F[2 * k - 1] - F[2 * j]));
        log_zhat[k] = lse.value() + last;
    }
    return log_zhat;
}

std::vector<double> free_log_partition(const Disorder& disorder, const ModelParams& params, const WalkKernel& kernel,
                                       std::span<const double> log_zhat) {
    const auto view = disorder.view();
    check_horizon(view, params, kernel);
    HETPOL_REQUIRE(log_zhat.size() >= static_cast<std::size_t>(params.n / 2) + 1, "free_log_partition: pinned table too short");
    const auto F = cumulative_field(view, params, params.n);
    const auto N = static_cast<std::size_t>(params.n);
    std::vector<double> log_z(N + 1, 0.0);
    for (std::size_t m = 0; m <= N; ++m) {
        LogSumExp lse;
        for (std::size_t j = 0; 2 * j <= m; ++j) lse.add(log_zhat[j] + kernel.log_a[m - 2 * j] + (F[m] - F[2 * j]));
        log_z[m] = lse.value();
    }
    return log_z;
}

std::vector<double> psi(const PartitionTables& tables) {
    HETPOL_REQUIRE(tables.log_z.size() == tables.cum_field.size(), "psi: tables are incomplete");
    std::vector<double> out(tables.log_z.size());
    for (std::size_t m = 0; m < out.size(); ++m) out[m] = tables.log_z[m] - tables.cum_field[m];
    return out;
}

double supermartingale_step_check(const ModelParams& params, double origin_probability) {
    HETPOL_REQUIRE(origin_probability >= 0.0 && origin_probability <= 1.0, "origin probability must lie in [0, 1]");
    const double lam = params.lambda;
    const double bracket = 1.0 - 0.5 * (std::exp(-2.0 * lam * (1.0 + params.h)) + std::exp(2.0 * lam * (1.0 - params.h)));
    return 1.0 - origin_probability * params.p * bracket;
}

BruteForceResult brute_force_partition(const Disorder& disorder, const ModelParams& params, int n) {
    HETPOL_REQUIRE(n >= 1 && n <= disorder.n(), "brute_force_partition: horizon outside the disorder");
    HETPOL_REQUIRE(static_cast<long long>(params.d) * n <= 24, "brute_force_partition: instance too large (need d*n <= 24)");
    const auto view = disorder.view();
    const int d = params.d;
    const auto D = static_cast<std::size_t>(d);
    const std::uint32_t moves = 1U << d;

    std::vector<double> origin_factor(static_cast<std::size_t>(n) + 1, 1.0);
    for (int i = 1; i <= n; ++i) origin_factor[static_cast<std::size_t>(i)] = std::exp(origin_exponent(view, params, i));

    BruteForceResult out;
    double total = 0.0;
    double pinned = 0.0;
    double returns_weighted = 0.0;
    std::map<std::vector<std::int32_t>, double> endpoint;
    std::map<std::uint64_t, double> skeleton;

    std::vector<std::int32_t> pos(D, 0);
    // Depth-first over all (2^d)^n step sequences; weights in the Psi
    // normalization (off-axis weight factored out).
    auto recurse = [&](auto&& self, int t, double weight, std::uint64_t mask, int returns) -> void {
        if (t == n) {
            total += weight;
            returns_weighted += weight * returns;
            endpoint[pos] += weight;
            skeleton[mask] += weight;
            if (std::all_of(pos.begin(), pos.end(), [](std::int32_t x) { return x == 0; })) pinned += weight;
            return;
        }
        for (std::uint32_t mv = 0; mv < moves; ++mv) {
            bool origin = true;
            for (std::size_t c = 0; c < D; ++c) {
                pos[c] += (mv >> c) & 1U ? 1 : -1;
                origin = origin && pos[c] == 0;
            }
            const int next = t + 1;
            if (origin)
                self(self, next, weight * origin_factor[static_cast<std::size_t>(next)], mask | (1ULL << (next - 1)), returns + 1);
            else
                self(self, next, weight, mask, returns);
            for (std::size_t c = 0; c < D; ++c) pos[c] -= (mv >> c) & 1U ? 1 : -1;
        }
    };
    recurse(recurse, 0, 1.0, 0, 0);

    const double log_prob = -static_cast<double>(d) * n * std::log(2.0);
    const double F = cumulative_field(view, params, n).back();
    out.log_psi = std::log(total) + log_prob;
    out.log_z = F + out.log_psi;
    out.log_zhat = pinned > 0.0 ? F + std::log(pinned) + log_prob : kNegInf;
    out.mean_returns = returns_weighted / total;
    for (auto& [z, w] : endpoint) out.endpoint_law[z] = w / total;
    for (auto& [m, w] : skeleton) out.skeleton_law[m] = w / total;
    return out;
}

SuperadditivityResult superadditivity_check(const Disorder& disorder, const ModelParams& params, const WalkKernel& kernel,
                                            int block, int blocks) {
    HETPOL_REQUIRE(block >= 2 && block % 2 == 0, "superadditivity_check: block length must be even and >= 2");
    HETPOL_REQUIRE(blocks >= 1, "superadditivity_check: need at least one block");
    const int total = block * blocks;
    HETPOL_REQUIRE(total <= params.n && total <= disorder.n(), "superadditivity_check: k*N exceeds the horizon");

    ModelParams full = params;
    full.n = total;
    const auto tables = compute_tables(disorder.view(0, total), full, kernel);

    ModelParams piece = params;
    piece.n = block;
    double block_sum = 0.0;
    for (int j = 0; j < blocks; ++j) {
        const auto t = compute_tables(disorder.view(j * block, block), piece, kernel);
        block_sum += t.log_zhat.back();
    }
    SuperadditivityResult out;
    out.slack = tables.log_z.back() - block_sum;
    out.pinned_slack = tables.log_zhat.back() - block_sum;
    out.holds = out.slack >= -1e-9 && out.pinned_slack >= -1e-9;
    return out;
}

double sandwich_log_gap(const ModelParams& params, int k, double c1, double exponent_factor) {
    return std::log1p(c1 * std::pow(static_cast<double>(k), params.d) *
                      std::exp(exponent_factor * params.lambda * (1.0 + std::abs(params.h))));
}

SandwichReport check_sandwich(const PartitionTables& tables, const ModelParams& params, double c1, double exponent_factor,
                              double tolerance) {
    SandwichReport r;
    r.min_lower_slack = std::numeric_limits<double>::infinity();
    r.min_upper_slack = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; 2 * k < tables.log_z.size(); ++k) {
        const double gap = tables.log_z[2 * k] - tables.log_zhat[k];
        r.min_lower_slack = std::min(r.min_lower_slack, gap);
        r.min_upper_slack = std::min(r.min_upper_slack, sandwich_log_gap(params, static_cast<int>(k), c1, exponent_factor) - gap);
    }
    const double tol = tolerance * (1.0 + std::abs(tables.log_z.back()));
    r.holds = r.min_lower_slack >= -tol && r.min_upper_slack >= -tol;
    return r;
}

FreeEnergyEstimate free_energy_estimate(const ModelParams& params, int replicas, std::uint64_t base_seed, int workers) {
    params.validate();
    HETPOL_REQUIRE(replicas >= 1, "free_energy_estimate: replicas must be >= 1");
    const auto kernel = kernel_for_horizon(params.d, params.n);
    const int n = params.n;
    const std::vector<int> horizons{n};

    auto records = parallel_map(static_cast<std::size_t>(replicas), workers, [&](std::size_t r) {
        const std::uint64_t seed = replica_seed(base_seed, r);
        const auto disorder = sample_disorder(params, seed);
        const auto tv = compute_terminal(disorder.view(), params, kernel, horizons);
        ReplicaRecord rec;
        rec.seed = seed;
        rec.log_z_n = tv.log_z[0];
        rec.log_zhat_n = tv.log_zhat[0];
        rec.log_psi_n = tv.log_psi[0];
        rec.phi = rec.log_z_n / n;
        return rec;
    });

    FreeEnergyEstimate est;
    est.params = params;
    est.n = n;
    est.replicas = replicas;
    std::vector<double> excess;
    std::vector<double> pinned;
    est.pinned_n = n - n % 2;
    for (const auto& rec : records) {
        est.per_replica.push_back(rec.phi);
        excess.push_back(rec.log_psi_n / n);
        if (est.pinned_n >= 2) pinned.push_back(rec.log_zhat_n / est.pinned_n);
    }
    const auto s = summarize(est.per_replica);
    est.phi_hat = s.mean;
    est.std_err = s.std_err;
    est.psi_p_hat = est.phi_hat - params.lambda * params.h;
    const auto e = summarize(excess);
    est.excess_hat = e.mean;
    est.excess_std_err = e.std_err;
    if (!pinned.empty()) {
        const auto ps = summarize(pinned);
        est.pinned_hat = ps.mean;
        est.pinned_std_err = ps.std_err;
    } else {
        est.pinned_hat = std::numeric_limits<double>::quiet_NaN();
    }
    est.records = std::move(records);
    return est;
}

std::vector<HorizonSummary> free_energy_profile(const ModelParams& params, std::span<const int> horizons, int replicas,
                                                std::uint64_t base_seed, int workers) {
    HETPOL_REQUIRE(!horizons.empty(), "free_energy_profile: no horizons");
    HETPOL_REQUIRE(replicas >= 1, "free_energy_profile: replicas must be >= 1");
    ModelParams run = params;
    run.n = *std::max_element(horizons.begin(), horizons.end());
    run.validate();
    const auto kernel = kernel_for_horizon(run.d, run.n);
    const std::vector<int> hs(horizons.begin(), horizons.end());

    auto values = parallel_map(static_cast<std::size_t>(replicas), workers, [&](std::size_t r) {
        const auto disorder = sample_disorder(run, replica_seed(base_seed, r));
        return compute_terminal(disorder.view(), run, kernel, hs);
    });

    std::vector<HorizonSummary> out(hs.size());
    for (std::size_t i = 0; i < hs.size(); ++i) {
        auto& s = out[i];
        s.m = hs[i];
        for (const auto& v : values) {
            s.phi.push_back(v.log_z[i] / s.m);
            s.excess.push_back(v.log_psi[i] / s.m);
        }
        const auto ps = summarize(s.phi);
        const auto es = summarize(s.excess);
        s.phi_hat = ps.mean;
        s.phi_std_err = ps.std_err;
        s.excess_hat = es.mean;
        s.excess_std_err = es.std_err;
    }
    return out;
}

}  // namespace hetpol
