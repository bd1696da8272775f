#include "hetpol/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hetpol/model.hpp"
#include "hetpol/partition.hpp"
#include "hetpol/phase.hpp"
#include "hetpol/rng.hpp"
#include "hetpol/stats.hpp"
#include "hetpol/walk_kernel.hpp"

namespace hetpol {

namespace {

double log_distance(double a, double b) {
    if (a == b) return 0.0;
    if (!std::isfinite(a) || !std::isfinite(b)) return std::numeric_limits<double>::infinity();
    return std::abs(std::expm1(a - b));
}

ModelParams random_params(Rng& rng, int d, int n) {
    static constexpr double kP[] = {0.0, 0.5, 1.0};
    ModelParams params;
    params.lambda = 2.0 * rng.uniform();
    params.h = -1.5 + 3.0 * rng.uniform();
    params.p = kP[rng.below(3)];
    params.d = d;
    params.n = n;
    return params;
}

std::string describe(const ModelParams& p, std::uint64_t seed) {
    std::ostringstream os;
    os.precision(17);
    os << "lambda=" << p.lambda << " h=" << p.h << " p=" << p.p << " d=" << p.d << " n=" << p.n << " seed=" << seed;
    return os.str();
}

PropertyResult finish(PropertyResult r, const std::string& where) {
    std::ostringstream os;
    os.precision(3);
    os << "worst " << std::scientific << r.worst;
    if (!r.passed && !where.empty()) os << " at " << where;
    r.detail = os.str();
    return r;
}

}  // namespace

PropertyResult check_brute_force(int instances, std::uint64_t seed, double tol) {
    PropertyResult r{"brute_force_equivalence", true, "", 0.0};
    std::string where;
    for (int i = 0; i < instances; ++i) {
        Rng rng(seed, static_cast<std::uint64_t>(i), StreamTag::monte_carlo);
        const int d = (i % 2 == 0) ? 1 : 2;
        const int n = 1 + static_cast<int>(rng.below(d == 1 ? 12 : 8));
        const auto params = random_params(rng, d, n);
        const std::uint64_t dseed = rng.next();
        const auto disorder = sample_disorder(params, dseed);
        const auto kernel = kernel_for_horizon(d, n);
        const auto tables = compute_tables(disorder, params, kernel);
        const auto brute = brute_force_partition(disorder, params, n);

        double err = log_distance(tables.log_z.back(), brute.log_z);
        if (n % 2 == 0) err = std::max(err, log_distance(tables.log_zhat.back(), brute.log_zhat));
        if (err > r.worst) {
            r.worst = err;
            where = describe(params, dseed);
        }
    }
    r.passed = r.worst <= tol;
    return finish(r, where);
}

PropertyResult check_renewal_reconstruction(int k_max, double tol) {
    PropertyResult r{"renewal_reconstruction", true, "", 0.0};
    std::string where;
    for (int d = 1; d <= 3; ++d) {
        const auto kernel = build_kernel(d, k_max);
        for (int k = 1; k <= k_max; ++k) {
            NeumaierSum s;
            for (int j = 1; j <= k; ++j) s.add(kernel.b[static_cast<std::size_t>(j)] * kernel.p[static_cast<std::size_t>(k - j)]);
            const double pk = kernel.p[static_cast<std::size_t>(k)];
            const double err = std::abs(s.value() - pk) / pk;
            if (err > r.worst) {
                r.worst = err;
                where = "d=" + std::to_string(d) + " k=" + std::to_string(k);
            }
        }
    }
    r.passed = r.worst <= tol;
    return finish(r, where);
}

PropertyResult check_first_returns_1d() {
    PropertyResult r{"first_returns_1d", true, "", 0.0};
    constexpr int kSteps = 6;
    double first[4] = {0, 0, 0, 0};
    for (unsigned path = 0; path < (1U << kSteps); ++path) {
        int pos = 0;
        for (int t = 1; t <= kSteps; ++t) {
            pos += (path >> (t - 1)) & 1U ? 1 : -1;
            if (pos == 0) {
                first[t / 2] += 1.0;
                break;
            }
        }
    }
    const auto kernel = build_kernel(1, 3);
    const double expected[4] = {0.0, 0.5, 0.125, 0.0625};
    for (int k = 1; k <= 3; ++k) {
        const double enumerated = first[k] / std::pow(2.0, kSteps);
        r.worst = std::max({r.worst, std::abs(kernel.b[static_cast<std::size_t>(k)] - expected[k]),
                            std::abs(enumerated - expected[k])});
    }
    r.passed = r.worst <= 1e-15;
    return finish(r, "");
}

PropertyResult check_closed_forms(int instances, int n, std::uint64_t seed, double tol) {
    PropertyResult r{"closed_forms", true, "", 0.0};
    std::string where;
    for (int d = 1; d <= 3; ++d) {
        const auto kernel = kernel_for_horizon(d, n);
        for (int i = 0; i < instances; ++i) {
            Rng rng(seed, static_cast<std::uint64_t>(d * instances + i), StreamTag::monte_carlo);
            auto params = random_params(rng, d, n);
            const std::uint64_t dseed = rng.next();

            params.p = 0.0;
            const auto t0 = compute_tables(sample_disorder(params, dseed), params, kernel);
            for (double v : t0.log_psi) {
                if (std::abs(v) > r.worst) {
                    r.worst = std::abs(v);
                    where = describe(params, dseed);
                }
            }

            params.p = 0.5;
            params.lambda = 0.0;
            const auto t1 = compute_tables(sample_disorder(params, dseed), params, kernel);
            for (double v : t1.log_z) {
                if (std::abs(v) > r.worst) {
                    r.worst = std::abs(v);
                    where = describe(params, dseed);
                }
            }
        }
    }
    r.passed = r.worst <= tol;
    return finish(r, where);
}

PropertyResult check_inequalities(int instances, std::uint64_t seed) {
    PropertyResult r{"exact_inequalities", true, "", 0.0};
    std::string where;
    constexpr int kMaxN = 400;
    WalkKernel kernels[3] = {build_kernel(1, kMaxN / 2), build_kernel(2, kMaxN / 2), build_kernel(3, kMaxN / 2)};
    double c1[3];
    for (int d = 0; d < 3; ++d) c1[d] = ratio_growth_check(kernels[d], kernels[d].n_max).c1;

    // worst = largest violation (negative slack); 0 when all hold.
    auto note = [&](double slack, const ModelParams& p, std::uint64_t s, const char* what) {
        if (-slack > r.worst) {
            r.worst = -slack;
            where = std::string(what) + " " + describe(p, s);
        }
    };
    for (int i = 0; i < instances; ++i) {
        Rng rng(seed, static_cast<std::uint64_t>(i), StreamTag::monte_carlo);
        const int d = 1 + static_cast<int>(rng.below(3));
        const int n = 20 + static_cast<int>(rng.below(kMaxN - 19));
        const auto params = random_params(rng, d, n);
        const std::uint64_t dseed = rng.next();
        const auto disorder = sample_disorder(params, dseed);
        const auto& kernel = kernels[d - 1];
        const auto tables = compute_tables(disorder, params, kernel);
        const double scale = 1e-9 * (1.0 + std::abs(tables.log_z.back()));

        for (std::size_t k = 1; 2 * k < tables.log_z.size(); ++k)
            note(tables.log_z[2 * k] - tables.log_zhat[k] + scale, params, dseed, "Z>=Zhat");
        for (std::size_t m = 0; m < tables.log_psi.size(); ++m)
            note(tables.log_psi[m] - kernel.log_a[m] + scale, params, dseed, "Psi>=a");
        const auto sw = check_sandwich(tables, params, c1[d - 1]);
        note(std::min(sw.min_lower_slack, sw.min_upper_slack) + scale, params, dseed, "sandwich");

        const int block = 2 * (1 + static_cast<int>(rng.below(10)));
        const int blocks = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n / block)));
        const auto sa = superadditivity_check(disorder, params, kernel, block, blocks);
        note(std::min(sa.slack, sa.pinned_slack) + 1e-9, params, dseed, "superadditivity");
    }
    r.passed = r.worst <= 0.0;
    return finish(r, where);
}

PropertyResult check_supermartingale_step() {
    PropertyResult r{"supermartingale_step", true, "", 0.0};
    std::string where;
    r.worst = -std::numeric_limits<double>::infinity();
    for (double lambda : {0.25, 0.5, 1.0, 2.0, 4.0}) {
        for (double dh : {0.0, 0.1, 0.5}) {
            for (double p : {0.25, 0.5, 1.0}) {
                ModelParams params;
                params.lambda = lambda;
                params.h = bound_delocalized(lambda) + dh;
                params.p = p;
                for (int j = 0; j <= 20; ++j) {
                    const double factor = supermartingale_step_check(params, j / 20.0);
                    if (factor - 1.0 > r.worst) {
                        r.worst = factor - 1.0;
                        where = "lambda=" + std::to_string(lambda) + " h=" + std::to_string(params.h);
                    }
                }
            }
        }
    }
    r.passed = r.worst <= 1e-15;
    return finish(r, where);
}

std::vector<PropertyResult> verify_all(std::uint64_t seed) {
    return {check_brute_force(200, seed),
            check_renewal_reconstruction(5000),
            check_first_returns_1d(),
            check_closed_forms(10, 500, seed),
            check_inequalities(200, seed),
            check_supermartingale_step()};
}

}  // namespace hetpol
