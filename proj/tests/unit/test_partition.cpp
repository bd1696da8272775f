#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "hetpol/partition.hpp"
#include "hetpol/phase.hpp"
#include "hetpol/verify.hpp"

using namespace hetpol;

namespace {

ModelParams make(double lambda, double h, double p, int d, int n) {
    ModelParams m;
    m.lambda = lambda;
    m.h = h;
    m.p = p;
    m.d = d;
    m.n = n;
    return m;
}

}  // namespace

TEST_CASE("two-step example with a droplet at time 2") {
    // omega = (+1, +1), droplet at time 2, lambda = 1, h = 0.
    const Disorder dis(0, 1.0, {1, 1}, {-1, 1});
    const auto params = make(1.0, 0.0, 1.0, 1, 2);
    const auto t = compute_tables(dis, params, kernel_for_horizon(1, 2));
    const double e2 = std::exp(2.0);
    CHECK(std::exp(t.log_zhat[1]) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(std::exp(t.log_z[2]) == doctest::Approx((e2 + 1.0) / 2.0).epsilon(1e-14));
    CHECK(std::exp(t.log_psi[2]) == doctest::Approx((e2 + 1.0) / (2.0 * e2)).epsilon(1e-14));
    CHECK(std::exp(t.log_psi_hat[1]) == doctest::Approx(0.5 / e2).epsilon(1e-14));

    const auto brute = brute_force_partition(dis, params, 2);
    CHECK(brute.log_z == doctest::Approx(t.log_z[2]).epsilon(1e-14));
    CHECK(brute.log_zhat == doctest::Approx(t.log_zhat[1]).epsilon(1e-14));
}

TEST_CASE("renewal engine equals path enumeration") {
    const auto r = check_brute_force(200, 11);
    INFO(r.detail);
    CHECK(r.passed);
}

TEST_CASE("reference recursions agree with the fused engine") {
    for (int d = 1; d <= 3; ++d) {
        for (std::uint64_t s = 0; s < 5; ++s) {
            const auto params = make(0.3 + 0.4 * static_cast<double>(s), -0.5 + 0.3 * static_cast<double>(s), 0.5, d, 301);
            const auto dis = sample_disorder(params, 100 + s);
            const auto kernel = kernel_for_horizon(d, params.n);
            const auto t = compute_tables(dis, params, kernel);
            const auto pinned = pinned_log_partition(dis, params, kernel);
            const auto free = free_log_partition(dis, params, kernel, pinned);
            REQUIRE(pinned.size() == t.log_zhat.size());
            for (std::size_t k = 1; k < pinned.size(); ++k) CHECK(pinned[k] == doctest::Approx(t.log_zhat[k]).epsilon(1e-11));
            for (std::size_t m = 0; m < free.size(); ++m) CHECK(free[m] == doctest::Approx(t.log_z[m]).epsilon(1e-11));

            const std::vector<int> hs{1, 100, 255, 301};
            const auto tv = compute_terminal(dis.view(), params, kernel, hs);
            for (std::size_t i = 0; i < hs.size(); ++i) {
                const auto m = static_cast<std::size_t>(hs[i]);
                CHECK(tv.log_z[i] == doctest::Approx(t.log_z[m]).epsilon(1e-12));
                CHECK(tv.log_psi[i] == doctest::Approx(t.log_psi[m]).epsilon(1e-12));
                CHECK(tv.cum_field[i] == doctest::Approx(t.cum_field[m]).epsilon(1e-12));
            }
            const auto ps = psi(t);
            for (std::size_t m = 0; m < ps.size(); ++m) CHECK(ps[m] == doctest::Approx(t.log_psi[m]));
        }
    }
}

TEST_CASE("long horizons stay finite") {
    const auto params = make(3.0, -1.0, 1.0, 1, 8000);
    const auto dis = sample_disorder(params, 1);
    const auto kernel = kernel_for_horizon(1, params.n);
    const auto t = compute_tables(dis, params, kernel);
    for (double v : t.log_z) CHECK(std::isfinite(v));
    CHECK(t.log_psi.back() >= kernel.log_a[8000]);
    CHECK(t.log_psi.back() > 1000.0);
}

TEST_CASE("closed forms at p = 0 and lambda = 0") {
    const auto r = check_closed_forms(5, 400, 3);
    INFO(r.detail);
    CHECK(r.passed);

    const auto est = free_energy_estimate(make(0.7, 0.4, 0.0, 1, 300), 20, 5);
    CHECK(est.excess_hat == doctest::Approx(0.0).epsilon(1e-12));
    for (const auto& rec : est.records) CHECK(std::abs(rec.log_psi_n) < 1e-12);
}

TEST_CASE("exact inequalities on random instances") {
    const auto r = check_inequalities(150, 21);
    INFO(r.detail);
    CHECK(r.passed);
}

TEST_CASE("superadditivity of pinned blocks") {
    const auto params = make(1.0, 0.2, 0.5, 1, 400);
    const auto dis = sample_disorder(params, 8);
    const auto kernel = kernel_for_horizon(1, 400);
    for (int block : {2, 10, 50, 100}) {
        const auto r = superadditivity_check(dis, params, kernel, block, 400 / block);
        CHECK(r.holds);
        CHECK(r.slack >= r.pinned_slack - 1e-12);
    }
    CHECK_THROWS_AS(superadditivity_check(dis, params, kernel, 3, 2), InvalidArgument);
}

TEST_CASE("one-step supermartingale factor") {
    CHECK(check_supermartingale_step().passed);
    // Below the bound the factor can exceed one.
    const auto params = make(1.0, 0.0, 1.0, 1, 10);
    CHECK(supermartingale_step_check(params, 1.0) > 1.0);
    CHECK(supermartingale_step_check(params, 0.0) == 1.0);
    CHECK_THROWS_AS(supermartingale_step_check(params, 1.5), InvalidArgument);
}

TEST_CASE("free energy estimates are independent of the worker count") {
    const auto params = make(1.0, 0.0, 0.5, 1, 500);
    const auto a = free_energy_estimate(params, 16, 77, 1);
    const auto b = free_energy_estimate(params, 16, 77, 4);
    CHECK(a.phi_hat == b.phi_hat);
    CHECK(a.excess_hat == b.excess_hat);
    for (std::size_t r = 0; r < a.records.size(); ++r) CHECK(a.records[r].log_z_n == b.records[r].log_z_n);

    const std::vector<int> hs{250, 500};
    const auto prof = free_energy_profile(params, hs, 16, 77, 3);
    CHECK(prof[1].phi_hat == doctest::Approx(a.phi_hat).epsilon(1e-13));
    CHECK(prof[1].excess_hat == doctest::Approx(a.excess_hat).epsilon(1e-13));
    CHECK(a.pinned_n == 500);
}

TEST_CASE("horizon checks") {
    const auto params = make(1.0, 0.0, 0.5, 1, 100);
    const auto dis = sample_disorder(make(1.0, 0.0, 0.5, 1, 50), 1);
    CHECK_THROWS_AS(compute_tables(dis, params, kernel_for_horizon(1, 100)), InvalidArgument);
    const auto dis2 = sample_disorder(params, 1);
    CHECK_THROWS_AS(compute_tables(dis2, params, kernel_for_horizon(1, 10)), InvalidArgument);
    CHECK_THROWS_AS(compute_tables(dis2, params, kernel_for_horizon(2, 100)), InvalidArgument);
    CHECK_THROWS_AS(brute_force_partition(dis2, make(1, 0, 0.5, 3, 100), 9), InvalidArgument);
}
