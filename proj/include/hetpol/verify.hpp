#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hetpol {

/// Outcome of one property check.
struct PropertyResult {
    std::string name;
    bool passed = false;
    std::string detail;
    double worst = 0.0;  ///< worst observed value of the checked quantity
};

/// Renewal engine against exhaustive enumeration on random small
/// instances: d = 1 (n <= 12) and d = 2 (n <= 8), lambda in [0, 2],
/// h in [-1.5, 1.5], p in {0, 0.5, 1}. Worst relative error of Z and Zhat.
PropertyResult check_brute_force(int instances, std::uint64_t seed, double tol = 1e-10);

/// p_k = sum_{j=1..k} b_j p_{k-j} for k <= k_max, d = 1, 2, 3.
PropertyResult check_renewal_reconstruction(int k_max, double tol = 1e-12);

/// First-return values of the one-dimensional walk: b_1 = 1/2,
/// b_2 = 1/8, b_3 = 1/16 against direct path enumeration.
PropertyResult check_first_returns_1d();

/// p = 0 gives Psi == 1 per replica; lambda = 0 gives log Z == 0.
PropertyResult check_closed_forms(int instances, int n, std::uint64_t seed, double tol = 1e-12);

/// On random instances: Z >= Zhat, Psi^m >= a_m, the last-return sandwich
/// with the tabulated c1, and block superadditivity slack >= -1e-9.
PropertyResult check_inequalities(int instances, std::uint64_t seed);

/// One-step factor <= 1 for every origin probability when
/// h >= bound_delocalized(lambda) (lambda in a fixed grid).
PropertyResult check_supermartingale_step();

/// Every property at desk-scale sizes.
std::vector<PropertyResult> verify_all(std::uint64_t seed);

}  // namespace hetpol
