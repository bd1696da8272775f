#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hetpol/errors.hpp"

namespace hetpol {

/// Coupling constants and horizon of one heteropolymer run.
struct ModelParams {
    double lambda = 1.0;  ///< interaction strength (inverse temperature), >= 0
    double h = 0.0;       ///< asymmetry of the monomer/medium interaction
    double p = 0.5;       ///< droplet density on the first axis, in [0, 1]
    int d = 1;            ///< transverse dimension
    int n = 100;          ///< polymer length

    /// Throws InvalidArgument unless lambda >= 0, p in [0,1], d >= 1, n >= 1.
    void validate() const;
};

/// Non-owning view of a disorder window. Element i-1 holds time i.
struct DisorderView {
    std::span<const std::int8_t> omega;
    std::span<const std::int8_t> eta;

    int length() const noexcept { return static_cast<int>(omega.size()); }
    int omega_at(int i) const noexcept { return omega[static_cast<std::size_t>(i - 1)]; }
    bool droplet_at(int i) const noexcept { return eta[static_cast<std::size_t>(i - 1)] > 0; }
};

/// One quenched realization of monomer signs and droplet indicators,
/// for times 1..n.
class Disorder {
public:
    Disorder() = default;
    Disorder(std::uint64_t seed, double p, std::vector<std::int8_t> omega, std::vector<std::int8_t> eta);

    std::uint64_t seed() const noexcept { return seed_; }
    double p() const noexcept { return p_; }
    int n() const noexcept { return static_cast<int>(omega_.size()); }

    const std::vector<std::int8_t>& omega() const noexcept { return omega_; }
    const std::vector<std::int8_t>& eta() const noexcept { return eta_; }

    int omega_at(int i) const;
    int eta_at(int i) const;

    /// Window of `length` times starting after time `offset`
    /// (so view time 1 is disorder time offset+1).
    DisorderView view(int offset = 0) const;
    DisorderView view(int offset, int length) const;

    std::string to_json() const;
    static Disorder from_json(const std::string& text);

    friend bool operator==(const Disorder&, const Disorder&) = default;

private:
    std::uint64_t seed_ = 0;
    double p_ = 0.0;
    std::vector<std::int8_t> omega_;
    std::vector<std::int8_t> eta_;
};

/// Draws omega_i uniform on {-1,+1} and eta_i = +1 with probability p,
/// from independent streams keyed by `seed`. The first m entries do not
/// depend on params.n, so longer realizations extend shorter ones.
Disorder sample_disorder(const ModelParams& params, std::uint64_t seed);

/// Sign field at time i: -1 iff the walk sits on the axis and a droplet
/// is present there, +1 otherwise.
int delta(const Disorder& disorder, int i, bool at_origin);

}  // namespace hetpol
