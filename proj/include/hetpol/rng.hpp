#pragma once

#include <cstdint>
#include <random>

namespace hetpol {

/// Purpose tags for stream derivation. A stream is keyed by
/// (seed, index, tag), so results never depend on execution order.
enum class StreamTag : std::uint64_t {
    omega = 0x6f6d656761ULL,
    eta = 0x657461ULL,
    replica = 0x7265706cULL,
    skeleton = 0x736b656cULL,
    monte_carlo = 0x6d63ULL,
    job = 0x6a6f62ULL,
};

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index, StreamTag tag) noexcept {
    return mix64(mix64(mix64(seed) ^ index) ^ static_cast<std::uint64_t>(tag));
}

/// Seed of disorder replica `r` under a run's base seed.
constexpr std::uint64_t replica_seed(std::uint64_t base_seed, std::uint64_t r) noexcept {
    return derive_seed(base_seed, r, StreamTag::replica);
}

/// Random stream over std::mt19937_64. Conversions to doubles, bounded
/// integers and signs are done here (not via <random> distributions) so
/// that sequences are identical across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t key) : engine_(key) {}
    Rng(std::uint64_t seed, std::uint64_t index, StreamTag tag) : engine_(derive_seed(seed, index, tag)) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer on [0, bound), bound > 0 (Lemire's method).
    std::uint64_t below(std::uint64_t bound) {
        unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                m = static_cast<unsigned __int128>(next()) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// One fair random bit, buffered 64 at a time.
    bool bit() {
        if (bits_left_ == 0) {
            bits_ = next();
            bits_left_ = 64;
        }
        const bool b = bits_ & 1U;
        bits_ >>= 1;
        --bits_left_;
        return b;
    }

    int sign() { return bit() ? 1 : -1; }

private:
    std::mt19937_64 engine_;
    std::uint64_t bits_ = 0;
    int bits_left_ = 0;
};

}  // namespace hetpol
