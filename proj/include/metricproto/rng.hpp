#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace metricproto {

/// SplitMix64 step. Used for seed derivation and counter-based draws so that
/// every stream and every attached tie coordinate is a pure function of
/// (seed, tags...).
inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2)));
}

/// Maps 64 random bits to a double in [0,1).
inline double bits_to_unit(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Deterministic uniform draw keyed by (seed, index); replayable without
/// stream state.
inline double counter_uniform01(std::uint64_t seed, std::uint64_t index) {
    return bits_to_unit(splitmix64(hash_combine(seed, index)));
}

/// Seeded random stream. All draws go through explicitly coded mappings
/// (never std::uniform_*_distribution) so results are identical across
/// standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    double uniform01() { return bits_to_unit(next_u64()); }

    /// Uniform integer in [0, bound) by rejection.
    std::uint64_t uniform_below(std::uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("uniform_below: bound must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return v % bound;
    }

    /// Index draw from a categorical distribution by CDF inversion.
    int categorical(std::span<const double> probs) {
        const double u = uniform01();
        double acc = 0.0;
        for (std::size_t j = 0; j < probs.size(); ++j) {
            acc += probs[j];
            if (u < acc) return static_cast<int>(j);
        }
        return static_cast<int>(probs.size()) - 1;
    }

private:
    std::mt19937_64 gen_;
};

/// Stream derivation: independent sub-streams from a base seed and tags.
inline Rng derive_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t s = seed;
    for (auto t : tags) s = hash_combine(s, t);
    return Rng(splitmix64(s));
}

} // namespace metricproto
