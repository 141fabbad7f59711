#pragma once

#include <cstdint>
#include <span>
#include <string_view>

// Deterministic random streams. std::mt19937_64 is portable but the standard
// distributions are not, so sampling is done by hand on top of a fixed-width
// generator. Streams are derived from (seed, label) pairs so the environment
// and each learner draw from independent substreams of the episode seed.

namespace persuade {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace detail

// xoshiro256** seeded through splitmix64.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = detail::splitmix64(sm);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    std::size_t uniform_index(std::size_t n) {
        return n == 0 ? 0 : std::size_t(uniform01() * double(n)) % n;
    }

    // Samples an index proportionally to nonnegative weights. Weights need not
    // be normalized; a draw past the accumulated mass (fp slack) returns the
    // last positive-weight index.
    std::size_t categorical(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double r = uniform01() * total;
        std::size_t last_positive = 0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] > 0.0) last_positive = i;
            r -= weights[i];
            if (r < 0.0 && weights[i] > 0.0) return i;
        }
        return last_positive;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t state_[4];
};

// Child-stream seed for a fixed label ("env", "learner", ...).
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
    std::uint64_t mix = seed ^ detail::fnv1a64(label);
    return detail::splitmix64(mix);
}

inline Rng derive_stream(std::uint64_t seed, std::string_view label) {
    return Rng(derive_seed(seed, label));
}

}  // namespace persuade
