#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace bodygen {

// Seed mixer (splitmix64). Also used to derive independent stream seeds.
inline std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) noexcept {
    return mix64(seed ^ (value + 0x9e3779b97f4a7c15ull + (seed << 6) + (seed >> 2)));
}

inline std::uint64_t hash_tag(std::uint64_t seed, std::string_view tag) noexcept {
    std::uint64_t h = seed;
    for (char c : tag) h = hash_combine(h, static_cast<std::uint64_t>(static_cast<unsigned char>(c)));
    return h;
}

// xoshiro256** generator. The standard library distributions are not
// reproducible across implementations, so all sampling goes through the
// explicit helpers below. Every output is a pure function of the seed.
class Rng {
  public:
    explicit Rng(std::uint64_t seed = 0) {
        std::uint64_t s = seed;
        for (auto& word : state_) word = mix64(s = mix64(s) + seed);
    }

    // Independent stream for (seed, index), e.g. one per sequence.
    static Rng stream(std::uint64_t master_seed, std::uint64_t index) {
        return Rng(hash_combine(mix64(master_seed), index));
    }

    std::uint64_t next_u64() noexcept {
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

    // Uniform double in [0, 1).
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). n must be > 0.
    std::uint64_t uniform_index(std::uint64_t n) noexcept {
        // Lemire's unbiased bounded sampling.
        std::uint64_t x = next_u64();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (lo < threshold) {
                x = next_u64();
                m = static_cast<__uint128_t>(x) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    int uniform_int(int lo, int hi_inclusive) noexcept {
        return lo + static_cast<int>(uniform_index(static_cast<std::uint64_t>(hi_inclusive - lo + 1)));
    }

    bool bernoulli(double p) noexcept { return uniform() < p; }

    // Standard normal via Box-Muller (no cached state).
    double normal() noexcept {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

  private:
    static std::uint64_t rotl(std::uint64_t v, int k) noexcept { return (v << k) | (v >> (64 - k)); }

    std::array<std::uint64_t, 4> state_{};
};

}  // namespace bodygen
