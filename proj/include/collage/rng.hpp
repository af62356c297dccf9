#pragma once
#include <cstdint>

namespace collage {

// Deterministic, platform-independent PRNG: xoshiro256++ seeded through
// splitmix64. Chosen over the platform default so that datasets and sampled
// censuses reproduce bit-for-bit across compilers and architectures.
class Rng {
public:
    explicit Rng(uint64_t seed) { reseed(seed); }

    void reseed(uint64_t seed) {
        uint64_t x = seed;
        for (auto& w : state_) w = splitmix64(x);
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1), 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1]; used where log(0) must be impossible.
    double uniform01_open_zero() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller, no cached spare: every call consumes
    // exactly two 64-bit draws, which keeps streams easy to reason about.
    double gaussian();

    // Uniform integer in [0, bound) by rejection (unbiased).
    uint64_t next_below(uint64_t bound);

    static uint64_t splitmix64(uint64_t& x) {
        x += 0x9E3779B97F4A7C15ULL;
        uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    static uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }
    uint64_t state_[4]{};
};

// Derives an independent stream from (seed, tag) so that e.g. data generation
// and parameter init never share draws.
inline Rng derive_rng(uint64_t seed, uint64_t tag) {
    uint64_t x = seed ^ (0xA0761D6478BD642FULL * (tag + 1));
    return Rng(Rng::splitmix64(x));
}

}  // namespace collage
