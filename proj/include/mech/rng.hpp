#pragma once

#include <cstdint>

namespace mech {

// Deterministic 64-bit generator (xoshiro256**) seeded through splitmix64.
// We avoid std::uniform_real_distribution because its output is not pinned
// by the standard; experiment reproducibility requires bit-stable streams.
class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t x = seed;
        for (auto& word : s_) {
            x += 0x9e3779b97f4a7c15ull;
            uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
            word = z ^ (z >> 31);
        }
    }

    uint64_t next() {
        const uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on [0,1) with 53 bits of precision.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Integer in [0, n).
    uint64_t below(uint64_t n) { return n ? next() % n : 0; }

    // Derive an independent stream (e.g. one per worker shard).
    static Rng stream(uint64_t seed, uint64_t shard) {
        return Rng(seed * 0x9e3779b97f4a7c15ull + shard * 0xd1b54a32d192ed03ull + 1);
    }

private:
    static uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }
    uint64_t s_[4];
};

}  // namespace mech
