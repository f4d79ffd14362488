#pragma once

#include <cmath>
#include <cstdint>

namespace fillprob {

// splitmix64, used to expand a (seed, stream) pair into generator state.
// Distinct streams derived from the same seed are statistically independent,
// which is what makes per-path parallel simulation reproducible.
inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256++ seeded via splitmix64 from a 64-bit seed and a 64-bit stream
// id. The seeding contract (same seed + stream -> same draws) is the only
// property tests rely on.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
        std::uint64_t x = seed ^ (0x8c6e1c2f1d8b4a6bULL * (stream + 1));
        s_[0] = splitmix64(x);
        s_[1] = splitmix64(x);
        s_[2] = splitmix64(x);
        s_[3] = splitmix64(x);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in (0, 1]: never returns 0 so -log(u) is always finite.
    double uniform_pos() {
        const std::uint64_t bits = next_u64() >> 11;  // 53 random bits
        return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
    }

    // Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

private:
    static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }
    std::uint64_t s_[4];
};

}  // namespace fillprob
