#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace riskscope {

// splitmix64 finalizer; also used to key replication streams.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Order-independent derivation of a per-replication seed from a master seed.
// Both arguments pass through the splitmix64 finalizer so nearby indices give
// unrelated streams.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t a = master;
    std::uint64_t b = index ^ 0xd1b54a32d192ed03ULL;
    return splitmix64_next(a) ^ splitmix64_next(b);
}

// xoshiro256++ with splitmix64 seeding.  Deterministic across platforms;
// uniform doubles take the top 53 bits.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : s_) word = splitmix64_next(sm);
        has_cached_gauss_ = false;
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

    // Uniform on [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1]; safe as a log() argument.
    double uniform_pos() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller (platform-independent, no std::
    // distribution involved).  Caches the second deviate.
    double gaussian() {
        if (has_cached_gauss_) {
            has_cached_gauss_ = false;
            return cached_gauss_;
        }
        const double u1 = uniform_pos();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        cached_gauss_ = radius * std::sin(angle);
        has_cached_gauss_ = true;
        return radius * std::cos(angle);
    }

    // Uniform integer in [0, bound) by rejection (unbiased).
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    int sign() { return (next_u64() >> 63) ? 1 : -1; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4];
    double cached_gauss_ = 0.0;
    bool has_cached_gauss_;
};

}  // namespace riskscope
