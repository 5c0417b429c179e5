#pragma once

#include <cstdint>
#include <random>

namespace qbme {

/// Seeded PRNG with platform-independent output: the engine is the standard
/// mt19937_64 (bit-exact by specification) and all variate generation below
/// avoids std::*_distribution, whose results vary between standard libraries.
class Rng {
  public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t raw() { return eng_(); }

    /// Uniform on [0,1).
    double unit() { return double(eng_() >> 11) * 0x1.0p-53; }

    /// Uniform on (0,1]; safe as argument of log().
    double unit_open0() { return (double(eng_() >> 11) + 1.0) * 0x1.0p-53; }

    /// Uniform integer in [0, n); unbiased by rejection.
    uint64_t below(uint64_t n) {
        uint64_t threshold = (0 - n) % n;
        for (;;) {
            uint64_t r = eng_();
            if (r >= threshold) return r % n;
        }
    }

    /// Derive an independent stream for trajectory `index` (splitmix64 mix).
    static uint64_t stream_seed(uint64_t base, uint64_t index) {
        uint64_t z = base + 0x9e3779b97f4a7c15ull * (index + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

  private:
    std::mt19937_64 eng_;
};

}  // namespace qbme
