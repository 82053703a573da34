#pragma once

#include <cstdint>

namespace forestz {

// Splittable counter-based generator; used instead of <random> engines and
// distributions so that seeded runs are byte-identical across platforms.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double uniform() { return (next() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, bound) by rejection.
    std::uint64_t uniform_below(std::uint64_t bound) {
        std::uint64_t threshold = (0 - bound) % bound;
        while (true) {
            std::uint64_t r = next();
            if (r >= threshold) return r % bound;
        }
    }

  private:
    std::uint64_t state_;
};

// Derived stream seed for an independent work unit.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 mix(index + 0x632BE59BD9B4E019ULL);
    return seed ^ mix.next();
}

}  // namespace forestz
