#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace areabd {

// SplitMix64 finalizer (Steele/Lea/Flood; Vigna's fixed-increment variant).
// All randomness in the project is derived from this mixer so that every
// draw is a pure function of (seed, channel, counters) and results do not
// depend on evaluation order or thread scheduling.
namespace rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Hash a short tuple of words into one key; each word is absorbed through
/// the full finalizer, so distinct tuples give independent-looking keys.
inline std::uint64_t hash(std::initializer_list<std::uint64_t> words) {
    std::uint64_t h = 0x8C2F9D154E6B3A1Dull;
    for (std::uint64_t w : words) h = mix(h + kGolden + w);
    return h;
}

/// Uniform on [0, 1) from 53 bits.
inline double u01(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

/// Uniform on (0, 1]; safe to take logarithms of.
inline double u01_open(std::uint64_t h) {
    return (static_cast<double>(h >> 11) + 1.0) * 0x1.0p-53;
}

inline double exponential(std::uint64_t h) { return -std::log(u01_open(h)); }

}  // namespace rng

/// Cheap sequential generator for samplers and bootstrap loops.  The stream
/// is the SplitMix64 sequence, fully pinned by the seed (no library
/// distributions, so output is identical on every platform).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += rng::kGolden;
        return rng::mix(state_);
    }

    double u01() { return rng::u01(next()); }
    double u01_open() { return rng::u01_open(next()); }
    double uniform(double a, double b) { return a + (b - a) * u01(); }
    double exponential() { return -std::log(u01_open()); }

    /// Knuth multiplication method; fine for the desk-scale means used here.
    int poisson(double lambda) {
        double limit = std::exp(-lambda);
        double prod = 1.0;
        int n = -1;
        do {
            prod *= u01_open();
            ++n;
        } while (prod > limit);
        return n;
    }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return next() % n; }

private:
    std::uint64_t state_;
};

}  // namespace areabd
