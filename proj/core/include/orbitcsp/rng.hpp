#ifndef ORBITCSP_RNG_HPP
#define ORBITCSP_RNG_HPP

#include <cstdint>

namespace orbitcsp {

/// Deterministic seeded generator (splitmix64); identical across platforms,
/// unlike std::mt19937 distributions.
struct Rng {
    std::uint64_t state;

    explicit Rng(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform-enough value in [0, n); n must be positive.
    std::uint64_t below(std::uint64_t n) { return next() % n; }

    bool coin() { return next() & 1; }
};

}  // namespace orbitcsp

#endif
