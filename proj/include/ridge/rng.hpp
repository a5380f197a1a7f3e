#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

// Counter-based random number generation.  Draw i of a stream is a pure
// function of (seed, i), so samples are reproducible bit-for-bit regardless
// of evaluation order and parallel consumers can share a stream by index
// without coordination.  The mixer is SplitMix64 (Steele, Lea, Flood 2014).

namespace ridge {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    // Uniform on the open interval (0, 1); draw `i` of this stream.
    double uniform(std::uint64_t i) const {
        const std::uint64_t h = splitmix64(seed_ ^ splitmix64(i + 1));
        // 53 high bits, shifted into (0,1) so log() downstream is safe.
        return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
    }

    // Pair of independent standard normals via Box-Muller, consuming
    // counters 2i and 2i+1.
    void normal_pair(std::uint64_t i, double& z1, double& z2) const {
        const double u1 = uniform(2 * i);
        const double u2 = uniform(2 * i + 1);
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * std::numbers::pi * u2;
        z1 = rad * std::cos(ang);
        z2 = rad * std::sin(ang);
    }

    double normal(std::uint64_t i) const {
        double z1, z2;
        normal_pair(i, z1, z2);
        return z1;
    }

    // Derive an independent stream (for nested/parallel consumers).
    CounterRng substream(std::uint64_t tag) const {
        return CounterRng(splitmix64(seed_ ^ (0xd6e8feb86659fd93ull + tag)));
    }

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
};

} // namespace ridge
