#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

namespace polymerflow {

// Counter-based random streams. Every draw is a pure function of
// (key, counter), so results do not depend on evaluation order or on how
// work is split across threads. The generator is SplitMix64 evaluated on a
// Weyl sequence offset by the stream key.
namespace rng {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

// Stream domains keep unrelated consumers of the same master seed apart.
enum Domain : std::uint64_t {
    kPathInit = 1,
    kPathInnovation = 2,
    kPathBridge = 3,
    kPinnedField = 4,
    kChainInit = 5,
    kChainProposal = 6,
    kChainAccept = 7,
    kOuExperiment = 8,
};

struct Stream {
    std::uint64_t key = 0;

    static Stream derive(std::uint64_t seed, std::uint64_t domain, std::uint64_t index = 0) {
        std::uint64_t k = mix64(seed + kGolden);
        k = mix64(k + kGolden * (domain + 1));
        k = mix64(k + kGolden * (index + 1));
        return Stream{k};
    }

    Stream sub(std::uint64_t index) const {
        return Stream{mix64(key + kGolden * (index + 1))};
    }

    std::uint64_t bits(std::uint64_t counter) const {
        return mix64(key + kGolden * counter);
    }

    // Uniform on [0,1), 53-bit resolution.
    double uniform(std::uint64_t counter) const {
        return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
    }

    // Standard normal pair by Box-Muller; consumes counters (2c, 2c+1).
    std::pair<double, double> normal_pair(std::uint64_t counter) const {
        const double u1 = 1.0 - uniform(2 * counter);      // (0,1], keeps log finite
        const double u2 = uniform(2 * counter + 1);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double th = 6.283185307179586476925286766559 * u2;
        return {r * std::cos(th), r * std::sin(th)};
    }

    double normal(std::uint64_t counter) const {
        return normal_pair(counter).first;
    }
};

}  // namespace rng
}  // namespace polymerflow
