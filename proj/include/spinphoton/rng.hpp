#pragma once

// Counter-based random generator. Each (seed, stream) pair yields an
// independent sequence value_n = mix(base + n * PHI); workers can index
// samples directly, so results do not depend on the worker count.

#include <cstdint>
#include <cmath>

namespace spinphoton {

class CounterRng {
public:
    static constexpr const char* kName = "splitmix64-counter";

    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : base_(mix(mix(seed) ^ mix(stream ^ 0x5851f42d4c957f2dULL))) {}

    std::uint64_t next_u64() { return mix(base_ + (n_++) * kPhi); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // standard normal via Box-Muller (cosine branch only, deterministic)
    double normal() {
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

private:
    static constexpr std::uint64_t kPhi = 0x9e3779b97f4a7c15ULL;

    static std::uint64_t mix(std::uint64_t z) {
        z += kPhi;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t base_;
    std::uint64_t n_ = 0;
};

}  // namespace spinphoton
