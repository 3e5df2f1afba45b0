#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace csmooth {

/// Deterministic random source. mt19937_64 is fully specified by the
/// standard; the uniform/normal mappings below avoid the
/// implementation-defined std::*_distribution classes so that seeded runs
/// reproduce bit-for-bit across compilers.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Uniform in [a, b).
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Standard normal via Box-Muller; consumes exactly two words.
    double normal() {
        const double u1 = static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
        const double u2 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

private:
    std::mt19937_64 gen_;
};

/// splitmix64 step; used to derive independent per-shard seeds.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace csmooth
