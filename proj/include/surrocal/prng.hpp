#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "surrocal/common.hpp"

namespace surrocal {

// splitmix64; used to hash seeds and to derive independent substreams so
// that work items keep their streams regardless of thread scheduling.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    return splitmix64(splitmix64(a) ^ (0x9E3779B97F4A7C15ull + b));
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix_seed(mix_seed(a, b), c);
}

// mt19937_64 is fully specified by the standard, so streams are identical
// across platforms. Distributions are hand-rolled below for the same reason
// (std::uniform_real_distribution et al. are implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // uniform in [0,1): 53 random bits
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

    // integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        // modulo rejection to avoid bias
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do { x = gen_(); } while (x >= limit);
        return x % n;
    }

    // Box-Muller, no spare caching so the draw count per call is fixed
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    // Poisson by CDF inversion, one uniform per draw
    std::uint32_t poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        const double u = uniform();
        double p = std::exp(-lambda);
        double cum = p;
        std::uint32_t k = 0;
        while (u > cum && k < 10000) {
            ++k;
            p *= lambda / static_cast<double>(k);
            cum += p;
        }
        return k;
    }

    std::uint64_t raw() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

} // namespace surrocal
