#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace fakeres {

// Neumaier compensated accumulator. Summation order still matters for exact
// reproducibility, so callers must iterate in a fixed order.
class CompensatedSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }

    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Uniform double in [0, 1) with 53 random bits, independent of libstdc++'s
// distribution implementations so streams are stable across toolchains.
inline double uniform01(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& g, double lo, double hi) {
    return lo + (hi - lo) * uniform01(g);
}

// Box-Muller without caching the second variate: one deviate consumes two
// generator draws, keeping consumption independent of call history.
inline double normal01(std::mt19937_64& g) {
    double u1 = uniform01(g);
    double u2 = uniform01(g);
    // Guard u1 == 0; log(0) would produce -inf.
    while (u1 == 0.0)
        u1 = uniform01(g);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

// splitmix64 finalizer. Decorrelates per-stream seeds derived from one base
// seed so streams (trial indices, probe batches) do not overlap.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + (stream + 1) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t kDefaultSeed = 123456789ull;

} // namespace fakeres
