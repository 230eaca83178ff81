#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace relsem {

// Self-contained splitmix64/xoshiro-style generator. The standard <random>
// distributions are implementation-defined, which would break the contract
// that a fixed seed reproduces bitwise-identical parameter initializations;
// everything here is pinned down to arithmetic on uint64.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

    uint64_t next_u64() {
        // splitmix64
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 bits of precision.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Uniform integer in [0, n). n must be > 0.
    uint64_t next_below(uint64_t n) { return next_u64() % n; }

    // Standard normal via Box-Muller (one value per call; spare discarded so
    // the stream stays a pure function of the call count).
    double normal() {
        double u1 = next_double();
        double u2 = next_double();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    // Normal(0, std) resampled until |z| <= 2*std, the usual embedding init.
    double truncated_normal(double stddev) {
        for (;;) {
            double z = normal() * stddev;
            if (std::abs(z) <= 2.0 * stddev) return z;
        }
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Derive an independent stream, e.g. per epoch: Rng(derive(seed, epoch)).
    static uint64_t derive(uint64_t seed, uint64_t salt) {
        Rng r(seed ^ (0x632be59bd9b4e019ULL + salt * 0x100000001b3ULL));
        return r.next_u64();
    }

private:
    uint64_t state_;
};

}  // namespace relsem
