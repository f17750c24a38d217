#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace lcrbm {

/// Seeded random stream with hand-rolled distributions.
///
/// Only the mt19937_64 engine itself comes from the standard library; the
/// distributions are implemented here because std::*_distribution output is
/// implementation-defined and the training contract requires bit-identical
/// runs for a fixed seed.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    /// splitmix64 finalizer; used to derive independent stream seeds.
    static uint64_t hash(uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    static uint64_t mix(uint64_t a, uint64_t b) { return hash(hash(a) + b); }
    static uint64_t mix(uint64_t a, uint64_t b, uint64_t c) { return hash(mix(a, b) + c); }

    uint64_t next() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n), n >= 1.
    uint64_t uniform_int(uint64_t n) {
        // Rejection sampling keeps the draw unbiased.
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller; second value of each pair is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    /// Sample an index from an (already normalized) probability vector.
    int categorical(std::span<const double> probs) {
        const double u = uniform();
        double acc = 0.0;
        for (size_t i = 0; i < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(probs.size()) - 1; // floating point leak
    }

    /// In-place Fisher-Yates; std::shuffle is implementation-defined.
    template <typename T>
    void shuffle(std::span<T> values) {
        for (size_t i = values.size(); i > 1; --i) {
            const size_t j = uniform_int(i);
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace lcrbm
