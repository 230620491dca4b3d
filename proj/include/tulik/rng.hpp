#pragma once

#include <cstdint>
#include <random>

namespace tulik {

// Deterministic random source. Distribution transforms are written out
// explicitly (std::uniform_real_distribution is not bit-specified across
// standard libraries), so a seed pins the byte stream of every artifact.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform on [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    // Index in [0, n) proportional to weights[0..n).
    int categorical(const double* weights, int n, double total) {
        const double threshold = uniform() * total;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            acc += weights[i];
            if (threshold < acc) return i;
        }
        return n - 1;
    }

    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

// Stream seed for substream `index` of `master`, SplitMix64-style, so
// per-trajectory generation is order-independent and parallel-safe.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace tulik
