#pragma once

#include <cstdint>
#include <random>

namespace pcr {

/// Seeded random stream. Child streams are derived deterministically from the
/// parent seed so that parallel batches never share state.
class Rng {
public:
    using Engine = std::mt19937_64;

    explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(mix(seed)) {}

    std::uint64_t seed() const { return seed_; }

    /// Independent stream for sub-task `index`.
    Rng child(std::uint64_t index) const { return Rng(mix(seed_ ^ mix(index + 0x9e3779b97f4a7c15ULL))); }

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

    std::size_t uniform_index(std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
    }

    bool bernoulli(double p) { return uniform() < p; }

    double gamma(double shape) { return std::gamma_distribution<double>(shape, 1.0)(engine_); }

    /// Beta draw by the gamma-ratio method.
    double beta(double a, double b) {
        for (;;) {
            const double x = gamma(a);
            const double y = gamma(b);
            if (x + y > 0.0) {
                return x / (x + y);
            }
        }
    }

    Engine& engine() { return engine_; }

private:
    // splitmix64 finalizer
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    Engine engine_;
};

}  // namespace pcr
