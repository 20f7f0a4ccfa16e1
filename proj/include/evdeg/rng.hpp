#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace evdeg {

// SplitMix64 step; used for seed derivation only.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Deterministic random stream. Parallel work derives one stream per task
/// from (master seed, task index), so results do not depend on scheduling.
/// All samplers are inverse-transform based on 53-bit uniforms, so a given
/// seed reproduces the same values on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix(seed, 0)) {}

    static Rng stream(std::uint64_t master_seed, std::uint64_t index) {
        return Rng(mix(master_seed, index));
    }

    std::uint64_t bits() { return engine_(); }

    /// Uniform on [0, 1), 53-bit resolution.
    double unit() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1); safe as a log/pow argument.
    double unit_open() {
        return (static_cast<double>(bits() >> 12) + 0.5) * 0x1.0p-52;
    }

    /// Unbiased integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = bits();
        } while (x >= limit);
        return x % n;
    }

    /// Standard normal scaled by sigma (Box-Muller, spare cached).
    double normal(double sigma) {
        if (has_spare_) {
            has_spare_ = false;
            return spare_ * sigma;
        }
        const double u1 = unit_open();
        const double u2 = unit();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * 3.141592653589793238462643383279502884 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle) * sigma;
    }

    double exponential(double lambda) { return -std::log(unit_open()) / lambda; }

    /// Pareto with tail P{X > x} = (x / x_min)^(-alpha), x >= x_min.
    double pareto(double alpha, double x_min = 1.0) {
        return x_min * std::pow(unit_open(), -1.0 / alpha);
    }

    /// Unit Frechet: F(x) = exp(-1/x), x > 0.
    double frechet() { return -1.0 / std::log(unit_open()); }

private:
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t index) {
        std::uint64_t s = seed ^ (0x94d049bb133111ebull * (index + 1));
        std::uint64_t a = splitmix64(s);
        std::uint64_t b = splitmix64(s);
        return a ^ (b << 1);
    }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace evdeg
