#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "evdeg/error.hpp"
#include "evdeg/rng.hpp"

namespace evdeg {

// I.i.d. sequence generators plus the moving-maximum process. Each exposes
// next(Rng&) and the marginal quantile at a given level, which experiments
// use to place thresholds without Monte-Carlo calibration.

struct UniformGenerator {
    double next(Rng& rng) { return rng.unit(); }
    double quantile(double level) const { return level; }
};

struct ExponentialGenerator {
    double lambda = 1.0;
    double next(Rng& rng) { return rng.exponential(lambda); }
    double quantile(double level) const { return -std::log(1.0 - level) / lambda; }
};

struct ParetoGenerator {
    double alpha = 1.0;
    double x_min = 1.0;
    double next(Rng& rng) { return rng.pareto(alpha, x_min); }
    double quantile(double level) const { return x_min * std::pow(1.0 - level, -1.0 / alpha); }
};

struct FrechetGenerator {
    double next(Rng& rng) { return rng.frechet(); }
    double quantile(double level) const { return -1.0 / std::log(level); }
};

/// Moving maximum over i.i.d. unit Frechet: Y_i = max(Z_i, ..., Z_{i+m-1}).
/// Stationary with marginal F(y) = exp(-m/y) and extremal index 1/m.
class MovingMaxGenerator {
public:
    explicit MovingMaxGenerator(std::size_t m) : m_(m) {
        if (m_ < 1) throw error(errc::usage, "moving maximum: window m must be >= 1");
        window_.resize(m_, 0.0);
    }

    double next(Rng& rng) {
        if (!primed_) {
            for (std::size_t i = 0; i < m_; ++i) window_[i] = rng.frechet();
            primed_ = true;
        } else {
            window_[head_] = rng.frechet();
            head_ = (head_ + 1) % m_;
        }
        double mx = window_[0];
        for (std::size_t i = 1; i < m_; ++i) mx = std::max(mx, window_[i]);
        return mx;
    }

    double quantile(double level) const {
        return -static_cast<double>(m_) / std::log(level);
    }

    std::size_t window() const { return m_; }

private:
    std::size_t m_;
    std::vector<double> window_;
    std::size_t head_ = 0;
    bool primed_ = false;
};

/// Materializes n values from a fresh generator stream.
template <class Generator>
std::vector<double> generate_sequence(Generator gen, std::size_t n, Rng& rng) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = gen.next(rng);
    return out;
}

}  // namespace evdeg
