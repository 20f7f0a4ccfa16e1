#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>

#include "evdeg/error.hpp"

namespace evdeg {

/// Empirical quantile at `level` in (0,1): the order statistic
/// X_(ceil(level * n)), so the result is always an observed value. A small
/// downward fuzz guards against level*n landing just above an integer.
template <class T>
T empirical_quantile(std::span<const T> sorted_sample, double level) {
    const std::size_t n = sorted_sample.size();
    if (n == 0) throw error(errc::domain, "empirical_quantile: empty sample");
    if (!(level > 0.0) || !(level < 1.0))
        throw error(errc::domain, "empirical_quantile: level must lie in (0, 1)");
    const double t = level * static_cast<double>(n);
    auto idx = static_cast<std::size_t>(std::ceil(t - 1e-9 * std::max(1.0, t)));
    idx = std::clamp<std::size_t>(idx, 1, n);
    return sorted_sample[idx - 1];
}

/// Fraction of the sample strictly above u. With discrete data this
/// effective tail fraction can fall below the nominal level; model
/// computations should use it in place of the nominal rho.
template <class T>
double effective_tail_fraction(std::span<const T> sorted_sample, double u) {
    if (sorted_sample.empty()) throw error(errc::domain, "effective_tail_fraction: empty sample");
    auto it = std::upper_bound(sorted_sample.begin(), sorted_sample.end(), u,
                               [](double lhs, const T& rhs) { return lhs < static_cast<double>(rhs); });
    return static_cast<double>(sorted_sample.end() - it) / static_cast<double>(sorted_sample.size());
}

namespace detail {

inline void check_rho(double rho) {
    if (!(rho > 0.0 && rho <= 1.0))
        throw error(errc::domain, "rho must lie in (0, 1], got " + std::to_string(rho));
}

inline void check_theta(double theta) {
    if (!(theta >= 0.0) || theta > 1.0)
        throw error(errc::domain, "theta must lie in [0, 1], got " + std::to_string(theta));
}

}  // namespace detail

/// Scaled mean first hitting time 1/(rho * theta^3) of the threshold at tail
/// probability rho. Infinite at theta = 0 (the polynomial-ergodicity regime);
/// callers render that case symbolically.
inline double mean_fht_scaled(double rho, double theta) {
    detail::check_rho(rho);
    detail::check_theta(theta);
    if (theta == 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / (rho * theta * theta * theta);
}

/// Limit of E(T*/n): 1/theta. Infinite at theta = 0.
inline double mean_fht_fraction(double theta) {
    detail::check_theta(theta);
    if (theta == 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / theta;
}

/// First-hitting-time model with geometric normalized law.
/// normalized: p (1-p)^(j-1) with p = rho * theta, a proper pmf on j >= 1.
/// raw: normalized / theta^2 — NOT a pmf (it sums to 1/theta^2); its mean
/// equals 1/(rho theta^3), matching mean_fht_scaled. Both are exposed so the
/// normalization is never applied silently.
struct FhtPmf {
    double normalized = 0.0;
    double raw = 0.0;
};

inline FhtPmf fht_pmf(std::int64_t j, double rho, double theta) {
    if (j < 1) throw error(errc::domain, "fht_pmf: j must be >= 1");
    detail::check_rho(rho);
    detail::check_theta(theta);
    const double p = rho * theta;
    if (!(p > 0.0) || p > 1.0)
        throw error(errc::domain, "fht_pmf: rho * theta must lie in (0, 1]");
    const double normalized = p * std::pow(1.0 - p, static_cast<double>(j - 1));
    return {normalized, normalized / (theta * theta)};
}

struct FhtModel {
    double rho = 0.0;    // effective tail fraction of the chosen threshold
    double theta = 1.0;

    double p() const { return rho * theta; }
    double mean_scaled() const { return mean_fht_scaled(rho, theta); }
    double mean_fraction() const { return mean_fht_fraction(theta); }
    FhtPmf pmf(std::int64_t j) const { return fht_pmf(j, rho, theta); }
};

/// Maximum-degree distribution approximation P{M_n <= u} ~ F(u)^(n theta).
inline double approx_max_cdf(double F_at_u, std::int64_t n, double theta) {
    if (!(F_at_u >= 0.0) || F_at_u > 1.0)
        throw error(errc::domain, "approx_max_cdf: F(u) must lie in [0, 1]");
    if (n < 1) throw error(errc::domain, "approx_max_cdf: n must be >= 1");
    detail::check_theta(theta);
    return std::pow(F_at_u, static_cast<double>(n) * theta);
}

}  // namespace evdeg
