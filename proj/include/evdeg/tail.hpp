#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evdeg/error.hpp"
#include "evdeg/parallel.hpp"
#include "evdeg/rng.hpp"

namespace evdeg {

namespace detail {

// Compensated accumulator; keeps long sums accurate to a few ulp.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

template <class T>
void require_sorted_ascending(std::span<const T> sample, const char* who) {
    if (!std::is_sorted(sample.begin(), sample.end()))
        throw error(errc::usage, std::string(who) + ": sample must be sorted ascending");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Mean excess function
// ---------------------------------------------------------------------------

struct MeanExcessPoint {
    double u = 0.0;
    double e = 0.0;         // average overshoot above u among exceedances
    std::size_t count = 0;  // number of strict exceedances used
};

/// Sample mean excess e_n(u) = sum (X_i - u) 1{X_i > u} / sum 1{X_i > u}.
template <class T>
MeanExcessPoint sample_mean_excess(std::span<const T> sample, double u) {
    detail::KahanSum excess;
    std::size_t count = 0;
    for (const T& x : sample) {
        const double v = static_cast<double>(x);
        if (v > u) {
            excess.add(v - u);
            ++count;
        }
    }
    if (count == 0)
        throw error(errc::domain, "no sample values exceed u = " + std::to_string(u));
    return {u, excess.sum / static_cast<double>(count), count};
}

struct MeanExcessCurve {
    std::vector<MeanExcessPoint> points;
    std::vector<double> skipped;  // grid values with no exceedances
};

/// Mean excess at every grid threshold via suffix sums over the sorted
/// sample, so dense grids (the default uses every distinct order statistic)
/// stay O((n + |grid|) log n).
template <class T>
MeanExcessCurve mean_excess_curve(std::span<const T> sample, std::span<const double> grid) {
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    std::vector<double> suffix(n + 1, 0.0);
    long double acc = 0.0L;
    for (std::size_t i = n; i > 0; --i) {
        acc += sorted[i - 1];
        suffix[i - 1] = static_cast<double>(acc);
    }

    MeanExcessCurve curve;
    for (double u : grid) {
        const auto first_above =
            std::upper_bound(sorted.begin(), sorted.end(), u) - sorted.begin();
        const std::size_t count = n - static_cast<std::size_t>(first_above);
        if (count == 0) {
            curve.skipped.push_back(u);
            continue;
        }
        const double e =
            (suffix[first_above] - static_cast<double>(count) * u) / static_cast<double>(count);
        curve.points.push_back({u, e, count});
    }
    if (curve.points.empty())
        throw error(errc::domain, "mean excess grid has no thresholds with exceedances");
    return curve;
}

/// Default threshold grid: unique order statistics strictly inside
/// (X_(1), X_(n)), with the top 5 distinct values removed (points based on a
/// handful of extreme observations are unstable).
template <class T>
std::vector<double> default_mean_excess_grid(std::span<const T> sorted_sample) {
    detail::require_sorted_ascending(sorted_sample, "default_mean_excess_grid");
    std::vector<double> uniq;
    for (const T& x : sorted_sample) {
        const double v = static_cast<double>(x);
        if (uniq.empty() || uniq.back() != v) uniq.push_back(v);
    }
    if (uniq.size() < 3) return {};
    uniq.pop_back();  // u must stay below X_(n)
    const std::size_t drop = std::min<std::size_t>(5, uniq.size() - 1);
    uniq.resize(uniq.size() - drop);
    uniq.erase(uniq.begin());  // u must stay above X_(1)
    return uniq;
}

// ---------------------------------------------------------------------------
// Tail index estimators
// ---------------------------------------------------------------------------

enum class TailMethod { hill, ratio, moment };

inline std::string_view tail_method_name(TailMethod m) {
    switch (m) {
        case TailMethod::hill: return "hill";
        case TailMethod::ratio: return "ratio";
        case TailMethod::moment: return "moment";
    }
    return "unknown";
}

/// One tail-index estimate. For hill/moment, `k` is the number of upper
/// order statistics and `threshold` the cut X_(n-k); for ratio, `threshold`
/// is the supplied x_n and `k` the number of strict exceedances. `alpha` is
/// reported only when gamma > 0.
struct TailEstimate {
    TailMethod method = TailMethod::hill;
    std::size_t k = 0;
    double threshold = 0.0;
    double gamma = 0.0;
    std::optional<double> alpha;
    std::size_t n = 0;
};

/// Hill estimator: gamma = (1/k) sum_{i=1..k} [log X_(n-i+1) - log X_(n-k)].
template <class T>
TailEstimate hill(std::span<const T> sorted_sample, std::size_t k) {
    const std::size_t n = sorted_sample.size();
    if (n < 2) throw error(errc::domain, "hill: need at least 2 observations");
    if (k < 1 || k > n - 1)
        throw error(errc::domain, "hill: k must be in [1, n-1], got " + std::to_string(k));
    detail::require_sorted_ascending(sorted_sample, "hill");
    const double cut = static_cast<double>(sorted_sample[n - 1 - k]);
    if (!(cut > 0.0))
        throw error(errc::domain, "hill: order statistic X_(n-k) must be positive");
    const double log_cut = std::log(cut);
    detail::KahanSum s;
    for (std::size_t i = 0; i < k; ++i)
        s.add(std::log(static_cast<double>(sorted_sample[n - 1 - i])) - log_cut);
    const double gamma = s.sum / static_cast<double>(k);
    TailEstimate est{TailMethod::hill, k, cut, gamma, std::nullopt, n};
    if (gamma > 0.0) est.alpha = 1.0 / gamma;
    return est;
}

/// Ratio estimator: Hill with an arbitrary positive threshold x_n in place
/// of the order statistic; averages log(X_i / x_n) over strict exceedances.
template <class T>
TailEstimate ratio(std::span<const T> sample, double x_n) {
    if (!(x_n > 0.0)) throw error(errc::domain, "ratio: threshold must be positive");
    detail::KahanSum s;
    std::size_t count = 0;
    const double log_xn = std::log(x_n);
    for (const T& x : sample) {
        const double v = static_cast<double>(x);
        if (v > x_n) {
            s.add(std::log(v) - log_xn);
            ++count;
        }
    }
    if (count == 0)
        throw error(errc::domain, "ratio: no observations exceed x_n = " + std::to_string(x_n));
    const double gamma = s.sum / static_cast<double>(count);
    TailEstimate est{TailMethod::ratio, count, x_n, gamma, std::nullopt, sample.size()};
    if (gamma > 0.0) est.alpha = 1.0 / gamma;
    return est;
}

/// Moment estimator: gamma_H + 1 - 0.5 / (1 - gamma_H^2 / S_{n,k}) with
/// S_{n,k} the second empirical moment of the log-excesses.
template <class T>
TailEstimate moment(std::span<const T> sorted_sample, std::size_t k) {
    const std::size_t n = sorted_sample.size();
    if (n < 2) throw error(errc::domain, "moment: need at least 2 observations");
    if (k < 1 || k > n - 1)
        throw error(errc::domain, "moment: k must be in [1, n-1], got " + std::to_string(k));
    detail::require_sorted_ascending(sorted_sample, "moment");
    const double cut = static_cast<double>(sorted_sample[n - 1 - k]);
    if (!(cut > 0.0))
        throw error(errc::domain, "moment: order statistic X_(n-k) must be positive");
    const double log_cut = std::log(cut);
    detail::KahanSum s1, s2;
    for (std::size_t i = 0; i < k; ++i) {
        const double d = std::log(static_cast<double>(sorted_sample[n - 1 - i])) - log_cut;
        s1.add(d);
        s2.add(d * d);
    }
    const double gamma_h = s1.sum / static_cast<double>(k);
    const double s = s2.sum / static_cast<double>(k);
    if (s == 0.0) throw error(errc::numeric, "moment: all top-k order statistics are tied");
    const double denom = 1.0 - gamma_h * gamma_h / s;
    if (denom == 0.0)
        throw error(errc::numeric, "moment: singular correction term (gamma_H^2 == S_{n,k})");
    const double gamma = gamma_h + 1.0 - 0.5 / denom;
    TailEstimate est{TailMethod::moment, k, cut, gamma, std::nullopt, n};
    if (gamma > 0.0) est.alpha = 1.0 / gamma;
    return est;
}

// ---------------------------------------------------------------------------
// Power-law density above a cut
// ---------------------------------------------------------------------------

/// Density f(x) = x_min^alpha * alpha * x^(-alpha-1) on [x_min, inf);
/// integrates to one by construction. `c` is the tail-function constant
/// in P{X > x} = c x^(-alpha), i.e. c = x_min^alpha.
struct PowerLawModel {
    double alpha = 0.0;
    double x_min = 0.0;
    double c = 0.0;
};

template <class T>
PowerLawModel fit_power_law(std::span<const T> sorted_sample, std::size_t k) {
    const TailEstimate h = hill(sorted_sample, k);
    if (!h.alpha)
        throw error(errc::domain, "fit_power_law: Hill gamma is not positive at k = " +
                                      std::to_string(k));
    const double alpha = *h.alpha;
    const double x_min = h.threshold;
    return {alpha, x_min, std::pow(x_min, alpha)};
}

inline double power_law_density(const PowerLawModel& model, double x) {
    if (x < model.x_min)
        throw error(errc::domain, "power_law_density: x below the model cut x_min");
    return model.c * model.alpha * std::pow(x, -model.alpha - 1.0);
}

// ---------------------------------------------------------------------------
// Double-bootstrap choice of k
// ---------------------------------------------------------------------------

struct BootstrapOptions {
    std::size_t B = 500;   // resamples per subsample size
    std::size_t n1 = 0;    // first resample size; 0 -> floor(n^0.9)
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

struct BootstrapResult {
    std::size_t k_star = 0;  // selected number of upper order statistics
    std::size_t k1 = 0;      // argmin at resample size n1
    std::size_t k2 = 0;      // argmin at resample size n2
    std::size_t n1 = 0;
    std::size_t n2 = 0;
};

namespace detail {

// Accumulates the bootstrap criterion q(k) = (M_{n,k} - 2 gamma_H(k)^2)^2
// for every feasible k of one resample. `logs_desc` holds log X_(n), ...
// descending over the positive part of the resample.
inline void accumulate_criterion(const std::vector<double>& logs_desc, std::vector<double>& q,
                                 std::vector<std::uint32_t>& evaluations) {
    const std::size_t p = logs_desc.size();
    if (p < 2) return;
    double c1 = 0.0, c2 = 0.0;
    for (std::size_t k = 1; k < p; ++k) {
        c1 += logs_desc[k - 1];
        c2 += logs_desc[k - 1] * logs_desc[k - 1];
        const double cut = logs_desc[k];
        const double kd = static_cast<double>(k);
        const double g = c1 / kd - cut;
        const double m = c2 / kd - 2.0 * cut * c1 / kd + cut * cut;
        const double dev = m - 2.0 * g * g;
        q[k - 1] += dev * dev;
        ++evaluations[k - 1];
    }
}

template <class T>
std::size_t bootstrap_argmin(std::span<const T> sample, std::size_t nj, std::size_t B,
                             std::uint64_t seed, std::uint64_t stream_offset, unsigned threads) {
    const std::size_t n = sample.size();
    constexpr std::size_t kBlock = 32;  // resamples per accumulation block
    const std::size_t blocks = (B + kBlock - 1) / kBlock;
    // Per-block partial sums merged in block order afterwards, so the result
    // does not depend on the number of worker threads.
    std::vector<std::vector<double>> q_block(blocks);
    std::vector<std::vector<std::uint32_t>> eval_block(blocks);

    parallel_for(blocks, threads, [&](std::size_t blk) {
        auto& q = q_block[blk];
        auto& evals = eval_block[blk];
        q.assign(nj - 1, 0.0);
        evals.assign(nj - 1, 0);
        std::vector<double> logs;
        logs.reserve(nj);
        const std::size_t lo = blk * kBlock;
        const std::size_t hi = std::min(B, lo + kBlock);
        for (std::size_t b = lo; b < hi; ++b) {
            Rng rng = Rng::stream(seed, stream_offset + b);
            logs.clear();
            for (std::size_t i = 0; i < nj; ++i) {
                const double v = static_cast<double>(sample[rng.below(n)]);
                if (v > 0.0) logs.push_back(v);
            }
            std::sort(logs.begin(), logs.end(), std::greater<double>());
            for (double& v : logs) v = std::log(v);
            accumulate_criterion(logs, q, evals);
        }
    });

    std::vector<double> q(nj - 1, 0.0);
    std::vector<std::uint64_t> evals(nj - 1, 0);
    for (std::size_t blk = 0; blk < blocks; ++blk) {
        if (q_block[blk].empty()) continue;
        for (std::size_t k = 0; k + 1 < nj; ++k) {
            q[k] += q_block[blk][k];
            evals[k] += eval_block[blk][k];
        }
    }

    // Only trust k evaluated in a majority of resamples (ties/zeros shrink
    // the feasible range of individual resamples).
    std::size_t best_k = 0;
    double best = 0.0;
    for (std::size_t k = 1; k < nj; ++k) {
        if (evals[k - 1] * 2 < B + 1) continue;
        const double value = q[k - 1] / static_cast<double>(evals[k - 1]);
        if (best_k == 0 || value < best) {
            best_k = k;
            best = value;
        }
    }
    if (best_k == 0)
        throw error(errc::numeric, "double bootstrap: no feasible k at resample size " +
                                       std::to_string(nj));
    return best_k;
}

}  // namespace detail

/// Double-bootstrap selection of the number of upper order statistics k.
/// Minimizes the bootstrap mean of (M_{n_j,k} - 2 gamma_H^2)^2 at two
/// resample sizes n1 and n2 = ceil(n1^2/n) and combines the argmins:
///   k* = (k1^2/k2) * ((ln k1)^2 / (2 ln n1 - ln k1)^2)^((ln n1 - ln k1)/ln n1),
/// clipped to [1, n-1]. Deterministic for a fixed seed, independent of the
/// thread count.
template <class T>
BootstrapResult double_bootstrap_k(std::span<const T> sample, const BootstrapOptions& opts) {
    const std::size_t n = sample.size();
    if (opts.B < 1) throw error(errc::usage, "double bootstrap: B must be >= 1");
    std::size_t positives = 0;
    for (const T& x : sample)
        if (static_cast<double>(x) > 0.0) ++positives;
    if (positives < 100)
        throw error(errc::domain,
                    "double bootstrap: fewer than 100 positive values; choose k manually");

    BootstrapResult res;
    res.n1 = opts.n1 != 0 ? opts.n1
                          : static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(n), 0.9)));
    if (res.n1 <= 2 || res.n1 >= n)
        throw error(errc::usage, "double bootstrap: need 2 < n1 < n, got n1 = " +
                                     std::to_string(res.n1));
    res.n2 = (res.n1 * res.n1 + n - 1) / n;
    if (res.n2 < 3)
        throw error(errc::usage, "double bootstrap: derived n2 = " + std::to_string(res.n2) +
                                     " is too small; increase n1");

    res.k1 = detail::bootstrap_argmin(sample, res.n1, opts.B, opts.seed, 0, opts.threads);
    res.k2 = detail::bootstrap_argmin(sample, res.n2, opts.B, opts.seed, opts.B, opts.threads);

    const double ln1 = std::log(static_cast<double>(res.n1));
    const double lk1 = std::log(static_cast<double>(res.k1));
    double k_star;
    if (res.k1 == 1) {
        k_star = 1.0;
    } else {
        const double base = (lk1 * lk1) / ((2.0 * ln1 - lk1) * (2.0 * ln1 - lk1));
        const double expo = (ln1 - lk1) / ln1;
        k_star = (static_cast<double>(res.k1) * static_cast<double>(res.k1) /
                  static_cast<double>(res.k2)) *
                 std::pow(base, expo);
    }
    const double clipped = std::clamp(std::round(k_star), 1.0, static_cast<double>(n - 1));
    res.k_star = static_cast<std::size_t>(clipped);
    return res;
}

}  // namespace evdeg
