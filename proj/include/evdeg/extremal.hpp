#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "evdeg/error.hpp"
#include "evdeg/hitting.hpp"

namespace evdeg {

/// Exceedance bookkeeping for a threshold u: 1-based epochs S_i with
/// X_{S_i} > u (strict) and interexceedance times T_i = S_{i+1} - S_i.
struct ExceedanceRecord {
    double u = 0.0;
    std::vector<std::size_t> epochs;     // strictly increasing, in [1, n]
    std::vector<std::int64_t> gaps;      // size N-1, each >= 1
    std::size_t count() const { return epochs.size(); }
};

template <class T>
ExceedanceRecord exceedances(std::span<const T> sequence, double u) {
    if (sequence.empty()) throw error(errc::domain, "exceedances: empty sequence");
    ExceedanceRecord rec;
    rec.u = u;
    for (std::size_t i = 0; i < sequence.size(); ++i)
        if (static_cast<double>(sequence[i]) > u) rec.epochs.push_back(i + 1);
    if (rec.epochs.size() < 2)
        throw error(errc::domain, "exceedances: need at least 2 exceedances of u = " +
                                      std::to_string(u) + ", got " +
                                      std::to_string(rec.epochs.size()));
    rec.gaps.reserve(rec.epochs.size() - 1);
    for (std::size_t i = 1; i < rec.epochs.size(); ++i)
        rec.gaps.push_back(static_cast<std::int64_t>(rec.epochs[i] - rec.epochs[i - 1]));
    return rec;
}

enum class IntervalsBranch { t1, t2 };

inline std::string_view branch_name(IntervalsBranch b) {
    return b == IntervalsBranch::t1 ? "t1" : "t2";
}

/// Extremal-index estimate at threshold u. `raw` is the pre-clip value;
/// theta = min(1, raw). branch t1 fires iff max T_i <= 2.
struct ThetaEstimate {
    double u = 0.0;
    double theta = 0.0;
    IntervalsBranch branch = IntervalsBranch::t1;
    std::size_t exceedance_count = 0;
    double raw = 0.0;
};

/// Intervals estimator from interexceedance times:
///   t1 (max T_i <= 2): 2 (sum T_i)^2 / ((N-1) sum T_i^2)
///   t2 (max T_i  > 2): 2 (sum (T_i-1))^2 / ((N-1) sum (T_i-1)(T_i-2))
inline ThetaEstimate intervals_estimator(const ExceedanceRecord& rec) {
    const std::size_t n_gaps = rec.gaps.size();
    if (n_gaps < 1) throw error(errc::domain, "intervals estimator: need at least 2 exceedances");
    const std::int64_t max_gap = *std::max_element(rec.gaps.begin(), rec.gaps.end());
    double raw;
    IntervalsBranch branch;
    if (max_gap <= 2) {
        branch = IntervalsBranch::t1;
        double sum = 0.0, sum_sq = 0.0;
        for (std::int64_t t : rec.gaps) {
            sum += static_cast<double>(t);
            sum_sq += static_cast<double>(t) * static_cast<double>(t);
        }
        const double denom = static_cast<double>(n_gaps) * sum_sq;
        if (denom == 0.0)
            throw error(errc::numeric, "intervals estimator: zero denominator in branch t1 (N = " +
                                           std::to_string(rec.count()) + ")");
        raw = 2.0 * sum * sum / denom;
    } else {
        branch = IntervalsBranch::t2;
        double sum = 0.0, sum_prod = 0.0;
        for (std::int64_t t : rec.gaps) {
            const double d = static_cast<double>(t);
            sum += d - 1.0;
            sum_prod += (d - 1.0) * (d - 2.0);
        }
        const double denom = static_cast<double>(n_gaps) * sum_prod;
        if (denom == 0.0)
            throw error(errc::numeric, "intervals estimator: zero denominator in branch t2 (N = " +
                                           std::to_string(rec.count()) + ")");
        raw = 2.0 * sum * sum / denom;
    }
    return {rec.u, std::min(1.0, raw), branch, rec.count(), raw};
}

template <class T>
ThetaEstimate intervals_estimator(std::span<const T> sequence, double u) {
    return intervals_estimator(exceedances(sequence, u));
}

struct ThetaCurve {
    std::vector<ThetaEstimate> points;
    std::vector<double> infeasible;  // grid values without a valid estimate
};

/// One intervals estimate per feasible grid threshold; infeasible thresholds
/// (fewer than two exceedances) are flagged rather than fatal.
template <class T>
ThetaCurve theta_curve(std::span<const T> sequence, std::span<const double> grid) {
    if (!std::is_sorted(grid.begin(), grid.end()))
        throw error(errc::usage, "theta_curve: grid must be sorted ascending");
    ThetaCurve curve;
    for (double u : grid) {
        try {
            curve.points.push_back(intervals_estimator(sequence, u));
        } catch (const error&) {
            curve.infeasible.push_back(u);
        }
    }
    if (curve.points.empty())
        throw error(errc::domain, "theta_curve: no feasible grid thresholds");
    return curve;
}

/// Default threshold grid: empirical quantiles at levels 80% .. 99.5% in
/// 0.5% steps, deduplicated (degree data is discrete).
template <class T>
std::vector<double> default_theta_grid(std::span<const T> sequence) {
    if (sequence.empty()) throw error(errc::domain, "default_theta_grid: empty sequence");
    std::vector<T> sorted(sequence.begin(), sequence.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> grid;
    for (int i = 0; i <= 39; ++i) {
        const double level = 0.80 + 0.005 * i;
        const double u = static_cast<double>(
            empirical_quantile(std::span<const T>(sorted), level));
        if (grid.empty() || grid.back() != u) grid.push_back(u);
    }
    return grid;
}

/// Plateau pick from a theta-vs-threshold curve: the median theta inside the
/// length-w window with the smallest coefficient of variation. The paper
/// equivalent is reading a stability interval off the plot; this makes that
/// choice deterministic while the full curve stays available for overrides.
struct PlateauSelection {
    double theta = 0.0;
    double u_low = 0.0;
    double u_high = 0.0;
    std::size_t window = 0;
    std::size_t index_low = 0;   // window position within the curve
    double cv = 0.0;
};

inline PlateauSelection select_theta_plateau(std::span<const ThetaEstimate> curve,
                                             std::size_t window) {
    if (window < 3) throw error(errc::usage, "select_theta_plateau: window must be >= 3");
    if (curve.size() < window)
        throw error(errc::domain, "select_theta_plateau: curve has " +
                                      std::to_string(curve.size()) + " points, window is " +
                                      std::to_string(window));
    std::size_t best_lo = 0;
    double best_cv = std::numeric_limits<double>::infinity();
    for (std::size_t lo = 0; lo + window <= curve.size(); ++lo) {
        double mean = 0.0;
        for (std::size_t i = lo; i < lo + window; ++i) mean += curve[i].theta;
        mean /= static_cast<double>(window);
        if (mean <= 0.0) continue;
        double var = 0.0;
        for (std::size_t i = lo; i < lo + window; ++i) {
            const double d = curve[i].theta - mean;
            var += d * d;
        }
        var /= static_cast<double>(window);
        const double cv = std::sqrt(var) / mean;
        if (cv < best_cv) {
            best_cv = cv;
            best_lo = lo;
        }
    }
    if (!std::isfinite(best_cv))
        throw error(errc::numeric, "select_theta_plateau: no window with positive mean theta");

    std::vector<double> thetas;
    thetas.reserve(window);
    for (std::size_t i = best_lo; i < best_lo + window; ++i) thetas.push_back(curve[i].theta);
    std::sort(thetas.begin(), thetas.end());
    const double median = window % 2 == 1
                              ? thetas[window / 2]
                              : 0.5 * (thetas[window / 2 - 1] + thetas[window / 2]);
    return {median, curve[best_lo].u, curve[best_lo + window - 1].u, window, best_lo, best_cv};
}

/// Mean cluster size 1/theta; infinite at theta = 0 (rendered symbolically
/// by reporting layers).
inline double mean_cluster_size(double theta) {
    if (!(theta >= 0.0) || theta > 1.0)
        throw error(errc::domain, "mean_cluster_size: theta must lie in [0, 1]");
    if (theta == 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / theta;
}

}  // namespace evdeg
