#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "evdeg/error.hpp"
#include "evdeg/graph.hpp"
#include "evdeg/parallel.hpp"
#include "evdeg/rng.hpp"

namespace evdeg {

// ---------------------------------------------------------------------------
// Graph walkers
// ---------------------------------------------------------------------------

enum class GraphWalker { srw, mhrw };

/// Uniform-target Metropolis-Hastings acceptance on a graph: a proposal from
/// x to y is accepted with min(1, deg(x)/deg(y)).
inline double mh_acceptance(std::size_t degree_from, std::size_t degree_to) {
    if (degree_to == 0) return 1.0;
    return std::min(1.0, static_cast<double>(degree_from) / static_cast<double>(degree_to));
}

struct GraphWalkConfig {
    GraphWalker kind = GraphWalker::srw;
    std::optional<std::uint32_t> start;  // nullopt -> uniform over non-isolated nodes
    std::int64_t max_steps = 1;          // values emitted, initial state included
    std::uint64_t seed = 0;
    std::optional<double> threshold;     // stop at first value > threshold
};

/// Walk outcome. `values` is the observed sequence v_1, v_2, ... with
/// v_1 the start state; a transition (or Metropolis hold) appends one value,
/// so values[j] is the state after j steps. hitting_step is the 1-based
/// index of the first value exceeding the configured threshold.
struct WalkResult {
    std::vector<double> values;
    std::optional<std::int64_t> hitting_step;
    double acceptance_rate = 1.0;
    std::int64_t steps_taken = 0;  // == values.size()
};

namespace detail {

/// Stepper shared by the one-shot walk functions and the FHT experiments.
/// MHRW draws the acceptance uniform only when the ratio is below one, so on
/// regular graphs its trace consumes the stream exactly like SRW.
class GraphWalkGen {
public:
    GraphWalkGen(const Graph& graph, GraphWalker kind, std::optional<std::uint32_t> start,
                 Rng& rng)
        : graph_(&graph), kind_(kind), rng_(&rng) {
        if (graph.node_count == 0) throw error(errc::domain, "walk: empty graph");
        if (start) {
            if (*start >= graph.node_count)
                throw error(errc::domain, "walk: start node out of range");
            node_ = *start;
        } else {
            std::uint32_t candidate;
            std::size_t attempts = 0;
            do {
                candidate = static_cast<std::uint32_t>(rng.below(graph.node_count));
                if (++attempts > 16 * static_cast<std::size_t>(graph.node_count) + 64)
                    throw error(errc::domain, "walk: no node with positive degree");
            } while (graph.adjacency[candidate].empty());
            node_ = candidate;
        }
        if (graph_->adjacency[node_].empty())
            throw error(errc::domain, "walk: start node " + std::to_string(node_) +
                                          " has degree 0");
    }

    double operator()() {
        if (!emitted_start_) {
            emitted_start_ = true;
            return static_cast<double>(graph_->adjacency[node_].size());
        }
        const auto& nbrs = graph_->adjacency[node_];
        const std::uint32_t proposal = nbrs[rng_->below(nbrs.size())];
        ++proposed_;
        if (kind_ == GraphWalker::srw) {
            node_ = proposal;
            ++accepted_;
        } else {
            const double a =
                mh_acceptance(graph_->adjacency[node_].size(), graph_->adjacency[proposal].size());
            if (a >= 1.0 || rng_->unit() <= a) {
                node_ = proposal;
                ++accepted_;
            }
        }
        return static_cast<double>(graph_->adjacency[node_].size());
    }

    std::uint32_t node() const { return node_; }
    double acceptance_rate() const {
        return proposed_ == 0 ? 1.0
                              : static_cast<double>(accepted_) / static_cast<double>(proposed_);
    }

private:
    const Graph* graph_;
    GraphWalker kind_;
    Rng* rng_;
    std::uint32_t node_ = 0;
    bool emitted_start_ = false;
    std::int64_t proposed_ = 0;
    std::int64_t accepted_ = 0;
};

template <class Gen>
WalkResult run_walk(Gen& gen, std::int64_t max_steps, std::optional<double> threshold) {
    if (max_steps < 1) throw error(errc::usage, "walk: max_steps must be >= 1");
    WalkResult result;
    result.values.reserve(static_cast<std::size_t>(std::min<std::int64_t>(max_steps, 1 << 20)));
    for (std::int64_t t = 1; t <= max_steps; ++t) {
        const double v = gen();
        result.values.push_back(v);
        if (threshold && v > *threshold) {
            result.hitting_step = t;
            break;
        }
    }
    result.steps_taken = static_cast<std::int64_t>(result.values.size());
    result.acceptance_rate = gen.acceptance_rate();
    return result;
}

}  // namespace detail

/// Simple random walk: moves to a uniformly random neighbor each step and
/// records node degrees.
inline WalkResult srw_walk(const Graph& graph, const GraphWalkConfig& config) {
    Rng rng(config.seed);
    detail::GraphWalkGen gen(graph, GraphWalker::srw, config.start, rng);
    return detail::run_walk(gen, config.max_steps, config.threshold);
}

/// Metropolis-Hastings random walk with uniform stationary law over nodes:
/// proposes a uniform neighbor and accepts with min(1, deg(x)/deg(y));
/// rejections hold the chain and are recorded as steps.
inline WalkResult mhrw_walk(const Graph& graph, const GraphWalkConfig& config) {
    Rng rng(config.seed);
    detail::GraphWalkGen gen(graph, GraphWalker::mhrw, config.start, rng);
    return detail::run_walk(gen, config.max_steps, config.threshold);
}

// ---------------------------------------------------------------------------
// Continuous Metropolis chain
// ---------------------------------------------------------------------------

/// Power-function target pi(x) = c x^(-1-r) on [x_min, inf), c = r x_min^r.
struct PowerLawTarget {
    double r = 1.0;
    double x_min = 1.0;

    double constant() const { return r * std::pow(x_min, r); }
    double log_density(double x) const {
        if (x < x_min) return -std::numeric_limits<double>::infinity();
        return std::log(constant()) - (1.0 + r) * std::log(x);
    }
    double quantile(double level) const {
        return x_min * std::pow(1.0 - level, -1.0 / r);
    }
};

/// Exponential-type target pi(x) = lambda exp(-lambda x) on [0, inf).
struct ExponentialTarget {
    double lambda = 1.0;

    double log_density(double x) const {
        if (x < 0.0) return -std::numeric_limits<double>::infinity();
        return std::log(lambda) - lambda * x;
    }
    double quantile(double level) const { return -std::log(1.0 - level) / lambda; }
};

using ContinuousTarget = std::variant<PowerLawTarget, ExponentialTarget>;

inline double target_log_density(const ContinuousTarget& target, double x) {
    return std::visit([x](const auto& t) { return t.log_density(x); }, target);
}

inline double target_quantile(const ContinuousTarget& target, double level) {
    return std::visit([level](const auto& t) { return t.quantile(level); }, target);
}

/// Symmetric heavy-tailed increment: |Z| = scale * U^(-1/eta) (two-sided
/// Pareto), matching a proposal density ~ |z|^(-1-eta) in the tail.
struct HeavyProposal {
    double eta = 1.0;
    double scale = 1.0;
};

/// Finite-variance increment Z ~ Normal(0, sigma^2).
struct GaussianProposal {
    double sigma = 1.0;
};

using Proposal = std::variant<HeavyProposal, GaussianProposal>;

inline void validate_proposal(const Proposal& proposal) {
    if (const auto* heavy = std::get_if<HeavyProposal>(&proposal)) {
        if (!(heavy->eta > 0.0 && heavy->eta < 2.0))
            throw error(errc::domain, "heavy proposal: eta must lie in (0, 2)");
        if (!(heavy->scale > 0.0))
            throw error(errc::domain, "heavy proposal: scale must be positive");
    } else if (const auto* gauss = std::get_if<GaussianProposal>(&proposal)) {
        if (!(gauss->sigma > 0.0))
            throw error(errc::domain, "gaussian proposal: sigma must be positive");
    }
}

inline double draw_increment(const Proposal& proposal, Rng& rng) {
    if (const auto* heavy = std::get_if<HeavyProposal>(&proposal)) {
        const double magnitude = heavy->scale * std::pow(rng.unit_open(), -1.0 / heavy->eta);
        return (rng.bits() & 1u) ? magnitude : -magnitude;
    }
    return rng.normal(std::get<GaussianProposal>(proposal).sigma);
}

/// Metropolis acceptance probability min(1, pi(y)/pi(x)); defined as 1 when
/// pi(x) = 0.
inline double metropolis_acceptance(const ContinuousTarget& target, double x, double y) {
    const double lx = target_log_density(target, x);
    if (lx == -std::numeric_limits<double>::infinity()) return 1.0;
    const double ly = target_log_density(target, y);
    if (ly == -std::numeric_limits<double>::infinity()) return 0.0;
    return std::min(1.0, std::exp(ly - lx));
}

struct MetropolisConfig {
    ContinuousTarget target = ExponentialTarget{1.0};
    Proposal proposal = GaussianProposal{1.0};
    double x0 = 1.0;
    std::int64_t max_steps = 1;
    std::uint64_t seed = 0;
    std::optional<double> threshold;
};

namespace detail {

class MetropolisGen {
public:
    MetropolisGen(const ContinuousTarget& target, const Proposal& proposal, double x0, Rng& rng)
        : target_(&target), proposal_(&proposal), rng_(&rng), x_(x0) {
        validate_proposal(proposal);
        if (target_log_density(target, x0) == -std::numeric_limits<double>::infinity())
            throw error(errc::domain,
                        "metropolis: start state x0 = " + std::to_string(x0) +
                            " lies outside the target support");
    }

    double operator()() {
        if (!emitted_start_) {
            emitted_start_ = true;
            return x_;
        }
        const double y = x_ + draw_increment(*proposal_, *rng_);
        const double a = metropolis_acceptance(*target_, x_, y);
        ++proposed_;
        if (rng_->unit() <= a) {
            x_ = y;
            ++accepted_;
        }
        return x_;
    }

    double acceptance_rate() const {
        return proposed_ == 0 ? 1.0
                              : static_cast<double>(accepted_) / static_cast<double>(proposed_);
    }

private:
    const ContinuousTarget* target_;
    const Proposal* proposal_;
    Rng* rng_;
    double x_;
    bool emitted_start_ = false;
    std::int64_t proposed_ = 0;
    std::int64_t accepted_ = 0;
};

}  // namespace detail

/// Random-walk Metropolis chain X_{i+1} = X_i + Z_{i+1} accepted with
/// probability min(1, pi(y)/pi(x)) (uniform draw U <= alpha); rejections hold
/// the chain and advance the time index.
inline WalkResult metropolis_continuous(const MetropolisConfig& config) {
    Rng rng(config.seed);
    detail::MetropolisGen gen(config.target, config.proposal, config.x0, rng);
    return detail::run_walk(gen, config.max_steps, config.threshold);
}

// ---------------------------------------------------------------------------
// Ergodicity classification and polynomial rates
// ---------------------------------------------------------------------------

enum class RateRegime { geometric, polynomial, none };

inline std::string_view regime_name(RateRegime r) {
    switch (r) {
        case RateRegime::geometric: return "geometric";
        case RateRegime::polynomial: return "polynomial";
        case RateRegime::none: return "none";
    }
    return "unknown";
}

/// Convergence-regime report. eta_criterion is the limit of -(log pi(x))';
/// the chain is geometrically ergodic iff it is positive. Power-function
/// targets drive it to zero, which also forces extremal index zero; their
/// polynomial rate v is filled in by polynomial_rate.
struct RateClassification {
    RateRegime regime = RateRegime::none;
    double eta_criterion = 0.0;
    std::optional<double> r;
    std::optional<double> v;
    bool theta_is_zero = false;
};

inline RateClassification classify_ergodicity(const ContinuousTarget& target) {
    RateClassification rc;
    if (const auto* exp_t = std::get_if<ExponentialTarget>(&target)) {
        rc.eta_criterion = exp_t->lambda;
        rc.regime = exp_t->lambda > 0.0 ? RateRegime::geometric : RateRegime::none;
    } else {
        const auto& pl = std::get<PowerLawTarget>(target);
        rc.eta_criterion = 0.0;  // (log pi)' = -(1+r)/x -> 0
        rc.regime = RateRegime::polynomial;
        rc.r = pl.r;
        rc.theta_is_zero = true;
    }
    return rc;
}

/// Polynomial convergence rate against a target with density exponent 1+r:
/// v = r/eta for a heavy-tailed proposal, v = r/2 for a finite-variance one.
inline RateClassification polynomial_rate(double r, const Proposal& proposal) {
    if (!(r > 0.0)) throw error(errc::domain, "polynomial_rate: r must be positive");
    validate_proposal(proposal);
    RateClassification rc;
    rc.regime = RateRegime::polynomial;
    rc.eta_criterion = 0.0;
    rc.r = r;
    rc.theta_is_zero = true;
    if (const auto* heavy = std::get_if<HeavyProposal>(&proposal))
        rc.v = r / heavy->eta;
    else
        rc.v = r / 2.0;
    return rc;
}

// ---------------------------------------------------------------------------
// Empirical first hitting times
// ---------------------------------------------------------------------------

struct FhtOptions {
    double threshold = 0.0;
    std::size_t runs = 1;
    std::int64_t max_steps = 1;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

/// Hitting steps across independent runs; -1 marks a censored run (no value
/// exceeded the threshold within max_steps).
struct FhtSamples {
    std::vector<std::int64_t> hitting;
    std::size_t censored = 0;
    double mean_acceptance = 1.0;

    double mean_uncensored() const {
        double s = 0.0;
        std::size_t c = 0;
        for (std::int64_t h : hitting)
            if (h >= 0) {
                s += static_cast<double>(h);
                ++c;
            }
        if (c == 0) throw error(errc::domain, "all runs censored; no hitting times observed");
        return s / static_cast<double>(c);
    }

    double median_uncensored() const {
        std::vector<std::int64_t> obs;
        for (std::int64_t h : hitting)
            if (h >= 0) obs.push_back(h);
        if (obs.empty()) throw error(errc::domain, "all runs censored; no hitting times observed");
        std::sort(obs.begin(), obs.end());
        const std::size_t m = obs.size();
        return m % 2 == 1 ? static_cast<double>(obs[m / 2])
                          : 0.5 * static_cast<double>(obs[m / 2 - 1] + obs[m / 2]);
    }
};

namespace detail {

template <class G>
concept ReportsAcceptance = requires(const G& g) {
    { g.acceptance_rate() } -> std::convertible_to<double>;
};

}  // namespace detail

/// Measures the first hitting time T* = min{ t >= 1 : v_t > u } over
/// independent runs. `make_generator(rng)` must return a fresh callable
/// emitting v_1, v_2, ... for that run; run i draws from stream (seed, i),
/// so results are reproducible for any thread count. All runs censored is a
/// flagged outcome, not an error.
template <class MakeGenerator>
FhtSamples empirical_fht(MakeGenerator&& make_generator, const FhtOptions& opts) {
    if (opts.runs < 1) throw error(errc::usage, "empirical_fht: runs must be >= 1");
    if (opts.max_steps < 1) throw error(errc::usage, "empirical_fht: max_steps must be >= 1");

    FhtSamples samples;
    samples.hitting.assign(opts.runs, -1);
    std::vector<double> acceptance(opts.runs, 1.0);

    parallel_for(opts.runs, opts.threads, [&](std::size_t run) {
        Rng rng = Rng::stream(opts.seed, run);
        auto gen = make_generator(rng);
        for (std::int64_t t = 1; t <= opts.max_steps; ++t) {
            if (gen() > opts.threshold) {
                samples.hitting[run] = t;
                break;
            }
        }
        if constexpr (detail::ReportsAcceptance<decltype(gen)>)
            acceptance[run] = gen.acceptance_rate();
    });

    double acc_sum = 0.0;
    for (std::size_t i = 0; i < opts.runs; ++i) {
        if (samples.hitting[i] < 0) ++samples.censored;
        acc_sum += acceptance[i];
    }
    samples.mean_acceptance = acc_sum / static_cast<double>(opts.runs);
    return samples;
}

}  // namespace evdeg
