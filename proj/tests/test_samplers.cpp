#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include "evdeg/extremal.hpp"
#include "evdeg/generators.hpp"
#include "evdeg/graph.hpp"
#include "evdeg/samplers.hpp"

using namespace evdeg;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Graph from_text(const std::string& text) {
    std::istringstream in(text);
    return parse_edge_list(in).graph;
}

Graph star(std::uint32_t leaves) {
    std::string text;
    for (std::uint32_t i = 1; i <= leaves; ++i) text += "0 " + std::to_string(i) + "\n";
    return from_text(text);
}

Graph cycle(std::uint32_t n) {
    std::string text;
    for (std::uint32_t i = 0; i < n; ++i)
        text += std::to_string(i) + " " + std::to_string((i + 1) % n) + "\n";
    return from_text(text);
}

std::span<const double> sp(const std::vector<double>& v) { return {v.data(), v.size()}; }

}  // namespace

// ---------------------------------------------------------------------------
// Graph walks
// ---------------------------------------------------------------------------

TEST_CASE("srw on a two-node graph alternates endpoints") {
    auto g = from_text("0 1\n");
    Rng rng(1);
    detail::GraphWalkGen gen(g, GraphWalker::srw, 0u, rng);
    std::vector<std::uint32_t> trace;
    for (int i = 0; i < 8; ++i) {
        gen();
        trace.push_back(gen.node());
    }
    CHECK(trace == std::vector<std::uint32_t>{0, 1, 0, 1, 0, 1, 0, 1});
}

TEST_CASE("srw from a star leaf hits the center on every odd step") {
    auto g = star(5);
    GraphWalkConfig cfg;
    cfg.start = 1;  // a leaf
    cfg.max_steps = 101;
    cfg.seed = 7;
    auto result = srw_walk(g, cfg);
    REQUIRE(result.values.size() == 101);
    CHECK(result.acceptance_rate == 1.0);
    for (std::size_t j = 0; j < result.values.size(); ++j)
        CHECK(result.values[j] == (j % 2 == 1 ? 5.0 : 1.0));
}

TEST_CASE("srw start validation") {
    auto isolated = from_text("5 5\n");  // single node, degree 0
    GraphWalkConfig cfg;
    cfg.start = 0;
    cfg.max_steps = 10;
    CHECK_THROWS_AS(srw_walk(isolated, cfg), error);
    cfg.start.reset();
    CHECK_THROWS_AS(srw_walk(isolated, cfg), error);
    cfg.start = 3;
    CHECK_THROWS_AS(srw_walk(star(2), cfg), error);  // out of range
}

TEST_CASE("srw visit frequencies on an odd cycle are uniform within 3 sigma") {
    const std::uint32_t n = 21;
    auto g = cycle(n);
    Rng rng(11);
    detail::GraphWalkGen gen(g, GraphWalker::srw, 0u, rng);
    const std::size_t steps = 100000;
    std::vector<std::size_t> visits(n, 0);
    for (std::size_t i = 0; i < steps; ++i) {
        gen();
        ++visits[gen.node()];
    }
    // occupation-fraction sigma ~ sqrt(2 t_rel p(1-p) / T), t_rel = 1/(1-cos(2 pi/n))
    const double p = 1.0 / n;
    const double t_rel = 1.0 / (1.0 - std::cos(2.0 * 3.14159265358979312 / n));
    const double sigma = std::sqrt(2.0 * t_rel * p * (1.0 - p) / static_cast<double>(steps));
    for (std::uint32_t v = 0; v < n; ++v) {
        const double freq = static_cast<double>(visits[v]) / static_cast<double>(steps);
        CHECK_THAT(freq, WithinAbs(p, 3.0 * sigma));
    }
}

TEST_CASE("mhrw acceptance uses only the endpoint degrees") {
    CHECK(mh_acceptance(2, 4) == 0.5);
    CHECK(mh_acceptance(4, 2) == 1.0);
    CHECK(mh_acceptance(3, 3) == 1.0);
}

TEST_CASE("mhrw reduces to srw on regular graphs, trace for trace") {
    auto g = cycle(7);
    Rng rng_a(99), rng_b(99);
    detail::GraphWalkGen srw_gen(g, GraphWalker::srw, 2u, rng_a);
    detail::GraphWalkGen mh_gen(g, GraphWalker::mhrw, 2u, rng_b);
    for (int i = 0; i < 500; ++i) {
        CHECK(srw_gen() == mh_gen());
        REQUIRE(srw_gen.node() == mh_gen.node());
    }
    CHECK(mh_gen.acceptance_rate() == 1.0);
}

TEST_CASE("mhrw visits star nodes uniformly") {
    const std::uint32_t leaves = 5;
    auto g = star(leaves);
    Rng rng(13);
    detail::GraphWalkGen gen(g, GraphWalker::mhrw, 1u, rng);
    const std::size_t steps = 100000;
    std::vector<std::size_t> visits(leaves + 1, 0);
    for (std::size_t i = 0; i < steps; ++i) {
        gen();
        ++visits[gen.node()];
    }
    double tv = 0.0;
    for (auto v : visits)
        tv += std::abs(static_cast<double>(v) / steps - 1.0 / (leaves + 1));
    CHECK(tv / 2.0 < 0.05);
}

TEST_CASE("walk results respect the step budget and threshold") {
    auto g = star(5);
    GraphWalkConfig cfg;
    cfg.start = 1;
    cfg.max_steps = 50;
    cfg.seed = 3;
    cfg.threshold = 3.0;  // between leaf degree 1 and center degree 5
    auto result = srw_walk(g, cfg);
    REQUIRE(result.hitting_step.has_value());
    CHECK(*result.hitting_step == 2);  // start emitted first, center on step 2
    CHECK(result.steps_taken == 2);
    CHECK(result.values.size() == 2);

    cfg.max_steps = 1;  // only the start state is examined
    auto censored = srw_walk(g, cfg);
    CHECK_FALSE(censored.hitting_step.has_value());
    CHECK(censored.steps_taken == 1);
}

// ---------------------------------------------------------------------------
// Continuous Metropolis
// ---------------------------------------------------------------------------

TEST_CASE("metropolis acceptance ratios") {
    ContinuousTarget exp_t = ExponentialTarget{1.0};
    CHECK(metropolis_acceptance(exp_t, 1.0, 1.0) == 1.0);
    CHECK_THAT(metropolis_acceptance(exp_t, 1.0, 1.5), WithinAbs(std::exp(-0.5), 1e-15));
    CHECK(metropolis_acceptance(exp_t, 2.0, 1.0) == 1.0);  // downhill in x, uphill in density
    CHECK(metropolis_acceptance(exp_t, 1.0, -0.5) == 0.0);

    ContinuousTarget pl = PowerLawTarget{0.5, 1.0};
    CHECK_THAT(metropolis_acceptance(pl, 2.0, 4.0), WithinRel(std::pow(2.0, -1.5), 1e-14));
    CHECK(metropolis_acceptance(pl, 4.0, 2.0) == 1.0);
    CHECK(metropolis_acceptance(pl, 2.0, 0.5) == 0.0);  // below x_min
}

TEST_CASE("metropolis start must lie in the target support") {
    MetropolisConfig cfg;
    cfg.target = PowerLawTarget{0.5, 1.0};
    cfg.x0 = 0.5;
    cfg.max_steps = 10;
    CHECK_THROWS_AS(metropolis_continuous(cfg), error);

    cfg.target = ExponentialTarget{1.0};
    cfg.x0 = -1.0;
    CHECK_THROWS_AS(metropolis_continuous(cfg), error);
}

TEST_CASE("proposal validation and heavy draws") {
    CHECK_THROWS_AS(validate_proposal(HeavyProposal{0.0, 1.0}), error);
    CHECK_THROWS_AS(validate_proposal(HeavyProposal{2.0, 1.0}), error);
    CHECK_THROWS_AS(validate_proposal(GaussianProposal{0.0}), error);

    Rng rng(17);
    const HeavyProposal heavy{0.8, 2.0};
    int positive = 0;
    for (int i = 0; i < 2000; ++i) {
        const double z = draw_increment(heavy, rng);
        CHECK(std::abs(z) >= heavy.scale);
        if (z > 0) ++positive;
    }
    CHECK(positive > 800);
    CHECK(positive < 1200);
}

TEST_CASE("metropolis with exponential target reproduces closed-form quantiles") {
    MetropolisConfig cfg;
    cfg.target = ExponentialTarget{1.0};
    cfg.proposal = GaussianProposal{1.0};
    cfg.x0 = 1.0;
    cfg.max_steps = 200000;
    cfg.seed = 19;
    auto result = metropolis_continuous(cfg);
    std::vector<double> post(result.values.begin() + 10000, result.values.end());
    std::sort(post.begin(), post.end());
    const ExponentialTarget& t = std::get<ExponentialTarget>(cfg.target);
    CHECK_THAT(empirical_quantile(sp(post), 0.5), WithinRel(t.quantile(0.5), 0.05));
    CHECK_THAT(empirical_quantile(sp(post), 0.9), WithinRel(t.quantile(0.9), 0.05));
    CHECK(result.acceptance_rate > 0.3);
    CHECK(result.acceptance_rate < 0.8);
}

TEST_CASE("metropolis flows balance between state bins") {
    MetropolisConfig cfg;
    cfg.target = ExponentialTarget{1.0};
    cfg.proposal = GaussianProposal{0.7};
    cfg.x0 = 0.5;
    cfg.max_steps = 200000;
    cfg.seed = 23;
    auto result = metropolis_continuous(cfg);
    auto bin = [](double x) { return std::min<int>(7, static_cast<int>(x / 0.5)); };
    std::map<std::pair<int, int>, double> flow;
    for (std::size_t i = 1; i < result.values.size(); ++i)
        flow[{bin(result.values[i - 1]), bin(result.values[i])}] += 1.0;
    for (int a = 0; a < 8; ++a)
        for (int b = a + 1; b < 8; ++b) {
            const double fab = flow[{a, b}], fba = flow[{b, a}];
            if (fab + fba < 100.0) continue;
            CHECK(std::abs(fab - fba) <= 5.0 * std::sqrt(fab + fba));
        }
}

TEST_CASE("power-law targets cluster their exceedances") {
    // chains held near high states produce long exceedance runs, so the
    // intervals estimate collapses far below the i.i.d. value
    MetropolisConfig cfg;
    cfg.target = PowerLawTarget{0.5, 1.0};
    cfg.proposal = GaussianProposal{1.0};
    cfg.x0 = 1.5;
    cfg.max_steps = 30000;
    for (std::uint64_t seed : {29ull, 31ull}) {
        cfg.seed = seed;
        auto chain = metropolis_continuous(cfg);
        std::vector<double> sorted(chain.values);
        std::sort(sorted.begin(), sorted.end());
        const double u = empirical_quantile(sp(sorted), 0.95);
        const double theta_chain = intervals_estimator(sp(chain.values), u).theta;

        Rng rng(seed);
        ParetoGenerator iid{0.5, 1.0};
        auto control = generate_sequence(iid, chain.values.size(), rng);
        std::vector<double> csorted(control);
        std::sort(csorted.begin(), csorted.end());
        const double cu = empirical_quantile(sp(csorted), 0.95);
        const double theta_iid = intervals_estimator(sp(control), cu).theta;

        CHECK(theta_chain < 0.3);
        CHECK(theta_chain < theta_iid);
    }
}

// ---------------------------------------------------------------------------
// Ergodicity classification and rates
// ---------------------------------------------------------------------------

TEST_CASE("ergodicity classification") {
    auto power = classify_ergodicity(PowerLawTarget{0.337, 1.0});
    CHECK(power.regime == RateRegime::polynomial);
    CHECK(power.eta_criterion == 0.0);
    CHECK(power.theta_is_zero);
    REQUIRE(power.r.has_value());
    CHECK(*power.r == 0.337);

    auto exp1 = classify_ergodicity(ExponentialTarget{1.0});
    CHECK(exp1.regime == RateRegime::geometric);
    CHECK(exp1.eta_criterion == 1.0);
    CHECK_FALSE(exp1.theta_is_zero);

    auto tiny = classify_ergodicity(ExponentialTarget{0.001});
    CHECK(tiny.regime == RateRegime::geometric);  // strict positivity is enough
}

TEST_CASE("polynomial rate arithmetic") {
    auto fast = polynomial_rate(0.337, HeavyProposal{0.01, 1.0});
    REQUIRE(fast.v.has_value());
    CHECK_THAT(*fast.v, WithinAbs(33.7, 1e-12));

    auto slow = polynomial_rate(0.028, HeavyProposal{0.01, 1.0});
    REQUIRE(slow.v.has_value());
    CHECK_THAT(*slow.v, WithinAbs(2.8, 1e-12));

    auto finite = polynomial_rate(1.0, GaussianProposal{1.0});
    REQUIRE(finite.v.has_value());
    CHECK(*finite.v == 0.5);

    CHECK_THROWS_AS(polynomial_rate(0.0, GaussianProposal{1.0}), error);
    CHECK_THROWS_AS(polynomial_rate(0.5, HeavyProposal{2.5, 1.0}), error);
}

// ---------------------------------------------------------------------------
// Empirical first hitting times
// ---------------------------------------------------------------------------

TEST_CASE("iid uniform hitting times follow the geometric mean") {
    FhtOptions opts;
    opts.threshold = 0.95;
    opts.runs = 10000;
    opts.max_steps = 2000;
    opts.seed = 37;
    auto samples = empirical_fht([](Rng& rng) { return [&rng]() { return rng.unit(); }; }, opts);
    CHECK(samples.censored == 0);
    CHECK_THAT(samples.mean_uncensored(), WithinRel(20.0, 0.05));
}

TEST_CASE("a generator that always exceeds hits at step one") {
    FhtOptions opts;
    opts.threshold = 10.0;
    opts.runs = 32;
    opts.max_steps = 100;
    opts.seed = 1;
    auto samples = empirical_fht([](Rng&) { return []() { return 11.0; }; }, opts);
    for (auto h : samples.hitting) CHECK(h == 1);
}

TEST_CASE("all-censored runs are flagged, not fatal") {
    FhtOptions opts;
    opts.threshold = 10.0;
    opts.runs = 16;
    opts.max_steps = 5;
    opts.seed = 1;
    auto samples = empirical_fht([](Rng&) { return []() { return 1.0; }; }, opts);
    CHECK(samples.censored == opts.runs);
    CHECK_THROWS_AS(samples.mean_uncensored(), error);
}

TEST_CASE("empirical FHT is reproducible across seeds and thread counts") {
    auto factory = [](Rng& rng) {
        MovingMaxGenerator gen(2);
        return [&rng, gen]() mutable { return gen.next(rng); };
    };
    FhtOptions a;
    a.threshold = 30.0;
    a.runs = 500;
    a.max_steps = 5000;
    a.seed = 41;
    a.threads = 1;
    FhtOptions b = a;
    b.threads = 4;
    auto ra = empirical_fht(factory, a);
    auto rb = empirical_fht(factory, b);
    CHECK(ra.hitting == rb.hitting);
    auto rc = empirical_fht(factory, a);
    CHECK(ra.hitting == rc.hitting);
}

TEST_CASE("moving-maximum hitting times match the direct geometric argument") {
    // For Y_i = max(Z_i..Z_{i+m-1}) and threshold u, T* = max(J-m+1, 1) with
    // J the first i where Z_i > u, so E T* ~ m/rho - m + 1 at marginal tail
    // probability rho.
    const std::size_t m = 2;
    MovingMaxGenerator probe(m);
    const double rho = 0.02;
    const double u = probe.quantile(1.0 - rho);
    FhtOptions opts;
    opts.threshold = u;
    opts.runs = 10000;
    opts.max_steps = 20000;
    opts.seed = 43;
    auto samples = empirical_fht(
        [m](Rng& rng) {
            MovingMaxGenerator gen(m);
            return [&rng, gen]() mutable { return gen.next(rng); };
        },
        opts);
    CHECK(samples.censored == 0);
    const double p_z = -std::expm1(-1.0 / u);  // P{Z > u} for unit Frechet
    const double expected = 1.0 / p_z - static_cast<double>(m) + 1.0;
    CHECK_THAT(samples.mean_uncensored(), WithinRel(expected, 0.10));
}

TEST_CASE("graph-walk FHT from a star leaf") {
    auto g = star(5);
    FhtOptions opts;
    opts.threshold = 3.0;
    opts.runs = 64;
    opts.max_steps = 10;
    opts.seed = 47;
    auto samples = empirical_fht(
        [&g](Rng& rng) { return detail::GraphWalkGen(g, GraphWalker::srw, 1u, rng); }, opts);
    for (auto h : samples.hitting) CHECK(h == 2);
    CHECK(samples.mean_acceptance == 1.0);
}
