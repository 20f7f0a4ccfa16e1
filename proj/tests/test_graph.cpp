#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <sstream>

#include "evdeg/graph.hpp"
#include "evdeg/rng.hpp"

using namespace evdeg;

namespace {

ParseReport parse(const std::string& text) {
    std::istringstream in(text);
    return parse_edge_list(in);
}

Graph star(std::uint32_t leaves) {
    std::string text;
    for (std::uint32_t i = 1; i <= leaves; ++i) text += "0 " + std::to_string(i) + "\n";
    return parse(text).graph;
}

bool symmetric(const Graph& g) {
    for (std::uint32_t v = 0; v < g.node_count; ++v)
        for (std::uint32_t w : g.adjacency[v]) {
            const auto& back = g.adjacency[w];
            if (!std::binary_search(back.begin(), back.end(), v)) return false;
        }
    return true;
}

}  // namespace

TEST_CASE("edge list parsing drops self-loops and collapses duplicates") {
    auto report = parse("# c\n1 2\n2 1\n2 2\n2 3\n");
    CHECK(report.graph.node_count == 3);
    CHECK(report.graph.edge_count == 2);
    CHECK(report.self_loops_dropped == 1);
    CHECK(report.duplicates_dropped == 1);
    CHECK(symmetric(report.graph));
}

TEST_CASE("self-loop-only input yields an isolated node") {
    auto report = parse("5 5\n");
    CHECK(report.graph.node_count == 1);
    CHECK(report.graph.edge_count == 0);
    CHECK(report.self_loops_dropped == 1);
    CHECK(degree(report.graph, 0) == 0);
}

TEST_CASE("node indices follow first appearance, original ids retained") {
    auto g = parse("7 3\n3 9\n").graph;
    REQUIRE(g.node_count == 3);
    CHECK(g.original_ids == std::vector<std::uint64_t>{7, 3, 9});
    CHECK(neighbors(g, 1).size() == 2);  // id 3 connects to 7 and 9
}

TEST_CASE("parse errors carry line numbers") {
    CHECK_THROWS_WITH(parse("1 2\nx 3\n"), Catch::Matchers::ContainsSubstring("line 2"));
    CHECK_THROWS_WITH(parse("1 2 3\n"), Catch::Matchers::ContainsSubstring("expected 2 fields"));
    CHECK_THROWS_AS(parse("# only comments\n\n"), error);
    CHECK_THROWS_AS(parse(""), error);
}

TEST_CASE("degree sequence orderings") {
    auto g = parse("0 1\n1 2\n").graph;  // path 0-1-2
    auto first = degree_sequence(g, Ordering::first_appearance);
    CHECK(first.values == std::vector<std::int64_t>{1, 2, 1});
    auto sorted = degree_sequence(g, Ordering::sorted_ascending);
    CHECK(sorted.values == std::vector<std::int64_t>{1, 1, 2});
    CHECK(first.sorted_view == sorted.values);
    CHECK_THROWS_AS(degree_sequence(g, Ordering::walk_order), error);
}

TEST_CASE("star degrees and neighbors") {
    auto g = star(5);
    CHECK(degree(g, 0) == 5);
    CHECK(degree(g, 1) == 1);
    auto seq = degree_sequence(g, Ordering::first_appearance);
    CHECK(seq.sorted_view == std::vector<std::int64_t>{1, 1, 1, 1, 1, 5});
    CHECK(neighbors(g, 0).size() == 5);
    CHECK(neighbors(g, 2)[0] == 0);
    CHECK_THROWS_AS(degree(g, 6), error);
    CHECK_THROWS_AS(neighbors(g, 99), error);
}

TEST_CASE("path neighbors are sorted") {
    auto g = parse("0 1\n1 2\n").graph;
    auto nbrs = neighbors(g, 1);
    REQUIRE(nbrs.size() == 2);
    CHECK(nbrs[0] == 0);
    CHECK(nbrs[1] == 2);
}

TEST_CASE("degree sums equal twice the edge count and adjacency is symmetric") {
    Rng rng(2024);
    for (int rep = 0; rep < 20; ++rep) {
        const std::uint32_t n = 2 + static_cast<std::uint32_t>(rng.below(30));
        std::string text;
        const std::size_t lines = 1 + rng.below(120);
        for (std::size_t i = 0; i < lines; ++i)
            text += std::to_string(rng.below(n)) + " " + std::to_string(rng.below(n)) + "\n";
        ParseReport report;
        try {
            report = parse(text);
        } catch (const error&) {
            continue;  // all lines were self-loops
        }
        const Graph& g = report.graph;
        CHECK(symmetric(g));
        std::uint64_t degree_sum = 0;
        for (const auto& a : g.adjacency) degree_sum += a.size();
        CHECK(degree_sum == 2 * g.edge_count);
        auto seq = degree_sequence(g, Ordering::first_appearance);
        CHECK(seq.values.size() == g.node_count);
        CHECK(std::accumulate(seq.values.begin(), seq.values.end(), std::int64_t{0}) ==
              static_cast<std::int64_t>(2 * g.edge_count));
    }
}

TEST_CASE("parsing is idempotent under duplication and orientation flips") {
    const std::string base = "4 7\n7 9\n9 4\n4 2\n";
    auto g1 = parse(base).graph;
    // duplicate every edge, flipped
    auto g2 = parse(base + "7 4\n9 7\n4 9\n2 4\n").graph;
    CHECK(g1.node_count == g2.node_count);
    CHECK(g1.edge_count == g2.edge_count);
    CHECK(g1.adjacency == g2.adjacency);
    CHECK(g1.original_ids == g2.original_ids);
}

TEST_CASE("degree file parsing") {
    std::istringstream in("# degrees\n3\n0\n12\n");
    auto values = parse_degree_file(in);
    CHECK(values == std::vector<std::int64_t>{3, 0, 12});

    std::istringstream bad("3\n2 4\n");
    CHECK_THROWS_WITH(parse_degree_file(bad), Catch::Matchers::ContainsSubstring("line 2"));
    std::istringstream neg("-3\n");
    CHECK_THROWS_AS(parse_degree_file(neg), error);
    std::istringstream empty("# nothing\n");
    CHECK_THROWS_AS(parse_degree_file(empty), error);
}

TEST_CASE("walk-order sequences keep their tag") {
    auto seq = DegreeSequence::from_values({5, 1, 5, 2}, Ordering::walk_order);
    CHECK(seq.ordering == Ordering::walk_order);
    CHECK(seq.sorted_view == std::vector<std::int64_t>{1, 2, 5, 5});
}
