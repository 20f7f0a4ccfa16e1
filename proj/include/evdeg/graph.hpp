#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "evdeg/error.hpp"

namespace evdeg {

/// Immutable simple undirected graph. Node indices are contiguous and
/// assigned by first appearance in the input; adjacency lists are sorted,
/// self-loop free and duplicate free. Safe to share read-only.
struct Graph {
    std::uint32_t node_count = 0;
    std::uint64_t edge_count = 0;  // undirected, after dedup
    std::vector<std::vector<std::uint32_t>> adjacency;
    std::vector<std::uint64_t> original_ids;  // node index -> id in the source file
};

struct ParseReport {
    Graph graph;
    std::uint64_t self_loops_dropped = 0;
    std::uint64_t duplicates_dropped = 0;
    std::uint64_t data_lines = 0;
};

inline std::size_t degree(const Graph& g, std::uint32_t node) {
    if (node >= g.node_count)
        throw error(errc::domain, "node index " + std::to_string(node) + " out of range");
    return g.adjacency[node].size();
}

inline std::span<const std::uint32_t> neighbors(const Graph& g, std::uint32_t node) {
    if (node >= g.node_count)
        throw error(errc::domain, "node index " + std::to_string(node) + " out of range");
    return g.adjacency[node];
}

namespace detail {

inline bool parse_u64(std::string_view token, std::uint64_t& out) {
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
    return ec == std::errc{} && ptr == token.data() + token.size();
}

inline std::string_view trim(std::string_view s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Parses SNAP-style edge lists: '#'-prefixed comment lines, data lines of
/// two whitespace-separated integer ids. Blank lines are ignored. Self-loops
/// are dropped and repeated edges (either orientation) collapse to one
/// undirected edge; both counts are reported.
inline ParseReport parse_edge_list(std::istream& in) {
    ParseReport report;
    Graph& g = report.graph;
    std::unordered_map<std::uint64_t, std::uint32_t> index_of;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;

    auto intern = [&](std::uint64_t id) -> std::uint32_t {
        auto [it, inserted] = index_of.try_emplace(id, static_cast<std::uint32_t>(g.original_ids.size()));
        if (inserted) g.original_ids.push_back(id);
        return it->second;
    };

    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = detail::trim(line);
        if (sv.empty() || sv.front() == '#') continue;

        std::uint64_t ids[2];
        std::size_t field = 0;
        std::size_t pos = 0;
        while (pos < sv.size()) {
            std::size_t start = sv.find_first_not_of(" \t", pos);
            if (start == std::string_view::npos) break;
            std::size_t end = sv.find_first_of(" \t", start);
            if (end == std::string_view::npos) end = sv.size();
            std::string_view token = sv.substr(start, end - start);
            if (field >= 2)
                throw error(errc::parse, "line " + std::to_string(line_no) + ": expected 2 fields");
            if (!detail::parse_u64(token, ids[field]))
                throw error(errc::parse, "line " + std::to_string(line_no) + ": non-integer token '" +
                                             std::string(token) + "'");
            ++field;
            pos = end;
        }
        if (field != 2)
            throw error(errc::parse, "line " + std::to_string(line_no) + ": expected 2 fields, got " +
                                         std::to_string(field));
        ++report.data_lines;
        const std::uint32_t a = intern(ids[0]);
        const std::uint32_t b = intern(ids[1]);
        if (a == b) {
            ++report.self_loops_dropped;
            continue;
        }
        edges.emplace_back(a, b);
    }
    if (report.data_lines == 0) throw error(errc::parse, "empty input: no edge records found");

    g.node_count = static_cast<std::uint32_t>(g.original_ids.size());
    g.adjacency.assign(g.node_count, {});
    for (auto [a, b] : edges) {
        g.adjacency[a].push_back(b);
        g.adjacency[b].push_back(a);
    }
    std::uint64_t directed_entries = 0;
    for (auto& nbrs : g.adjacency) {
        std::sort(nbrs.begin(), nbrs.end());
        nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
        nbrs.shrink_to_fit();
        directed_entries += nbrs.size();
    }
    g.edge_count = directed_entries / 2;
    report.duplicates_dropped = edges.size() - g.edge_count;
    return report;
}

/// Reads a bare degree file: one non-negative integer per line, '#' comments
/// and blank lines allowed.
inline std::vector<std::int64_t> parse_degree_file(std::istream& in) {
    std::vector<std::int64_t> values;
    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = detail::trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        std::uint64_t v;
        if (!detail::parse_u64(sv, v) || sv.find_first_of(" \t") != std::string_view::npos)
            throw error(errc::parse,
                        "line " + std::to_string(line_no) + ": expected one non-negative integer");
        values.push_back(static_cast<std::int64_t>(v));
    }
    if (values.empty()) throw error(errc::parse, "empty input: no degree values found");
    return values;
}

enum class Ordering { first_appearance, sorted_ascending, walk_order };

inline std::string_view ordering_name(Ordering o) {
    switch (o) {
        case Ordering::first_appearance: return "first-appearance";
        case Ordering::sorted_ascending: return "sorted-ascending";
        case Ordering::walk_order: return "walk-order";
    }
    return "unknown";
}

/// Degree values in a declared order plus the ascending order-statistics
/// view X_(1) <= ... <= X_(n) shared by all tail estimators.
struct DegreeSequence {
    std::vector<std::int64_t> values;
    Ordering ordering = Ordering::first_appearance;
    std::vector<std::int64_t> sorted_view;

    static DegreeSequence from_values(std::vector<std::int64_t> vals, Ordering tag) {
        DegreeSequence seq;
        seq.values = std::move(vals);
        seq.ordering = tag;
        seq.sorted_view = seq.values;
        std::sort(seq.sorted_view.begin(), seq.sorted_view.end());
        return seq;
    }
};

inline DegreeSequence degree_sequence(const Graph& g, Ordering tag) {
    if (tag == Ordering::walk_order)
        throw error(errc::usage, "walk-order applies to walk traces, not whole graphs");
    std::vector<std::int64_t> vals(g.node_count);
    for (std::uint32_t v = 0; v < g.node_count; ++v)
        vals[v] = static_cast<std::int64_t>(g.adjacency[v].size());
    if (tag == Ordering::sorted_ascending) std::sort(vals.begin(), vals.end());
    return DegreeSequence::from_values(std::move(vals), tag);
}

}  // namespace evdeg
