#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "graphscale/common.hpp"

namespace graphscale {

struct Edge {
    VertexId src = 0;
    VertexId dst = 0;
    friend bool operator==(const Edge&, const Edge&) = default;
};

// Edge list plus vertex count. Normalized form: no self loops, no duplicate
// edges, undirected graphs carry both directions explicitly.
struct Graph {
    VertexId n = 0;
    bool directed = true;
    std::vector<Edge> edges;

    std::uint64_t edge_count() const { return edges.size(); }
    friend bool operator==(const Graph&, const Graph&) = default;
};

namespace detail {

inline std::uint64_t edge_key(VertexId u, VertexId v) {
    return (std::uint64_t(u) << 32) | v;
}

// Drops self loops and duplicates (first occurrence wins, order preserved).
inline std::vector<Edge> dedupe_edges(const std::vector<Edge>& in) {
    std::vector<Edge> out;
    out.reserve(in.size());
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(in.size() * 2);
    for (const Edge& e : in) {
        if (e.src == e.dst) continue;
        if (seen.insert(edge_key(e.src, e.dst)).second) out.push_back(e);
    }
    return out;
}

} // namespace detail

// Adds the reverse of every edge, then dedupes. Original first-occurrence
// order is kept; missing reverses are appended behind the originals.
inline Graph symmetrize(const Graph& g) {
    Graph out;
    out.n = g.n;
    out.directed = false;
    std::vector<Edge> all = g.edges;
    all.reserve(g.edges.size() * 2);
    for (const Edge& e : g.edges) all.push_back({e.dst, e.src});
    out.edges = detail::dedupe_edges(all);
    return out;
}

inline Graph normalize(Graph g) {
    g.edges = detail::dedupe_edges(g.edges);
    if (!g.directed) g = symmetrize(g);
    for (const Edge& e : g.edges) {
        if (e.src >= g.n || e.dst >= g.n)
            throw ParseError("edge endpoint out of range: " + std::to_string(e.src) + " " +
                             std::to_string(e.dst) + " with n=" + std::to_string(g.n));
    }
    return g;
}

// Text format: one "u v" pair per line, '#' starts a comment line, an optional
// leading "% n m" header pins the vertex count (needed for trailing isolated
// vertices). Without a header n is max id + 1.
inline Graph parse_edge_list(std::istream& in, bool directed = true) {
    Graph g;
    g.directed = directed;
    bool have_header = false;
    std::uint64_t header_n = 0;
    std::string line;
    std::size_t line_no = 0;
    std::uint64_t max_id = 0;
    bool any_vertex = false;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t pos = line.find_first_not_of(" \t\r");
        if (pos == std::string::npos) continue;
        if (line[pos] == '#') continue;
        if (line[pos] == '%') {
            if (have_header || !g.edges.empty())
                throw ParseError("stray '%' header at line " + std::to_string(line_no));
            std::istringstream hs(line.substr(pos + 1));
            std::uint64_t m = 0;
            if (!(hs >> header_n >> m))
                throw ParseError("malformed '% n m' header at line " + std::to_string(line_no));
            have_header = true;
            continue;
        }
        std::istringstream ls(line);
        std::uint64_t u, v;
        if (!(ls >> u >> v))
            throw ParseError("malformed edge at line " + std::to_string(line_no) + ": " + line);
        std::string rest;
        if (ls >> rest)
            throw ParseError("trailing tokens at line " + std::to_string(line_no) + ": " + line);
        if (u > 0xFFFFFFFFull || v > 0xFFFFFFFFull)
            throw ParseError("vertex id exceeds 32 bits at line " + std::to_string(line_no));
        g.edges.push_back({VertexId(u), VertexId(v)});
        max_id = std::max({max_id, u, v});
        any_vertex = true;
    }
    if (have_header) {
        if (any_vertex && max_id >= header_n)
            throw ParseError("header n=" + std::to_string(header_n) +
                             " smaller than max vertex id " + std::to_string(max_id));
        if (header_n > 0xFFFFFFFFull) throw ParseError("header n exceeds 32 bits");
        g.n = VertexId(header_n);
    } else {
        g.n = any_vertex ? VertexId(max_id + 1) : 0;
    }
    return normalize(g);
}

inline Graph parse_edge_list(const std::string& text, bool directed = true) {
    std::istringstream in(text);
    return parse_edge_list(in, directed);
}

inline void serialize_edge_list(const Graph& g, std::ostream& out) {
    out << "% " << g.n << " " << g.edges.size() << "\n";
    for (const Edge& e : g.edges) out << e.src << " " << e.dst << "\n";
}

inline std::string serialize_edge_list(const Graph& g) {
    std::ostringstream out;
    serialize_edge_list(g, out);
    return out.str();
}

// Swaps every edge direction. An involution on normalized graphs.
inline Graph invert_edges(const Graph& g) {
    Graph out;
    out.n = g.n;
    out.directed = g.directed;
    out.edges.reserve(g.edges.size());
    for (const Edge& e : g.edges) out.edges.push_back({e.dst, e.src});
    return out;
}

inline std::vector<std::uint32_t> out_degrees(const Graph& g) {
    std::vector<std::uint32_t> deg(g.n, 0);
    for (const Edge& e : g.edges) ++deg[e.src];
    return deg;
}

inline std::vector<std::uint32_t> in_degrees(const Graph& g) {
    std::vector<std::uint32_t> deg(g.n, 0);
    for (const Edge& e : g.edges) ++deg[e.dst];
    return deg;
}

// Compressed graph plus the id remap needed to translate results back.
// Dropping zero-out-degree vertices also drops edges pointing at them, so
// traversal results on the compressed graph differ from the original; anything
// derived from this must stay flagged as semantics-altering.
struct CompressResult {
    Graph graph;
    std::vector<VertexId> new_to_old;
    std::vector<VertexId> old_to_new; // kInf32 for removed vertices
    static constexpr bool semantics_altering = true;
};

inline CompressResult vertex_range_compress(const Graph& g) {
    std::vector<std::uint32_t> deg = out_degrees(g);
    CompressResult res;
    res.old_to_new.assign(g.n, kInf32);
    for (VertexId v = 0; v < g.n; ++v) {
        if (deg[v] > 0) {
            res.old_to_new[v] = VertexId(res.new_to_old.size());
            res.new_to_old.push_back(v);
        }
    }
    res.graph.n = VertexId(res.new_to_old.size());
    res.graph.directed = g.directed;
    for (const Edge& e : g.edges) {
        VertexId u = res.old_to_new[e.src];
        VertexId v = res.old_to_new[e.dst];
        if (u != kInf32 && v != kInf32) res.graph.edges.push_back({u, v});
    }
    return res;
}

} // namespace graphscale
