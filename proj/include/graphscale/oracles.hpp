#pragma once

#include <queue>
#include <vector>

#include "graphscale/graph.hpp"

namespace graphscale {

namespace detail {

// CSR adjacency over the given edge direction.
struct Adjacency {
    std::vector<std::uint32_t> offsets;
    std::vector<VertexId> targets;

    explicit Adjacency(const Graph& g, bool reversed = false) {
        offsets.assign(std::size_t(g.n) + 1, 0);
        for (const Edge& e : g.edges) ++offsets[(reversed ? e.dst : e.src) + 1];
        for (std::size_t i = 1; i < offsets.size(); ++i) offsets[i] += offsets[i - 1];
        targets.resize(g.edges.size());
        std::vector<std::uint32_t> cursor(offsets.begin(), offsets.end() - 1);
        for (const Edge& e : g.edges) {
            VertexId from = reversed ? e.dst : e.src;
            VertexId to = reversed ? e.src : e.dst;
            targets[cursor[from]++] = to;
        }
    }
};

} // namespace detail

// Hop distance from root over directed edges; kInf32 when unreachable.
inline std::vector<std::uint32_t> oracle_bfs(const Graph& g, VertexId root) {
    if (root >= g.n && g.n > 0) throw ConfigError("bfs root out of range");
    std::vector<std::uint32_t> dist(g.n, kInf32);
    if (g.n == 0) return dist;
    detail::Adjacency adj(g);
    dist[root] = 0;
    std::queue<VertexId> q;
    q.push(root);
    while (!q.empty()) {
        VertexId u = q.front();
        q.pop();
        for (std::uint32_t k = adj.offsets[u]; k < adj.offsets[u + 1]; ++k) {
            VertexId w = adj.targets[k];
            if (dist[w] == kInf32) {
                dist[w] = dist[u] + 1;
                q.push(w);
            }
        }
    }
    return dist;
}

// Minimum vertex id of each weakly connected component (edges treated as
// undirected regardless of direction flags).
inline std::vector<std::uint32_t> oracle_wcc(const Graph& g) {
    std::vector<std::uint32_t> comp(g.n, kInf32);
    detail::Adjacency fwd(g);
    detail::Adjacency rev(g, /*reversed=*/true);
    std::vector<VertexId> stack;
    for (VertexId s = 0; s < g.n; ++s) {
        if (comp[s] != kInf32) continue;
        comp[s] = s; // ascending scan: s is the component minimum
        stack.push_back(s);
        while (!stack.empty()) {
            VertexId u = stack.back();
            stack.pop_back();
            auto visit = [&](const detail::Adjacency& a) {
                for (std::uint32_t k = a.offsets[u]; k < a.offsets[u + 1]; ++k) {
                    VertexId w = a.targets[k];
                    if (comp[w] == kInf32) {
                        comp[w] = s;
                        stack.push_back(w);
                    }
                }
            };
            visit(fwd);
            visit(rev);
        }
    }
    return comp;
}

// Synchronous double-buffered PageRank. Ranks start at 1/n; each iteration
// computes p(i) = (1-d)/n + d * sum over in-neighbors j of p(j)/outdeg(j).
// Zero-out-degree vertices contribute nothing (rank mass is not reinjected).
inline std::vector<double> oracle_pr(const Graph& g, double damping = 0.85,
                                     std::uint32_t iterations = 16) {
    if (g.n == 0) throw ConfigError("pagerank needs at least one vertex");
    std::vector<double> prev(g.n, 1.0 / g.n);
    std::vector<double> next(g.n, 0.0);
    std::vector<std::uint32_t> deg = out_degrees(g);
    detail::Adjacency in(g, /*reversed=*/true);
    const double base = (1.0 - damping) / g.n;
    for (std::uint32_t t = 0; t < iterations; ++t) {
        for (VertexId v = 0; v < g.n; ++v) {
            double acc = 0.0;
            for (std::uint32_t k = in.offsets[v]; k < in.offsets[v + 1]; ++k) {
                VertexId j = in.targets[k];
                if (deg[j] > 0) acc += prev[j] / deg[j];
            }
            next[v] = base + damping * acc;
        }
        prev.swap(next);
    }
    return prev;
}

} // namespace graphscale
