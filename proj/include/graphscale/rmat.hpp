#pragma once

#include <cstdint>
#include <random>

#include "graphscale/graph.hpp"

namespace graphscale {

// Recursive-matrix generator, Graph500 quadrant probabilities.
struct RmatParams {
    std::uint32_t scale = 4;        // n = 2^scale
    std::uint32_t avg_degree = 16;  // edge attempts = n * avg_degree
    std::uint64_t seed = 1;
    double a = 0.57, b = 0.19, c = 0.19; // d = 1 - a - b - c = 0.05
};

inline std::uint64_t rmat_vertex_count(std::uint32_t scale) { return std::uint64_t(1) << scale; }

inline std::uint64_t rmat_edge_attempts(std::uint32_t scale, std::uint32_t avg_degree) {
    return rmat_vertex_count(scale) * avg_degree;
}

// Deterministic for a given seed; self loops and duplicates are dropped by
// normalization, so edge_count() <= n * avg_degree.
inline Graph rmat_generate(const RmatParams& p) {
    if (p.scale > 24) throw ConfigError("rmat scale > 24 not supported");
    Graph g;
    g.n = VertexId(rmat_vertex_count(p.scale));
    g.directed = true;
    std::mt19937_64 rng(p.seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const std::uint64_t attempts = rmat_edge_attempts(p.scale, p.avg_degree);
    g.edges.reserve(attempts);
    for (std::uint64_t i = 0; i < attempts; ++i) {
        std::uint64_t u = 0, v = 0;
        for (std::uint32_t bit = 0; bit < p.scale; ++bit) {
            double r = uni(rng);
            u <<= 1;
            v <<= 1;
            if (r < p.a) {
                // top-left quadrant
            } else if (r < p.a + p.b) {
                v |= 1;
            } else if (r < p.a + p.b + p.c) {
                u |= 1;
            } else {
                u |= 1;
                v |= 1;
            }
        }
        g.edges.push_back({VertexId(u), VertexId(v)});
    }
    return normalize(g);
}

inline Graph rmat_generate(std::uint32_t scale, std::uint32_t avg_degree, std::uint64_t seed) {
    RmatParams p;
    p.scale = scale;
    p.avg_degree = avg_degree;
    p.seed = seed;
    return rmat_generate(p);
}

} // namespace graphscale
