#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "graphscale/engine.hpp"
#include "graphscale/oracles.hpp"
#include "graphscale/rmat.hpp"

namespace graphscale {

// Deterministic built-in graphs used by the verify matrix and the tests.

// k edges in a straight line over k+1 vertices.
inline Graph make_chain(std::uint32_t k) {
    Graph g;
    g.n = k + 1;
    for (std::uint32_t i = 0; i < k; ++i) g.edges.push_back(Edge{i, i + 1});
    return g;
}

inline Graph make_ring(std::uint32_t k) {
    Graph g;
    g.n = k;
    for (std::uint32_t i = 0; i < k; ++i) g.edges.push_back(Edge{i, (i + 1) % k});
    return g;
}

// Vertex 0 points at every leaf.
inline Graph make_star(std::uint32_t leaves) {
    Graph g;
    g.n = leaves + 1;
    for (std::uint32_t i = 1; i <= leaves; ++i) g.edges.push_back(Edge{0, i});
    return g;
}

// Every leaf points at one of the first `hubs` vertices, round-robin. The
// hub in-degrees stay heavy, so the destination intervals are skewed for any
// hub count below the core count.
inline Graph make_hub_star(std::uint32_t hubs, std::uint32_t leaves) {
    if (hubs == 0) throw ConfigError("hub star needs at least one hub");
    Graph g;
    g.n = hubs + leaves;
    for (std::uint32_t i = 0; i < leaves; ++i)
        g.edges.push_back(Edge{hubs + i, i % hubs});
    for (std::uint32_t h = 0; h + 1 < hubs; ++h) g.edges.push_back(Edge{h, h + 1});
    return g;
}

// Two disjoint chains: a edges rooted at 0, b edges rooted at a+1.
inline Graph make_two_component(std::uint32_t a, std::uint32_t b) {
    Graph g;
    g.n = a + b + 2;
    for (std::uint32_t i = 0; i < a; ++i) g.edges.push_back(Edge{i, i + 1});
    for (std::uint32_t i = 0; i < b; ++i)
        g.edges.push_back(Edge{a + 1 + i, a + 2 + i});
    return g;
}

struct SuiteGraph {
    std::string name;
    Graph graph;
    VertexId root = 0;
};

// The standard verification corpus: chains up to 1024 edges, stars, rings,
// two-component graphs, and R-MAT scales 4 through 10 at average degrees
// {2, 16, 86}.
inline std::vector<SuiteGraph> built_in_suite(bool quick = false) {
    std::vector<SuiteGraph> out;
    auto add = [&](std::string name, Graph g, VertexId root) {
        out.push_back(SuiteGraph{std::move(name), std::move(g), root});
    };
    add("chain-4", make_chain(4), 0);
    add("chain-64", make_chain(64), 0);
    if (!quick) add("chain-1024", make_chain(1024), 0);
    add("star-16", make_star(16), 0);
    add("star-64", make_star(64), 0);
    add("hubstar-8-256", make_hub_star(8, 256), 8);
    add("ring-5", make_ring(5), 0);
    add("ring-64", make_ring(64), 3);
    add("twocomp-8-13", make_two_component(8, 13), 0);
    std::vector<std::uint32_t> scales = quick ? std::vector<std::uint32_t>{4, 7, 10}
                                              : std::vector<std::uint32_t>{4, 5, 6, 7, 8, 9, 10};
    for (std::uint32_t s : scales)
        for (std::uint32_t d : {2u, 16u, 86u}) {
            RmatParams rp;
            rp.scale = s;
            rp.avg_degree = d;
            rp.seed = 1000 + s * 10 + d;
            add("rmat-" + std::to_string(s) + "-" + std::to_string(d), rmat_generate(rp), 0);
        }
    return out;
}

// The optimization-flag product: {immediate, immediate+skip, neither} with
// and without stride mapping. Skipping without immediate propagation is not
// a valid configuration and is excluded.
inline std::vector<RunConfig> flag_matrix(RunConfig base) {
    std::vector<RunConfig> out;
    for (bool stride : {true, false})
        for (int mode : {0, 1, 2}) {
            RunConfig c = base;
            c.stride_enabled = stride;
            c.immediate_updates = mode >= 1;
            c.prefetch_skipping = mode == 2;
            out.push_back(c);
        }
    return out;
}

inline std::string flag_tag(const RunConfig& c) {
    std::string s;
    s += c.immediate_updates ? "imm" : "---";
    s += c.prefetch_skipping ? "+skip" : "";
    s += c.stride_enabled ? "+stride" : "";
    if (c.sync_mode) s += "+sync";
    return s;
}

struct VerifyCase {
    std::string graph;
    std::string problem;
    std::uint32_t cores = 0;
    std::string flags;
    bool pass = false;
    std::string detail;
};

struct VerifyOptions {
    std::vector<std::uint32_t> core_counts = {1, 2, 4};
    bool quick = false;
    bool all_flag_combos = false; // default runs the standard flag set only
    std::uint32_t pr_iterations = 8;
    // Test hook: mutates the constructed problem definition before the run,
    // so a deliberately broken reduce provably turns the matrix red.
    std::function<void(Problem&)> mutate;
};

inline bool pr_close(double a, double b, double rel_tol) {
    double scale = std::max({std::fabs(a), std::fabs(b), 1e-12});
    return std::fabs(a - b) <= rel_tol * scale;
}

// Runs the engine against the oracles over the built-in corpus. BFS and WCC
// must match exactly; PR must agree within 1e-5 relative per vertex at the
// same iteration count.
inline std::vector<VerifyCase> run_verify(const VerifyOptions& opt = {}) {
    std::vector<VerifyCase> table;
    const double kPrRelTol = 1e-5;
    for (const SuiteGraph& sg : built_in_suite(opt.quick)) {
        Graph undirected = symmetrize(sg.graph);
        std::vector<std::uint32_t> bfs_oracle = oracle_bfs(sg.graph, sg.root);
        std::vector<std::uint32_t> wcc_oracle = oracle_wcc(undirected);
        std::vector<double> pr_oracle = oracle_pr(sg.graph, 0.85, opt.pr_iterations);
        for (std::uint32_t p : opt.core_counts) {
            RunConfig base;
            base.p = p;
            base.scratch_bits = 21 - log2_exact(p);
            std::vector<RunConfig> cfgs =
                opt.all_flag_combos ? flag_matrix(base) : std::vector<RunConfig>{base};
            for (const RunConfig& cfg : cfgs) {
                for (const char* prob : {"bfs", "wcc", "pr"}) {
                    VerifyCase vc;
                    vc.graph = sg.name;
                    vc.problem = prob;
                    vc.cores = p;
                    vc.flags = flag_tag(cfg);
                    const Graph& g = std::string(prob) == "wcc" ? undirected : sg.graph;
                    try {
                        Engine eng(g, cfg, prob, sg.root, 0.85, opt.pr_iterations);
                        if (opt.mutate) opt.mutate(eng.problem_mutable());
                        RunResult r = eng.run();
                        vc.pass = true;
                        if (std::string(prob) == "bfs") {
                            for (std::uint32_t v = 0; v < g.n; ++v)
                                if (r.labels[v] != bfs_oracle[v]) {
                                    vc.pass = false;
                                    vc.detail = "bfs label mismatch at vertex " +
                                                std::to_string(v);
                                    break;
                                }
                        } else if (std::string(prob) == "wcc") {
                            for (std::uint32_t v = 0; v < g.n; ++v)
                                if (r.labels[v] != wcc_oracle[v]) {
                                    vc.pass = false;
                                    vc.detail = "wcc label mismatch at vertex " +
                                                std::to_string(v);
                                    break;
                                }
                        } else {
                            std::vector<double> ranks = extract_ranks(r.labels);
                            for (std::uint32_t v = 0; v < g.n; ++v)
                                if (!pr_close(ranks[v], pr_oracle[v], kPrRelTol)) {
                                    vc.pass = false;
                                    vc.detail = "pr rank off at vertex " +
                                                std::to_string(v);
                                    break;
                                }
                        }
                    } catch (const std::exception& e) {
                        vc.pass = false;
                        vc.detail = e.what();
                    }
                    table.push_back(std::move(vc));
                }
            }
        }
    }
    return table;
}

} // namespace graphscale
