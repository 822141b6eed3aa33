#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "graphscale/engine.hpp"
#include "graphscale/suite.hpp"

namespace graphscale {

struct AblationRow {
    std::string flags;
    std::uint64_t cycles = 0;
    std::uint64_t iterations = 0;
    double normalized = 0.0; // against the everything-off baseline
    double imbalance = 0.0;  // per-core edge imbalance under this mapping
};

// Runs every optimization-flag combination and normalizes total cycles to the
// configuration with immediate updates, prefetch skipping and stride mapping
// all turned off.
inline std::vector<AblationRow> ablation_run(const Graph& g, const RunConfig& base,
                                             const std::string& problem,
                                             VertexId root = 0, double damping = 0.85,
                                             std::uint32_t iterations = 16) {
    RunConfig off = base;
    off.immediate_updates = false;
    off.prefetch_skipping = false;
    off.stride_enabled = false;
    RunResult baseline = simulate(g, off, problem, root, damping, iterations);
    std::vector<AblationRow> rows;
    for (const RunConfig& cfg : flag_matrix(base)) {
        AblationRow row;
        row.flags = flag_tag(cfg);
        Engine eng(g, cfg, problem, root, damping, iterations);
        row.imbalance = balance_report(eng.partitions()).imbalance_ratio;
        RunResult r = eng.run();
        row.cycles = r.report.cycles;
        row.iterations = r.iterations;
        row.normalized = baseline.report.cycles == 0
                             ? 0.0
                             : double(r.report.cycles) / double(baseline.report.cycles);
        rows.push_back(std::move(row));
    }
    return rows;
}

struct AsyncSyncResult {
    std::uint64_t async_iterations = 0;
    std::uint64_t sync_iterations = 0;
};

// Same problem, same graph, visibility flipped: asynchronous runs see updates
// as they land, synchronous runs only see the previous iteration's labels.
inline AsyncSyncResult async_vs_sync(const Graph& g, const RunConfig& base,
                                     const std::string& problem, VertexId root = 0) {
    RunConfig async_cfg = base;
    async_cfg.sync_mode = false;
    RunConfig sync_cfg = base;
    sync_cfg.sync_mode = true;
    AsyncSyncResult out;
    out.async_iterations = simulate(g, async_cfg, problem, root).iterations;
    out.sync_iterations = simulate(g, sync_cfg, problem, root).iterations;
    return out;
}

struct AnalyzeResult {
    FootprintReport footprint;
    BalanceReport balance_plain;
    BalanceReport balance_stride;
    AsyncSyncResult bfs_iterations;
};

// Storage and convergence characteristics of one graph under one geometry.
inline AnalyzeResult analyze_graph(const Graph& g, const RunConfig& base,
                                   VertexId root = 0) {
    AnalyzeResult out;
    RunConfig plain = base;
    plain.stride_enabled = false;
    RunConfig strided = base;
    strided.stride_enabled = true;
    {
        Engine eng(g, plain, "bfs", root);
        out.footprint = footprint_report(eng.partitions());
        out.balance_plain = balance_report(eng.partitions());
    }
    {
        Engine eng(g, strided, "bfs", root);
        out.balance_stride = balance_report(eng.partitions());
    }
    out.bfs_iterations = async_vs_sync(g, base, "bfs", root);
    return out;
}

} // namespace graphscale
