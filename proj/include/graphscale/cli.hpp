#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "graphscale/engine.hpp"
#include "graphscale/experiments.hpp"
#include "graphscale/oracles.hpp"
#include "graphscale/rmat.hpp"
#include "graphscale/suite.hpp"

namespace graphscale {
namespace cli {

inline Graph load_graph(const std::string& path, bool undirected) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open graph file: " + path);
    Graph g = parse_edge_list(in, /*directed=*/true);
    if (undirected) g = symmetrize(g);
    return g;
}

inline void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open output file: " + path);
    out << text;
}

struct RunFlags {
    std::string graph_path;
    std::string problem = "bfs";
    std::uint64_t root = 0;
    double damping = 0.85;
    std::uint32_t iters = 16;
    bool undirected = false;
    std::string report_path;
    std::uint32_t max_iterations = 0;
    bool sync_mode = false;
    bool no_oracle = false;
};

// Shared --cores/--lanes/... option block. scratch-bits defaults to an even
// split of the 2^21-label budget across cores unless given explicitly.
struct ConfigFlags {
    std::uint32_t cores = 1;
    std::uint32_t lanes = 16;
    std::uint32_t pipelines = 8;
    std::int32_t scratch_bits = -1;
    std::uint32_t reorder_slots = 32;
    std::uint32_t stride = 100;
    bool no_stride = false;
    bool no_immediate = false;
    bool no_skip = false;

    RunConfig to_run_config() const {
        RunConfig c;
        c.p = cores;
        c.e = lanes;
        c.v = pipelines;
        if (scratch_bits >= 0) {
            c.scratch_bits = std::uint32_t(scratch_bits);
        } else {
            if (!is_pow2(cores)) throw ConfigError("core count must be a power of two");
            c.scratch_bits = 21 - log2_exact(cores);
        }
        c.reorder_slots = reorder_slots;
        c.stride = stride;
        c.stride_enabled = !no_stride;
        c.immediate_updates = !no_immediate;
        // --no-immediate alone leaves skipping requested, which
        // validate_config rejects: skipping requires immediate updates
        c.prefetch_skipping = !no_skip;
        return c;
    }
};

inline void add_config_flags(CLI::App* cmd, ConfigFlags& f) {
    cmd->add_option("--cores", f.cores, "graph core / memory channel count");
    cmd->add_option("--lanes", f.lanes, "accumulator lanes per line (e)");
    cmd->add_option("--pipelines", f.pipelines, "vertex pipelines per core (v)");
    cmd->add_option("--scratch-bits", f.scratch_bits,
                    "per-core scratch capacity as log2(label slots)");
    cmd->add_option("--reorder-slots", f.reorder_slots, "crossbar reorder slots");
    cmd->add_option("--stride", f.stride, "stride for the vertex id mapping");
    cmd->add_flag("--no-stride", f.no_stride, "disable stride mapping");
    cmd->add_flag("--no-immediate", f.no_immediate, "disable immediate updates");
    cmd->add_flag("--no-skip", f.no_skip, "disable prefetch skipping");
}

inline bool verify_against_oracle(const Graph& g, const std::string& problem,
                                  VertexId root, double damping,
                                  std::uint32_t iterations, const RunResult& r) {
    if (problem == "bfs") {
        std::vector<std::uint32_t> want = oracle_bfs(g, root);
        for (std::uint32_t v = 0; v < g.n; ++v)
            if (r.labels[v] != want[v]) return false;
        return true;
    }
    if (problem == "wcc") {
        std::vector<std::uint32_t> want = oracle_wcc(g);
        for (std::uint32_t v = 0; v < g.n; ++v)
            if (r.labels[v] != want[v]) return false;
        return true;
    }
    std::vector<double> want = oracle_pr(g, damping, r.iterations);
    std::vector<double> got = extract_ranks(r.labels);
    for (std::uint32_t v = 0; v < g.n; ++v)
        if (!pr_close(got[v], want[v], 1e-5)) return false;
    return true;
}

inline std::string iteration_trace_csv(const SimReport& r) {
    std::ostringstream os;
    os << "iteration,updates,cycles,any_update\n";
    for (const IterationStats& it : r.per_iteration)
        os << it.iteration << "," << it.updates << "," << it.cycles << ","
           << (it.any_update ? 1 : 0) << "\n";
    return os.str();
}

inline int cmd_run(const RunFlags& rf, const ConfigFlags& cf) {
    bool undirected = rf.undirected || rf.problem == "wcc";
    Graph g = load_graph(rf.graph_path, undirected);
    RunConfig cfg = cf.to_run_config();
    cfg.sync_mode = rf.sync_mode;
    cfg.max_iterations = rf.max_iterations;
    validate_config(cfg);
    if (rf.root >= g.n && !(g.n == 0 && rf.root == 0))
        throw ConfigError("root vertex out of range");
    Engine eng(g, cfg, rf.problem, VertexId(rf.root), rf.damping, rf.iters);
    RunResult r = eng.run();
    r.report.graph_name = rf.graph_path;
    if (!rf.no_oracle)
        r.report.oracle_verified =
            verify_against_oracle(g, rf.problem, VertexId(rf.root), rf.damping,
                                  rf.iters, r);
    write_text(rf.report_path, report_to_json(r.report).dump(2) + "\n");
    if (const char* dir = std::getenv("GRAPHSCALE_TRACE_DIR")) {
        std::string base = rf.graph_path;
        std::size_t slash = base.find_last_of('/');
        if (slash != std::string::npos) base = base.substr(slash + 1);
        write_text(std::string(dir) + "/" + base + "." + rf.problem + ".trace.csv",
                   iteration_trace_csv(r.report));
    }
    if (r.report.oracle_verified && !*r.report.oracle_verified) {
        std::cerr << "oracle mismatch\n";
        return 1;
    }
    return r.converged ? 0 : 2;
}

inline int cmd_verify(bool quick, bool all_flags, std::uint32_t pr_iters) {
    VerifyOptions opt;
    opt.quick = quick;
    opt.all_flag_combos = all_flags;
    opt.pr_iterations = pr_iters;
    std::vector<VerifyCase> table = run_verify(opt);
    std::size_t failures = 0;
    for (const VerifyCase& c : table) {
        std::cout << (c.pass ? "pass" : "FAIL") << "  " << c.graph << "  " << c.problem
                  << "  p=" << c.cores << "  " << c.flags;
        if (!c.pass) std::cout << "  (" << c.detail << ")";
        std::cout << "\n";
        if (!c.pass) ++failures;
    }
    std::cout << table.size() << " cases, " << failures << " failures\n";
    return failures == 0 ? 0 : 1;
}

inline int cmd_partition(const std::string& graph_path, const ConfigFlags& cf,
                         bool undirected, const std::string& out_dir) {
    Graph g = load_graph(graph_path, undirected);
    RunConfig cfg = cf.to_run_config();
    PartitionGeometry geo =
        compute_geometry(g.n, cfg.p, cfg.e, std::uint64_t(1) << cfg.scratch_bits);
    std::optional<StrideMap> sm;
    if (cfg.stride_enabled && g.n > 0) sm = stride_map(g.n, cfg.stride);
    PartitionedGraph pg = build_partitions(g, geo, sm);
    save_partitions(pg, out_dir);
    BalanceReport bal = balance_report(pg);
    FootprintReport fp = footprint_report(pg);
    nlohmann::json j{{"n", g.n},
                     {"edges", pg.edge_count},
                     {"cores", geo.p},
                     {"sub_intervals_per_core", geo.l},
                     {"sub_partitions", std::size_t(geo.p) * geo.p * geo.l},
                     {"imbalance_ratio", bal.imbalance_ratio},
                     {"csr_bytes_per_edge", fp.csr_bytes_per_edge},
                     {"edge_list_bytes_per_edge", fp.edge_list_bytes_per_edge},
                     {"out_dir", out_dir}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

inline int cmd_generate(std::uint32_t scale, std::uint32_t degree, std::uint64_t seed,
                        const std::string& out_path) {
    RmatParams rp;
    rp.scale = scale;
    rp.avg_degree = degree;
    rp.seed = seed;
    Graph g = rmat_generate(rp);
    write_text(out_path, serialize_edge_list(g));
    return 0;
}

inline int cmd_ablate(const std::string& graph_path, const ConfigFlags& cf,
                      const std::string& problem, std::uint64_t root, bool undirected,
                      const std::string& out_path) {
    Graph g = load_graph(graph_path, undirected || problem == "wcc");
    RunConfig base = cf.to_run_config();
    std::vector<AblationRow> rows = ablation_run(g, base, problem, VertexId(root));
    std::ostringstream os;
    os << "flags,cycles,iterations,normalized,imbalance_ratio\n";
    for (const AblationRow& r : rows)
        os << r.flags << "," << r.cycles << "," << r.iterations << "," << r.normalized
           << "," << r.imbalance << "\n";
    write_text(out_path, os.str());
    return 0;
}

inline int cmd_analyze(const std::string& graph_path, const ConfigFlags& cf,
                       bool undirected, const std::string& out_path) {
    Graph g = load_graph(graph_path, undirected);
    RunConfig base = cf.to_run_config();
    AnalyzeResult a = analyze_graph(g, base);
    nlohmann::json j{
        {"csr_bytes_per_edge", a.footprint.csr_bytes_per_edge},
        {"edge_list_bytes_per_edge", a.footprint.edge_list_bytes_per_edge},
        {"imbalance_ratio_plain", a.balance_plain.imbalance_ratio},
        {"imbalance_ratio_stride", a.balance_stride.imbalance_ratio},
        {"bfs_iterations_async", a.bfs_iterations.async_iterations},
        {"bfs_iterations_sync", a.bfs_iterations.sync_iterations},
    };
    write_text(out_path, j.dump(2) + "\n");
    return 0;
}

inline int cli_main(int argc, const char* const* argv) {
    CLI::App app{"graphscale: cycle model of a multi-channel graph accelerator"};
    app.require_subcommand(1);

    RunFlags rf;
    ConfigFlags run_cf;
    CLI::App* run = app.add_subcommand("run", "simulate one problem on one graph");
    run->add_option("--graph", rf.graph_path, "edge-list file")->required();
    run->add_option("--problem", rf.problem, "bfs | wcc | pr")->required();
    run->add_option("--root", rf.root, "bfs root vertex");
    run->add_option("--damping", rf.damping, "pr damping factor");
    run->add_option("--iters", rf.iters, "pr iteration count");
    run->add_option("--max-iterations", rf.max_iterations, "hard iteration cap");
    run->add_flag("--undirected", rf.undirected, "symmetrize the input");
    run->add_flag("--sync", rf.sync_mode, "synchronous reference mode");
    run->add_flag("--no-oracle", rf.no_oracle, "skip oracle verification");
    run->add_option("--report", rf.report_path, "report JSON path (default stdout)");
    add_config_flags(run, run_cf);

    bool vq = false, vall = false;
    std::uint32_t vpr = 8;
    CLI::App* verify = app.add_subcommand("verify", "engine vs oracles on the built-in suite");
    verify->add_flag("--quick", vq, "smaller corpus");
    verify->add_flag("--all-flags", vall, "every optimization-flag combination");
    verify->add_option("--pr-iters", vpr, "pr iteration count");

    std::string pg_path, pg_out;
    bool pg_undirected = false;
    ConfigFlags part_cf;
    CLI::App* part = app.add_subcommand("partition", "write sub-partition files");
    part->add_option("--graph", pg_path, "edge-list file")->required();
    part->add_option("--out", pg_out, "output directory")->required();
    part->add_flag("--undirected", pg_undirected, "symmetrize the input");
    add_config_flags(part, part_cf);

    std::uint32_t gscale = 10, gdegree = 16;
    std::uint64_t gseed = 1;
    std::string gout;
    CLI::App* gen = app.add_subcommand("generate", "write a recursive-matrix random graph");
    gen->add_option("--scale", gscale, "log2 vertex count")->required();
    gen->add_option("--degree", gdegree, "average degree")->required();
    gen->add_option("--seed", gseed, "rng seed");
    gen->add_option("--out", gout, "output file (default stdout)");

    std::string ab_path, ab_problem = "bfs", ab_out;
    std::uint64_t ab_root = 0;
    bool ab_undirected = false;
    ConfigFlags ab_cf;
    CLI::App* ablate = app.add_subcommand("ablate", "cycle table per optimization combo");
    ablate->add_option("--graph", ab_path, "edge-list file")->required();
    ablate->add_option("--problem", ab_problem, "bfs | wcc | pr");
    ablate->add_option("--root", ab_root, "bfs root vertex");
    ablate->add_flag("--undirected", ab_undirected, "symmetrize the input");
    ablate->add_option("--out", ab_out, "CSV path (default stdout)");
    add_config_flags(ablate, ab_cf);

    std::string an_path, an_out;
    bool an_undirected = false;
    ConfigFlags an_cf;
    CLI::App* analyze = app.add_subcommand("analyze", "footprint, balance and convergence");
    analyze->add_option("--graph", an_path, "edge-list file")->required();
    analyze->add_flag("--undirected", an_undirected, "symmetrize the input");
    analyze->add_option("--out", an_out, "JSON path (default stdout)");
    add_config_flags(analyze, an_cf);

    try {
        app.parse(argc, argv);
        if (run->parsed()) return cmd_run(rf, run_cf);
        if (verify->parsed()) return cmd_verify(vq, vall, vpr);
        if (part->parsed()) return cmd_partition(pg_path, part_cf, pg_undirected, pg_out);
        if (gen->parsed()) return cmd_generate(gscale, gdegree, gseed, gout);
        if (ablate->parsed())
            return cmd_ablate(ab_path, ab_cf, ab_problem, ab_root, ab_undirected, ab_out);
        if (analyze->parsed()) return cmd_analyze(an_path, an_cf, an_undirected, an_out);
        return 1;
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e); // 0 for --help, CLI11 codes otherwise
        return rc == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace cli
} // namespace graphscale
