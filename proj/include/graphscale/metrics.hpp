#pragma once

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "graphscale/common.hpp"

namespace graphscale {

// Graph500-style throughput: millions of traversed edges per second.
inline double compute_mteps(std::uint64_t edges, double t_exec_seconds) {
    if (t_exec_seconds <= 0.0) throw ConfigError("execution time must be positive");
    return double(edges) / t_exec_seconds / 1e6;
}

// Raw edge throughput across all iterations.
inline double compute_mteps_star(std::uint64_t edges, std::uint32_t iterations,
                                 double t_exec_seconds) {
    if (t_exec_seconds <= 0.0) throw ConfigError("execution time must be positive");
    if (iterations < 1) throw ConfigError("iteration count must be >= 1");
    return double(edges) * double(iterations) / t_exec_seconds / 1e6;
}

struct IterationStats {
    std::uint32_t iteration = 0;
    bool any_update = false;
    std::uint64_t updates = 0;
    std::uint64_t cycles = 0; // prefetch span + processing span, all meta steps
};

struct SimReport {
    int schema_version = 1;
    std::string graph_name;
    std::string problem;

    // configuration echo
    std::uint32_t p = 1, e = 16, v = 8;
    std::uint32_t scratch_bits = 21;
    std::uint32_t reorder_slots = 32, bank_queue_depth = 4;
    std::uint32_t stride = 0; // 0 when mapping disabled
    bool immediate_updates = true, prefetch_skipping = true, sync_mode = false;

    std::uint64_t n = 0, edges = 0;
    std::uint32_t iterations = 0;
    bool converged = false;

    std::uint64_t cycles = 0;            // global clock over the whole run
    std::uint64_t processing_cycles = 0; // processing spans only (no prefetch)
    double frequency_hz = 170e6;
    double t_exec_seconds = 0.0;
    double mteps = 0.0;
    double mteps_star = 0.0; // always mteps * iterations

    std::uint64_t bytes_neighbors = 0, bytes_pointers = 0, bytes_source_labels = 0,
                  bytes_prefetch = 0, bytes_written = 0;
    std::uint64_t stall_crossbar = 0, stall_channel = 0, stall_rows = 0, barrier_idle = 0;
    std::uint64_t prefetch_cycle_total = 0, prefetches = 0, prefetch_skips = 0;
    std::uint64_t issue_window_cycles = 0, issue_min_cycles = 0;
    std::uint64_t crossbar_requests = 0, crossbar_responses = 0;
    std::uint64_t crossbar_bank_conflicts = 0, crossbar_return_conflicts = 0,
                  crossbar_result_stalls = 0;
    std::uint64_t updates_applied = 0;

    std::optional<bool> oracle_verified;
    std::vector<IterationStats> per_iteration;

    std::uint64_t bytes_read_total() const {
        return bytes_neighbors + bytes_pointers + bytes_source_labels + bytes_prefetch;
    }
};

inline void finalize_throughput(SimReport& r) {
    r.t_exec_seconds = double(r.cycles) / r.frequency_hz;
    if (r.edges > 0 && r.t_exec_seconds > 0.0) {
        r.mteps = compute_mteps(r.edges, r.t_exec_seconds);
        r.mteps_star = r.mteps * double(r.iterations);
    } else {
        r.mteps = 0.0;
        r.mteps_star = 0.0;
    }
}

inline nlohmann::json report_to_json(const SimReport& r) {
    nlohmann::json j{
        {"schema_version", r.schema_version},
        {"graph", r.graph_name},
        {"problem", r.problem},
        {"config",
         {{"cores", r.p},
          {"lanes", r.e},
          {"pipelines", r.v},
          {"scratch_bits", r.scratch_bits},
          {"reorder_slots", r.reorder_slots},
          {"bank_queue_depth", r.bank_queue_depth},
          {"stride", r.stride},
          {"immediate_updates", r.immediate_updates},
          {"prefetch_skipping", r.prefetch_skipping},
          {"sync_mode", r.sync_mode}}},
        {"n", r.n},
        {"edges", r.edges},
        {"iterations", r.iterations},
        {"converged", r.converged},
        {"cycles", r.cycles},
        {"processing_cycles", r.processing_cycles},
        {"frequency_hz", r.frequency_hz},
        {"t_exec_seconds", r.t_exec_seconds},
        {"mteps", r.mteps},
        {"mteps_star", r.mteps_star},
        {"bytes",
         {{"neighbors", r.bytes_neighbors},
          {"pointers", r.bytes_pointers},
          {"source_labels", r.bytes_source_labels},
          {"prefetch", r.bytes_prefetch},
          {"written", r.bytes_written},
          {"read_total", r.bytes_read_total()}}},
        {"stalls",
         {{"crossbar", r.stall_crossbar},
          {"channel", r.stall_channel},
          {"rows", r.stall_rows},
          {"barrier_idle", r.barrier_idle},
          {"crossbar_bank_conflicts", r.crossbar_bank_conflicts},
          {"crossbar_return_conflicts", r.crossbar_return_conflicts},
          {"crossbar_result_stalls", r.crossbar_result_stalls}}},
        {"prefetch",
         {{"cycles", r.prefetch_cycle_total},
          {"count", r.prefetches},
          {"skips", r.prefetch_skips}}},
        {"issue", {{"window_cycles", r.issue_window_cycles}, {"min_cycles", r.issue_min_cycles}}},
        {"crossbar_traffic", {{"requests", r.crossbar_requests}, {"responses", r.crossbar_responses}}},
        {"updates_applied", r.updates_applied},
    };
    if (r.oracle_verified) j["oracle_verified"] = *r.oracle_verified;
    nlohmann::json iters = nlohmann::json::array();
    for (const auto& it : r.per_iteration)
        iters.push_back({{"iteration", it.iteration},
                         {"any_update", it.any_update},
                         {"updates", it.updates},
                         {"cycles", it.cycles}});
    j["per_iteration"] = iters;
    return j;
}

inline std::string report_csv_header() {
    return "graph,problem,cores,lanes,pipelines,stride,immediate_updates,prefetch_skipping,"
           "sync_mode,n,edges,iterations,converged,cycles,processing_cycles,t_exec_seconds,"
           "mteps,mteps_star,bytes_read,bytes_written,updates";
}

inline std::string report_csv_row(const SimReport& r) {
    std::ostringstream os;
    os << r.graph_name << ',' << r.problem << ',' << r.p << ',' << r.e << ',' << r.v << ','
       << r.stride << ',' << (r.immediate_updates ? 1 : 0) << ','
       << (r.prefetch_skipping ? 1 : 0) << ',' << (r.sync_mode ? 1 : 0) << ',' << r.n << ','
       << r.edges << ',' << r.iterations << ',' << (r.converged ? 1 : 0) << ',' << r.cycles
       << ',' << r.processing_cycles << ',' << r.t_exec_seconds << ',' << r.mteps << ','
       << r.mteps_star << ',' << r.bytes_read_total() << ',' << r.bytes_written << ','
       << r.updates_applied;
    return os.str();
}

} // namespace graphscale
