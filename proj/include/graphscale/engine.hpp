#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "graphscale/common.hpp"
#include "graphscale/core.hpp"
#include "graphscale/crossbar.hpp"
#include "graphscale/graph.hpp"
#include "graphscale/metrics.hpp"
#include "graphscale/partition.hpp"
#include "graphscale/problem.hpp"

namespace graphscale {

struct RunConfig {
    std::uint32_t p = 1;
    std::uint32_t e = 16;
    std::uint32_t v = 8;
    std::uint32_t scratch_bits = 21; // per-core scratch capacity in 32-bit label slots
    std::uint32_t reorder_slots = 32;
    std::uint32_t bank_queue_depth = 4;
    std::uint32_t stride = 100;
    bool stride_enabled = true;
    bool immediate_updates = true;
    bool prefetch_skipping = true;
    bool sync_mode = false;   // next-iteration visibility reference mode
    std::uint32_t max_iterations = 0; // 0: safety cap of 2n
    double frequency_hz = 170e6;
};

inline void validate_config(const RunConfig& c) {
    if (!is_pow2(c.p)) throw ConfigError("core count must be a power of two");
    if (!is_pow2(c.e)) throw ConfigError("lane count must be a power of two");
    if (c.v == 0) throw ConfigError("pipeline count must be >= 1");
    if (c.scratch_bits >= 32) throw ConfigError("scratch capacity out of range");
    if (c.prefetch_skipping && !c.immediate_updates)
        throw ConfigError("prefetch skipping requires immediate updates");
    if (c.stride_enabled && c.stride == 0) throw ConfigError("stride must be >= 1");
    if (c.frequency_hz <= 0) throw ConfigError("frequency must be positive");
}

struct RunResult {
    std::vector<Label> labels; // original vertex numbering
    std::uint32_t iterations = 0;
    bool converged = false;
    SimReport report;
};

inline std::vector<double> extract_ranks(const std::vector<Label>& labels) {
    std::vector<double> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) out[i] = double(pr_rank(labels[i]));
    return out;
}

// Component labels come out of the run as minimum reached ids in the engine's
// internal numbering. Rewriting each component to its minimum member id in
// the caller's numbering makes results comparable across permutations. The
// first vertex seen with a given raw label is that component's minimum.
inline void canonicalize_components(std::vector<Label>& labels) {
    std::vector<std::uint32_t> canon(labels.size(), kInf32);
    for (std::size_t v = 0; v < labels.size(); ++v) {
        Label raw = labels[v];
        if (raw >= labels.size()) throw ModelError("component label out of vertex range");
        if (canon[raw] == kInf32) canon[raw] = std::uint32_t(v);
        labels[v] = canon[raw];
    }
}

// Simulator for one problem on one graph: a deterministic label pass defines
// the results and per-row update verdicts, and the staged timing model
// replays the same address streams to charge cycles. Timing parameters
// (queue depths, reorder slots) therefore never change labels or iteration
// counts, only cycle counts.
class Engine {
public:
    Engine(const Graph& g, const RunConfig& cfg, const std::string& problem_name,
           VertexId root = 0, double damping = 0.85, std::uint32_t iterations = 16)
        : cfg_(cfg) {
        validate_config(cfg);
        n_ = g.n;
        if (cfg.stride_enabled && n_ > 0) stride_ = stride_map(n_, cfg.stride);

        std::vector<std::uint32_t> degs = out_degrees(g);
        VertexId eff_root = root;
        if (stride_) {
            std::vector<std::uint32_t> permuted(n_);
            for (VertexId v = 0; v < n_; ++v) permuted[stride_->new_of_old[v]] = degs[v];
            degs = std::move(permuted);
            if (root < n_) eff_root = stride_->new_of_old[root];
        }
        if (problem_name == "bfs") {
            if (n_ > 0 && root >= n_) throw ConfigError("root vertex out of range");
            problem_ = bfs_def(eff_root);
        } else if (problem_name == "wcc") {
            problem_ = wcc_def();
        } else if (problem_name == "pr") {
            if (n_ == 0) throw ConfigError("rank problem needs a nonempty graph");
            problem_ = pr_def(degs, n_, damping, iterations);
        } else {
            throw ConfigError("unknown problem: " + problem_name);
        }

        // 64-bit labels halve both the labels per memory line and the scratch
        // capacity counted in labels.
        bool wide = problem_.width == LabelWidth::w64;
        labels_per_line_ = wide ? cfg.e / 2 : cfg.e;
        if (labels_per_line_ == 0) throw ConfigError("lane count too small for wide labels");
        std::uint64_t capacity = std::uint64_t(1) << cfg.scratch_bits;
        if (wide) capacity /= 2;
        geo_ = compute_geometry(n_, cfg.p, cfg.e, capacity);
        pg_ = build_partitions(g, geo_, stride_);

        labels_.resize(n_);
        for (VertexId v = 0; v < n_; ++v) labels_[v] = problem_.init(v);
        resident_.assign(cfg.p, kInf32);
        core_counters_.assign(cfg.p, CoreCounters{});
        iteration_ = 0;
    }

    const PartitionGeometry& geometry() const { return geo_; }
    const PartitionedGraph& partitions() const { return pg_; }
    const Problem& problem() const { return problem_; }
    // Fault-injection hook for the verify matrix's mutation check.
    Problem& problem_mutable() { return problem_; }
    const std::vector<CoreCounters>& core_counters() const { return core_counters_; }

    IterationStats run_iteration() {
        ++iteration_;
        IterationStats stats;
        stats.iteration = iteration_;
        bool effective_immediate =
            cfg_.immediate_updates && !problem_.double_buffered && !cfg_.sync_mode;
        bool from_prev = problem_.double_buffered || cfg_.sync_mode;

        if (from_prev) {
            prev_ = labels_;
            if (problem_.double_buffered)
                for (VertexId u = 0; u < n_; ++u) labels_[u] = problem_.iteration_seed(prev_[u]);
        }

        for (std::uint32_t m = 0; m < geo_.l; ++m) {
            // resident windows for this meta step
            std::vector<std::uint32_t> res_sub(cfg_.p), res_base(cfg_.p), res_size(cfg_.p);
            for (std::uint32_t q = 0; q < cfg_.p; ++q) {
                res_sub[q] = q * geo_.l + m;
                res_base[q] = geo_.sub_base(res_sub[q]);
                res_size[q] = geo_.sub_size(res_sub[q]);
            }

            // prefetch-snapshot visibility: without immediate updates, pulls
            // see resident labels as of the prefetch
            std::vector<std::vector<Label>> snap;
            if (!effective_immediate && !from_prev) {
                snap.resize(cfg_.p);
                for (std::uint32_t q = 0; q < cfg_.p; ++q)
                    snap[q].assign(labels_.begin() + res_base[q],
                                   labels_.begin() + res_base[q] + res_size[q]);
            }
            auto visible = [&](std::uint32_t owner, std::uint32_t local) -> Label {
                VertexId u = res_base[owner] + local;
                if (from_prev) return prev_[u];
                if (effective_immediate) return labels_[u];
                return snap[owner][local];
            };

            // label pass: cores advance through source cores in rotated
            // order so every scratch pad serves one reader per phase
            std::vector<std::vector<std::vector<std::uint8_t>>> upd(cfg_.p);
            for (std::uint32_t i = 0; i < cfg_.p; ++i)
                upd[i].assign(cfg_.p, std::vector<std::uint8_t>(geo_.interval_size(i), 0));
            for (std::uint32_t k = 0; k < cfg_.p; ++k)
                for (std::uint32_t i = 0; i < cfg_.p; ++i) {
                    std::uint32_t q = (i + k) % cfg_.p;
                    const SubPartition& s = pg_.sub(i, res_sub[q]);
                    VertexId ibase = geo_.interval_bounds[i];
                    for (std::uint32_t r = 0; r + 1 < s.pointers.size(); ++r) {
                        std::uint32_t lo = s.pointers[r], hi = s.pointers[r + 1];
                        if (lo == hi) continue;
                        Label cur_map = from_prev ? prev_[ibase + r] : labels_[ibase + r];
                        Label acc = 0;
                        bool have = false;
                        for (std::uint32_t x = lo; x < hi; ++x) {
                            DecodedNeighbor d = decode_neighbor(geo_, s.neighbors[x]);
                            MapOut mo = problem_.map(cur_map, visible(d.core, d.local));
                            acc = have ? problem_.reduce(acc, mo.value) : mo.value;
                            have = true;
                        }
                        Label cur = labels_[ibase + r];
                        Label next = problem_.writeback(cur, acc);
                        if (next != cur) {
                            labels_[ibase + r] = next;
                            upd[i][k][r] = 1;
                            stats.any_update = true;
                            ++stats.updates;
                        }
                    }
                }

            // timing pass over the same streams
            std::vector<std::uint64_t> pf_cycles(cfg_.p), pf_labels(cfg_.p);
            std::vector<bool> pf_skip(cfg_.p);
            for (std::uint32_t q = 0; q < cfg_.p; ++q) {
                bool skip = cfg_.prefetch_skipping && effective_immediate &&
                            resident_[q] == res_sub[q];
                pf_skip[q] = skip;
                pf_labels[q] = res_size[q];
                pf_cycles[q] = skip ? 0 : ceil_div(res_size[q], labels_per_line_);
                resident_[q] = res_sub[q];
            }

            CrossbarConfig xcfg;
            xcfg.p = cfg_.p;
            xcfg.e = cfg_.e;
            xcfg.scratch_bits = geo_.scratch_bits;
            xcfg.bank_queue_depth = cfg_.bank_queue_depth;
            xcfg.reorder_slots = cfg_.reorder_slots;
            TwoLevelCrossbar xbar(xcfg);
            for (std::uint32_t q = 0; q < cfg_.p; ++q)
                xbar.load_window(q, std::vector<Label>(labels_.begin() + res_base[q],
                                                       labels_.begin() + res_base[q] +
                                                           res_size[q]));

            std::vector<CoreTimingConfig> tcfgs(cfg_.p);
            std::vector<std::vector<SubPartitionWork>> work(cfg_.p);
            for (std::uint32_t i = 0; i < cfg_.p; ++i) {
                tcfgs[i].core = i;
                tcfgs[i].e = cfg_.e;
                tcfgs[i].v = cfg_.v;
                tcfgs[i].labels_per_line = labels_per_line_;
                tcfgs[i].interval_base = geo_.interval_bounds[i];
                tcfgs[i].interval_size = geo_.interval_size(i);
                tcfgs[i].labels_from_scratch = geo_.l == 1;
                tcfgs[i].reduce = problem_.reduce;
                tcfgs[i].idempotent = problem_.idempotent;
                for (std::uint32_t k = 0; k < cfg_.p; ++k) {
                    std::uint32_t q = (i + k) % cfg_.p;
                    work[i].push_back(SubPartitionWork{&pg_.sub(i, res_sub[q]), &upd[i][k]});
                }
            }
            MetaStepTiming t = run_meta_step(tcfgs, xbar, std::move(work), pf_cycles,
                                             pf_labels, pf_skip,
                                             problem_.label_bytes(), core_counters_);
            stats.cycles += t.prefetch_span + t.processing_span;
            processing_cycles_ += t.processing_span;
            xbar_totals_.requests += xbar.counters().requests;
            xbar_totals_.responses += xbar.counters().responses;
            xbar_totals_.lines_in += xbar.counters().lines_in;
            xbar_totals_.lines_out += xbar.counters().lines_out;
            xbar_totals_.bank_conflict_stalls += xbar.counters().bank_conflict_stalls;
            xbar_totals_.result_register_stalls += xbar.counters().result_register_stalls;
            xbar_totals_.return_conflict_stalls += xbar.counters().return_conflict_stalls;
        }
        cycles_ += stats.cycles;
        per_iteration_.push_back(stats);
        return stats;
    }

    RunResult run() {
        RunResult out;
        if (n_ == 0) {
            out.converged = true;
            out.report = make_report(out);
            return out;
        }
        std::uint64_t cap = cfg_.max_iterations ? cfg_.max_iterations
                                                : std::max<std::uint64_t>(4, 2ull * n_);
        if (!cfg_.max_iterations && problem_.termination == Termination::fixed_iterations)
            cap = std::max<std::uint64_t>(cap, problem_.iterations);
        bool converged = false;
        while (iteration_ < cap) {
            IterationStats st = run_iteration();
            if (problem_.termination == Termination::fixed_iterations) {
                if (iteration_ >= problem_.iterations) {
                    converged = true;
                    break;
                }
            } else if (!st.any_update) {
                converged = true;
                break;
            }
        }
        out.iterations = iteration_;
        out.converged = converged;
        out.labels.resize(n_);
        for (VertexId v = 0; v < n_; ++v)
            out.labels[v] = labels_[stride_ ? stride_->new_of_old[v] : v];
        if (problem_.kind == LabelKind::component_id) canonicalize_components(out.labels);
        out.report = make_report(out);
        return out;
    }

    SimReport make_report(const RunResult& r) const {
        SimReport rep;
        rep.problem = problem_.name;
        rep.p = cfg_.p;
        rep.e = cfg_.e;
        rep.v = cfg_.v;
        rep.scratch_bits = cfg_.scratch_bits;
        rep.reorder_slots = cfg_.reorder_slots;
        rep.bank_queue_depth = cfg_.bank_queue_depth;
        rep.stride = stride_ ? cfg_.stride : 0;
        rep.immediate_updates = cfg_.immediate_updates;
        rep.prefetch_skipping = cfg_.prefetch_skipping;
        rep.sync_mode = cfg_.sync_mode;
        rep.n = n_;
        rep.edges = pg_.edge_count;
        rep.iterations = r.iterations;
        rep.converged = r.converged;
        rep.cycles = cycles_;
        rep.processing_cycles = processing_cycles_;
        rep.frequency_hz = cfg_.frequency_hz;
        for (const CoreCounters& c : core_counters_) {
            rep.bytes_neighbors += c.bytes_neighbors;
            rep.bytes_pointers += c.bytes_pointers;
            rep.bytes_source_labels += c.bytes_source_labels;
            rep.bytes_prefetch += c.bytes_prefetch;
            rep.bytes_written += c.bytes_written;
            rep.stall_crossbar += c.issue_stall_crossbar;
            rep.stall_channel += c.issue_stall_channel;
            rep.stall_rows += c.edge_stall_rows;
            rep.barrier_idle += c.barrier_idle;
            rep.prefetch_cycle_total += c.prefetch_cycles;
            rep.prefetches += c.prefetches;
            rep.prefetch_skips += c.prefetch_skips;
            rep.issue_window_cycles += c.issue_window_cycles;
            rep.issue_min_cycles += c.issue_min_cycles;
            rep.updates_applied += c.updates_applied;
        }
        rep.crossbar_requests = xbar_totals_.requests;
        rep.crossbar_responses = xbar_totals_.responses;
        rep.crossbar_bank_conflicts = xbar_totals_.bank_conflict_stalls;
        rep.crossbar_return_conflicts = xbar_totals_.return_conflict_stalls;
        rep.crossbar_result_stalls = xbar_totals_.result_register_stalls;
        rep.per_iteration = per_iteration_;
        finalize_throughput(rep);
        return rep;
    }

private:
    RunConfig cfg_;
    std::uint32_t n_ = 0;
    std::optional<StrideMap> stride_;
    Problem problem_;
    std::uint32_t labels_per_line_ = 16;
    PartitionGeometry geo_;
    PartitionedGraph pg_;

    std::vector<Label> labels_;
    std::vector<Label> prev_;
    std::vector<std::uint32_t> resident_;
    std::uint32_t iteration_ = 0;
    std::uint64_t cycles_ = 0;
    std::uint64_t processing_cycles_ = 0;
    std::vector<CoreCounters> core_counters_;
    CrossbarCounters xbar_totals_;
    std::vector<IterationStats> per_iteration_;
};

// Convenience wrapper: build, run, and report in one call.
inline RunResult simulate(const Graph& g, const RunConfig& cfg, const std::string& problem,
                          VertexId root = 0, double damping = 0.85,
                          std::uint32_t iterations = 16, const std::string& graph_name = "") {
    Engine eng(g, cfg, problem, root, damping, iterations);
    RunResult r = eng.run();
    r.report.graph_name = graph_name;
    return r;
}

} // namespace graphscale
