#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <vector>

#include "graphscale/accumulator.hpp"
#include "graphscale/common.hpp"
#include "graphscale/crossbar.hpp"
#include "graphscale/partition.hpp"

namespace graphscale {

// Row record produced by the source builder: the vertex being updated plus
// its neighbor-array slice [left, right).
struct SourceVertex {
    VertexId index = 0;
    Label label = 0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
};

// Zips a pointer array with row labels. The runtime below streams this
// incrementally; the free function exists for direct checking.
inline std::vector<SourceVertex> build_source_vertices(
    const std::vector<std::uint32_t>& pointers,
    const std::function<Label(std::uint32_t)>& row_label, VertexId base) {
    std::vector<SourceVertex> out;
    for (std::uint32_t r = 0; r + 1 < pointers.size(); ++r) {
        if (pointers[r] > pointers[r + 1]) throw ModelError("pointer array not monotone");
        out.push_back(SourceVertex{base + r, row_label(r), pointers[r], pointers[r + 1]});
    }
    return out;
}

struct CoreCounters {
    std::uint64_t prefetch_cycles = 0;
    std::uint64_t prefetches = 0;
    std::uint64_t prefetch_skips = 0;

    std::uint64_t processing_cycles = 0;
    std::uint64_t issue_window_cycles = 0; // cycles with neighbor lines pending
    std::uint64_t issue_min_cycles = 0;    // ceil(|N|/e) summed over sub-partitions
    std::uint64_t issue_stall_crossbar = 0;
    std::uint64_t issue_stall_channel = 0;
    std::uint64_t lines_issued = 0;
    std::uint64_t edge_segments = 0;
    std::uint64_t edge_stall_rows = 0;
    std::uint64_t writer_line_writes = 0;
    std::uint64_t barrier_idle = 0;

    std::uint64_t bytes_neighbors = 0;
    std::uint64_t bytes_pointers = 0;
    std::uint64_t bytes_source_labels = 0;
    std::uint64_t bytes_prefetch = 0;
    std::uint64_t bytes_written = 0;

    std::uint64_t updates_applied = 0;

    CoreCounters& operator+=(const CoreCounters& o) {
        prefetch_cycles += o.prefetch_cycles;
        prefetches += o.prefetches;
        prefetch_skips += o.prefetch_skips;
        processing_cycles += o.processing_cycles;
        issue_window_cycles += o.issue_window_cycles;
        issue_min_cycles += o.issue_min_cycles;
        issue_stall_crossbar += o.issue_stall_crossbar;
        issue_stall_channel += o.issue_stall_channel;
        lines_issued += o.lines_issued;
        edge_segments += o.edge_segments;
        edge_stall_rows += o.edge_stall_rows;
        writer_line_writes += o.writer_line_writes;
        barrier_idle += o.barrier_idle;
        bytes_neighbors += o.bytes_neighbors;
        bytes_pointers += o.bytes_pointers;
        bytes_source_labels += o.bytes_source_labels;
        bytes_prefetch += o.bytes_prefetch;
        bytes_written += o.bytes_written;
        updates_applied += o.updates_applied;
        return *this;
    }
};

// One sub-partition's worth of timing work: the CSR slices plus the per-row
// update verdicts the label pass already established.
struct SubPartitionWork {
    const SubPartition* sp = nullptr;
    const std::vector<std::uint8_t>* row_updated = nullptr; // interval-sized bitmap
};

struct CoreTimingConfig {
    std::uint32_t core = 0;
    std::uint32_t e = 16;
    std::uint32_t v = 8;
    std::uint32_t labels_per_line = 16; // e for 32-bit labels, e/2 for 64-bit
    VertexId interval_base = 0;
    std::uint32_t interval_size = 0;
    bool labels_from_scratch = false; // single-sub-interval layout keeps rows resident
    ReduceFn reduce;
    bool idempotent = true;
};

// Cycle model of one graph core during the processing phase. Each cycle the
// memory channel moves at most one line; the buffered writer outranks the
// source-vertex streams, which outrank neighbor-line issue. Issued lines
// travel through the shared crossbar; returned lines are split into segments
// of at most v distinct rows, folded by the pipelined accumulator, and the
// surviving updates merge into the buffered writer line by line.
class CoreRuntime {
public:
    CoreRuntime(const CoreTimingConfig& cfg, TwoLevelCrossbar& xbar,
                std::vector<SubPartitionWork> work, CoreCounters& counters)
        : cfg_(cfg), xbar_(xbar), work_(std::move(work)), counters_(counters),
          acc_(cfg.e, cfg.v, cfg.reduce, cfg.idempotent), acc_latency_(log2_exact(cfg.e) + 2) {
        begin_sub();
    }

    bool done() const { return work_idx_ >= work_.size(); }

    // One clock edge. The crossbar itself is stepped once per global cycle by
    // the caller, after every core has run.
    void cycle(std::uint64_t now) {
        if (done()) return;
        ++counters_.processing_cycles;
        mature_emissions(now);
        channel_op();
        edge_builder_op(now);
        advance_state(now);
    }

    // Monotone work measure for external watchdogs.
    std::uint64_t progress() const {
        return counters_.lines_issued + counters_.edge_segments +
               counters_.writer_line_writes + counters_.bytes_pointers +
               counters_.bytes_source_labels + std::uint64_t(work_idx_);
    }

private:
    const SubPartition& sp() const { return *work_[work_idx_].sp; }
    const std::vector<std::uint8_t>& row_updated() const { return *work_[work_idx_].row_updated; }

    std::uint32_t n_total() const { return std::uint32_t(sp().neighbors.size()); }
    bool n_pending() const { return phase_ == Phase::process && n_issued_ < n_total(); }

    void begin_sub() {
        while (work_idx_ < work_.size()) {
            const SubPartition& s = *work_[work_idx_].sp;
            p_words_ = 0;
            label_words_ = 0;
            n_issued_ = 0;
            rows_demand_ = std::min(cfg_.interval_size, 2 * cfg_.v);
            match_row_ = 0;
            cur_line_.reset();
            acc_flushed_ = false;
            pending_line_.reset();
            row_of_pos_.assign(s.neighbors.size(), 0);
            for (std::uint32_t r = 0; r + 1 < s.pointers.size(); ++r)
                for (std::uint32_t j = s.pointers[r]; j < s.pointers[r + 1]; ++j)
                    row_of_pos_[j] = r;
            counters_.issue_min_cycles += ceil_div(s.neighbors.size(), cfg_.e);
            if (!s.neighbors.empty()) {
                phase_ = Phase::process;
                return;
            }
            ++work_idx_; // controller skips edgeless sub-partitions outright
        }
    }

    std::uint32_t rows_built() const {
        std::uint32_t by_p = p_words_ > 0 ? p_words_ - 1 : 0;
        if (cfg_.labels_from_scratch) return by_p;
        return std::min(by_p, label_words_);
    }

    bool source_words_remain() const {
        if (p_words_ < cfg_.interval_size + 1) return true;
        if (!cfg_.labels_from_scratch && label_words_ < cfg_.interval_size) return true;
        return false;
    }

    // Eager window: stay a couple of pipeline batches ahead of the edge
    // builder, or as far as a stalled returned line demands.
    bool source_wants_line() const {
        std::uint32_t target = std::max(rows_demand_, std::min(cfg_.interval_size,
                                                               match_row_ + 2 * cfg_.v));
        return source_words_remain() && rows_built() < target;
    }

    void read_source_line() {
        // stream whichever source array lags in completed rows
        std::uint32_t p_rows = p_words_ > 0 ? p_words_ - 1 : 0;
        bool read_pointers = p_words_ < cfg_.interval_size + 1 &&
                             (cfg_.labels_from_scratch || p_rows <= label_words_ ||
                              label_words_ >= cfg_.interval_size);
        if (read_pointers) {
            std::uint32_t take = std::min(cfg_.e, cfg_.interval_size + 1 - p_words_);
            p_words_ += take;
            counters_.bytes_pointers += 4ull * take;
        } else {
            std::uint32_t take =
                std::min(cfg_.labels_per_line, cfg_.interval_size - label_words_);
            label_words_ += take;
            counters_.bytes_source_labels +=
                std::uint64_t(4 * cfg_.e / cfg_.labels_per_line) * take;
        }
    }

    void note_channel_taken() {
        if (n_pending()) {
            ++counters_.issue_stall_channel;
            ++counters_.issue_window_cycles;
        }
    }

    // One line operation per cycle on this core's memory channel. Priority:
    // buffered-writer flushes, then source-vertex streams inside the eager
    // window, then neighbor-line issue; a crossbar-refused issue slot is
    // reused to finish the source streams in the background.
    void channel_op() {
        if (!write_queue_.empty()) {
            write_queue_.pop_front();
            ++counters_.writer_line_writes;
            counters_.bytes_written += 4ull * cfg_.e;
            note_channel_taken();
            return;
        }
        if (phase_ == Phase::process && source_wants_line()) {
            read_source_line();
            note_channel_taken();
            return;
        }
        if (n_pending()) {
            std::uint32_t base = n_issued_;
            std::uint32_t take = std::min(cfg_.e, n_total() - base);
            std::vector<std::optional<std::uint32_t>> line(cfg_.e);
            for (std::uint32_t k = 0; k < take; ++k) line[k] = sp().neighbors[base + k];
            ++counters_.issue_window_cycles;
            if (xbar_.can_accept(cfg_.core, line)) {
                xbar_.issue_line(cfg_.core, line);
                inflight_.push_back(RetMeta{base, take});
                n_issued_ += take;
                ++counters_.lines_issued;
                counters_.bytes_neighbors += 4ull * take;
                return;
            }
            ++counters_.issue_stall_crossbar;
        }
        if (phase_ == Phase::process && source_words_remain()) read_source_line();
    }

    void edge_builder_op(std::uint64_t now) {
        if (!cur_line_) {
            if (!xbar_.line_ready(cfg_.core)) return;
            const RetMeta& meta = inflight_.front();
            std::uint32_t last_row = row_of_pos_[meta.base + meta.count - 1];
            if (rows_built() <= last_row) {
                // rows for this line are not assembled yet; raise the bar so
                // the source stream catches up with priority
                rows_demand_ = std::max(rows_demand_, last_row + 1);
                ++counters_.edge_stall_rows;
                return;
            }
            xbar_.pop_ready_line(cfg_.core);
            cur_line_ = meta;
            seg_lane_ = 0;
            inflight_.pop_front();
        }
        // emit one segment of at most v distinct rows
        AccLine seg(cfg_.e);
        std::uint32_t distinct = 0;
        std::optional<std::uint32_t> prev_row;
        while (seg_lane_ < cur_line_->count) {
            std::uint32_t row = row_of_pos_[cur_line_->base + seg_lane_];
            if (!prev_row || *prev_row != row) {
                if (distinct == cfg_.v) break;
                ++distinct;
                prev_row = row;
            }
            seg[seg_lane_] = IdLabelPair{cfg_.interval_base + row, 0, true,
                                         row_updated()[row] != 0};
            match_row_ = std::max(match_row_, row);
            ++seg_lane_;
        }
        ++counters_.edge_segments;
        for (const IdLabelPair& em : acc_.push_line(seg))
            delay_.push_back(Matured{now + acc_latency_, em});
        if (seg_lane_ >= cur_line_->count) cur_line_.reset();
    }

    void mature_emissions(std::uint64_t now) {
        while (!delay_.empty() && delay_.front().release <= now) {
            writer_merge(delay_.front().em);
            delay_.pop_front();
        }
    }

    void writer_merge(const IdLabelPair& em) {
        if (!em.updated) return;
        ++counters_.updates_applied;
        std::uint64_t line_addr = em.id / cfg_.labels_per_line;
        if (pending_line_ && *pending_line_ == line_addr) return;
        if (pending_line_) write_queue_.push_back(*pending_line_);
        pending_line_ = line_addr;
    }

    void advance_state(std::uint64_t now) {
        if (phase_ == Phase::process && n_issued_ == n_total() && inflight_.empty() &&
            !cur_line_ && !source_words_remain())
            phase_ = Phase::flush;
        if (phase_ == Phase::flush && !acc_flushed_) {
            acc_flushed_ = true;
            for (const IdLabelPair& em : acc_.flush())
                delay_.push_back(Matured{now + acc_latency_, em});
        }
        if (phase_ == Phase::flush && acc_flushed_ && delay_.empty()) {
            if (pending_line_) {
                write_queue_.push_back(*pending_line_);
                pending_line_.reset();
            } else if (write_queue_.empty()) {
                ++work_idx_;
                if (!done())
                    begin_sub();
                else
                    phase_ = Phase::idle;
            }
        }
    }

    enum class Phase { process, flush, idle };

    struct RetMeta {
        std::uint32_t base = 0;
        std::uint32_t count = 0;
    };
    struct Matured {
        std::uint64_t release = 0;
        IdLabelPair em;
    };

    CoreTimingConfig cfg_;
    TwoLevelCrossbar& xbar_;
    std::vector<SubPartitionWork> work_;
    CoreCounters& counters_;
    PipelinedAccumulator acc_;
    std::uint32_t acc_latency_;

    Phase phase_ = Phase::idle;
    std::size_t work_idx_ = 0;
    std::vector<std::uint32_t> row_of_pos_;
    std::uint32_t p_words_ = 0;
    std::uint32_t label_words_ = 0;
    std::uint32_t n_issued_ = 0;
    std::uint32_t rows_demand_ = 0;
    std::uint32_t match_row_ = 0;
    std::deque<RetMeta> inflight_;
    std::optional<RetMeta> cur_line_;
    std::uint32_t seg_lane_ = 0;
    bool acc_flushed_ = false;
    std::deque<Matured> delay_;
    std::optional<std::uint64_t> pending_line_;
    std::deque<std::uint64_t> write_queue_;
};

// Lock-step driver for one meta step: a prefetch span (cores wait for the
// slowest prefetch) followed by cycle-by-cycle processing of every core's
// sub-partition list against the shared crossbar. Cores that finish early
// idle at the barrier.
struct MetaStepTiming {
    std::uint64_t prefetch_span = 0;
    std::uint64_t processing_span = 0;
};

inline MetaStepTiming run_meta_step(
    const std::vector<CoreTimingConfig>& cfgs, TwoLevelCrossbar& xbar,
    std::vector<std::vector<SubPartitionWork>> work,
    const std::vector<std::uint64_t>& prefetch_cycles,
    const std::vector<std::uint64_t>& prefetch_labels,
    const std::vector<bool>& prefetch_skipped, std::uint32_t label_bytes,
    std::vector<CoreCounters>& counters) {
    std::uint32_t p = std::uint32_t(cfgs.size());
    MetaStepTiming t;
    for (std::uint32_t i = 0; i < p; ++i)
        t.prefetch_span = std::max(t.prefetch_span, prefetch_cycles[i]);
    for (std::uint32_t i = 0; i < p; ++i) {
        counters[i].prefetch_cycles += prefetch_cycles[i];
        counters[i].barrier_idle += t.prefetch_span - prefetch_cycles[i];
        if (prefetch_skipped[i])
            ++counters[i].prefetch_skips;
        else {
            ++counters[i].prefetches;
            counters[i].bytes_prefetch += prefetch_labels[i] * label_bytes;
        }
    }

    std::vector<CoreRuntime> cores;
    cores.reserve(p);
    for (std::uint32_t i = 0; i < p; ++i)
        cores.emplace_back(cfgs[i], xbar, std::move(work[i]), counters[i]);

    std::uint64_t cycle = 0;
    std::uint64_t watchdog = 0;
    std::uint64_t last_pending = ~0ull;
    while (true) {
        bool all_done = true;
        for (auto& c : cores) all_done = all_done && c.done();
        if (all_done) break;
        for (std::uint32_t i = 0; i < p; ++i) {
            if (cores[i].done())
                ++counters[i].barrier_idle;
            else
                cores[i].cycle(cycle);
        }
        xbar.step();
        ++cycle;
        std::uint64_t moved = xbar.counters().responses + xbar.counters().lines_out;
        for (const auto& c : cores) moved += c.progress();
        if (moved == last_pending) {
            if (++watchdog > 100000) throw ModelError("meta step made no progress");
        } else {
            watchdog = 0;
            last_pending = moved;
        }
    }
    if (!xbar.drained()) throw ModelError("crossbar not drained at meta step barrier");
    t.processing_span = cycle;
    return t;
}

} // namespace graphscale
