#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "graphscale/common.hpp"

namespace graphscale {

// Source-label request in flight through the crossbar. Routing fields are
// pre-decoded from the encoded neighbor index at issue time; (origin,
// line_seq, lane) identifies the reorder slot the response must land in.
struct LabelRequest {
    std::uint32_t origin = 0;
    std::uint32_t lane = 0;
    std::uint32_t target = 0;
    std::uint32_t bank = 0;
    std::uint32_t slot = 0;
    std::uint64_t line_seq = 0;
};

struct LabelResponse {
    std::uint32_t origin = 0;
    std::uint32_t lane = 0;
    std::uint64_t line_seq = 0;
    Label value = 0;
    std::uint64_t visible_cycle = 0; // scratch read takes one cycle
};

// Work-conserving rotating-priority pick over n requesters.
class RoundRobinArbiter {
public:
    explicit RoundRobinArbiter(std::uint32_t n = 1) : n_(n) {}

    template <typename ReadyFn>
    std::optional<std::uint32_t> pick(ReadyFn&& ready) {
        for (std::uint32_t off = 0; off < n_; ++off) {
            std::uint32_t c = (next_ + off) % n_;
            if (ready(c)) {
                next_ = (c + 1) % n_;
                return c;
            }
        }
        return std::nullopt;
    }

private:
    std::uint32_t n_;
    std::uint32_t next_ = 0;
};

// Restores line order on the return path. A slot is reserved when the line
// is issued, so every response in flight always has a home and the return
// network can never deadlock on a full buffer. Lanes of one line may come
// back in any order; lines leave in issue order once every expected lane of
// the head line has arrived.
class ReorderStage {
public:
    ReorderStage(std::uint32_t lanes, std::uint32_t slots) : lanes_(lanes), slots_(slots) {
        slot_values_.resize(slots, std::vector<Label>(lanes, 0));
        slot_filled_.resize(slots, std::vector<bool>(lanes, false));
        slot_expected_.resize(slots, std::vector<bool>(lanes, false));
    }

    bool ready() const { return order_.size() < slots_; }
    std::uint32_t occupancy() const { return std::uint32_t(order_.size()); }

    std::uint64_t issue(const std::vector<bool>& expected) {
        if (!ready()) throw ModelError("reorder issue while full");
        if (expected.size() != lanes_) throw ModelError("reorder mask width mismatch");
        std::uint64_t seq = next_seq_++;
        std::uint32_t s = std::uint32_t(seq % slots_);
        slot_expected_[s] = expected;
        std::fill(slot_filled_[s].begin(), slot_filled_[s].end(), false);
        order_.push_back(seq);
        return seq;
    }

    void deliver(std::uint64_t seq, std::uint32_t lane, Label value) {
        std::uint32_t s = std::uint32_t(seq % slots_);
        if (!slot_expected_[s][lane] || slot_filled_[s][lane])
            throw ModelError("reorder delivery to an unreserved lane");
        slot_values_[s][lane] = value;
        slot_filled_[s][lane] = true;
    }

    bool head_complete() const {
        if (order_.empty()) return false;
        std::uint32_t s = std::uint32_t(order_.front() % slots_);
        for (std::uint32_t k = 0; k < lanes_; ++k)
            if (slot_expected_[s][k] && !slot_filled_[s][k]) return false;
        return true;
    }

    // Pops the head line if complete: one optional label per lane.
    std::optional<std::vector<std::optional<Label>>> pop() {
        if (!head_complete()) return std::nullopt;
        std::uint32_t s = std::uint32_t(order_.front() % slots_);
        order_.pop_front();
        std::vector<std::optional<Label>> line(lanes_);
        for (std::uint32_t k = 0; k < lanes_; ++k)
            if (slot_expected_[s][k]) line[k] = slot_values_[s][k];
        return line;
    }

    bool empty() const { return order_.empty(); }

private:
    std::uint32_t lanes_;
    std::uint32_t slots_;
    std::uint64_t next_seq_ = 0;
    std::deque<std::uint64_t> order_;
    std::vector<std::vector<Label>> slot_values_;
    std::vector<std::vector<bool>> slot_filled_;
    std::vector<std::vector<bool>> slot_expected_;
};

struct CrossbarConfig {
    std::uint32_t p = 1;
    std::uint32_t e = 16;
    std::uint32_t scratch_bits = 0;
    std::uint32_t bank_queue_depth = 4;
    std::uint32_t reorder_slots = 32;
};

struct CrossbarCounters {
    std::uint64_t requests = 0;
    std::uint64_t responses = 0;
    std::uint64_t lines_in = 0;
    std::uint64_t lines_out = 0;
    std::uint64_t bank_conflict_stalls = 0;     // ready queue heads left ungranted
    std::uint64_t result_register_stalls = 0;   // grants blocked by full result registers
    std::uint64_t return_conflict_stalls = 0;   // visible results left undelivered
};

// Two-level label shuffle. Forward path: at issue time each lane flows
// combinationally into the per-(origin, bank) queue its scratch address
// stripes to; lanes that find their queue full park in the origin's shuffle
// stage and drain as space frees up. Same-bank lanes keep lane order,
// different banks drain independently, and the next line is accepted only
// once that residue is gone, so the queues absorb several full lines before
// admission stalls. Per (target, bank) a round-robin arbiter grants one
// origin's queue head per cycle and reads that scratch bank. Each bank owns
// two result registers (out + overflow); with both full the bank stops
// granting. Return path: one port per (origin, bank) arbitrates round-robin
// over the target cores whose result registers hold a response for it, so a
// response never contends with traffic from other banks. Responses reassemble
// into lines in the reorder stage.
//
// Scratch striping: resident label i of a core lives in bank i % e, slot
// i / e. Writes land directly (the pads are dual ported); only reads contend.
class TwoLevelCrossbar {
public:
    explicit TwoLevelCrossbar(const CrossbarConfig& cfg)
        : cfg_(cfg), stage_(cfg.p), queues_(std::size_t(cfg.p) * cfg.e),
          results_(std::size_t(cfg.p) * cfg.e), windows_(cfg.p) {
        if (!is_pow2(cfg.p) || !is_pow2(cfg.e))
            throw ConfigError("crossbar requires power-of-two core and lane counts");
        if (cfg.bank_queue_depth == 0 || cfg.reorder_slots == 0)
            throw ConfigError("crossbar queue depths must be positive");
        for (std::uint32_t i = 0; i < cfg.p; ++i) {
            reorder_.emplace_back(cfg.e, cfg.reorder_slots);
            for (std::uint32_t b = 0; b < cfg.e; ++b) grant_arb_.emplace_back(cfg.p);
        }
        return_next_.assign(std::size_t(cfg_.p) * cfg_.e, 0);
    }

    void load_window(std::uint32_t core, const std::vector<Label>& labels) {
        if (labels.size() > (std::uint64_t(1) << cfg_.scratch_bits))
            throw ModelError("window exceeds scratch capacity");
        windows_[core] = labels;
    }

    void store(std::uint32_t core, std::uint32_t local, Label value) {
        if (local >= windows_[core].size()) throw ModelError("scratch store past resident window");
        windows_[core][local] = value;
    }

    Label peek(std::uint32_t core, std::uint32_t local) const {
        if (local >= windows_[core].size()) throw ModelError("scratch read past resident window");
        return windows_[core][local];
    }

    std::uint32_t bank_of(std::uint32_t local) const { return local % cfg_.e; }
    std::uint32_t slot_of(std::uint32_t local) const { return local / cfg_.e; }

    // Whole-line admission: the line enters only if the reorder stage has a
    // free slot and no residue of a previous line is still parked in the
    // origin's shuffle stage. Bank collisions serialize inside the stage
    // rather than refusing the line.
    bool can_accept(std::uint32_t origin,
                    const std::vector<std::optional<std::uint32_t>>& line) const {
        (void)line;
        return reorder_[origin].ready() && stage_[origin].empty();
    }

    std::uint64_t issue_line(std::uint32_t origin,
                             const std::vector<std::optional<std::uint32_t>>& line) {
        if (line.size() != cfg_.e) throw ModelError("issued line width mismatch");
        if (!can_accept(origin, line)) throw ModelError("issue_line without can_accept");
        std::vector<bool> expected(cfg_.e, false);
        for (std::uint32_t k = 0; k < cfg_.e; ++k) expected[k] = line[k].has_value();
        std::uint64_t seq = reorder_[origin].issue(expected);
        ++counters_.lines_in;
        for (std::uint32_t k = 0; k < cfg_.e; ++k) {
            if (!line[k]) continue;
            std::uint32_t enc = *line[k];
            LabelRequest r;
            r.origin = origin;
            r.lane = k;
            r.target = enc >> cfg_.scratch_bits;
            if (r.target >= cfg_.p) throw ModelError("encoded target core out of range");
            std::uint32_t local = enc & local_mask();
            r.bank = bank_of(local);
            r.slot = slot_of(local);
            r.line_seq = seq;
            stage_[origin].push_back(r);
            ++counters_.requests;
        }
        drain_stage(origin); // ready is combinational: lanes reach their queues this cycle
        return seq;
    }

    void step() {
        ++cycle_;
        deliver_returns();
        drain_stages();
        grant_and_read();
    }

    bool line_ready(std::uint32_t origin) const { return reorder_[origin].head_complete(); }
    bool reorder_ready(std::uint32_t origin) const { return reorder_[origin].ready(); }

    std::optional<std::vector<std::optional<Label>>> pop_ready_line(std::uint32_t origin) {
        auto line = reorder_[origin].pop();
        if (line) ++counters_.lines_out;
        return line;
    }

    bool drained() const {
        for (const auto& s : stage_)
            if (!s.empty()) return false;
        for (const auto& q : queues_)
            if (!q.empty()) return false;
        for (const auto& r : results_)
            if (!r.empty()) return false;
        for (const auto& ro : reorder_)
            if (!ro.empty()) return false;
        return true;
    }

    const CrossbarCounters& counters() const { return counters_; }
    std::uint64_t cycle() const { return cycle_; }
    const CrossbarConfig& config() const { return cfg_; }

private:
    std::uint32_t local_mask() const {
        return std::uint32_t((std::uint64_t(1) << cfg_.scratch_bits) - 1);
    }
    std::size_t qidx(std::uint32_t core, std::uint32_t bank) const {
        return std::size_t(core) * cfg_.e + bank;
    }

    void deliver_returns() {
        // The return shuffle undoes the core-level routing: bank b of every
        // target core feeds the (origin, bank b) return port, one response
        // per port per cycle, picked round-robin over the target cores. Each
        // register releases at most one response per cycle, so only heads
        // are candidates. Ports are independent across banks; the lane tag
        // merely addresses the reorder slot.
        for (std::uint32_t o = 0; o < cfg_.p; ++o)
            for (std::uint32_t b = 0; b < cfg_.e; ++b) {
                std::uint32_t cands = 0;
                auto from = [&](std::uint32_t t) {
                    const auto& q = results_[qidx(t, b)];
                    return !q.empty() && q.front().visible_cycle <= cycle_ &&
                           q.front().origin == o;
                };
                for (std::uint32_t t = 0; t < cfg_.p; ++t)
                    if (from(t)) ++cands;
                if (cands == 0) continue;
                std::uint32_t& next = return_next_[qidx(o, b)];
                std::uint32_t pick = next;
                while (!from(pick)) pick = (pick + 1) % cfg_.p;
                next = (pick + 1) % cfg_.p;
                auto& q = results_[qidx(pick, b)];
                const LabelResponse& resp = q.front();
                reorder_[resp.origin].deliver(resp.line_seq, resp.lane, resp.value);
                q.pop_front();
                ++counters_.responses;
                counters_.return_conflict_stalls += cands - 1;
            }
    }

    void drain_stages() {
        for (std::uint32_t o = 0; o < cfg_.p; ++o) drain_stage(o);
    }

    void drain_stage(std::uint32_t o) {
        if (stage_[o].empty()) return;
        std::vector<bool> blocked(cfg_.e, false);
        std::deque<LabelRequest> rest;
        for (const LabelRequest& r : stage_[o]) {
            if (!blocked[r.bank] && queues_[qidx(o, r.bank)].size() < cfg_.bank_queue_depth) {
                queues_[qidx(o, r.bank)].push_back(r);
            } else {
                blocked[r.bank] = true; // keep same-bank lanes in lane order
                rest.push_back(r);
            }
        }
        stage_[o].swap(rest);
    }

    void grant_and_read() {
        for (std::uint32_t t = 0; t < cfg_.p; ++t)
            for (std::uint32_t b = 0; b < cfg_.e; ++b) {
                auto& out = results_[qidx(t, b)];
                auto head_targets = [&](std::uint32_t origin) {
                    const auto& q = queues_[qidx(origin, b)];
                    return !q.empty() && q.front().target == t;
                };
                std::uint32_t ready_heads = 0;
                for (std::uint32_t o = 0; o < cfg_.p; ++o)
                    if (head_targets(o)) ++ready_heads;
                if (ready_heads == 0) continue;
                if (out.size() >= 2) {
                    counters_.result_register_stalls += ready_heads;
                    continue;
                }
                auto pick = grant_arb_[qidx(t, b)].pick(head_targets);
                const LabelRequest req = queues_[qidx(*pick, b)].front();
                queues_[qidx(*pick, b)].pop_front();
                std::uint32_t local = req.slot * cfg_.e + req.bank;
                LabelResponse resp;
                resp.origin = req.origin;
                resp.lane = req.lane;
                resp.line_seq = req.line_seq;
                resp.value = peek(t, local);
                resp.visible_cycle = cycle_ + 1;
                out.push_back(resp);
                counters_.bank_conflict_stalls += ready_heads - 1;
            }
    }

    CrossbarConfig cfg_;
    std::uint64_t cycle_ = 0;
    CrossbarCounters counters_;
    std::vector<std::deque<LabelRequest>> stage_;    // per origin, lane order
    std::vector<std::deque<LabelRequest>> queues_;   // (origin, bank)
    std::vector<std::deque<LabelResponse>> results_; // (target, bank), cap 2
    std::vector<std::vector<Label>> windows_;
    std::vector<ReorderStage> reorder_;
    std::vector<RoundRobinArbiter> grant_arb_;  // (target, bank)
    std::vector<std::uint32_t> return_next_;    // (origin, lane) rotation
};

} // namespace graphscale
