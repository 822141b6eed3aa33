#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "graphscale/common.hpp"
#include "graphscale/problem.hpp"

namespace graphscale {

// One lane of the accumulator datapath: a destination row id plus a candidate
// label. `updated` marks candidates that would change the stored label; folds
// OR it together so the writer knows whether the row needs a write.
struct IdLabelPair {
    std::uint32_t id = 0;
    Label label = 0;
    bool valid = false;
    bool updated = false;

    bool operator==(const IdLabelPair&) const = default;
};

using AccLine = std::vector<IdLabelPair>;
using ReduceFn = std::function<Label(Label, Label)>;

// Edge entering the update stage: a destination row and the label pulled for
// its source neighbor. Lane-invalid entries pad partial lines.
struct AnnotatedEdge {
    std::uint32_t row = 0;
    Label source_label = 0;
    bool valid = false;
};

// First pipeline level: apply map() lane-wise against the current label of
// each lane's destination row.
inline AccLine update_stage(const std::vector<AnnotatedEdge>& line,
                            const std::function<Label(std::uint32_t)>& current_label,
                            const std::function<MapOut(Label, Label)>& map) {
    AccLine out(line.size());
    for (std::size_t k = 0; k < line.size(); ++k) {
        if (!line[k].valid) continue;
        MapOut m = map(current_label(line[k].row), line[k].source_label);
        out[k] = IdLabelPair{line[k].row, m.value, true, m.updated};
    }
    return out;
}

// Per-line fold result. folded[k] holds the fold of the maximal run of equal
// ids ending at lane k; forward[k] marks the lanes whose value leaves the
// line (the last lane of each run). Invalid lanes are transparent: a run
// continues across them.
struct LineFold {
    AccLine folded;
    std::vector<bool> forward;
};

inline std::vector<IdLabelPair> forwarded_pairs(const LineFold& f) {
    std::vector<IdLabelPair> out;
    for (std::size_t k = 0; k < f.folded.size(); ++k)
        if (f.forward[k]) out.push_back(f.folded[k]);
    return out;
}

namespace detail {

// Post-line selector: one sequential reducer per selector slot, addressed by
// id modulo the selector count. Holds one (id, fold) register; a different
// incoming id displaces the held value, which is emitted if any folded
// candidate carried the updated flag.
struct SequentialSelector {
    std::uint32_t id = 0;
    Label label = 0;
    bool occupied = false;
    bool updated = false;

    void ingest(const IdLabelPair& in, const ReduceFn& reduce,
                std::vector<IdLabelPair>& out) {
        if (occupied && in.id == id) {
            label = reduce(label, in.label);
            updated = updated || in.updated;
            return;
        }
        if (occupied && updated) out.push_back(IdLabelPair{id, label, true, true});
        id = in.id;
        label = in.label;
        updated = in.updated;
        occupied = true;
    }

    void flush(std::vector<IdLabelPair>& out) {
        if (occupied && updated) out.push_back(IdLabelPair{id, label, true, true});
        occupied = false;
        updated = false;
    }
};

} // namespace detail

// Reference accumulator: a direct scan over each line. Maximal runs of equal
// ids fold to the run's last lane; when a line starts and ends with the same
// id but holds another id in between, an idempotent reduce may fold the
// leading run into the trailing one (the wrap merge), saving one forward.
// Non-idempotent reduces keep both runs separate and reconcile downstream.
class BehavioralAccumulator {
public:
    BehavioralAccumulator(std::uint32_t lanes, std::uint32_t selectors, ReduceFn reduce,
                          bool idempotent)
        : lanes_(lanes), reduce_(std::move(reduce)), idempotent_(idempotent),
          selectors_(selectors) {}

    LineFold fold_line(const AccLine& line) const {
        if (line.size() != lanes_) throw ModelError("line width does not match lane count");
        struct Run {
            std::uint32_t id;
            Label fold;
            bool updated;
            std::size_t last_lane;
        };
        std::vector<Run> runs;
        for (std::size_t k = 0; k < line.size(); ++k) {
            if (!line[k].valid) continue;
            if (!runs.empty() && runs.back().id == line[k].id) {
                runs.back().fold = reduce_(runs.back().fold, line[k].label);
                runs.back().updated = runs.back().updated || line[k].updated;
                runs.back().last_lane = k;
            } else {
                runs.push_back(Run{line[k].id, line[k].label, line[k].updated, k});
            }
        }
        if (idempotent_ && runs.size() >= 2 && runs.front().id == runs.back().id) {
            runs.back().fold = reduce_(runs.front().fold, runs.back().fold);
            runs.back().updated = runs.back().updated || runs.front().updated;
            runs.erase(runs.begin());
        }
        LineFold f;
        f.folded.resize(lanes_);
        f.forward.assign(lanes_, false);
        for (const Run& r : runs) {
            f.folded[r.last_lane] = IdLabelPair{r.id, r.fold, true, r.updated};
            f.forward[r.last_lane] = true;
        }
        return f;
    }

    std::vector<IdLabelPair> push_line(const AccLine& line) {
        std::vector<IdLabelPair> out;
        LineFold f = fold_line(line);
        for (std::size_t k = 0; k < lanes_; ++k)
            if (f.forward[k])
                selectors_[f.folded[k].id % selectors_.size()].ingest(f.folded[k], reduce_, out);
        return out;
    }

    std::vector<IdLabelPair> flush() {
        std::vector<IdLabelPair> out;
        for (auto& s : selectors_) s.flush(out);
        return out;
    }

private:
    std::uint32_t lanes_;
    ReduceFn reduce_;
    bool idempotent_;
    std::vector<detail::SequentialSelector> selectors_;
};

// Pipelined accumulator: models the hardware prefix network. Each lane keeps
// a window state (trailing-run fold plus a uniformity flag) that is combined
// with a partner lane per level; after log2(lanes) levels every lane covers
// the full line prefix. A mirrored suffix pass recovers the leading-run fold
// for the wrap merge. Must emit the exact sequence the behavioral route emits.
class PipelinedAccumulator {
public:
    PipelinedAccumulator(std::uint32_t lanes, std::uint32_t selectors, ReduceFn reduce,
                         bool idempotent)
        : lanes_(lanes), levels_(log2_exact(lanes)), reduce_(std::move(reduce)),
          idempotent_(idempotent), selectors_(selectors) {}

    // Update/ingest level, the combine levels, and the wrap-merge level.
    static std::uint32_t latency(std::uint32_t lanes) { return log2_exact(lanes) + 2; }
    std::uint32_t latency() const { return levels_ + 2; }

    LineFold fold_line(const AccLine& line) const {
        if (line.size() != lanes_) throw ModelError("line width does not match lane count");

        // Window state per lane. Prefix direction tracks the trailing run of
        // the covered window, suffix direction the leading run.
        struct Node {
            std::uint32_t edge_id = 0; // id at the window edge nearest the fold
            Label fold = 0;
            bool updated = false;
            bool uniform = true; // every valid lane in the window shares one id
            bool any_valid = false;
        };
        // `inner` owns the window edge whose run is tracked (the later lanes
        // for the prefix direction, the earlier lanes for the suffix
        // direction); `outer` extends the window away from that edge. Folds
        // always apply in lane-stream order.
        auto combine = [this](const Node& inner, const Node& outer, bool outer_is_earlier) {
            if (!inner.any_valid) return outer;
            if (!outer.any_valid) return inner;
            Node n;
            n.any_valid = true;
            n.edge_id = inner.edge_id;
            bool joins = inner.uniform && outer.edge_id == inner.edge_id;
            if (joins) {
                n.fold = outer_is_earlier ? reduce_(outer.fold, inner.fold)
                                          : reduce_(inner.fold, outer.fold);
                n.updated = outer.updated || inner.updated;
            } else {
                n.fold = inner.fold;
                n.updated = inner.updated;
            }
            n.uniform = inner.uniform && outer.uniform && outer.edge_id == inner.edge_id;
            return n;
        };
        auto seed = [&](std::size_t k) {
            Node n;
            if (line[k].valid) {
                n.edge_id = line[k].id;
                n.fold = line[k].label;
                n.updated = line[k].updated;
                n.any_valid = true;
            }
            return n;
        };

        std::vector<Node> prefix(lanes_), suffix(lanes_);
        for (std::size_t k = 0; k < lanes_; ++k) prefix[k] = suffix[k] = seed(k);
        for (std::uint32_t t = 0; t < levels_; ++t) {
            std::vector<Node> np = prefix, ns = suffix;
            for (std::uint32_t k = 0; k < lanes_; ++k) {
                if ((k >> t) & 1u) {
                    std::uint32_t partner = ((k >> t) << t) - 1;
                    np[k] = combine(prefix[k], prefix[partner], true);
                }
                std::uint32_t m = lanes_ - 1 - k; // mirrored lane
                if ((k >> t) & 1u) {
                    std::uint32_t partner = lanes_ - ((k >> t) << t);
                    ns[m] = combine(suffix[m], suffix[partner], false);
                }
            }
            prefix = std::move(np);
            suffix = std::move(ns);
        }

        // A lane forwards when it is the last valid lane of its run: the next
        // valid lane (if any) carries a different id.
        LineFold f;
        f.folded.resize(lanes_);
        f.forward.assign(lanes_, false);
        std::optional<std::size_t> last_fwd;
        std::optional<std::size_t> first_fwd;
        for (std::size_t k = 0; k < lanes_; ++k) {
            if (!line[k].valid) continue;
            std::optional<std::size_t> next;
            for (std::size_t j = k + 1; j < lanes_; ++j)
                if (line[j].valid) {
                    next = j;
                    break;
                }
            if (next && line[*next].id == line[k].id) continue;
            f.folded[k] = IdLabelPair{line[k].id, prefix[k].fold, true, prefix[k].updated};
            f.forward[k] = true;
            if (!first_fwd) first_fwd = k;
            last_fwd = k;
        }

        const Node& whole = prefix[lanes_ - 1];
        bool wrap = idempotent_ && whole.any_valid && !whole.uniform &&
                    suffix[0].edge_id == whole.edge_id;
        if (wrap) {
            // suffix[0] covers the full line; its fold is the leading run.
            IdLabelPair& last = f.folded[*last_fwd];
            last.label = reduce_(suffix[0].fold, last.label);
            last.updated = last.updated || suffix[0].updated;
            f.forward[*first_fwd] = false;
            f.folded[*first_fwd] = IdLabelPair{};
        }
        return f;
    }

    std::vector<IdLabelPair> push_line(const AccLine& line) {
        std::vector<IdLabelPair> out;
        LineFold f = fold_line(line);
        for (std::size_t k = 0; k < lanes_; ++k)
            if (f.forward[k])
                selectors_[f.folded[k].id % selectors_.size()].ingest(f.folded[k], reduce_, out);
        return out;
    }

    std::vector<IdLabelPair> flush() {
        std::vector<IdLabelPair> out;
        for (auto& s : selectors_) s.flush(out);
        return out;
    }

private:
    std::uint32_t lanes_;
    std::uint32_t levels_;
    ReduceFn reduce_;
    bool idempotent_;
    std::vector<detail::SequentialSelector> selectors_;
};

} // namespace graphscale
