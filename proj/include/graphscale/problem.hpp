#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "graphscale/common.hpp"
#include "graphscale/graph.hpp"

namespace graphscale {

enum class LabelWidth { w32, w64 };
enum class Termination { by_no_updates, fixed_iterations };
// What the label means; component ids need canonicalization when vertex ids
// were permuted before the run.
enum class LabelKind { distance, component_id, rank };

struct MapOut {
    Label value = 0;
    bool updated = false;
};

// 64-bit rank label: out-degree in the high word, rank (float) in the low word.
inline Label pr_pack(std::uint32_t degree, float rank) {
    return (Label(degree) << 32) | float_bits(rank);
}
inline std::uint32_t pr_degree(Label l) { return std::uint32_t(l >> 32); }
inline float pr_rank(Label l) { return bits_float(std::uint32_t(l & 0xFFFFFFFFull)); }

inline double pr_writeback(double acc, std::uint64_t n, double damping) {
    return (1.0 - damping) / double(n) + damping * acc;
}

// Vertex program plugged into the engine. map() produces a per-edge candidate
// from the current label of the vertex being updated (src) and the pulled
// neighbor label (dst); reduce() folds candidates of one vertex; writeback()
// merges the folded accumulator value into the stored label. Candidates and
// stored labels share a domain for min-style problems; rank problems carry the
// candidate as raw double bits so partial sums survive the pipeline intact.
struct Problem {
    std::string name;
    LabelWidth width = LabelWidth::w32;
    bool idempotent = true;
    bool double_buffered = false;
    Termination termination = Termination::by_no_updates;
    std::uint32_t iterations = 0; // fixed_iterations only
    LabelKind kind = LabelKind::distance;
    double damping = 0.0;

    std::function<Label(VertexId)> init;
    std::function<MapOut(Label src, Label dst)> map;
    std::function<Label(Label, Label)> reduce;
    std::function<Label(Label current, Label acc)> writeback;
    // Double-buffered problems: seeds the next-iteration label from the
    // previous one before any update lands (PR plants the (1-d)/n base term
    // here, which is also all a zero-in-degree vertex ever receives).
    std::function<Label(Label prev)> iteration_seed;

    std::uint32_t label_bytes() const { return width == LabelWidth::w32 ? 4 : 8; }
};

// Hop distances: min-reduce over neighbor+1, saturating at kInf32.
inline Problem bfs_def(VertexId root) {
    Problem p;
    p.name = "bfs";
    p.kind = LabelKind::distance;
    p.init = [root](VertexId v) { return Label(v == root ? 0 : kInf32); };
    p.map = [](Label src, Label dst) {
        std::uint32_t s = std::uint32_t(src), d = std::uint32_t(dst);
        std::uint32_t cand = d == kInf32 ? kInf32 : d + 1;
        return MapOut{Label(std::min(s, cand)), cand < s};
    };
    p.reduce = [](Label a, Label b) { return std::min(a, b); };
    p.writeback = [](Label cur, Label acc) { return std::min(cur, acc); };
    return p;
}

// Component ids: min-reduce over neighbor ids, seeded with own id.
inline Problem wcc_def() {
    Problem p;
    p.name = "wcc";
    p.kind = LabelKind::component_id;
    p.init = [](VertexId v) { return Label(v); };
    p.map = [](Label src, Label dst) {
        return MapOut{std::min(src, dst), dst < src};
    };
    p.reduce = [](Label a, Label b) { return std::min(a, b); };
    p.writeback = [](Label cur, Label acc) { return std::min(cur, acc); };
    return p;
}

// Ranks: 64-bit degree+rank labels, double-buffered, fixed iteration count.
// map() emits the neighbor's rank/degree share as double bits; reduce() sums;
// writeback() folds d * acc into a label pre-seeded with (1-d)/n.
inline Problem pr_def(const std::vector<std::uint32_t>& out_degree, std::uint64_t n,
                      double damping = 0.85, std::uint32_t iterations = 16) {
    Problem p;
    p.name = "pr";
    p.width = LabelWidth::w64;
    p.idempotent = false;
    p.double_buffered = true;
    p.termination = Termination::fixed_iterations;
    p.iterations = iterations;
    p.kind = LabelKind::rank;
    p.damping = damping;
    float init_rank = n ? float(1.0 / double(n)) : 0.0f;
    p.init = [out_degree, init_rank](VertexId v) {
        return pr_pack(out_degree[v], init_rank);
    };
    p.map = [](Label /*src*/, Label dst) {
        std::uint32_t deg = pr_degree(dst);
        double share = deg == 0 ? 0.0 : double(pr_rank(dst)) / double(deg);
        return MapOut{double_bits(share), true};
    };
    p.reduce = [](Label a, Label b) { return double_bits(bits_double(a) + bits_double(b)); };
    p.writeback = [damping](Label cur, Label acc) {
        double rank = double(pr_rank(cur)) + damping * bits_double(acc);
        return pr_pack(pr_degree(cur), float(rank));
    };
    float base = n ? float((1.0 - damping) / double(n)) : 0.0f;
    p.iteration_seed = [base](Label prev) { return pr_pack(pr_degree(prev), base); };
    return p;
}

inline Problem make_problem(const std::string& name, const Graph& g, VertexId root = 0,
                            double damping = 0.85, std::uint32_t iterations = 16) {
    if (name == "bfs") return bfs_def(root);
    if (name == "wcc") return wcc_def();
    if (name == "pr") return pr_def(out_degrees(g), g.n, damping, iterations);
    throw ConfigError("unknown problem: " + name);
}

} // namespace graphscale
