#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "graphscale/common.hpp"
#include "graphscale/graph.hpp"

namespace graphscale {

// Vertex renumbering that interleaves distant ids: enumerate v0, v_s, v_2s...
// then v1, v_s+1, ... and map the k-th enumerated id to new id k. Spreads
// clustered heavy rows across intervals. stride >= n degenerates to identity.
struct StrideMap {
    std::uint32_t n = 0;
    std::uint32_t stride = 1;
    std::vector<VertexId> new_of_old;
    std::vector<VertexId> old_of_new;
};

inline StrideMap stride_map(std::uint32_t n, std::uint32_t stride) {
    if (stride == 0) throw ConfigError("stride must be >= 1");
    StrideMap m;
    m.n = n;
    m.stride = stride;
    m.new_of_old.resize(n);
    m.old_of_new.resize(n);
    VertexId next = 0;
    for (std::uint32_t off = 0; off < stride && off < n; ++off) {
        for (std::uint64_t v = off; v < n; v += stride) {
            m.new_of_old[v] = next;
            m.old_of_new[next] = VertexId(v);
            ++next;
        }
    }
    return m;
}

// Two-dimensional layout: p near-equal vertex intervals (one per core), each
// split into l near-equal sub-intervals that fit the per-core label scratch.
// Remainders go to the lowest-indexed pieces, so sizes differ by at most one.
struct PartitionGeometry {
    std::uint32_t n = 0;
    std::uint32_t p = 1;
    std::uint32_t l = 1;
    std::uint32_t e = 16;
    std::uint32_t scratch_bits = 0;
    std::vector<std::uint32_t> interval_bounds;    // p + 1 fence posts
    std::vector<std::uint32_t> subinterval_bounds; // p * l + 1 fence posts

    std::uint32_t core_bits() const { return log2_exact(p); }
    std::uint32_t sub_count() const { return p * l; }
    std::uint32_t interval_size(std::uint32_t i) const {
        return interval_bounds[i + 1] - interval_bounds[i];
    }
    std::uint32_t sub_base(std::uint32_t j) const { return subinterval_bounds[j]; }
    std::uint32_t sub_size(std::uint32_t j) const {
        return subinterval_bounds[j + 1] - subinterval_bounds[j];
    }
    std::uint32_t owner_of_sub(std::uint32_t j) const { return j / l; }

    std::uint32_t interval_of(VertexId v) const {
        auto it = std::upper_bound(interval_bounds.begin(), interval_bounds.end(), v);
        return std::uint32_t(it - interval_bounds.begin()) - 1;
    }
    std::uint32_t sub_of(VertexId v) const {
        auto it = std::upper_bound(subinterval_bounds.begin(), subinterval_bounds.end(), v);
        return std::uint32_t(it - subinterval_bounds.begin()) - 1;
    }
};

namespace detail {

// Balanced split of [0, n) into k pieces, remainder to the lowest indices.
inline void split_bounds(std::uint32_t base, std::uint32_t n, std::uint32_t k,
                         std::vector<std::uint32_t>& out) {
    std::uint32_t q = k ? n / k : 0, r = k ? n % k : 0, pos = base;
    for (std::uint32_t i = 0; i < k; ++i) {
        out.push_back(pos);
        pos += q + (i < r ? 1 : 0);
    }
}

} // namespace detail

// scratch_capacity = labels one core's scratch pad can hold (power of two).
// l is the smallest count making every sub-interval fit.
inline PartitionGeometry compute_geometry(std::uint32_t n, std::uint32_t p, std::uint32_t e,
                                          std::uint64_t scratch_capacity) {
    if (!is_pow2(p)) throw ConfigError("core count must be a power of two");
    if (!is_pow2(e)) throw ConfigError("lane count must be a power of two");
    if (scratch_capacity < e) throw ConfigError("scratch capacity must be >= lane count");
    PartitionGeometry g;
    g.n = n;
    g.p = p;
    g.e = e;
    g.scratch_bits = log2_exact(scratch_capacity);
    std::uint32_t max_interval = std::uint32_t(ceil_div(n, p));
    g.l = std::max<std::uint32_t>(1, std::uint32_t(ceil_div(max_interval, scratch_capacity)));
    detail::split_bounds(0, n, p, g.interval_bounds);
    g.interval_bounds.push_back(n);
    for (std::uint32_t i = 0; i < p; ++i)
        detail::split_bounds(g.interval_bounds[i], g.interval_size(i), g.l,
                             g.subinterval_bounds);
    g.subinterval_bounds.push_back(n);
    for (std::uint32_t j = 0; j < g.sub_count(); ++j)
        if (g.sub_size(j) > scratch_capacity)
            throw ModelError("sub-interval exceeds scratch capacity");
    return g;
}

// Neighbor indices are pre-encoded for the crossbar: owning core id in the
// bits above scratch_bits, offset within the sub-interval in the low bits.
inline std::uint32_t encode_neighbor(const PartitionGeometry& g, VertexId source) {
    std::uint32_t j = g.sub_of(source);
    std::uint32_t core = g.owner_of_sub(j);
    std::uint32_t local = source - g.sub_base(j);
    if (local >> g.scratch_bits)
        throw ModelError("local offset exceeds scratch window");
    std::uint64_t enc = (std::uint64_t(core) << g.scratch_bits) | local;
    if (enc > 0xFFFFFFFFull) throw ModelError("encoded index exceeds 32 bits");
    return std::uint32_t(enc);
}

struct DecodedNeighbor {
    std::uint32_t core = 0;
    std::uint32_t local = 0;
};

inline DecodedNeighbor decode_neighbor(const PartitionGeometry& g, std::uint32_t enc) {
    DecodedNeighbor d;
    d.core = enc >> g.scratch_bits;
    d.local = enc & ((std::uint64_t(1) << g.scratch_bits) - 1);
    if (d.core >= g.p) throw ModelError("decoded core id out of range");
    return d;
}

// Decode back to a global vertex id given the resident sub-interval of the
// owning core.
inline VertexId decode_to_vertex(const PartitionGeometry& g, std::uint32_t enc,
                                 std::uint32_t resident_sub_of_core) {
    DecodedNeighbor d = decode_neighbor(g, enc);
    return g.sub_base(resident_sub_of_core) + d.local;
}

// Pull-direction CSR for rows [row_begin, row_end): row v holds the sources of
// original edges u -> v, ascending. This is one horizontal partition of the
// inverse edge set; pointer offsets are partition-relative.
struct HorizontalCsr {
    VertexId row_begin = 0, row_end = 0;
    std::vector<std::uint32_t> pointers; // (row_end - row_begin) + 1
    std::vector<VertexId> sources;
};

inline HorizontalCsr inverse_horizontal_csr(const Graph& g, VertexId row_begin,
                                            VertexId row_end) {
    HorizontalCsr csr;
    csr.row_begin = row_begin;
    csr.row_end = row_end;
    std::uint32_t rows = row_end - row_begin;
    csr.pointers.assign(rows + 1, 0);
    for (const Edge& e : g.edges)
        if (e.dst >= row_begin && e.dst < row_end) ++csr.pointers[e.dst - row_begin + 1];
    for (std::uint32_t r = 1; r <= rows; ++r) csr.pointers[r] += csr.pointers[r - 1];
    csr.sources.resize(csr.pointers[rows]);
    std::vector<std::uint32_t> cursor(csr.pointers.begin(), csr.pointers.end() - 1);
    for (const Edge& e : g.edges)
        if (e.dst >= row_begin && e.dst < row_end)
            csr.sources[cursor[e.dst - row_begin]++] = e.src;
    for (std::uint32_t r = 0; r < rows; ++r)
        std::sort(csr.sources.begin() + csr.pointers[r], csr.sources.begin() + csr.pointers[r + 1]);
    return csr;
}

// Edges with destinations in interval I_core and sources in sub-interval
// J_sub, stored as a row-complete CSR over I_core. Neighbor entries are
// crossbar-encoded (core | local-offset) in ascending source order.
struct SubPartition {
    std::uint32_t core = 0;
    std::uint32_t sub = 0;
    std::vector<std::uint32_t> pointers;  // interval_size(core) + 1
    std::vector<std::uint32_t> neighbors; // encoded indices

    std::uint64_t edge_count() const { return neighbors.size(); }
};

struct PartitionedGraph {
    PartitionGeometry geo;
    std::vector<SubPartition> subs; // index core * sub_count + sub
    std::optional<StrideMap> stride;
    std::uint32_t n = 0;
    std::uint64_t edge_count = 0;

    const SubPartition& sub(std::uint32_t core, std::uint32_t j) const {
        return subs[std::size_t(core) * geo.sub_count() + j];
    }
    SubPartition& sub(std::uint32_t core, std::uint32_t j) {
        return subs[std::size_t(core) * geo.sub_count() + j];
    }
};

// Applies the stride permutation (if any), inverts edges and slices the
// inverse CSR by destination interval and source sub-interval. Every edge
// lands in exactly one sub-partition.
inline PartitionedGraph build_partitions(const Graph& g, const PartitionGeometry& geo,
                                         const std::optional<StrideMap>& stride = std::nullopt) {
    if (geo.n != g.n) throw ConfigError("geometry vertex count does not match graph");
    if (stride && stride->n != g.n) throw ConfigError("stride map size does not match graph");
    PartitionedGraph pg;
    pg.geo = geo;
    pg.stride = stride;
    pg.n = g.n;
    pg.edge_count = g.edges.size();
    pg.subs.resize(std::size_t(geo.p) * geo.sub_count());
    for (std::uint32_t i = 0; i < geo.p; ++i)
        for (std::uint32_t j = 0; j < geo.sub_count(); ++j) {
            pg.sub(i, j).core = i;
            pg.sub(i, j).sub = j;
        }

    // Bucket inverse edges by (destination interval, source sub-interval).
    std::vector<std::vector<std::pair<std::uint32_t, VertexId>>> rows_by_bucket(pg.subs.size());
    for (const Edge& edge : g.edges) {
        VertexId u = stride ? stride->new_of_old[edge.src] : edge.src;
        VertexId v = stride ? stride->new_of_old[edge.dst] : edge.dst;
        std::uint32_t i = geo.interval_of(v);
        std::uint32_t j = geo.sub_of(u);
        rows_by_bucket[std::size_t(i) * geo.sub_count() + j].push_back(
            {v - geo.interval_bounds[i], u});
    }
    for (std::size_t b = 0; b < pg.subs.size(); ++b) {
        SubPartition& sp = pg.subs[b];
        auto& rows = rows_by_bucket[b];
        std::sort(rows.begin(), rows.end());
        std::uint32_t isize = geo.interval_size(sp.core);
        sp.pointers.assign(isize + 1, 0);
        sp.neighbors.reserve(rows.size());
        for (auto& [row, src] : rows) ++sp.pointers[row + 1];
        for (std::uint32_t r = 1; r <= isize; ++r) sp.pointers[r] += sp.pointers[r - 1];
        for (auto& [row, src] : rows) sp.neighbors.push_back(encode_neighbor(geo, src));
    }
    return pg;
}

// ---- binary dump / load ----------------------------------------------------
// One file per sub-partition: little-endian 32-bit words
//   [interval_size, neighbor_count, pointers..., neighbors...]
// plus a manifest.json with the geometry.

namespace detail {

inline void write_words(std::ostream& out, const std::vector<std::uint32_t>& words) {
    for (std::uint32_t w : words) {
        unsigned char b[4] = {
            (unsigned char)(w & 0xFF),
            (unsigned char)((w >> 8) & 0xFF),
            (unsigned char)((w >> 16) & 0xFF),
            (unsigned char)((w >> 24) & 0xFF),
        };
        out.write(reinterpret_cast<const char*>(b), 4);
    }
}

inline std::vector<std::uint32_t> read_words(std::istream& in, std::size_t count) {
    std::vector<std::uint32_t> words(count);
    for (std::size_t i = 0; i < count; ++i) {
        unsigned char b[4];
        if (!in.read(reinterpret_cast<char*>(b), 4))
            throw ParseError("partition file truncated");
        words[i] = std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) |
                   (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
    }
    return words;
}

} // namespace detail

inline std::string sub_partition_filename(std::uint32_t core, std::uint32_t sub) {
    return "sub_" + std::to_string(core) + "_" + std::to_string(sub) + ".bin";
}

inline void save_partitions(const PartitionedGraph& pg, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json geo{
        {"n", pg.geo.n},
        {"p", pg.geo.p},
        {"l", pg.geo.l},
        {"e", pg.geo.e},
        {"scratch_bits", pg.geo.scratch_bits},
        {"interval_bounds", pg.geo.interval_bounds},
        {"subinterval_bounds", pg.geo.subinterval_bounds},
    };
    nlohmann::json manifest{
        {"format_version", 1},
        {"n", pg.n},
        {"edge_count", pg.edge_count},
        {"geometry", geo},
        {"stride", pg.stride ? nlohmann::json(pg.stride->stride) : nlohmann::json(nullptr)},
    };
    nlohmann::json files = nlohmann::json::array();
    for (const SubPartition& sp : pg.subs) {
        std::string name = sub_partition_filename(sp.core, sp.sub);
        files.push_back(name);
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw ParseError("cannot write " + (dir / name).string());
        detail::write_words(out, {std::uint32_t(sp.pointers.size() - 1),
                                  std::uint32_t(sp.neighbors.size())});
        detail::write_words(out, sp.pointers);
        detail::write_words(out, sp.neighbors);
    }
    manifest["files"] = files;
    std::ofstream mout(dir / "manifest.json");
    if (!mout) throw ParseError("cannot write manifest.json");
    mout << manifest.dump(2) << "\n";
}

inline PartitionedGraph load_partitions(const std::filesystem::path& dir) {
    std::ifstream min(dir / "manifest.json");
    if (!min) throw ParseError("cannot read " + (dir / "manifest.json").string());
    nlohmann::json manifest = nlohmann::json::parse(min);
    PartitionedGraph pg;
    const auto& geo = manifest.at("geometry");
    pg.geo.n = geo.at("n");
    pg.geo.p = geo.at("p");
    pg.geo.l = geo.at("l");
    pg.geo.e = geo.at("e");
    pg.geo.scratch_bits = geo.at("scratch_bits");
    pg.geo.interval_bounds = geo.at("interval_bounds").get<std::vector<std::uint32_t>>();
    pg.geo.subinterval_bounds = geo.at("subinterval_bounds").get<std::vector<std::uint32_t>>();
    pg.n = manifest.at("n");
    pg.edge_count = manifest.at("edge_count");
    if (!manifest.at("stride").is_null())
        pg.stride = stride_map(pg.n, manifest.at("stride").get<std::uint32_t>());
    pg.subs.resize(std::size_t(pg.geo.p) * pg.geo.sub_count());
    for (std::uint32_t i = 0; i < pg.geo.p; ++i)
        for (std::uint32_t j = 0; j < pg.geo.sub_count(); ++j) {
            std::ifstream in(dir / sub_partition_filename(i, j), std::ios::binary);
            if (!in) throw ParseError("missing sub-partition file " + sub_partition_filename(i, j));
            auto header = detail::read_words(in, 2);
            SubPartition& sp = pg.sub(i, j);
            sp.core = i;
            sp.sub = j;
            sp.pointers = detail::read_words(in, std::size_t(header[0]) + 1);
            sp.neighbors = detail::read_words(in, header[1]);
            if (sp.pointers.back() != sp.neighbors.size())
                throw ParseError("pointer/neighbor mismatch in " + sub_partition_filename(i, j));
        }
    return pg;
}

// ---- footprint and balance reports -----------------------------------------

struct FootprintReport {
    std::uint64_t edge_count = 0;
    std::uint64_t csr_bytes = 0;       // 4B per neighbor + 4B per pointer entry
    std::uint64_t edge_list_bytes = 0; // two 4B ids per edge
    double csr_bytes_per_edge = 0.0;
    double edge_list_bytes_per_edge = 8.0;
};

inline FootprintReport footprint_report(const PartitionedGraph& pg) {
    if (pg.edge_count == 0) throw ConfigError("bytes per edge undefined without edges");
    FootprintReport r;
    r.edge_count = pg.edge_count;
    for (const SubPartition& sp : pg.subs)
        r.csr_bytes += 4 * (sp.neighbors.size() + sp.pointers.size());
    r.edge_list_bytes = 8 * pg.edge_count;
    r.csr_bytes_per_edge = pg.edge_count ? double(r.csr_bytes) / double(pg.edge_count) : 0.0;
    return r;
}

struct BalanceReport {
    std::vector<std::uint64_t> per_core_edges;      // destination-core load
    std::vector<std::uint64_t> per_meta_step_edges; // l entries
    double imbalance_ratio = 1.0;                   // max / max(1, min)
};

inline BalanceReport balance_report(const PartitionedGraph& pg) {
    BalanceReport r;
    r.per_core_edges.assign(pg.geo.p, 0);
    r.per_meta_step_edges.assign(pg.geo.l, 0);
    for (const SubPartition& sp : pg.subs) {
        r.per_core_edges[sp.core] += sp.edge_count();
        r.per_meta_step_edges[sp.sub % pg.geo.l] += sp.edge_count();
    }
    std::uint64_t mx = 0, mn = std::numeric_limits<std::uint64_t>::max();
    for (std::uint64_t c : r.per_core_edges) {
        mx = std::max(mx, c);
        mn = std::min(mn, c);
    }
    r.imbalance_ratio = double(mx) / double(std::max<std::uint64_t>(1, mn));
    return r;
}

} // namespace graphscale
