#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "graphscale/engine.hpp"
#include "graphscale/oracles.hpp"
#include "graphscale/rmat.hpp"
#include "graphscale/suite.hpp"

using namespace graphscale;

namespace {

RunConfig small_cfg(std::uint32_t p, std::uint32_t scratch_bits = 12) {
    RunConfig c;
    c.p = p;
    c.e = 4;
    c.v = 4;
    c.scratch_bits = scratch_bits;
    c.stride_enabled = false;
    return c;
}

std::uint64_t total_updates(const SimReport& rep) {
    std::uint64_t u = 0;
    for (const IterationStats& st : rep.per_iteration) u += st.updates;
    return u;
}

} // namespace

TEST_CASE("source builder zips pointers with labels") {
    std::vector<std::uint32_t> P{0, 2, 2, 5};
    auto label = [](std::uint32_t r) { return Label(100 + r); };
    auto sv = build_source_vertices(P, label, 40);
    REQUIRE(sv.size() == 3);
    CHECK(sv[0].index == 40);
    CHECK(sv[0].label == 100);
    CHECK(sv[0].left == 0);
    CHECK(sv[0].right == 2);
    CHECK(sv[1].left == 2);
    CHECK(sv[1].right == 2); // empty row still yields a record
    CHECK(sv[2].index == 42);
    CHECK(sv[2].right == 5);

    CHECK_THROWS_AS(build_source_vertices({0, 3, 1}, label, 0), ModelError);
}

TEST_CASE("component labels canonicalize to minimum member ids") {
    std::vector<Label> raw{1, 1, 3, 3};
    canonicalize_components(raw);
    CHECK(raw == std::vector<Label>{0, 0, 2, 2});

    std::vector<Label> bad{4, 0, 0};
    CHECK_THROWS_AS(canonicalize_components(bad), ModelError);
}

TEST_CASE("configuration validation") {
    RunConfig c;
    c.p = 3;
    CHECK_THROWS_AS(validate_config(c), ConfigError);
    c = RunConfig{};
    c.e = 5;
    CHECK_THROWS_AS(validate_config(c), ConfigError);
    c = RunConfig{};
    c.v = 0;
    CHECK_THROWS_AS(validate_config(c), ConfigError);
    c = RunConfig{};
    c.scratch_bits = 32;
    CHECK_THROWS_AS(validate_config(c), ConfigError);
    c = RunConfig{};
    c.immediate_updates = false; // skipping left on
    CHECK_THROWS_AS(validate_config(c), ConfigError);
    c = RunConfig{};
    c.stride = 0;
    CHECK_THROWS_AS(validate_config(c), ConfigError);
    c = RunConfig{};
    CHECK_NOTHROW(validate_config(c));
}

TEST_CASE("empty graph converges immediately") {
    Graph g;
    RunResult r = simulate(g, small_cfg(1), "wcc");
    CHECK(r.converged);
    CHECK(r.iterations == 0);
    CHECK(r.labels.empty());
    CHECK(r.report.cycles == 0);
}

TEST_CASE("edgeless graph costs prefetch only") {
    Graph g;
    g.n = 16;
    RunConfig c = small_cfg(1, 6);
    c.e = 16;
    RunResult r = simulate(g, c, "bfs");
    CHECK(r.converged);
    CHECK(r.iterations == 1);
    CHECK(r.report.processing_cycles == 0);
    CHECK(r.report.cycles == 1); // one 16-label prefetch line
    for (VertexId v = 1; v < 16; ++v) CHECK(r.labels[v] == kInf32);
}

TEST_CASE("prefetch streams the resident window once per meta step") {
    Graph g = make_star(1023); // n = 1024
    RunConfig c;
    c.p = 1;
    c.e = 16;
    c.scratch_bits = 12;
    c.stride_enabled = false;

    RunResult r = simulate(g, c, "bfs");
    REQUIRE(r.iterations == 2); // leaves update, then a quiet pass
    // 1024 labels at 16 per line: 64 cycles, paid once thanks to skipping
    CHECK(r.report.prefetches == 1);
    CHECK(r.report.prefetch_skips == 1);
    CHECK(r.report.prefetch_cycle_total == 64);
    CHECK(r.report.bytes_prefetch == 4096);

    c.prefetch_skipping = false;
    RunResult keep = simulate(g, c, "bfs");
    CHECK(keep.iterations == 2);
    CHECK(keep.report.prefetches == 2); // window re-read every meta step
    CHECK(keep.report.prefetch_cycle_total == 128);
    CHECK(keep.labels == r.labels);
}

TEST_CASE("issue window accounting balances") {
    std::mt19937_64 rng(5);
    Graph g = rmat_generate(7, 6, 77);
    for (std::uint32_t p : {1u, 2u, 4u}) {
        RunConfig c = small_cfg(p, 8);
        RunResult r = simulate(g, c, "bfs");
        const SimReport& rep = r.report;
        CHECK(rep.issue_window_cycles ==
              rep.issue_min_cycles + rep.stall_crossbar + rep.stall_channel);
        CHECK(rep.processing_cycles >= rep.issue_min_cycles);
        CHECK(rep.crossbar_requests == rep.crossbar_responses);
    }
}

TEST_CASE("timing pass applies exactly the functional updates") {
    Graph g = rmat_generate(6, 4, 5);
    for (std::uint32_t p : {1u, 2u}) {
        for (const char* prob : {"bfs", "wcc"}) {
            RunConfig c = small_cfg(p, 8);
            RunResult r = simulate(g, c, prob);
            CHECK(r.report.updates_applied == total_updates(r.report));
        }
    }
}

TEST_CASE("per-iteration data volume floors at the csr footprint") {
    Graph g = make_star(255); // n = 256, |N| = 255, one sub-partition
    RunConfig c;
    c.p = 1;
    c.e = 16;
    c.scratch_bits = 10;
    c.stride_enabled = false;
    RunResult r = simulate(g, c, "bfs");
    REQUIRE(r.iterations == 2);
    // exactly the inverse CSR, twice: 4 bytes per neighbor and per pointer word
    CHECK(r.report.bytes_neighbors == 2ull * 4 * 255);
    CHECK(r.report.bytes_pointers == 2ull * 4 * 257);
    CHECK(r.report.bytes_source_labels == 0); // rows resident when l = 1

    Graph h = rmat_generate(6, 8, 9);
    RunConfig c2 = small_cfg(2, 8);
    RunResult r2 = simulate(h, c2, "wcc");
    Engine eng(h, c2, "wcc");
    std::uint64_t csr = footprint_report(eng.partitions()).csr_bytes;
    CHECK(r2.report.bytes_neighbors + r2.report.bytes_pointers >=
          std::uint64_t(r2.iterations) * csr);
}

TEST_CASE("small graphs match the oracles at several widths") {
    Graph ring = make_ring(5);
    RunResult r = simulate(ring, small_cfg(1, 8), "bfs");
    std::vector<std::uint32_t> want = oracle_bfs(ring, 0);
    REQUIRE(r.labels.size() == want.size());
    for (std::size_t v = 0; v < want.size(); ++v) CHECK(r.labels[v] == want[v]);

    Graph two = make_two_component(8, 13);
    RunResult w = simulate(symmetrize(two), small_cfg(2, 8), "wcc");
    std::vector<std::uint32_t> cc = oracle_wcc(symmetrize(two));
    for (std::size_t v = 0; v < cc.size(); ++v) CHECK(w.labels[v] == cc[v]);
}

TEST_CASE("tiny scratch pads force multiple meta steps") {
    Graph g = make_ring(24);
    RunConfig c;
    c.p = 2;
    c.e = 2;
    c.v = 2;
    c.scratch_bits = 2; // capacity 4 labels: interval 12 -> l = 3
    c.stride_enabled = false;
    Engine eng(g, c, "wcc");
    REQUIRE(eng.geometry().l == 3);
    REQUIRE(eng.partitions().subs.size() == 12);
    RunResult r = eng.run();
    CHECK(r.converged);
    std::vector<std::uint32_t> cc = oracle_wcc(g);
    for (std::size_t v = 0; v < cc.size(); ++v) CHECK(r.labels[v] == cc[v]);
}

TEST_CASE("chains resolve in one labeling pass asynchronously") {
    Graph g = make_chain(8);
    RunConfig c = small_cfg(1, 8);
    RunResult async = simulate(g, c, "bfs");
    CHECK(async.iterations == 2);
    for (VertexId v = 0; v <= 8; ++v) CHECK(async.labels[v] == v);

    c.sync_mode = true;
    RunResult sync = simulate(g, c, "bfs");
    CHECK(sync.iterations == 9); // one hop per pass over 8 edges
    CHECK(sync.labels == async.labels);
}

TEST_CASE("runs are deterministic") {
    Graph g = rmat_generate(6, 4, 123);
    RunConfig c = small_cfg(2, 8);
    RunResult a = simulate(g, c, "pr");
    RunResult b = simulate(g, c, "pr");
    CHECK(a.labels == b.labels);
    CHECK(a.iterations == b.iterations);
    CHECK(a.report.cycles == b.report.cycles);
    CHECK(a.report.bytes_neighbors == b.report.bytes_neighbors);
}

TEST_CASE("timing-only parameters never change results") {
    Graph g = rmat_generate(6, 8, 31);
    for (const char* prob : {"bfs", "wcc", "pr"}) {
        RunConfig c = small_cfg(2, 8);
        c.reorder_slots = 4;
        RunResult small = simulate(g, c, prob);
        c.reorder_slots = 32;
        c.bank_queue_depth = 8;
        RunResult big = simulate(g, c, prob);
        CHECK(small.labels == big.labels);
        CHECK(small.iterations == big.iterations);
    }
}

TEST_CASE("wide rank labels halve the line capacity") {
    Graph g = make_ring(64);
    RunConfig c;
    c.p = 1;
    c.e = 16;
    c.scratch_bits = 8;
    c.stride_enabled = false;
    RunResult r = simulate(g, c, "pr", 0, 0.85, 4);
    REQUIRE(r.iterations == 4);
    // 64 two-word labels at 8 per line, re-read each of 4 iterations
    CHECK(r.report.prefetch_cycle_total == 4 * 8);
    CHECK(r.report.bytes_prefetch == 4ull * 64 * 8);

    std::vector<double> want = oracle_pr(g, 0.85, 4);
    std::vector<double> got = extract_ranks(r.labels);
    for (std::size_t v = 0; v < want.size(); ++v)
        CHECK(got[v] == Catch::Approx(want[v]).margin(1e-6));
}

TEST_CASE("bfs root must be inside the graph") {
    Graph g = make_chain(4);
    CHECK_THROWS_AS(simulate(g, small_cfg(1, 8), "bfs", 99), ConfigError);
    CHECK_THROWS_AS(simulate(g, small_cfg(1, 8), "nope"), ConfigError);
}
