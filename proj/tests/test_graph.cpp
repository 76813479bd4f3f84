#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "fpplab/graph.hpp"
#include "fpplab/random.hpp"
#include "fpplab/stats.hpp"

namespace gr = fpplab::graph;
using fpplab::rng::make_stream;

TEST_CASE("from_edges builds a sorted CSR and validates input") {
    const gr::Graph g = gr::from_edges(5, {{3, 1}, {0, 1}, {4, 3}, {1, 2}});
    CHECK(g.n == 5);
    CHECK(g.edge_count() == 4);
    // Edges normalized to (min,max) and sorted lexicographically.
    CHECK(g.edge_u[0] == 0);
    CHECK(g.edge_v[0] == 1);
    CHECK(g.edge_u[1] == 1);
    CHECK(g.edge_v[1] == 2);
    CHECK(g.edge_u[2] == 1);
    CHECK(g.edge_v[2] == 3);
    CHECK(g.edge_u[3] == 3);
    CHECK(g.edge_v[3] == 4);
    CHECK(g.degree(1) == 3);
    CHECK(g.degree(4) == 1);
    // Adjacency row of vertex 1 is ascending.
    std::vector<std::int32_t> row(
        g.neighbors.begin() + g.offsets[1],
        g.neighbors.begin() + g.offsets[2]);
    CHECK(std::is_sorted(row.begin(), row.end()));
    CHECK(row == std::vector<std::int32_t>{0, 2, 3});

    CHECK_THROWS_AS(gr::from_edges(3, {{0, 0}}), std::domain_error);
    CHECK_THROWS_AS(gr::from_edges(3, {{0, 1}, {1, 0}}), std::domain_error);
    CHECK_THROWS_AS(gr::from_edges(3, {{0, 3}}), std::domain_error);
}

TEST_CASE("random graph edge probabilities are exact") {
    auto stream = make_stream(101, 0);
    SUBCASE("degenerate densities") {
        CHECK(gr::generate_er(6, 0.0, stream).edge_count() == 0);
        const gr::Graph full = gr::generate_er(6, 1.0, stream);
        CHECK(full.edge_count() == 15);
        for (std::int64_t v = 0; v < 6; ++v) CHECK(full.degree(v) == 5);
    }
    SUBCASE("single-pair inclusion frequency equals p") {
        const double p = 0.15;
        int present = 0;
        const int reps = 20000;
        for (int r = 0; r < reps; ++r) {
            const gr::Graph g = gr::generate_er(20, p, stream);
            for (std::size_t e = 0; e < g.edge_u.size(); ++e)
                if (g.edge_u[e] == 3 && g.edge_v[e] == 7) ++present;
        }
        CHECK(std::fabs(present / static_cast<double>(reps) - p) < 0.01);
    }
    SUBCASE("edge count matches its binomial law") {
        const std::int64_t n = 300;
        const double p = 0.02;
        const double pairs = static_cast<double>(n * (n - 1) / 2);
        std::vector<double> counts(400);
        for (double& c : counts)
            c = static_cast<double>(gr::generate_er(n, p, stream).edge_count());
        const double want_mean = pairs * p;          // 897
        const double want_var = pairs * p * (1 - p); // 879.06
        CHECK(std::fabs(fpplab::stats::mean(counts) - want_mean) < 7.5);
        CHECK(std::fabs(fpplab::stats::variance(counts) / want_var - 1.0) < 0.35);
        // No duplicates, valid endpoints, proper ordering.
        const gr::Graph g = gr::generate_er(n, p, stream);
        std::set<std::pair<std::int32_t, std::int32_t>> seen;
        for (std::size_t e = 0; e < g.edge_u.size(); ++e) {
            CHECK(g.edge_u[e] < g.edge_v[e]);
            CHECK(g.edge_v[e] < n);
            CHECK(seen.emplace(g.edge_u[e], g.edge_v[e]).second);
        }
    }
    SUBCASE("two fixed pairs are independent") {
        int both = 0, first = 0, second = 0;
        const int reps = 20000;
        const double p = 0.3;
        for (int r = 0; r < reps; ++r) {
            const gr::Graph g = gr::generate_er(8, p, stream);
            bool has01 = false, has56 = false;
            for (std::size_t e = 0; e < g.edge_u.size(); ++e) {
                if (g.edge_u[e] == 0 && g.edge_v[e] == 1) has01 = true;
                if (g.edge_u[e] == 5 && g.edge_v[e] == 6) has56 = true;
            }
            first += has01;
            second += has56;
            both += has01 && has56;
        }
        const double pf = first / static_cast<double>(reps);
        const double ps = second / static_cast<double>(reps);
        const double pb = both / static_cast<double>(reps);
        CHECK(std::fabs(pb - pf * ps) < 0.012);
    }
}

TEST_CASE("sparse giant-scale generation runs in time proportional to edges") {
    auto stream = make_stream(2024, 1);
    const std::int64_t n = 1000000;
    const double p = 2.0 / static_cast<double>(n);
    const auto t0 = std::chrono::steady_clock::now();
    const gr::Graph g = gr::generate_er(n, p, stream);
    const auto t1 = std::chrono::steady_clock::now();
    const double secs = std::chrono::duration<double>(t1 - t0).count();
    // ~N(1e6, ~1e3): allow a wide deterministic-seed window.
    CHECK(g.edge_count() > 990000);
    CHECK(g.edge_count() < 1010000);
    CHECK(secs < 5.0);
}

TEST_CASE("weights are independent standard exponentials per edge") {
    auto stream = make_stream(55, 2);
    const gr::WeightedGraph wg =
        gr::attach_weights(gr::generate_er(2000, 0.01, stream), stream);
    REQUIRE(wg.weights.size() == static_cast<std::size_t>(wg.g.edge_count()));
    const double ks = fpplab::stats::ks_one_sample(
        wg.weights, [](double x) { return fpplab::stats::exponential_cdf(x, 1.0); });
    CHECK(ks < 0.02);
}

TEST_CASE("components come back largest-first with sorted members") {
    // Components: {0,1,2,3} (path), {4,5} (edge), {6} (isolated).
    const gr::Graph g = gr::from_edges(7, {{0, 1}, {1, 2}, {2, 3}, {4, 5}});
    const auto comps = gr::components(g);
    REQUIRE(comps.size() == 3);
    CHECK(comps[0] == std::vector<std::int32_t>{0, 1, 2, 3});
    CHECK(comps[1] == std::vector<std::int32_t>{4, 5});
    CHECK(comps[2] == std::vector<std::int32_t>{6});
}

TEST_CASE("two-core of a hand-built graph") {
    // Triangle 2-3-4, path 0-1-2 hanging off 2, leaf 6 off 3, isolated 5.
    const gr::Graph g =
        gr::from_edges(7, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {2, 4}, {3, 6}});
    const auto core = gr::two_core(g);
    CHECK(core.core_vertices == std::vector<std::int32_t>{2, 3, 4});
    REQUIRE(core.pendant_trees.size() == 3);
    CHECK(core.pendant_trees[0].attachment == 2);
    CHECK(core.pendant_trees[0].vertices == std::vector<std::int32_t>{0, 1});
    CHECK(core.pendant_trees[0].depth == 2);
    CHECK(core.pendant_trees[1].attachment == 3);
    CHECK(core.pendant_trees[1].vertices == std::vector<std::int32_t>{6});
    CHECK(core.pendant_trees[1].depth == 1);
    CHECK(core.pendant_trees[2].attachment == -1);
    CHECK(core.pendant_trees[2].vertices == std::vector<std::int32_t>{5});
    CHECK(core.pendant_trees[2].depth == 0);
}

TEST_CASE("two-core merges branches sharing an anchor and measures free trees") {
    // Square 0-1-2-3 with two separate branches at 0 (4 and 5-7), and a free
    // path 6-8-9 in its own component.
    const gr::Graph g = gr::from_edges(
        10, {{0, 1}, {1, 2}, {2, 3}, {0, 3}, {0, 4}, {0, 5}, {5, 7}, {6, 8}, {8, 9}});
    const auto core = gr::two_core(g);
    CHECK(core.core_vertices == std::vector<std::int32_t>{0, 1, 2, 3});
    REQUIRE(core.pendant_trees.size() == 2);
    CHECK(core.pendant_trees[0].attachment == 0);
    CHECK(core.pendant_trees[0].vertices == std::vector<std::int32_t>{4, 5, 7});
    CHECK(core.pendant_trees[0].depth == 2);
    CHECK(core.pendant_trees[1].attachment == -1);
    CHECK(core.pendant_trees[1].vertices == std::vector<std::int32_t>{6, 8, 9});
    CHECK(core.pendant_trees[1].depth == 2);  // path diameter
}

namespace {

// Independent peeling oracle: scan-and-remove until no vertex of degree <= 1
// remains, quadratic and direct.
std::vector<std::int32_t> naive_core(std::int64_t n,
                                     std::vector<std::pair<std::int64_t, std::int64_t>> edges) {
    std::vector<char> removed(static_cast<std::size_t>(n), 0);
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::int64_t v = 0; v < n; ++v) {
            if (removed[static_cast<std::size_t>(v)]) continue;
            std::int64_t deg = 0;
            for (const auto& [a, b] : edges) {
                if (removed[static_cast<std::size_t>(a)] ||
                    removed[static_cast<std::size_t>(b)])
                    continue;
                if (a == v || b == v) ++deg;
            }
            if (deg <= 1) {
                removed[static_cast<std::size_t>(v)] = 1;
                changed = true;
            }
        }
    }
    std::vector<std::int32_t> core;
    for (std::int64_t v = 0; v < n; ++v)
        if (!removed[static_cast<std::size_t>(v)])
            core.push_back(static_cast<std::int32_t>(v));
    return core;
}

}  // namespace

TEST_CASE("two-core agrees with a direct peeling oracle on random graphs") {
    auto stream = make_stream(7, 77);
    for (int rep = 0; rep < 200; ++rep) {
        const gr::Graph g = gr::generate_er(12, 0.18, stream);
        std::vector<std::pair<std::int64_t, std::int64_t>> edges;
        for (std::size_t e = 0; e < g.edge_u.size(); ++e)
            edges.emplace_back(g.edge_u[e], g.edge_v[e]);
        const auto got = gr::two_core(g);
        CHECK(got.core_vertices == naive_core(12, edges));
        // Every vertex is in the core or in exactly one pendant tree.
        std::set<std::int32_t> all(got.core_vertices.begin(), got.core_vertices.end());
        for (const auto& t : got.pendant_trees)
            for (std::int32_t v : t.vertices) CHECK(all.insert(v).second);
        CHECK(all.size() == 12);
    }
}

TEST_CASE("dump and parse round-trip a weighted graph exactly") {
    auto stream = make_stream(31, 4);
    const gr::WeightedGraph wg =
        gr::attach_weights(gr::generate_er(40, 0.1, stream), stream);
    std::stringstream ss;
    gr::dump(wg, ss);
    const gr::WeightedGraph back = gr::parse_dump(ss);
    CHECK(back.g.n == wg.g.n);
    REQUIRE(back.g.edge_count() == wg.g.edge_count());
    for (std::int64_t e = 0; e < wg.g.edge_count(); ++e) {
        const auto i = static_cast<std::size_t>(e);
        CHECK(back.g.edge_u[i] == wg.g.edge_u[i]);
        CHECK(back.g.edge_v[i] == wg.g.edge_v[i]);
        CHECK(back.weights[i] == wg.weights[i]);
    }
}
