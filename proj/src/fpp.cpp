#include "fpplab/fpp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <utility>

#include "fpplab/theory.hpp"

namespace fpplab::fpp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lazy-deletion priority-queue search. When stop_vertex is nonnegative the
// scan ends as soon as that vertex is finalized; every finalized distance is
// exact either way.
ShortestWeightTree dijkstra(const graph::WeightedGraph& wg, std::int64_t source,
                            std::int64_t stop_vertex) {
    const std::int64_t n = wg.g.n;
    if (source < 0 || source >= n)
        throw std::domain_error("shortest_weight_tree: source out of range");
    ShortestWeightTree t;
    t.source = source;
    t.weight.assign(static_cast<std::size_t>(n), kInf);
    t.hops.assign(static_cast<std::size_t>(n), -1);
    t.parent.assign(static_cast<std::size_t>(n), -1);
    std::vector<char> done(static_cast<std::size_t>(n), 0);

    using Item = std::pair<double, std::int64_t>;  // label breaks weight ties
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> queue;
    t.weight[static_cast<std::size_t>(source)] = 0.0;
    t.hops[static_cast<std::size_t>(source)] = 0;
    queue.emplace(0.0, source);
    while (!queue.empty()) {
        const auto [d, v] = queue.top();
        queue.pop();
        const auto vi = static_cast<std::size_t>(v);
        if (done[vi]) continue;
        done[vi] = 1;
        if (v == stop_vertex) break;
        const std::int64_t lo = wg.g.offsets[vi];
        const std::int64_t hi = wg.g.offsets[vi + 1];
        for (std::int64_t e = lo; e < hi; ++e) {
            const auto u = static_cast<std::size_t>(
                wg.g.neighbors[static_cast<std::size_t>(e)]);
            if (done[u]) continue;
            const double nd =
                d + wg.weights[static_cast<std::size_t>(
                        wg.g.edge_ids[static_cast<std::size_t>(e)])];
            if (nd < t.weight[u]) {
                t.weight[u] = nd;
                t.hops[u] = t.hops[vi] + 1;
                t.parent[u] = v;
                queue.emplace(nd, static_cast<std::int64_t>(u));
            }
        }
    }
    return t;
}

double edge_weight_between(const graph::WeightedGraph& wg, std::int64_t x,
                           std::int64_t y) {
    const auto xi = static_cast<std::size_t>(x);
    for (std::int64_t e = wg.g.offsets[xi]; e < wg.g.offsets[xi + 1]; ++e) {
        if (wg.g.neighbors[static_cast<std::size_t>(e)] == y)
            return wg.weights[static_cast<std::size_t>(
                wg.g.edge_ids[static_cast<std::size_t>(e)])];
    }
    throw std::logic_error("bidirectional_collision: missing path edge");
}

}  // namespace

ShortestWeightTree shortest_weight_tree(const graph::WeightedGraph& wg,
                                        std::int64_t source) {
    return dijkstra(wg, source, -1);
}

std::vector<PairResult> sample_pair_statistics(const graph::WeightedGraph& wg,
                                               std::int64_t reps,
                                               rng::RngStream& stream) {
    const std::int64_t n = wg.g.n;
    if (n < 2)
        throw std::domain_error("sample_pair_statistics: need at least 2 vertices");
    if (reps < 1)
        throw std::domain_error("sample_pair_statistics: reps must be >= 1");
    std::vector<PairResult> out;
    out.reserve(static_cast<std::size_t>(reps));
    for (std::int64_t r = 0; r < reps; ++r) {
        PairResult pr;
        pr.u = static_cast<std::int64_t>(
            stream.uniform_below(static_cast<std::uint64_t>(n)));
        const auto shifted = static_cast<std::int64_t>(
            stream.uniform_below(static_cast<std::uint64_t>(n - 1)));
        pr.v = shifted + (shifted >= pr.u ? 1 : 0);
        const ShortestWeightTree t = dijkstra(wg, pr.u, pr.v);
        const double w = t.weight[static_cast<std::size_t>(pr.v)];
        if (std::isfinite(w)) {
            pr.connected = true;
            pr.weight = w;
            pr.hops = t.hops[static_cast<std::size_t>(pr.v)];
        }
        out.push_back(pr);
    }
    return out;
}

CollisionResult bidirectional_collision(const graph::WeightedGraph& wg,
                                        std::int64_t u, std::int64_t v) {
    const std::int64_t n = wg.g.n;
    if (u < 0 || u >= n || v < 0 || v >= n)
        throw std::domain_error("bidirectional_collision: vertex out of range");
    if (u == v) throw std::domain_error("bidirectional_collision: need u != v");

    const ShortestWeightTree from_u = dijkstra(wg, u, -1);
    const ShortestWeightTree from_v = dijkstra(wg, v, -1);

    CollisionResult out;
    double best = kInf;
    // The wavefronts first meet inside an edge whose endpoints minimize
    // du + w + dv; scan both orientations of every edge.
    for (std::size_t e = 0; e < wg.g.edge_u.size(); ++e) {
        const std::int64_t a = wg.g.edge_u[e];
        const std::int64_t b = wg.g.edge_v[e];
        const double w = wg.weights[e];
        const double du_a = from_u.weight[static_cast<std::size_t>(a)];
        const double du_b = from_u.weight[static_cast<std::size_t>(b)];
        const double dv_a = from_v.weight[static_cast<std::size_t>(a)];
        const double dv_b = from_v.weight[static_cast<std::size_t>(b)];
        if (std::isfinite(du_a) && std::isfinite(dv_b)) {
            const double cand = du_a + w + dv_b;
            if (cand < best ||
                (cand == best && std::make_pair(a, b) <
                                     std::make_pair(out.v1, out.v2))) {
                best = cand;
                out.v1 = a;
                out.v2 = b;
            }
        }
        if (std::isfinite(du_b) && std::isfinite(dv_a)) {
            const double cand = du_b + w + dv_a;
            if (cand < best ||
                (cand == best && std::make_pair(b, a) <
                                     std::make_pair(out.v1, out.v2))) {
                best = cand;
                out.v1 = b;
                out.v2 = a;
            }
        }
    }
    if (!std::isfinite(best)) return out;  // no meeting: disconnected pair

    // Reconstruct u -> v1 -> v2 -> v and re-accumulate the weight in that
    // order, matching the one-sided accumulation bit for bit.
    std::vector<std::int64_t> path;
    for (std::int64_t x = out.v1; x != -1;
         x = from_u.parent[static_cast<std::size_t>(x)])
        path.push_back(x);
    std::reverse(path.begin(), path.end());
    for (std::int64_t x = out.v2; x != -1;
         x = from_v.parent[static_cast<std::size_t>(x)])
        path.push_back(x);

    out.connected = true;
    out.weight = 0.0;
    out.hops = static_cast<std::int64_t>(path.size()) - 1;
    for (std::size_t i = 0; i + 1 < path.size(); ++i)
        out.weight += edge_weight_between(wg, path[i], path[i + 1]);
    out.half_time = 0.5 * out.weight;
    return out;
}

ExtremaResult extrema_search(const graph::WeightedGraph& wg, double lambda,
                             rng::RngStream& stream,
                             const ExtremaOptions& opts) {
    const auto comps = graph::components(wg.g);
    if (comps.empty() || static_cast<std::int64_t>(comps[0].size()) < 2)
        throw std::domain_error("extrema_search: largest component has no pairs");
    const std::vector<std::int32_t>& giant = comps[0];

    ExtremaResult out;
    out.exhaustive =
        static_cast<std::int64_t>(giant.size()) <= opts.exhaustive_threshold;

    std::vector<std::int64_t> sources;
    if (out.exhaustive) {
        sources.assign(giant.begin(), giant.end());
    } else {
        std::vector<char> in_giant(static_cast<std::size_t>(wg.g.n), 0);
        for (std::int32_t v : giant) in_giant[static_cast<std::size_t>(v)] = 1;

        // Degree-one vertices, deepest pendant trees first.
        const graph::CoreDecomposition core = graph::two_core(wg.g);
        std::vector<std::pair<std::int64_t, std::int64_t>> ranked;  // (-depth, v)
        for (const graph::PendantTree& tree : core.pendant_trees) {
            for (std::int32_t v : tree.vertices) {
                if (!in_giant[static_cast<std::size_t>(v)]) continue;
                if (wg.g.degree(v) != 1) continue;
                ranked.emplace_back(-tree.depth, v);
            }
        }
        std::sort(ranked.begin(), ranked.end());
        for (const auto& [neg_depth, v] : ranked) {
            if (static_cast<std::int64_t>(sources.size()) >= opts.deep_source_cap)
                break;
            sources.push_back(v);
        }
        for (std::int64_t k = 0; k < opts.random_sources; ++k)
            sources.push_back(giant[static_cast<std::size_t>(stream.uniform_below(
                static_cast<std::uint64_t>(giant.size())))]);
        std::sort(sources.begin(), sources.end());
        sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
        if (sources.empty()) sources.push_back(giant[0]);
    }
    out.sources_scanned = static_cast<std::int64_t>(sources.size());

    out.weight_max = -1.0;
    out.hops_max = -1;
    for (std::int64_t s : sources) {
        const ShortestWeightTree t = dijkstra(wg, s, -1);
        for (std::int32_t v32 : giant) {
            const auto v = static_cast<std::int64_t>(v32);
            if (v == s) continue;
            const double w = t.weight[static_cast<std::size_t>(v)];
            const std::int64_t h = t.hops[static_cast<std::size_t>(v)];
            if (w > out.weight_max ||
                (w == out.weight_max &&
                 std::make_pair(s, v) < std::make_pair(out.weight_i, out.weight_j))) {
                out.weight_max = w;
                out.weight_i = s;
                out.weight_j = v;
                out.hops_at_weight_max = h;
            }
            if (h > out.hops_max ||
                (h == out.hops_max &&
                 std::make_pair(s, v) < std::make_pair(out.hops_i, out.hops_j))) {
                out.hops_max = h;
                out.hops_i = s;
                out.hops_j = v;
            }
        }
    }

    const double log_n = std::log(static_cast<double>(wg.g.n));
    if (lambda > 1.0 && log_n > 0.0) {
        const theory::LimitConstants c = theory::constants(lambda);
        out.weight_ratio = out.weight_max / (c.c_lambda * log_n);
        out.hops_ratio = static_cast<double>(out.hops_max) / (c.d_lambda * log_n);
    } else {
        out.weight_ratio = std::numeric_limits<double>::quiet_NaN();
        out.hops_ratio = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

}  // namespace fpplab::fpp
