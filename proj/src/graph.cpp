#include "fpplab/graph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <locale>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace fpplab::graph {

namespace {

void build_csr(Graph& g) {
    const std::size_t n = static_cast<std::size_t>(g.n);
    const std::size_t m = g.edge_u.size();
    std::vector<std::int64_t> deg(n, 0);
    for (std::size_t e = 0; e < m; ++e) {
        ++deg[static_cast<std::size_t>(g.edge_u[e])];
        ++deg[static_cast<std::size_t>(g.edge_v[e])];
    }
    g.offsets.assign(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v) g.offsets[v + 1] = g.offsets[v] + deg[v];
    g.neighbors.assign(2 * m, 0);
    g.edge_ids.assign(2 * m, 0);
    std::vector<std::int64_t> cursor(g.offsets.begin(), g.offsets.end() - 1);
    for (std::size_t e = 0; e < m; ++e) {
        const auto u = static_cast<std::size_t>(g.edge_u[e]);
        const auto v = static_cast<std::size_t>(g.edge_v[e]);
        g.neighbors[static_cast<std::size_t>(cursor[u])] = g.edge_v[e];
        g.edge_ids[static_cast<std::size_t>(cursor[u]++)] = static_cast<std::int64_t>(e);
        g.neighbors[static_cast<std::size_t>(cursor[v])] = g.edge_u[e];
        g.edge_ids[static_cast<std::size_t>(cursor[v]++)] = static_cast<std::int64_t>(e);
    }
    // Edges arrive sorted by (u, v), so every adjacency row is already
    // ascending: row u gains w < u entries first (from edges (w, u) with w
    // ascending), then w > u entries (from edges (u, w) with w ascending)...
    // that interleaving is NOT sorted in general, so sort rows explicitly.
    for (std::size_t v = 0; v < n; ++v) {
        const auto lo = static_cast<std::size_t>(g.offsets[v]);
        const auto hi = static_cast<std::size_t>(g.offsets[v + 1]);
        std::vector<std::pair<std::int32_t, std::int64_t>> row;
        row.reserve(hi - lo);
        for (std::size_t k = lo; k < hi; ++k)
            row.emplace_back(g.neighbors[k], g.edge_ids[k]);
        std::sort(row.begin(), row.end());
        for (std::size_t k = lo; k < hi; ++k) {
            g.neighbors[k] = row[k - lo].first;
            g.edge_ids[k] = row[k - lo].second;
        }
    }
}

// Number of vertex pairs (a, b), a < b < n, with a < i.
inline std::int64_t pairs_before_row(std::int64_t i, std::int64_t n) {
    return i * (n - 1) - i * (i - 1) / 2;
}

}  // namespace

Graph from_edges(std::int64_t n,
                 const std::vector<std::pair<std::int64_t, std::int64_t>>& edges) {
    if (n < 0) throw std::domain_error("from_edges: n must be >= 0");
    Graph g;
    g.n = n;
    std::vector<std::pair<std::int32_t, std::int32_t>> norm;
    norm.reserve(edges.size());
    for (const auto& [a, b] : edges) {
        if (a < 0 || b < 0 || a >= n || b >= n)
            throw std::domain_error("from_edges: vertex out of range");
        if (a == b) throw std::domain_error("from_edges: self-loop");
        norm.emplace_back(static_cast<std::int32_t>(std::min(a, b)),
                          static_cast<std::int32_t>(std::max(a, b)));
    }
    std::sort(norm.begin(), norm.end());
    if (std::adjacent_find(norm.begin(), norm.end()) != norm.end())
        throw std::domain_error("from_edges: duplicate edge");
    g.edge_u.reserve(norm.size());
    g.edge_v.reserve(norm.size());
    for (const auto& [a, b] : norm) {
        g.edge_u.push_back(a);
        g.edge_v.push_back(b);
    }
    build_csr(g);
    return g;
}

Graph generate_er(std::int64_t n, double p, rng::RngStream& stream) {
    if (n < 0) throw std::domain_error("generate_er: n must be >= 0");
    if (!(p >= 0.0 && p <= 1.0))
        throw std::domain_error("generate_er: p must be in [0,1]");
    Graph g;
    g.n = n;
    const std::int64_t total = n * (n - 1) / 2;
    if (p == 1.0) {
        g.edge_u.reserve(static_cast<std::size_t>(total));
        g.edge_v.reserve(static_cast<std::size_t>(total));
        for (std::int64_t i = 0; i < n; ++i)
            for (std::int64_t j = i + 1; j < n; ++j) {
                g.edge_u.push_back(static_cast<std::int32_t>(i));
                g.edge_v.push_back(static_cast<std::int32_t>(j));
            }
        build_csr(g);
        return g;
    }
    if (p > 0.0 && total > 0) {
        const double logq = std::log1p(-p);
        std::int64_t code = -1;
        for (;;) {
            const double u = stream.uniform();
            const double gap = std::floor(std::log(u) / logq);
            if (gap > 2.0 * static_cast<double>(total)) break;
            code += 1 + static_cast<std::int64_t>(gap);
            if (code >= total) break;
            // Decode the linear pair code into (i, j), i < j.
            const double nd = static_cast<double>(n);
            const double disc = (2.0 * nd - 1.0) * (2.0 * nd - 1.0) -
                                8.0 * static_cast<double>(code);
            std::int64_t i = static_cast<std::int64_t>(
                std::floor(((2.0 * nd - 1.0) - std::sqrt(std::max(disc, 0.0))) / 2.0));
            i = std::clamp<std::int64_t>(i, 0, n - 2);
            while (i > 0 && pairs_before_row(i, n) > code) --i;
            while (pairs_before_row(i + 1, n) <= code) ++i;
            const std::int64_t j = i + 1 + (code - pairs_before_row(i, n));
            g.edge_u.push_back(static_cast<std::int32_t>(i));
            g.edge_v.push_back(static_cast<std::int32_t>(j));
        }
    }
    build_csr(g);
    return g;
}

WeightedGraph attach_weights(Graph g, rng::RngStream& stream) {
    WeightedGraph wg;
    wg.g = std::move(g);
    wg.weights.resize(wg.g.edge_u.size());
    for (double& w : wg.weights) w = stream.exponential(1.0);
    return wg;
}

std::vector<std::vector<std::int32_t>> components(const Graph& g) {
    const std::size_t n = static_cast<std::size_t>(g.n);
    std::vector<std::int32_t> comp(n, -1);
    std::vector<std::vector<std::int32_t>> out;
    std::vector<std::int32_t> stack;
    for (std::size_t start = 0; start < n; ++start) {
        if (comp[start] >= 0) continue;
        const auto id = static_cast<std::int32_t>(out.size());
        out.emplace_back();
        comp[start] = id;
        stack.push_back(static_cast<std::int32_t>(start));
        while (!stack.empty()) {
            const std::int32_t v = stack.back();
            stack.pop_back();
            out.back().push_back(v);
            const auto lo = static_cast<std::size_t>(g.offsets[static_cast<std::size_t>(v)]);
            const auto hi = static_cast<std::size_t>(g.offsets[static_cast<std::size_t>(v) + 1]);
            for (std::size_t k = lo; k < hi; ++k) {
                const std::int32_t w = g.neighbors[k];
                if (comp[static_cast<std::size_t>(w)] < 0) {
                    comp[static_cast<std::size_t>(w)] = id;
                    stack.push_back(w);
                }
            }
        }
        std::sort(out.back().begin(), out.back().end());
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const std::vector<std::int32_t>& a,
                        const std::vector<std::int32_t>& b) {
                         if (a.size() != b.size()) return a.size() > b.size();
                         return a.front() < b.front();
                     });
    return out;
}

CoreDecomposition two_core(const Graph& g) {
    const std::size_t n = static_cast<std::size_t>(g.n);
    std::vector<std::int64_t> deg(n);
    for (std::size_t v = 0; v < n; ++v) deg[v] = g.degree(static_cast<std::int64_t>(v));
    std::vector<char> removed(n, 0);
    std::vector<std::int32_t> queue;
    for (std::size_t v = 0; v < n; ++v)
        if (deg[v] <= 1) queue.push_back(static_cast<std::int32_t>(v));
    while (!queue.empty()) {
        const std::int32_t v = queue.back();
        queue.pop_back();
        if (removed[static_cast<std::size_t>(v)]) continue;
        removed[static_cast<std::size_t>(v)] = 1;
        const auto lo = static_cast<std::size_t>(g.offsets[static_cast<std::size_t>(v)]);
        const auto hi = static_cast<std::size_t>(g.offsets[static_cast<std::size_t>(v) + 1]);
        for (std::size_t k = lo; k < hi; ++k) {
            const std::int32_t w = g.neighbors[k];
            if (!removed[static_cast<std::size_t>(w)]) {
                if (--deg[static_cast<std::size_t>(w)] <= 1) queue.push_back(w);
            }
        }
    }

    CoreDecomposition out;
    for (std::size_t v = 0; v < n; ++v)
        if (!removed[v]) out.core_vertices.push_back(static_cast<std::int32_t>(v));

    // Group the stripped vertices: connected pieces of the removed set that
    // share an anchoring core vertex belong to one pendant tree.
    std::vector<std::int32_t> group(n, -1);
    std::vector<std::vector<std::int32_t>> members;
    std::vector<std::int64_t> anchor;  // per group, -1 if none
    for (std::size_t start = 0; start < n; ++start) {
        if (!removed[start] || group[start] >= 0) continue;
        const auto id = static_cast<std::int32_t>(members.size());
        members.emplace_back();
        anchor.push_back(-1);
        group[start] = id;
        std::vector<std::int32_t> stack{static_cast<std::int32_t>(start)};
        while (!stack.empty()) {
            const std::int32_t v = stack.back();
            stack.pop_back();
            members.back().push_back(v);
            const auto lo = static_cast<std::size_t>(g.offsets[static_cast<std::size_t>(v)]);
            const auto hi = static_cast<std::size_t>(g.offsets[static_cast<std::size_t>(v) + 1]);
            for (std::size_t k = lo; k < hi; ++k) {
                const std::int32_t w = g.neighbors[k];
                if (!removed[static_cast<std::size_t>(w)]) {
                    anchor[static_cast<std::size_t>(id)] = w;
                } else if (group[static_cast<std::size_t>(w)] < 0) {
                    group[static_cast<std::size_t>(w)] = id;
                    stack.push_back(w);
                }
            }
        }
    }

    // Merge groups that attach to the same core vertex.
    std::vector<std::size_t> order(members.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if ((anchor[a] < 0) != (anchor[b] < 0)) return anchor[b] < 0;
        if (anchor[a] != anchor[b]) return anchor[a] < anchor[b];
        return *std::min_element(members[a].begin(), members[a].end()) <
               *std::min_element(members[b].begin(), members[b].end());
    });
    for (std::size_t idx = 0; idx < order.size();) {
        const std::int64_t a = anchor[order[idx]];
        PendantTree tree;
        tree.attachment = a;
        std::size_t j = idx;
        while (j < order.size() && anchor[order[j]] == a && (a >= 0 || j == idx)) {
            for (std::int32_t v : members[order[j]]) tree.vertices.push_back(v);
            ++j;
        }
        std::sort(tree.vertices.begin(), tree.vertices.end());

        // Depth by breadth-first layers inside the tree.
        auto bfs_depth = [&](std::int64_t root, std::int64_t* far) -> std::int64_t {
            std::vector<std::int32_t> frontier{static_cast<std::int32_t>(root)};
            std::vector<char> seen_local(tree.vertices.size(), 0);
            auto in_tree = [&](std::int32_t v) {
                const auto it = std::lower_bound(tree.vertices.begin(),
                                                 tree.vertices.end(), v);
                return it != tree.vertices.end() && *it == v
                           ? static_cast<std::int64_t>(it - tree.vertices.begin())
                           : static_cast<std::int64_t>(-1);
            };
            const std::int64_t root_slot = in_tree(static_cast<std::int32_t>(root));
            if (root_slot >= 0) seen_local[static_cast<std::size_t>(root_slot)] = 1;
            std::int64_t depth = 0;
            if (far) *far = root;
            while (!frontier.empty()) {
                std::vector<std::int32_t> next;
                for (std::int32_t v : frontier) {
                    const auto lo = static_cast<std::size_t>(g.offsets[static_cast<std::size_t>(v)]);
                    const auto hi = static_cast<std::size_t>(g.offsets[static_cast<std::size_t>(v) + 1]);
                    for (std::size_t k = lo; k < hi; ++k) {
                        const std::int32_t w = g.neighbors[k];
                        const std::int64_t slot = in_tree(w);
                        if (slot >= 0 && !seen_local[static_cast<std::size_t>(slot)]) {
                            seen_local[static_cast<std::size_t>(slot)] = 1;
                            next.push_back(w);
                        }
                    }
                }
                if (next.empty()) break;
                ++depth;
                if (far) *far = next.front();
                frontier = std::move(next);
            }
            return depth;
        };
        if (a >= 0) {
            tree.depth = bfs_depth(a, nullptr);
        } else {
            std::int64_t far = tree.vertices.front();
            bfs_depth(tree.vertices.front(), &far);
            tree.depth = bfs_depth(far, nullptr);
        }
        out.pendant_trees.push_back(std::move(tree));
        idx = j;
    }
    return out;
}

void dump(const WeightedGraph& wg, std::ostream& os) {
    os.imbue(std::locale::classic());
    os.precision(17);
    os << wg.g.n << ' ' << wg.g.edge_count() << '\n';
    for (std::int64_t e = 0; e < wg.g.edge_count(); ++e) {
        const auto idx = static_cast<std::size_t>(e);
        os << wg.g.edge_u[idx] << ' ' << wg.g.edge_v[idx] << ' '
           << wg.weights[idx] << '\n';
    }
}

WeightedGraph parse_dump(std::istream& is) {
    is.imbue(std::locale::classic());
    std::int64_t n = 0, m = 0;
    if (!(is >> n >> m)) throw std::runtime_error("parse_dump: bad header");
    std::vector<std::pair<std::int64_t, std::int64_t>> edges;
    std::vector<double> ws;
    edges.reserve(static_cast<std::size_t>(m));
    ws.reserve(static_cast<std::size_t>(m));
    for (std::int64_t e = 0; e < m; ++e) {
        std::int64_t u = 0, v = 0;
        double w = 0.0;
        if (!(is >> u >> v >> w)) throw std::runtime_error("parse_dump: bad edge line");
        edges.emplace_back(u, v);
        ws.push_back(w);
    }
    WeightedGraph wg;
    wg.g = from_edges(n, edges);
    // from_edges sorts; dumps are written in sorted edge order already, and
    // re-sorting a sorted list is the identity, so weights stay aligned.
    wg.weights = std::move(ws);
    return wg;
}

}  // namespace fpplab::graph
