#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "fpplab/random.hpp"

namespace fpplab::graph {

// Simple undirected graph on vertices 0..n-1, immutable once built.
// Edges are stored once as (u < v) pairs in lexicographic order plus a
// CSR adjacency that carries the owning edge id on every half-edge.
struct Graph {
    std::int64_t n = 0;
    std::vector<std::int32_t> edge_u;  // edge_u[e] < edge_v[e]
    std::vector<std::int32_t> edge_v;
    std::vector<std::int64_t> offsets;    // size n+1
    std::vector<std::int32_t> neighbors;  // size 2m
    std::vector<std::int64_t> edge_ids;   // size 2m, parallel to neighbors

    std::int64_t edge_count() const {
        return static_cast<std::int64_t>(edge_u.size());
    }
    std::int64_t degree(std::int64_t v) const {
        return offsets[static_cast<std::size_t>(v) + 1] -
               offsets[static_cast<std::size_t>(v)];
    }
};

// Build a graph from an explicit edge list (pairs may come in any order and
// orientation; self-loops and duplicates are rejected).
Graph from_edges(std::int64_t n,
                 const std::vector<std::pair<std::int64_t, std::int64_t>>& edges);

// Uniform random graph where each of the n(n-1)/2 pairs appears independently
// with probability p. Runs in O(n + edges) by sampling geometric gaps between
// successive present pairs, never scanning all pairs.
Graph generate_er(std::int64_t n, double p, rng::RngStream& stream);

struct WeightedGraph {
    Graph g;
    std::vector<double> weights;  // per edge id
};

// Attach independent standard-exponential weights to every edge.
WeightedGraph attach_weights(Graph g, rng::RngStream& stream);

// Connected components, largest first (ties: smaller minimum vertex first).
// Vertices within a component are sorted.
std::vector<std::vector<std::int32_t>> components(const Graph& g);

struct PendantTree {
    std::int64_t attachment;            // anchoring 2-core vertex, -1 if none
    std::vector<std::int32_t> vertices; // sorted, excludes the attachment
    std::int64_t depth;  // attached: max hops from the attachment;
                         // free tree: its diameter in hops
};

struct CoreDecomposition {
    std::vector<std::int32_t> core_vertices;  // sorted
    std::vector<PendantTree> pendant_trees;   // sorted by (attachment, min vertex)
};

// Iteratively strip degree-one vertices; what survives is the 2-core, and the
// stripped vertices form a forest grouped into pendant trees.
CoreDecomposition two_core(const Graph& g);

// Text dump: one header line "n m", then one line "u v weight" per edge in
// edge-id order. Parsing the dump reproduces the weighted graph exactly.
void dump(const WeightedGraph& wg, std::ostream& os);
WeightedGraph parse_dump(std::istream& is);

}  // namespace fpplab::graph
