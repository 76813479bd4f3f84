#pragma once

#include <cstdint>
#include <vector>

#include "fpplab/graph.hpp"
#include "fpplab/random.hpp"

namespace fpplab::fpp {

// Single-source minimal-weight tree. Unreachable vertices keep weight +inf,
// hops -1, parent -1; the source has weight 0, hops 0, parent -1.
struct ShortestWeightTree {
    std::int64_t source = -1;
    std::vector<double> weight;
    std::vector<std::int64_t> hops;
    std::vector<std::int64_t> parent;
};

// Exact minimal weights from `source`, with hop counts of the minimizing
// paths. Ties (only possible with crafted weights) are broken toward the
// smaller vertex label at extraction and toward the earlier-found path at
// relaxation, so results are reproducible.
ShortestWeightTree shortest_weight_tree(const graph::WeightedGraph& wg,
                                        std::int64_t source);

struct PairResult {
    std::int64_t u = -1;
    std::int64_t v = -1;
    bool connected = false;
    double weight = 0.0;      // minimal u-v weight, valid when connected
    std::int64_t hops = -1;   // edges on the minimizing path, valid when connected
};

// Uniform ordered vertex pairs (u, v), u != v; each result records whether the
// pair is connected, leaving any conditioning to the caller.
std::vector<PairResult> sample_pair_statistics(const graph::WeightedGraph& wg,
                                               std::int64_t reps,
                                               rng::RngStream& stream);

// First meeting of two unit-rate wavefronts started at u and v. The meeting
// happens on an edge (v1 on u's side, v2 on v's side); the path weight is
// re-accumulated in u-to-v order so it equals the one-sided computation
// exactly, and half_time is weight / 2.
struct CollisionResult {
    bool connected = false;
    double half_time = 0.0;
    std::int64_t v1 = -1;
    std::int64_t v2 = -1;
    double weight = 0.0;
    std::int64_t hops = -1;
};

CollisionResult bidirectional_collision(const graph::WeightedGraph& wg,
                                        std::int64_t u, std::int64_t v);

struct ExtremaOptions {
    std::int64_t exhaustive_threshold = 1000;  // full scan when the largest
                                               // component is at most this big
    std::int64_t deep_source_cap = 48;  // degree-1 sources, deepest trees first
    std::int64_t random_sources = 16;
};

struct ExtremaResult {
    std::int64_t weight_i = -1;  // pair attaining the maximal weight
    std::int64_t weight_j = -1;
    double weight_max = 0.0;
    std::int64_t hops_at_weight_max = -1;
    std::int64_t hops_i = -1;  // pair attaining the maximal hopcount
    std::int64_t hops_j = -1;
    std::int64_t hops_max = -1;
    double weight_ratio = 0.0;  // weight_max / (c(lambda) log n)
    double hops_ratio = 0.0;    // hops_max   / (d(lambda) log n)
    bool exhaustive = false;
    std::int64_t sources_scanned = 0;
};

// Maximal-weight and maximal-hopcount pairs within the largest component.
// Small components are scanned exhaustively (every vertex a source);
// otherwise sources are the degree-one vertices ordered by decreasing
// pendant-tree depth (capped) plus a random sample. The ratio diagnostics
// use lambda when it exceeds 1 and are NaN otherwise.
ExtremaResult extrema_search(const graph::WeightedGraph& wg, double lambda,
                             rng::RngStream& stream,
                             const ExtremaOptions& opts = {});

}  // namespace fpplab::fpp
