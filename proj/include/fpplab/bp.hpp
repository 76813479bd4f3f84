#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "fpplab/random.hpp"

namespace fpplab::bp {

// d_1..d_m: per-split offspring counts of an exploration process.
using DegreeSequence = std::vector<std::int64_t>;

struct AliveCounts {
    std::vector<std::int64_t> s;  // s_i = sum_{j<=i} d_j - (i-1)
    bool all_positive;
};
AliveCounts alive_counts(const DegreeSequence& d);

// Generation of the m-th chosen vertex: sum of independent Bernoulli(d_i/s_i).
// Requires every alive count positive.
std::int64_t sample_generation(const DegreeSequence& d, rng::RngStream& stream);

// Time of the m-th split: sum of Exp(1)/s_i. Requires every s_i positive.
double sample_split_time(const DegreeSequence& d, rng::RngStream& stream);

struct TreeFppSample {
    std::int64_t generation;  // G_m
    double split_time;        // A_m
};
// Joint draw of (G_m, A_m) for one fixed degree sequence.
TreeFppSample sample_tree_fpp(const DegreeSequence& d, rng::RngStream& stream);

// sum of rho_i(1 - rho_i) with rho_i = d_i/s_i (the generation variance).
double rho_sum(const DegreeSequence& d);
// sum of rho_i (the generation mean).
double rho_mean(const DegreeSequence& d);

// Exact law of the final generation by enumerating every alive-vertex choice
// sequence with its selection probabilities. Enumeration bound: m <= 8.
std::map<std::int64_t, double> discrete_attachment_oracle(const DegreeSequence& d);

// The independent-Bernoulli convolution law with rho_i = d_i/s_i.
std::map<std::int64_t, double> bernoulli_convolution_pmf(const DegreeSequence& d);

struct ConditionedWalk {
    std::vector<std::int64_t> s;        // S_1..S_m
    std::vector<std::int64_t> degrees;  // the Poisson draws behind the walk
    std::int64_t window;                // prefix length kept positive
    double lambda;
};
// Random walk S_i = 1 + sum_{j<=i}(D_j - 1), D_j ~ Poisson(lambda). The first
// w_m steps are conditioned positive by rejection (fresh substream per try);
// the remainder is unconditioned. w_m = ceil(sqrt(log log m)) once m >= 16.
ConditionedWalk sample_conditioned_walk(double lambda, std::int64_t m,
                                        rng::RngStream& stream);
std::int64_t conditioning_window(std::int64_t m);

// Labeled continuous-time exploration record. Index 0 is the root (time 0);
// index j >= 1 records the j-th split. alive_walk[j] = S_{j+1}, the alive
// count after the brood of index j joined.
struct MarkedTree {
    std::int64_t n = 0;
    std::vector<std::int64_t> marks;
    std::vector<double> split_times;        // split_times[0] = 0
    std::vector<std::int32_t> generation;   // generation[0] = 0
    std::vector<std::int64_t> parent_index; // parent_index[0] = -1
    std::vector<std::uint8_t> thinned;      // repeat mark or thinned parent
    std::vector<std::uint8_t> repeat_mark;  // own mark seen earlier
    std::vector<std::int64_t> alive_walk;   // S_1..S_{k+1}
    bool extinct = false;
};

struct StopRule {
    enum class Kind {
        split_count,       // stop once `count` splits happened
        unthinned_count,   // stop once `count` unthinned indices (root included) exist
        mark_intersection  // stop at the first index whose mark is in `mark_set`
    };
    Kind kind = Kind::split_count;
    std::int64_t count = 0;
    const std::vector<std::int64_t>* mark_set = nullptr;  // sorted ascending
};

// Continuous-time branching walk with Binomial(n-1, p) broods whose marks are
// drawn uniformly without replacement from {0..n-1} minus the parent's mark.
// Extinction always stops the run (tree.extinct set).
MarkedTree simulate_ctmbp(std::int64_t n, double p, const StopRule& stop,
                          rng::RngStream& stream, std::int64_t root_mark = 0);

// Recompute thinning flags from marks and parents alone; idempotent.
MarkedTree thin(MarkedTree tree);

// Number of indices j in 1..min(k, splits) whose own mark is fresh but whose
// ancestry carries a flag — the marks a pruned run would lose indirectly.
std::int64_t coupling_miss_count(const MarkedTree& tree, std::int64_t k);

// First-passage run of the pruned process: broods as above, but a repeated
// mark is discarded at its split (no brood, no further descent), which makes
// the run equal in law to shortest-path growth on the n-vertex random graph.
struct ThinnedFppResult {
    bool reached;
    double weight;        // time the target mark was wetted (+inf if never)
    std::int64_t hops;    // generation of the target (-1 if never)
};
ThinnedFppResult thinned_fpp_to_target(std::int64_t n, double p,
                                       std::int64_t root_mark,
                                       std::int64_t target_mark,
                                       rng::RngStream& stream);

// One run of the Poisson(lambda) branching walk for m splits; returns the
// scaled alive count S_m * exp(-(lambda-1) A_m), or 0 on extinction.
double estimate_W(double lambda, std::int64_t m, rng::RngStream& stream);

// estimate_W conditioned positive by rejection; consumes one parent draw and
// retries on fresh substreams.
double sample_W_lambda(double lambda, std::int64_t m, rng::RngStream& stream);

struct CollisionOutcome {
    std::int64_t a_n;   // ceil(sqrt(n)) marks grown in the first tree
    std::int64_t C_n;   // splits of the second tree until its mark hits tree 1
    std::int64_t G1_U;  // generation of a uniform tree-1 mark
    std::int64_t G2_C;  // generation of the colliding index
    double A1_an;       // last split time of tree 1
    double A2_C;        // split time of the colliding index
    std::int64_t H;     // G1_U + G2_C
    double W;           // A1_an + A2_C
    bool survived;      // both trees reached their stop without dying out
};

// Two-tree collision run: tree 1 (root mark 0) grows to a_n marks, tree 2
// (root mark 1) grows until one of its marks lies in tree 1's mark set.
// Non-surviving runs are reported with survived=false, never dropped here.
// a_n defaults to ceil(sqrt(n)); a positive a_n_override replaces it.
CollisionOutcome collision_experiment(std::int64_t n, double p,
                                      rng::RngStream& stream,
                                      MarkedTree* out_tree1 = nullptr,
                                      MarkedTree* out_tree2 = nullptr,
                                      std::int64_t a_n_override = 0);

// Pairs (X_i, D_i) with X ~ Binomial(n-1, p) and D ~ Poisson((n-1)p) coupled
// trial-by-trial on shared uniforms, so P(X != D) <= (n-1) p^2.
std::vector<std::pair<std::int64_t, std::int64_t>> couple_binomial_poisson(
    std::int64_t n, double p, std::int64_t m, rng::RngStream& stream);

}  // namespace fpplab::bp
