#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "fpplab/bp.hpp"
#include "fpplab/random.hpp"
#include "fpplab/stats.hpp"

namespace bp = fpplab::bp;
namespace st = fpplab::stats;
using fpplab::rng::make_stream;

TEST_CASE("alive counts") {
    const bp::AliveCounts a = bp::alive_counts({2, 2, 2});
    CHECK(a.s == std::vector<std::int64_t>{2, 3, 4});
    CHECK(a.all_positive);
    CHECK(bp::alive_counts({1}).s == std::vector<std::int64_t>{1});
    CHECK(bp::alive_counts({3, 0, 0, 1}).s == std::vector<std::int64_t>{3, 2, 1, 1});
    CHECK(bp::alive_counts({3, 0, 0, 1}).all_positive);
    CHECK(!bp::alive_counts({0}).all_positive);
    CHECK(!bp::alive_counts({2, 0, 0}).all_positive);
    CHECK_THROWS_AS(bp::alive_counts({2, -1}), std::domain_error);
}

TEST_CASE("selection fractions") {
    CHECK(std::fabs(bp::rho_sum({2, 2, 2}) - 17.0 / 36.0) < 1e-15);
    CHECK(std::fabs(bp::rho_mean({2, 2, 2}) - 13.0 / 6.0) < 1e-15);
    CHECK(bp::rho_sum({1, 1, 1, 1}) == 0.0);
    CHECK(bp::rho_mean({1, 1, 1, 1}) == 4.0);
    CHECK_THROWS_AS(bp::rho_sum({2, 0, 0}), std::domain_error);
}

TEST_CASE("attachment generation sampler vs exact law") {
    auto stream = make_stream(21, 0);
    // Single split: the chosen vertex is always a child of the root.
    for (int r = 0; r < 50; ++r)
        CHECK(bp::sample_generation({5}, stream) == 1);

    const bp::DegreeSequence d{2, 2, 2};
    const std::map<std::int64_t, double> law = bp::bernoulli_convolution_pmf(d);
    CHECK(law.at(1) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    CHECK(law.at(2) == doctest::Approx(1.0 / 2.0).epsilon(1e-12));
    CHECK(law.at(3) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    const std::size_t reps = 1000000;
    std::map<std::int64_t, double> emp;
    double acc = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
        const std::int64_t g = bp::sample_generation(d, stream);
        emp[g] += 1.0 / static_cast<double>(reps);
        acc += static_cast<double>(g);
    }
    CHECK(std::fabs(acc / static_cast<double>(reps) - 13.0 / 6.0) < 0.005);
    CHECK(st::total_variation(emp, law) < 0.005);
    CHECK_THROWS_AS(bp::sample_generation({2, 0, 0}, stream), std::domain_error);
}

TEST_CASE("split-time sampler moments") {
    auto stream = make_stream(22, 0);
    const std::size_t reps = 200000;
    std::vector<double> one(reps), three(reps);
    for (std::size_t r = 0; r < reps; ++r) one[r] = bp::sample_split_time({5}, stream);
    for (std::size_t r = 0; r < reps; ++r)
        three[r] = bp::sample_split_time({2, 2, 2}, stream);
    CHECK(std::fabs(st::mean(one) - 0.2) < 0.005);
    // Sum of Exp(1)/s_i over s = (2,3,4): mean 13/12, variance 61/144.
    CHECK(std::fabs(st::mean(three) - 13.0 / 12.0) < 0.01);
    CHECK(std::fabs(st::variance(three) - 61.0 / 144.0) < 0.015);
    const bp::TreeFppSample joint = bp::sample_tree_fpp({2, 2, 2}, stream);
    CHECK(joint.generation >= 1);
    CHECK(joint.generation <= 3);
    CHECK(joint.split_time > 0.0);
}

TEST_CASE("sequential attachment enumeration equals the independent-trial law") {
    const auto one_path = bp::discrete_attachment_oracle({1, 1, 1});
    CHECK(one_path.size() == 1);
    CHECK(one_path.at(3) == doctest::Approx(1.0).epsilon(1e-14));

    const auto exact = bp::discrete_attachment_oracle({2, 2, 2});
    const auto conv = bp::bernoulli_convolution_pmf({2, 2, 2});
    REQUIRE(exact.size() == conv.size());
    for (const auto& [g, pr] : exact)
        CHECK(std::fabs(pr - conv.at(g)) < 1e-12);

    // Random sequences: total mass one, and the two laws agree exactly.
    auto stream = make_stream(23, 0);
    int checked = 0;
    while (checked < 20) {
        const auto m = static_cast<std::int64_t>(2 + stream.uniform_below(5));
        bp::DegreeSequence d;
        for (std::int64_t i = 0; i < m; ++i)
            d.push_back(static_cast<std::int64_t>(stream.uniform_below(5)));
        if (!bp::alive_counts(d).all_positive) continue;
        ++checked;
        const auto law_a = bp::discrete_attachment_oracle(d);
        const auto law_b = bp::bernoulli_convolution_pmf(d);
        double mass = 0.0;
        for (const auto& [g, pr] : law_a) mass += pr;
        CHECK(std::fabs(mass - 1.0) < 1e-12);
        for (const auto& [g, pr] : law_b) {
            const auto it = law_a.find(g);
            const double pa = it == law_a.end() ? 0.0 : it->second;
            CHECK(std::fabs(pa - pr) < 1e-12);
        }
    }
    CHECK_THROWS_AS(bp::discrete_attachment_oracle({2, 2, 2, 2, 2, 2, 2, 2, 2}),
                    std::domain_error);
}

TEST_CASE("conditioning window") {
    CHECK(bp::conditioning_window(1) == 0);
    CHECK(bp::conditioning_window(15) == 0);
    CHECK(bp::conditioning_window(16) == 2);
    CHECK(bp::conditioning_window(10000) == 2);
}

TEST_CASE("conditioned walk: prefix positivity and consistency") {
    auto s1 = make_stream(24, 0);
    auto s2 = make_stream(24, 0);
    const bp::ConditionedWalk w1 = bp::sample_conditioned_walk(2.0, 40, s1);
    const bp::ConditionedWalk w2 = bp::sample_conditioned_walk(2.0, 40, s2);
    CHECK(w1.s == w2.s);
    CHECK(w1.degrees == w2.degrees);
    CHECK(w1.window == 2);
    CHECK(w1.s.size() == 40);
    CHECK(w1.degrees.size() == 40);
    std::int64_t s = 1;
    for (std::size_t i = 0; i < w1.s.size(); ++i) {
        s += w1.degrees[i] - 1;
        CHECK(w1.s[i] == s);
    }
    CHECK_THROWS_AS(bp::sample_conditioned_walk(1.0, 40, s1), std::domain_error);
    CHECK_THROWS_AS(bp::sample_conditioned_walk(2.0, 0, s1), std::domain_error);

    auto stream = make_stream(25, 0);
    const int reps = 500;
    const std::int64_t m = 10000;
    int died = 0;
    int inside_envelope = 0;
    for (int r = 0; r < reps; ++r) {
        const bp::ConditionedWalk w = bp::sample_conditioned_walk(2.0, m, stream);
        bool dead = false;
        bool inside = true;
        for (std::int64_t j = 1; j <= m; ++j) {
            const auto sj = static_cast<double>(w.s[static_cast<std::size_t>(j - 1)]);
            if (j <= w.window) {
                CHECK(sj > 0.0);  // the conditioned prefix never touches zero
                continue;
            }
            if (sj <= 0.0) dead = true;
            const double dj = static_cast<double>(j);
            if (std::fabs(sj - dj) > 4.0 * std::sqrt(dj * std::log(dj))) inside = false;
        }
        died += dead ? 1 : 0;
        inside_envelope += inside ? 1 : 0;
    }
    // Death after a positive prefix happens for about 4% of walks.
    CHECK(died >= static_cast<int>(0.005 * reps));
    CHECK(died <= static_cast<int>(0.09 * reps));
    // The drift envelope C sqrt(j log j) at C = 4 holds for nearly all walks.
    CHECK(inside_envelope >= static_cast<int>(0.93 * reps));
}

TEST_CASE("exploration-statistic scale for long supercritical walks") {
    auto stream = make_stream(26, 0);
    const std::int64_t m = 10000;
    const double target = 2.0 * std::log(static_cast<double>(m));  // ~18.42
    int collected = 0;
    int within = 0;
    double acc_mean = 0.0;
    while (collected < 50) {
        const bp::ConditionedWalk w = bp::sample_conditioned_walk(2.0, m, stream);
        if (*std::min_element(w.s.begin(), w.s.end()) <= 0) continue;
        ++collected;
        const double rm = bp::rho_mean(w.degrees);
        const double rs = bp::rho_sum(w.degrees);
        CHECK(rs > 0.0);
        CHECK(rs < rm);           // each term of rho_sum is damped by (1 - rho)
        CHECK(rs > 0.5 * rm - 1.0);  // the damping removes only an O(1) amount
        acc_mean += rm;
        if (std::fabs(rm - target) <= 0.25 * target) ++within;
    }
    CHECK(within >= 44);
    CHECK(std::fabs(acc_mean / 50.0 - target) < 2.0);
}

TEST_CASE("marked-tree simulator: degenerate and structural cases") {
    bp::StopRule five;
    five.kind = bp::StopRule::Kind::split_count;
    five.count = 5;

    auto stream = make_stream(27, 0);
    const bp::MarkedTree empty = bp::simulate_ctmbp(100, 0.0, five, stream);
    CHECK(empty.extinct);
    CHECK(empty.marks == std::vector<std::int64_t>{0});
    CHECK(empty.alive_walk == std::vector<std::int64_t>{0});

    bp::StopRule at_root;
    at_root.kind = bp::StopRule::Kind::split_count;
    at_root.count = 0;
    const bp::MarkedTree root_only = bp::simulate_ctmbp(100, 0.5, at_root, stream);
    CHECK(!root_only.extinct);
    CHECK(root_only.marks.size() == 1);
    CHECK(root_only.alive_walk.empty());

    const std::vector<std::int64_t> holds_root{7};
    bp::StopRule meet_root;
    meet_root.kind = bp::StopRule::Kind::mark_intersection;
    meet_root.mark_set = &holds_root;
    const bp::MarkedTree hit = bp::simulate_ctmbp(100, 0.5, meet_root, stream, 7);
    CHECK(hit.marks.size() == 1);

    CHECK_THROWS_AS(bp::simulate_ctmbp(1, 0.5, five, stream), std::domain_error);
    CHECK_THROWS_AS(bp::simulate_ctmbp(100, 1.5, five, stream), std::domain_error);
    CHECK_THROWS_AS(bp::simulate_ctmbp(100, 0.5, five, stream, 100), std::domain_error);
    bp::StopRule broken;
    broken.kind = bp::StopRule::Kind::mark_intersection;
    broken.mark_set = nullptr;
    CHECK_THROWS_AS(bp::simulate_ctmbp(100, 0.5, broken, stream), std::domain_error);

    // Determinism.
    auto sa = make_stream(28, 0);
    auto sb = make_stream(28, 0);
    const bp::MarkedTree ta = bp::simulate_ctmbp(1000, 2e-3, five, sa);
    const bp::MarkedTree tb = bp::simulate_ctmbp(1000, 2e-3, five, sb);
    CHECK(ta.marks == tb.marks);
    CHECK(ta.split_times == tb.split_times);
    CHECK(ta.thinned == tb.thinned);
}

TEST_CASE("marked-tree simulator: survival rate and split-time scaling") {
    const std::int64_t n = 10000;
    const double p = 2e-4;
    bp::StopRule grow;
    grow.kind = bp::StopRule::Kind::split_count;
    grow.count = 500;

    auto stream = make_stream(29, 0);
    const int reps = 500;
    int survived = 0;
    std::vector<double> pooled;
    pooled.reserve(200000);
    for (int r = 0; r < reps; ++r) {
        const bp::MarkedTree t = bp::simulate_ctmbp(n, p, grow, stream);
        if (!t.extinct) ++survived;
        REQUIRE(t.alive_walk.size() == t.marks.size());
        for (std::size_t j = 1; j < t.marks.size(); ++j) {
            CHECK(t.parent_index[j] >= 0);
            CHECK(t.parent_index[j] < static_cast<std::int64_t>(j));
            CHECK(t.generation[j] ==
                  t.generation[static_cast<std::size_t>(t.parent_index[j])] + 1);
            CHECK(t.split_times[j] >= t.split_times[j - 1]);
            const double gap = t.split_times[j] - t.split_times[j - 1];
            pooled.push_back(gap * static_cast<double>(t.alive_walk[j - 1]));
        }
    }
    // Survival within Monte Carlo range of the non-extinction mass 0.7968.
    CHECK(std::fabs(static_cast<double>(survived) / reps - 0.7968121300200200) < 0.05);
    // Each waiting time times the alive count just before it is Exp(1).
    REQUIRE(pooled.size() > 100000);
    CHECK(st::ks_one_sample(pooled, [](double x) {
              return st::exponential_cdf(x, 1.0);
          }) < 0.01);
}

TEST_CASE("marked-tree simulator: stop rules") {
    const std::int64_t n = 10000;
    const double p = 2e-4;
    auto stream = make_stream(30, 0);

    bp::StopRule fifty;
    fifty.kind = bp::StopRule::Kind::unthinned_count;
    fifty.count = 50;
    int seen_survivor = 0;
    for (int r = 0; r < 40; ++r) {
        const bp::MarkedTree t = bp::simulate_ctmbp(n, p, fifty, stream);
        if (t.extinct) continue;
        ++seen_survivor;
        std::int64_t unthinned = 0;
        for (std::uint8_t f : t.thinned) unthinned += f == 0 ? 1 : 0;
        CHECK(unthinned == 50);
        CHECK(t.thinned.back() == 0);
    }
    CHECK(seen_survivor >= 20);

    std::vector<std::int64_t> targets{42, 77};
    bp::StopRule meet;
    meet.kind = bp::StopRule::Kind::mark_intersection;
    meet.mark_set = &targets;
    int hits = 0;
    for (int r = 0; r < 40; ++r) {
        const bp::MarkedTree t = bp::simulate_ctmbp(n, p, meet, stream);
        if (t.extinct) continue;
        ++hits;
        CHECK((t.marks.back() == 42 || t.marks.back() == 77));
        for (std::size_t j = 0; j + 1 < t.marks.size(); ++j)
            CHECK((t.marks[j] != 42 && t.marks[j] != 77));
    }
    CHECK(hits >= 20);
}

TEST_CASE("thinning flags: hand case, idempotence, online agreement") {
    bp::MarkedTree t;
    t.n = 10;
    t.marks = {5, 7, 5, 9};
    t.split_times = {0.0, 0.1, 0.2, 0.3};
    t.generation = {0, 1, 2, 3};
    t.parent_index = {-1, 0, 1, 2};
    t.thinned = {1, 1, 0, 0};      // deliberately wrong; thin() recomputes
    t.repeat_mark = {1, 1, 0, 0};  // deliberately wrong
    const bp::MarkedTree fixed = bp::thin(t);
    CHECK(fixed.repeat_mark == std::vector<std::uint8_t>{0, 0, 1, 0});
    CHECK(fixed.thinned == std::vector<std::uint8_t>{0, 0, 1, 1});
    const bp::MarkedTree again = bp::thin(fixed);
    CHECK(again.thinned == fixed.thinned);
    CHECK(again.repeat_mark == fixed.repeat_mark);

    // The simulator's online flags match the offline recomputation on a tree
    // dense enough to contain many repeats.
    bp::StopRule grow;
    grow.kind = bp::StopRule::Kind::split_count;
    grow.count = 150;
    auto stream = make_stream(31, 0);
    const bp::MarkedTree sim = bp::simulate_ctmbp(200, 0.02, grow, stream);
    std::int64_t repeats = 0;
    for (std::uint8_t f : sim.repeat_mark) repeats += f;
    CHECK(repeats > 5);
    const bp::MarkedTree re = bp::thin(sim);
    CHECK(re.thinned == sim.thinned);
    CHECK(re.repeat_mark == sim.repeat_mark);
}

TEST_CASE("indirect coupling losses stay below the quadratic bound") {
    const std::int64_t n = 10000;
    const double p = 2e-4;
    const std::int64_t k = 100;
    bp::StopRule grow;
    grow.kind = bp::StopRule::Kind::split_count;
    grow.count = k;
    auto stream = make_stream(32, 0);
    const int reps = 2000;
    std::vector<double> misses(reps);
    for (int r = 0; r < reps; ++r) {
        const bp::MarkedTree t = bp::simulate_ctmbp(n, p, grow, stream);
        misses[static_cast<std::size_t>(r)] =
            static_cast<double>(bp::coupling_miss_count(t, k));
    }
    const double m_hat = st::mean(misses);
    const double se = std::sqrt(st::variance(misses) / reps);
    const double bound = 0.5 * static_cast<double>(k) * static_cast<double>(k + 1) * p;
    CHECK(m_hat + 3.0 * se <= bound);
    CHECK(m_hat > 0.1);  // thinning genuinely occurs at this size
}

TEST_CASE("pruned first-passage run to a target mark") {
    auto stream = make_stream(33, 0);
    const bp::ThinnedFppResult self = bp::thinned_fpp_to_target(50, 0.1, 3, 3, stream);
    CHECK(self.reached);
    CHECK(self.weight == 0.0);
    CHECK(self.hops == 0);

    const bp::ThinnedFppResult direct = bp::thinned_fpp_to_target(2, 1.0, 0, 1, stream);
    CHECK(direct.reached);
    CHECK(direct.hops == 1);
    CHECK(direct.weight > 0.0);

    const bp::ThinnedFppResult nothing = bp::thinned_fpp_to_target(2, 0.0, 0, 1, stream);
    CHECK(!nothing.reached);
    CHECK(std::isinf(nothing.weight));
    CHECK(nothing.hops == -1);

    auto sa = make_stream(34, 0);
    auto sb = make_stream(34, 0);
    const bp::ThinnedFppResult ra = bp::thinned_fpp_to_target(500, 4e-3, 0, 5, sa);
    const bp::ThinnedFppResult rb = bp::thinned_fpp_to_target(500, 4e-3, 0, 5, sb);
    CHECK(ra.reached == rb.reached);
    CHECK(ra.weight == rb.weight);
    CHECK(ra.hops == rb.hops);
}

TEST_CASE("scaled alive-count limit: extinction mass and survivor mean") {
    auto stream = make_stream(35, 0);
    const int reps = 10000;
    std::vector<double> survivors;
    int zeros = 0;
    for (int r = 0; r < reps; ++r) {
        const double w = bp::estimate_W(2.0, 3000, stream);
        if (w == 0.0)
            ++zeros;
        else
            survivors.push_back(w);
    }
    // Zero exactly on extinction; extinction mass 0.20319 for offspring mean 2.
    CHECK(std::fabs(static_cast<double>(zeros) / reps - 0.2031878699799800) < 0.015);
    // Survivors average lambda/(1 - extinction probability) = 2.5100.
    CHECK(std::fabs(st::mean(survivors) - 2.5100019498319505) < 0.08);
    for (double w : survivors) CHECK(w > 0.0);

    auto s4 = make_stream(36, 0);
    int zeros4 = 0;
    for (int r = 0; r < 4000; ++r)
        if (bp::estimate_W(4.0, 2000, s4) == 0.0) ++zeros4;
    CHECK(std::fabs(static_cast<double>(zeros4) / 4000.0 - 0.0198274012817784) < 0.008);

    CHECK_THROWS_AS(bp::estimate_W(1.0, 100, stream), std::domain_error);
    CHECK_THROWS_AS(bp::estimate_W(2.0, 0, stream), std::domain_error);

    // Conditioned-positive variant matches the survivor law.
    auto sc = make_stream(37, 0);
    std::vector<double> cond(3000);
    for (double& w : cond) {
        w = bp::sample_W_lambda(2.0, 3000, sc);
        CHECK(w > 0.0);
    }
    CHECK(std::fabs(st::mean(cond) - 2.5100019498319505) < 0.12);
    CHECK(st::ks_two_sample(cond, survivors) < 0.06);
}

TEST_CASE("two-tree collision run") {
    auto stream = make_stream(38, 0);
    for (int r = 0; r < 25; ++r) {
        bp::MarkedTree t1, t2;
        const bp::CollisionOutcome c = bp::collision_experiment(4, 1.0, stream, &t1, &t2);
        CHECK(c.a_n == 2);
        CHECK(c.survived);  // broods of size 3 cannot die out
        CHECK(static_cast<std::int64_t>(t1.marks.size()) == c.a_n);
        CHECK(c.H == c.G1_U + c.G2_C);
        CHECK(c.W == c.A1_an + c.A2_C);
        CHECK(c.C_n >= 0);
        CHECK(c.C_n == static_cast<std::int64_t>(t2.marks.size()) - 1);
        std::vector<std::int64_t> set1 = t1.marks;
        std::sort(set1.begin(), set1.end());
        CHECK(std::binary_search(set1.begin(), set1.end(), t2.marks.back()));
        if (c.C_n == 0) {
            CHECK(c.G2_C == 0);
            CHECK(c.A2_C == 0.0);
        }
    }

    const std::int64_t n = 10000;
    const double p = 2e-4;
    int survived = 0;
    std::vector<double> collision_splits;
    for (int r = 0; r < 200; ++r) {
        const bp::CollisionOutcome c = bp::collision_experiment(n, p, stream);
        CHECK(c.a_n == 100);
        CHECK(c.H == c.G1_U + c.G2_C);
        CHECK(c.W == c.A1_an + c.A2_C);
        if (c.survived) {
            ++survived;
            collision_splits.push_back(static_cast<double>(c.C_n));
            CHECK(c.A1_an > 0.0);
            CHECK(c.G1_U >= 0);
        }
    }
    // Both trees survive with probability (1 - extinction mass)^2 = 0.6349.
    CHECK(std::fabs(survived / 200.0 - 0.6349095705470413) < 0.12);
    REQUIRE(collision_splits.size() > 50);
    std::sort(collision_splits.begin(), collision_splits.end());
    const double median = collision_splits[collision_splits.size() / 2];
    // The second tree needs on the order of sqrt(n) splits to hit the first.
    CHECK(median >= 10.0);
    CHECK(median <= 500.0);
}

TEST_CASE("shared-trial binomial and Poisson draws") {
    auto stream = make_stream(39, 0);
    for (const auto& [x, d] : bp::couple_binomial_poisson(10000, 0.0, 100, stream)) {
        CHECK(x == 0);
        CHECK(d == 0);
    }

    const std::int64_t n = 10000;
    const double p = 2e-4;
    const std::int64_t m = 100000;
    const auto pairs = bp::couple_binomial_poisson(n, p, m, stream);
    REQUIRE(static_cast<std::int64_t>(pairs.size()) == m);
    double mean_x = 0.0, mean_d = 0.0;
    std::int64_t mismatches = 0;
    for (const auto& [x, d] : pairs) {
        mean_x += static_cast<double>(x);
        mean_d += static_cast<double>(d);
        if (x != d) ++mismatches;
    }
    mean_x /= static_cast<double>(m);
    mean_d /= static_cast<double>(m);
    const double target = static_cast<double>(n - 1) * p;
    CHECK(std::fabs(mean_x - target) < 0.0135);
    CHECK(std::fabs(mean_d - target) < 0.0135);
    const double miss_bound = static_cast<double>(n - 1) * p * p;  // 4e-4
    CHECK(static_cast<double>(mismatches) / static_cast<double>(m) <=
          miss_bound + 2e-4);
    CHECK_THROWS_AS(bp::couple_binomial_poisson(0, 0.5, 10, stream),
                    std::domain_error);
}
