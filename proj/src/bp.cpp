#include "fpplab/bp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fpplab::bp {

namespace {

void require_positive_alive(const AliveCounts& a) {
    if (!a.all_positive)
        throw std::domain_error("degree sequence has a zero alive count");
}

std::int64_t ceil_sqrt(std::int64_t n) {
    auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(n)));
    while (r * r < n) ++r;
    while (r > 0 && (r - 1) * (r - 1) >= n) --r;
    return r;
}

// Uniform brood marks without replacement from {0..n-1} minus parent_mark,
// via partial Fisher-Yates on the implicit index set 0..n-2.
void sample_brood_marks(std::int64_t n, std::int64_t parent_mark,
                        std::int64_t brood, rng::RngStream& stream,
                        std::vector<std::int64_t>& out) {
    out.clear();
    std::vector<std::pair<std::int64_t, std::int64_t>> swaps;
    auto value_at = [&](std::int64_t i) {
        for (const auto& [k, v] : swaps)
            if (k == i) return v;
        return i;
    };
    for (std::int64_t t = 0; t < brood; ++t) {
        const std::int64_t r =
            t + static_cast<std::int64_t>(stream.uniform_below(
                    static_cast<std::uint64_t>(n - 1 - t)));
        const std::int64_t val = value_at(r);
        swaps.emplace_back(r, value_at(t));
        out.push_back(val + (val >= parent_mark ? 1 : 0));
    }
}

}  // namespace

AliveCounts alive_counts(const DegreeSequence& d) {
    AliveCounts out;
    out.s.reserve(d.size());
    out.all_positive = true;
    std::int64_t s = 1;
    for (std::int64_t di : d) {
        if (di < 0) throw std::domain_error("alive_counts: negative degree");
        s += di - 1;
        out.s.push_back(s);
        if (s <= 0) out.all_positive = false;
    }
    return out;
}

std::int64_t sample_generation(const DegreeSequence& d, rng::RngStream& stream) {
    const AliveCounts a = alive_counts(d);
    require_positive_alive(a);
    std::int64_t g = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double rho = static_cast<double>(d[i]) / static_cast<double>(a.s[i]);
        if (stream.uniform() < rho) ++g;
    }
    return g;
}

double sample_split_time(const DegreeSequence& d, rng::RngStream& stream) {
    const AliveCounts a = alive_counts(d);
    require_positive_alive(a);
    double t = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i)
        t += stream.exponential(1.0) / static_cast<double>(a.s[i]);
    return t;
}

TreeFppSample sample_tree_fpp(const DegreeSequence& d, rng::RngStream& stream) {
    TreeFppSample out;
    out.generation = sample_generation(d, stream);
    out.split_time = sample_split_time(d, stream);
    return out;
}

double rho_sum(const DegreeSequence& d) {
    const AliveCounts a = alive_counts(d);
    require_positive_alive(a);
    double acc = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double rho = static_cast<double>(d[i]) / static_cast<double>(a.s[i]);
        acc += rho * (1.0 - rho);
    }
    return acc;
}

double rho_mean(const DegreeSequence& d) {
    const AliveCounts a = alive_counts(d);
    require_positive_alive(a);
    double acc = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i)
        acc += static_cast<double>(d[i]) / static_cast<double>(a.s[i]);
    return acc;
}

std::map<std::int64_t, double> discrete_attachment_oracle(const DegreeSequence& d) {
    const auto m = static_cast<std::int64_t>(d.size());
    if (m < 1) throw std::domain_error("attachment oracle: empty sequence");
    if (m > 8) throw std::domain_error("attachment oracle: enumeration bound is m <= 8");
    const AliveCounts a = alive_counts(d);
    require_positive_alive(a);

    // State: alive-vertex counts per generation; advance one choice at a time,
    // carrying exact product probabilities.
    using State = std::vector<std::int64_t>;  // index = generation 1..m
    std::map<State, double> states;
    State init(static_cast<std::size_t>(m) + 1, 0);
    init[1] = d[0];
    states[init] = 1.0;
    std::map<std::int64_t, double> pmf;
    for (std::int64_t step = 1; step <= m; ++step) {
        const double alive = static_cast<double>(a.s[static_cast<std::size_t>(step - 1)]);
        std::map<State, double> next;
        for (const auto& [state, pr] : states) {
            for (std::int64_t g = 1; g <= m; ++g) {
                const std::int64_t cnt = state[static_cast<std::size_t>(g)];
                if (cnt == 0) continue;
                const double branch = pr * static_cast<double>(cnt) / alive;
                if (step == m) {
                    pmf[g] += branch;
                } else {
                    State st = state;
                    --st[static_cast<std::size_t>(g)];
                    if (g + 1 <= m)
                        st[static_cast<std::size_t>(g + 1)] +=
                            d[static_cast<std::size_t>(step)];
                    next[st] += branch;
                }
            }
        }
        states = std::move(next);
        if (step == m) break;
    }
    return pmf;
}

std::map<std::int64_t, double> bernoulli_convolution_pmf(const DegreeSequence& d) {
    const AliveCounts a = alive_counts(d);
    require_positive_alive(a);
    std::vector<double> pmf(d.size() + 1, 0.0);
    pmf[0] = 1.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double rho = static_cast<double>(d[i]) / static_cast<double>(a.s[i]);
        for (std::size_t k = i + 1; k-- > 0;) {
            pmf[k + 1] += pmf[k] * rho;
            pmf[k] *= 1.0 - rho;
        }
    }
    std::map<std::int64_t, double> out;
    for (std::size_t k = 0; k < pmf.size(); ++k)
        if (pmf[k] != 0.0) out[static_cast<std::int64_t>(k)] = pmf[k];
    return out;
}

std::int64_t conditioning_window(std::int64_t m) {
    if (m < 16) return 0;
    const double w = std::sqrt(std::log(std::log(static_cast<double>(m))));
    return static_cast<std::int64_t>(std::ceil(w));
}

ConditionedWalk sample_conditioned_walk(double lambda, std::int64_t m,
                                        rng::RngStream& stream) {
    if (!(lambda > 1.0))
        throw std::domain_error("sample_conditioned_walk: lambda must be > 1");
    if (m < 1) throw std::domain_error("sample_conditioned_walk: m must be >= 1");
    ConditionedWalk out;
    out.lambda = lambda;
    out.window = conditioning_window(m);
    out.degrees.reserve(static_cast<std::size_t>(m));
    out.s.reserve(static_cast<std::size_t>(m));

    const rng::RngStream base = stream;
    stream.next_u64();
    std::int64_t s = 1;
    if (out.window > 0) {
        for (std::uint64_t attempt = 0;; ++attempt) {
            rng::RngStream sub = base.substream(attempt);
            std::vector<std::int64_t> pre;
            std::int64_t ps = 1;
            bool ok = true;
            for (std::int64_t i = 0; i < out.window; ++i) {
                const std::int64_t di = sub.poisson(lambda);
                ps += di - 1;
                pre.push_back(di);
                if (ps <= 0) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                out.degrees = std::move(pre);
                break;
            }
        }
        for (std::int64_t di : out.degrees) {
            s += di - 1;
            out.s.push_back(s);
        }
    }
    for (std::int64_t i = out.window; i < m; ++i) {
        const std::int64_t di = stream.poisson(lambda);
        s += di - 1;
        out.degrees.push_back(di);
        out.s.push_back(s);
    }
    return out;
}

MarkedTree simulate_ctmbp(std::int64_t n, double p, const StopRule& stop,
                          rng::RngStream& stream, std::int64_t root_mark) {
    if (n < 2) throw std::domain_error("simulate_ctmbp: n must be >= 2");
    if (!(p >= 0.0 && p <= 1.0))
        throw std::domain_error("simulate_ctmbp: p must be in [0,1]");
    if (root_mark < 0 || root_mark >= n)
        throw std::domain_error("simulate_ctmbp: root mark out of range");
    if (stop.kind == StopRule::Kind::mark_intersection && stop.mark_set == nullptr)
        throw std::domain_error("simulate_ctmbp: intersection rule needs a mark set");
    if (stop.kind != StopRule::Kind::split_count &&
        stop.kind != StopRule::Kind::unthinned_count &&
        stop.kind != StopRule::Kind::mark_intersection)
        throw std::domain_error("simulate_ctmbp: invalid stop rule");

    MarkedTree t;
    t.n = n;
    t.marks.push_back(root_mark);
    t.split_times.push_back(0.0);
    t.generation.push_back(0);
    t.parent_index.push_back(-1);
    t.thinned.push_back(0);
    t.repeat_mark.push_back(0);

    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    seen[static_cast<std::size_t>(root_mark)] = 1;
    std::int64_t unthinned = 1;

    auto in_stop_set = [&](std::int64_t mark) {
        return std::binary_search(stop.mark_set->begin(), stop.mark_set->end(), mark);
    };
    auto stop_hit = [&](std::int64_t splits_done, std::int64_t last_mark) {
        switch (stop.kind) {
            case StopRule::Kind::split_count:
                return splits_done >= stop.count;
            case StopRule::Kind::unthinned_count:
                return unthinned >= stop.count;
            case StopRule::Kind::mark_intersection:
                return in_stop_set(last_mark);
        }
        return true;
    };

    // Alive vertices: mark, generation, index of the split that bore them.
    std::vector<std::int64_t> amark;
    std::vector<std::int32_t> agen;
    std::vector<std::int64_t> aparent;
    std::vector<std::int64_t> brood;

    if (stop_hit(0, root_mark)) return t;

    const std::int64_t x0 = stream.binomial(n - 1, p);
    sample_brood_marks(n, root_mark, x0, stream, brood);
    for (std::int64_t mk : brood) {
        amark.push_back(mk);
        agen.push_back(1);
        aparent.push_back(0);
    }
    std::int64_t s_alive = x0;
    t.alive_walk.push_back(s_alive);

    double clock = 0.0;
    std::int64_t splits = 0;
    const std::int64_t safety_cap = 200 * n + 100000;
    for (;;) {
        if (s_alive == 0) {
            t.extinct = true;
            return t;
        }
        clock += stream.exponential(static_cast<double>(s_alive));
        const auto pick = static_cast<std::size_t>(
            stream.uniform_below(static_cast<std::uint64_t>(s_alive)));
        const std::int64_t mk = amark[pick];
        const std::int32_t gen = agen[pick];
        const std::int64_t par = aparent[pick];
        amark[pick] = amark.back(); amark.pop_back();
        agen[pick] = agen.back(); agen.pop_back();
        aparent[pick] = aparent.back(); aparent.pop_back();

        const auto idx = static_cast<std::int64_t>(t.marks.size());
        const bool repeat = seen[static_cast<std::size_t>(mk)] != 0;
        const bool flagged = repeat || t.thinned[static_cast<std::size_t>(par)] != 0;
        t.marks.push_back(mk);
        t.split_times.push_back(clock);
        t.generation.push_back(gen);
        t.parent_index.push_back(par);
        t.repeat_mark.push_back(repeat ? 1 : 0);
        t.thinned.push_back(flagged ? 1 : 0);
        seen[static_cast<std::size_t>(mk)] = 1;
        if (!flagged) ++unthinned;

        const std::int64_t x = stream.binomial(n - 1, p);
        sample_brood_marks(n, mk, x, stream, brood);
        for (std::int64_t bmk : brood) {
            amark.push_back(bmk);
            agen.push_back(gen + 1);
            aparent.push_back(idx);
        }
        s_alive += x - 1;
        t.alive_walk.push_back(s_alive);
        ++splits;
        if (stop_hit(splits, mk)) return t;
        if (splits > safety_cap)
            throw std::runtime_error("simulate_ctmbp: split budget exhausted");
    }
}

MarkedTree thin(MarkedTree tree) {
    std::vector<char> seen(static_cast<std::size_t>(std::max<std::int64_t>(tree.n, 1)), 0);
    for (std::size_t j = 0; j < tree.marks.size(); ++j) {
        const auto mk = static_cast<std::size_t>(tree.marks[j]);
        const bool repeat = j > 0 && seen[mk] != 0;
        bool flagged = repeat;
        if (j > 0) {
            const std::int64_t par = tree.parent_index[j];
            flagged = flagged || tree.thinned[static_cast<std::size_t>(par)] != 0;
        }
        tree.repeat_mark[j] = repeat ? 1 : 0;
        tree.thinned[j] = flagged ? 1 : 0;
        seen[mk] = 1;
    }
    return tree;
}

std::int64_t coupling_miss_count(const MarkedTree& tree, std::int64_t k) {
    std::int64_t count = 0;
    const auto limit = std::min<std::int64_t>(
        k, static_cast<std::int64_t>(tree.marks.size()) - 1);
    for (std::int64_t j = 1; j <= limit; ++j) {
        const auto u = static_cast<std::size_t>(j);
        if (!tree.repeat_mark[u] && tree.thinned[u]) ++count;
    }
    return count;
}

ThinnedFppResult thinned_fpp_to_target(std::int64_t n, double p,
                                       std::int64_t root_mark,
                                       std::int64_t target_mark,
                                       rng::RngStream& stream) {
    if (n < 2) throw std::domain_error("thinned_fpp_to_target: n must be >= 2");
    if (root_mark == target_mark) return {true, 0.0, 0};

    std::vector<char> wet(static_cast<std::size_t>(n), 0);
    wet[static_cast<std::size_t>(root_mark)] = 1;
    std::vector<std::int64_t> amark;
    std::vector<std::int32_t> agen;
    std::vector<std::int64_t> brood;

    const std::int64_t x0 = stream.binomial(n - 1, p);
    sample_brood_marks(n, root_mark, x0, stream, brood);
    for (std::int64_t mk : brood) {
        amark.push_back(mk);
        agen.push_back(1);
    }
    double clock = 0.0;
    const std::int64_t safety_cap = 200 * n + 100000;
    std::int64_t steps = 0;
    while (!amark.empty()) {
        clock += stream.exponential(static_cast<double>(amark.size()));
        const auto pick = static_cast<std::size_t>(
            stream.uniform_below(static_cast<std::uint64_t>(amark.size())));
        const std::int64_t mk = amark[pick];
        const std::int32_t gen = agen[pick];
        amark[pick] = amark.back(); amark.pop_back();
        agen[pick] = agen.back(); agen.pop_back();
        if (wet[static_cast<std::size_t>(mk)]) continue;  // pruned repeat
        wet[static_cast<std::size_t>(mk)] = 1;
        if (mk == target_mark) return {true, clock, gen};
        const std::int64_t x = stream.binomial(n - 1, p);
        sample_brood_marks(n, mk, x, stream, brood);
        for (std::int64_t bmk : brood) {
            amark.push_back(bmk);
            agen.push_back(gen + 1);
        }
        if (++steps > safety_cap)
            throw std::runtime_error("thinned_fpp_to_target: split budget exhausted");
    }
    return {false, std::numeric_limits<double>::infinity(), -1};
}

double estimate_W(double lambda, std::int64_t m, rng::RngStream& stream) {
    if (!(lambda > 1.0)) throw std::domain_error("estimate_W: lambda must be > 1");
    if (m < 1) throw std::domain_error("estimate_W: m must be >= 1");
    std::int64_t s = 1;
    double a = 0.0;
    for (std::int64_t i = 0; i < m; ++i) {
        s += stream.poisson(lambda) - 1;
        if (s <= 0) return 0.0;
        a += stream.exponential(1.0) / static_cast<double>(s);
    }
    return static_cast<double>(s) * std::exp(-(lambda - 1.0) * a);
}

double sample_W_lambda(double lambda, std::int64_t m, rng::RngStream& stream) {
    const rng::RngStream base = stream;
    stream.next_u64();
    for (std::uint64_t attempt = 0;; ++attempt) {
        rng::RngStream sub = base.substream(attempt);
        const double w = estimate_W(lambda, m, sub);
        if (w > 0.0) return w;
    }
}

CollisionOutcome collision_experiment(std::int64_t n, double p,
                                      rng::RngStream& stream,
                                      MarkedTree* out_tree1,
                                      MarkedTree* out_tree2,
                                      std::int64_t a_n_override) {
    CollisionOutcome out{};
    out.a_n = a_n_override > 0 ? a_n_override : ceil_sqrt(n);
    if (a_n_override > 0 && a_n_override >= n)
        throw std::domain_error("collision_experiment: a_n override must be below n");

    StopRule grow_first;
    grow_first.kind = StopRule::Kind::split_count;
    grow_first.count = out.a_n - 1;
    MarkedTree t1 = simulate_ctmbp(n, p, grow_first, stream, 0);

    std::vector<std::int64_t> t1_marks = t1.marks;
    std::sort(t1_marks.begin(), t1_marks.end());
    StopRule meet;
    meet.kind = StopRule::Kind::mark_intersection;
    meet.mark_set = &t1_marks;
    MarkedTree t2 = simulate_ctmbp(n, p, meet, stream, 1);

    const bool t1_ok =
        !t1.extinct && static_cast<std::int64_t>(t1.marks.size()) == out.a_n;
    const bool t2_ok = !t2.extinct;
    out.survived = t1_ok && t2_ok;

    const auto u_idx = static_cast<std::size_t>(
        stream.uniform_below(static_cast<std::uint64_t>(t1.marks.size())));
    out.G1_U = t1.generation[u_idx];
    out.A1_an = t1.split_times.back();
    out.C_n = static_cast<std::int64_t>(t2.marks.size()) - 1;
    out.G2_C = t2.generation.back();
    out.A2_C = t2.split_times.back();
    out.H = out.G1_U + out.G2_C;
    out.W = out.A1_an + out.A2_C;
    if (out_tree1) *out_tree1 = std::move(t1);
    if (out_tree2) *out_tree2 = std::move(t2);
    return out;
}

std::vector<std::pair<std::int64_t, std::int64_t>> couple_binomial_poisson(
    std::int64_t n, double p, std::int64_t m, rng::RngStream& stream) {
    if (n < 1) throw std::domain_error("couple_binomial_poisson: n must be >= 1");
    if (!(p >= 0.0 && p <= 1.0))
        throw std::domain_error("couple_binomial_poisson: p must be in [0,1]");
    std::vector<std::pair<std::int64_t, std::int64_t>> out;
    out.reserve(static_cast<std::size_t>(m));
    const double p0 = std::exp(-p);
    for (std::int64_t r = 0; r < m; ++r) {
        const std::int64_t x = stream.binomial(n - 1, p);
        std::int64_t d = 0;
        // Shared-uniform trials: a trial's uniform below 1-p yields (0,0) on
        // both margins, so only the x successes need their Poisson quantile.
        for (std::int64_t i = 0; i < x; ++i) {
            const double u = (1.0 - p) + p * stream.uniform();
            std::int64_t k = 0;
            double pmf = p0;
            double cdf = p0;
            while (u > cdf) {
                ++k;
                pmf *= p / static_cast<double>(k);
                cdf += pmf;
            }
            d += k;
        }
        out.emplace_back(x, d);
    }
    return out;
}

}  // namespace fpplab::bp
