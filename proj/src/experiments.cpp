#include "fpplab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <utility>

#include "fpplab/bp.hpp"
#include "fpplab/fpp.hpp"
#include "fpplab/graph.hpp"
#include "fpplab/random.hpp"
#include "fpplab/stats.hpp"
#include "fpplab/theory.hpp"

namespace fpplab::experiments {

const char* const kToolVersion = "1.0.0";

using nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Stream layout. Every random draw of a run comes from
// make_stream(master_seed, (lane << 40) | unit): replications are keyed by
// their unit index, never by thread schedule, and reference samplers live on
// their own lanes so they cannot share a stream with experiment units.
enum Lane : std::uint64_t {
    kLanePrimary = 0,
    kLaneDrift = 1,
    kLaneCollision = 3,
    kLaneTree = 4,
    kLaneThinGraph = 5,
    kLaneThinTree = 6,
    kLaneExtrema = 7,
    kLaneLimitRef = 8,
    kLaneDenseRef = 9,
    kLaneTreeRef = 10,
    kLaneNormalRef = 11,
};

rng::RngStream lane_stream(std::uint64_t master, std::uint64_t lane,
                           std::uint64_t unit) {
    return rng::make_stream(master, (lane << 40) | unit);
}

// Runs body(0..total-1), each unit exactly once, on up to `threads` workers.
// Units write only to their own preallocated slots, so results are identical
// for every thread count; the first exception wins and is rethrown.
void run_units(std::int64_t total, std::int64_t threads,
               const std::function<void(std::int64_t)>& body) {
    if (total <= 0) return;
    threads = std::max<std::int64_t>(1, std::min(threads, total));
    if (threads == 1) {
        for (std::int64_t i = 0; i < total; ++i) body(i);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::mutex err_mu;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (std::int64_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            while (true) {
                const std::int64_t i = next.fetch_add(1);
                if (i >= total) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mu);
                    if (!first_error) first_error = std::current_exception();
                    next.store(total);
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------
// CSV formatting. Reals are printed with 17 significant digits (general
// format), which round-trips every double exactly; integers print as
// integers. Infinities and NaN render as inf/-inf/nan.
std::string fmt_real(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x,
                             std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::string fmt_int(std::int64_t v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void csv_row(std::string& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
    }
    out += '\n';
}

// JSON cannot carry inf/nan (they would serialize as null anyway); make the
// substitution explicit.
ordered_json json_num(double x) {
    if (!std::isfinite(x)) return nullptr;
    return x;
}

// ---------------------------------------------------------------------------
// Check bookkeeping.
struct CheckSet {
    const std::map<std::string, double>* overrides = nullptr;
    std::vector<CheckResult> results;

    double threshold_for(const std::string& name, double fallback) const {
        if (overrides) {
            auto it = overrides->find(name);
            if (it != overrides->end()) return it->second;
        }
        return fallback;
    }

    void add(const std::string& name, double value, double default_threshold,
             const char* op) {
        CheckResult c;
        c.name = name;
        c.value = value;
        c.threshold = threshold_for(name, default_threshold);
        c.op = op;
        if (!std::isfinite(value)) {
            c.pass = false;
        } else if (std::strcmp(op, "<=") == 0) {
            c.pass = value <= c.threshold;
        } else {
            c.pass = value >= c.threshold;
        }
        results.push_back(std::move(c));
    }

    void skip(const std::string& name, const std::string& reason) {
        CheckResult c;
        c.name = name;
        c.skipped = true;
        c.reason = reason;
        results.push_back(std::move(c));
    }

    bool overall() const {
        for (const auto& c : results)
            if (!c.skipped && !c.pass) return false;
        return true;
    }

    ordered_json to_json() const {
        ordered_json arr = ordered_json::array();
        for (const auto& c : results) {
            ordered_json e;
            e["name"] = c.name;
            if (c.skipped) {
                e["skipped"] = true;
                e["reason"] = c.reason;
            } else {
                e["value"] = json_num(c.value);
                e["threshold"] = json_num(c.threshold);
                e["op"] = c.op;
                e["pass"] = c.pass;
            }
            arr.push_back(std::move(e));
        }
        return arr;
    }
};

// ---------------------------------------------------------------------------
// Small numeric helpers.
double er_probability(std::int64_t n, double lambda) {
    return std::min(1.0, lambda / static_cast<double>(n - 1));
}

double median_of(std::vector<double> xs) {
    if (xs.empty()) return kNaN;
    std::sort(xs.begin(), xs.end());
    const std::size_t k = xs.size() / 2;
    if (xs.size() % 2 == 1) return xs[k];
    return 0.5 * (xs[k - 1] + xs[k]);
}

double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
}

double exp1_pdf(double x) { return x >= 0.0 ? std::exp(-x) : 0.0; }

// Mean absolute quantile gap on a fixed grid; a Wasserstein-1 surrogate that
// tolerates unequal sample sizes (diagnostic only).
double quantile_gap(std::vector<double> a, std::vector<double> b, int grid) {
    if (a.empty() || b.empty()) return kNaN;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    auto quant = [](const std::vector<double>& xs, double q) {
        const auto idx = static_cast<std::size_t>(q * static_cast<double>(xs.size()));
        return xs[std::min(idx, xs.size() - 1)];
    };
    double acc = 0.0;
    for (int k = 0; k < grid; ++k) {
        const double q = (static_cast<double>(k) + 0.5) / grid;
        acc += std::abs(quant(a, q) - quant(b, q));
    }
    return acc / grid;
}

// ---------------------------------------------------------------------------
// Plot rows: "series,x,y,reference". Histogram density of xs over its own
// range with the reference density evaluated at the bin midpoints.
void plot_hist_analytic(std::string& plot, const std::string& series,
                        const std::vector<double>& xs, int nbins,
                        const std::function<double(double)>& ref_pdf) {
    if (xs.size() < 2) return;
    double lo = *std::min_element(xs.begin(), xs.end());
    double hi = *std::max_element(xs.begin(), xs.end());
    if (!(hi > lo)) hi = lo + 1.0;
    const auto h = stats::histogram(xs, lo, hi, nbins);
    const double total = static_cast<double>(xs.size());
    for (int b = 0; b < nbins; ++b) {
        const double width = h.edges[b + 1] - h.edges[b];
        const double mid = 0.5 * (h.edges[b] + h.edges[b + 1]);
        const double dens = static_cast<double>(h.counts[b]) / (total * width);
        csv_row(plot, {series, fmt_real(mid), fmt_real(dens), fmt_real(ref_pdf(mid))});
    }
}

// Same, but the reference is a second sample binned on the same grid.
void plot_hist_two_sample(std::string& plot, const std::string& series,
                          const std::vector<double>& xs,
                          const std::vector<double>& ref, int nbins) {
    if (xs.size() < 2 || ref.empty()) return;
    double lo = *std::min_element(xs.begin(), xs.end());
    double hi = *std::max_element(xs.begin(), xs.end());
    if (!(hi > lo)) hi = lo + 1.0;
    const auto h = stats::histogram(xs, lo, hi, nbins);
    const auto hr = stats::histogram(ref, lo, hi, nbins);
    const double total = static_cast<double>(xs.size());
    const double rtotal = static_cast<double>(ref.size());
    for (int b = 0; b < nbins; ++b) {
        const double width = h.edges[b + 1] - h.edges[b];
        const double mid = 0.5 * (h.edges[b] + h.edges[b + 1]);
        const double dens = static_cast<double>(h.counts[b]) / (total * width);
        const double rdens = static_cast<double>(hr.counts[b]) / (rtotal * width);
        csv_row(plot, {series, fmt_real(mid), fmt_real(dens), fmt_real(rdens)});
    }
}

// ---------------------------------------------------------------------------
// Config plumbing.
struct Resolved {
    std::int64_t threads;
    std::int64_t drift_n;
    std::int64_t drift_reps;
    std::vector<std::int64_t> ladder;
};

Resolved resolve(const ExperimentConfig& c) {
    Resolved r;
    r.threads = std::max<std::int64_t>(1, c.threads);
    r.drift_n = c.drift_n > 0 ? c.drift_n : std::max<std::int64_t>(2, c.n / 10);
    r.drift_reps = c.drift_reps > 0 ? c.drift_reps : c.reps;
    r.ladder = c.n_ladder.empty() ? std::vector<std::int64_t>{c.n} : c.n_ladder;
    return r;
}

const std::vector<std::pair<Kind, const char*>>& kind_table() {
    static const std::vector<std::pair<Kind, const char*>> t = {
        {Kind::hopcount_clt, "hopcount_clt"},
        {Kind::weight_limit, "weight_limit"},
        {Kind::dense, "dense"},
        {Kind::collision_time, "collision_time"},
        {Kind::thinning_equivalence, "thinning_equivalence"},
        {Kind::extrema, "extrema"},
        {Kind::tree_clt, "tree_clt"},
    };
    return t;
}

void validate(const ExperimentConfig& c) {
    if (!(c.lambda > 1.0))
        throw std::domain_error("config: lambda must exceed 1");
    if (c.n < 2) throw std::domain_error("config: n must be at least 2");
    if (c.reps < 1) throw std::domain_error("config: reps must be at least 1");
    if (c.cadence < 1) throw std::domain_error("config: cadence must be at least 1");
    if (c.m < 1) throw std::domain_error("config: m must be at least 1");
    if (c.ref_m < 1) throw std::domain_error("config: ref_m must be at least 1");
    if (c.ref_draws < 2)
        throw std::domain_error("config: ref_draws must be at least 2");
    if (c.pair_probe < 1)
        throw std::domain_error("config: pair_probe must be at least 1");
    if (c.drift_n < 0 || c.drift_reps < 0 || c.a_n_override < 0)
        throw std::domain_error("config: sizes must be non-negative");
    if (c.drift_n == 1)
        throw std::domain_error("config: drift_n must be at least 2");
    const auto ladder = resolve(c).ladder;
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        if (ladder[i] < 2)
            throw std::domain_error("config: n_ladder entries must be at least 2");
        if (i > 0 && ladder[i] <= ladder[i - 1])
            throw std::domain_error("config: n_ladder must be strictly increasing");
    }
    const auto names = check_names(c.kind);
    for (const auto& [name, value] : c.threshold_overrides) {
        if (std::find(names.begin(), names.end(), name) == names.end())
            throw std::domain_error("config: unknown check threshold \"" + name +
                                    "\" for kind " + kind_name(c.kind));
        if (!std::isfinite(value))
            throw std::domain_error("config: threshold override for \"" + name +
                                    "\" must be finite");
    }
}

ordered_json constants_json(const theory::LimitConstants& k) {
    ordered_json j;
    j["lambda"] = k.lambda;
    j["beta"] = k.beta;
    j["gamma"] = k.gamma;
    j["p_lambda"] = k.p_lambda;
    j["mu_lambda"] = k.mu_lambda;
    j["theta_star"] = k.theta_star;
    j["c_lambda"] = k.c_lambda;
    j["d_lambda"] = k.d_lambda;
    return j;
}

ExperimentReport finish(const ExperimentConfig& cfg, ordered_json reference,
                        ordered_json summary, CheckSet checks, std::string raw,
                        std::string plot) {
    ExperimentReport rep;
    rep.config = cfg;
    rep.checks = checks.results;
    rep.overall_pass = checks.overall();
    rep.raw_csv = std::move(raw);
    rep.plot_csv = std::move(plot);

    const ordered_json cfg_json = config_to_json(cfg);
    ordered_json doc;
    doc["schema_version"] = 1;
    doc["tool_version"] = kToolVersion;
    doc["kind"] = kind_name(cfg.kind);
    doc["config"] = cfg_json;
    doc["config_hash"] = fnv1a_hex(cfg_json.dump());
    doc["reference"] = std::move(reference);
    doc["summary"] = std::move(summary);
    doc["checks"] = checks.to_json();
    doc["overall_pass"] = rep.overall_pass;
    rep.document = std::move(doc);
    return rep;
}

// ---------------------------------------------------------------------------
// Shared pair-sampling stage: `attempts` ordered source/target pairs over
// fresh graphs, `cadence` pairs per graph, one unit (graph + its pairs) per
// stream on the lane.
struct PairRow {
    std::int64_t unit;
    std::int64_t pair;
    fpp::PairResult r;
};

std::vector<PairRow> collect_pairs(std::int64_t n, double lambda,
                                   std::int64_t attempts, std::int64_t cadence,
                                   std::uint64_t master, std::uint64_t lane,
                                   std::int64_t threads) {
    const double p = er_probability(n, lambda);
    const std::int64_t units = (attempts + cadence - 1) / cadence;
    std::vector<std::vector<fpp::PairResult>> slots(
        static_cast<std::size_t>(units));
    run_units(units, threads, [&](std::int64_t u) {
        auto stream = lane_stream(master, lane, static_cast<std::uint64_t>(u));
        auto g = graph::generate_er(n, p, stream);
        auto wg = graph::attach_weights(std::move(g), stream);
        const std::int64_t k = std::min(cadence, attempts - u * cadence);
        slots[static_cast<std::size_t>(u)] =
            fpp::sample_pair_statistics(wg, k, stream);
    });
    std::vector<PairRow> rows;
    rows.reserve(static_cast<std::size_t>(attempts));
    for (std::int64_t u = 0; u < units; ++u) {
        const auto& block = slots[static_cast<std::size_t>(u)];
        for (std::size_t i = 0; i < block.size(); ++i)
            rows.push_back({u, static_cast<std::int64_t>(i), block[i]});
    }
    return rows;
}

void append_pair_cells(std::vector<std::string>& cells, const PairRow& row) {
    cells.push_back(fmt_int(row.unit));
    cells.push_back(fmt_int(row.pair));
    cells.push_back(fmt_int(row.r.u));
    cells.push_back(fmt_int(row.r.v));
    cells.push_back(fmt_int(row.r.connected ? 1 : 0));
    cells.push_back(fmt_int(row.r.connected ? row.r.hops : -1));
    cells.push_back(fmt_real(row.r.connected ? row.r.weight : kInf));
}

// ---------------------------------------------------------------------------
// hopcount_clt: standardized hopcounts of connected pairs against the normal
// limit (H - beta log n) / sqrt(beta log n).
ExperimentReport run_hopcount_clt(const ExperimentConfig& cfg, const Resolved& rv) {
    const auto consts = theory::constants(cfg.lambda);
    const double blog = consts.beta * std::log(static_cast<double>(cfg.n));
    const auto rows = collect_pairs(cfg.n, cfg.lambda, cfg.reps, cfg.cadence,
                                    cfg.master_seed, kLanePrimary, rv.threads);

    std::string raw = "unit,pair,u,v,connected,hops,weight,std_h\n";
    std::vector<double> z;
    for (const auto& row : rows) {
        double zi = kNaN;
        if (row.r.connected) {
            zi = (static_cast<double>(row.r.hops) - blog) / std::sqrt(blog);
            z.push_back(zi);
        }
        std::vector<std::string> cells;
        append_pair_cells(cells, row);
        cells.push_back(fmt_real(zi));
        csv_row(raw, cells);
    }

    const std::int64_t connected = static_cast<std::int64_t>(z.size());
    const double z_mean = z.empty() ? kNaN : stats::mean(z);
    const double z_var = connected >= 2 ? stats::variance(z) : kNaN;
    // A sample whose values all coincide (single pair, or a graph family with
    // a forced hopcount) cannot be standardized; flag it instead of failing.
    const bool degenerate =
        connected > 0 && *std::min_element(z.begin(), z.end()) ==
                             *std::max_element(z.begin(), z.end());
    double ks = kNaN;
    if (connected > 0 && !degenerate)
        ks = stats::ks_one_sample(z, [](double x) { return stats::normal_cdf(x); });

    CheckSet checks;
    checks.overrides = &cfg.threshold_overrides;
    checks.add("connected_pairs_found", static_cast<double>(connected), 1.0, ">=");
    if (connected == 0) {
        checks.skip("std_mean_abs", "no connected pairs");
        checks.skip("std_var_band", "no connected pairs");
        checks.skip("ks_vs_normal", "no connected pairs");
    } else if (degenerate) {
        checks.skip("std_mean_abs", "degenerate sample: zero variance");
        checks.skip("std_var_band", "degenerate sample: zero variance");
        checks.skip("ks_vs_normal", "degenerate sample: zero variance");
    } else {
        checks.add("std_mean_abs", std::abs(z_mean), 0.3, "<=");
        checks.add("std_var_band", std::abs(z_var - 1.0), 0.3, "<=");
        checks.add("ks_vs_normal", ks, 0.1, "<=");
    }

    ordered_json summary;
    summary["attempts"] = cfg.reps;
    summary["connected_pairs"] = connected;
    summary["degenerate"] = degenerate;
    summary["beta_log_n"] = blog;
    summary["std_mean"] = json_num(z_mean);
    summary["std_var"] = json_num(z_var);
    summary["ks_vs_normal"] = json_num(ks);

    std::string plot = "series,x,y,reference\n";
    plot_hist_analytic(plot, "std_hopcount", z, 40, normal_pdf);

    ordered_json reference;
    reference["constants"] = constants_json(consts);
    return finish(cfg, std::move(reference), std::move(summary), std::move(checks),
                  std::move(raw), std::move(plot));
}

// ---------------------------------------------------------------------------
// weight_limit: centered weights W - gamma log n against the sampled limit
// law, plus a drift comparison at a smaller size.
ExperimentReport run_weight_limit(const ExperimentConfig& cfg, const Resolved& rv) {
    const auto consts = theory::constants(cfg.lambda);
    const double glog_main = consts.gamma * std::log(static_cast<double>(cfg.n));
    const double glog_drift =
        consts.gamma * std::log(static_cast<double>(rv.drift_n));

    const auto rows_main =
        collect_pairs(cfg.n, cfg.lambda, cfg.reps, cfg.cadence, cfg.master_seed,
                      kLanePrimary, rv.threads);
    const auto rows_drift =
        collect_pairs(rv.drift_n, cfg.lambda, rv.drift_reps, cfg.cadence,
                      cfg.master_seed, kLaneDrift, rv.threads);

    // Reference draws of the limit variable, in fixed-size chunks so the
    // sample is identical for every thread count.
    const std::int64_t chunk = 1000;
    const std::int64_t ref_units = (cfg.ref_draws + chunk - 1) / chunk;
    std::vector<std::vector<double>> ref_slots(
        static_cast<std::size_t>(ref_units));
    run_units(ref_units, rv.threads, [&](std::int64_t u) {
        auto stream =
            lane_stream(cfg.master_seed, kLaneLimitRef, static_cast<std::uint64_t>(u));
        const std::int64_t k = std::min(chunk, cfg.ref_draws - u * chunk);
        auto& out = ref_slots[static_cast<std::size_t>(u)];
        out.reserve(static_cast<std::size_t>(k));
        for (std::int64_t i = 0; i < k; ++i)
            out.push_back(theory::sample_limit_X(cfg.lambda, cfg.ref_m, stream));
    });
    std::vector<double> ref;
    ref.reserve(static_cast<std::size_t>(cfg.ref_draws));
    for (const auto& s : ref_slots) ref.insert(ref.end(), s.begin(), s.end());

    std::string raw = "side,unit,pair,u,v,connected,hops,weight,centered_w\n";
    std::vector<double> x_main, x_drift;
    auto emit_side = [&raw](int side, const std::vector<PairRow>& rows,
                            double glog, std::vector<double>& xs) {
        for (const auto& row : rows) {
            double xi = kNaN;
            if (row.r.connected) {
                xi = row.r.weight - glog;
                xs.push_back(xi);
            }
            std::vector<std::string> cells{fmt_int(side)};
            append_pair_cells(cells, row);
            cells.push_back(fmt_real(xi));
            csv_row(raw, cells);
        }
    };
    emit_side(0, rows_main, glog_main, x_main);
    emit_side(1, rows_drift, glog_drift, x_drift);
    for (std::size_t i = 0; i < ref.size(); ++i)
        csv_row(raw, {"2", fmt_int(static_cast<std::int64_t>(i)), "0", "-1", "-1",
                      "1", "-1", fmt_real(kNaN), fmt_real(ref[i])});

    const std::int64_t conn_main = static_cast<std::int64_t>(x_main.size());
    const std::int64_t conn_drift = static_cast<std::int64_t>(x_drift.size());
    const double mean_main = x_main.empty() ? kNaN : stats::mean(x_main);
    const double mean_drift = x_drift.empty() ? kNaN : stats::mean(x_drift);
    const double ks = x_main.empty() ? kNaN : stats::ks_two_sample(x_main, ref);
    const double w1 = quantile_gap(x_main, ref, 2000);
    const double drift_gap = std::abs(mean_main - mean_drift);

    CheckSet checks;
    checks.overrides = &cfg.threshold_overrides;
    checks.add("connected_pairs_found", static_cast<double>(conn_main), 1.0, ">=");
    checks.add("drift_connected_pairs_found", static_cast<double>(conn_drift), 1.0,
               ">=");
    if (conn_main == 0) {
        checks.skip("ks_vs_limit", "no connected pairs");
    } else {
        checks.add("ks_vs_limit", ks, 0.1, "<=");
    }
    if (conn_main == 0 || conn_drift == 0) {
        checks.skip("mean_drift_abs", "no connected pairs on one side");
    } else {
        checks.add("mean_drift_abs", drift_gap, 0.2, "<=");
    }

    ordered_json summary;
    summary["attempts"] = cfg.reps;
    summary["connected_pairs"] = conn_main;
    summary["centered_mean"] = json_num(mean_main);
    summary["centered_var"] =
        json_num(conn_main >= 2 ? stats::variance(x_main) : kNaN);
    summary["ks_vs_limit"] = json_num(ks);
    summary["w1_quantile_gap"] = json_num(w1);
    summary["drift"] = ordered_json{{"n", rv.drift_n},
                                    {"attempts", rv.drift_reps},
                                    {"connected_pairs", conn_drift},
                                    {"centered_mean", json_num(mean_drift)}};
    summary["mean_drift_abs"] = json_num(drift_gap);
    summary["reference_sample"] =
        ordered_json{{"draws", cfg.ref_draws},
                     {"m", cfg.ref_m},
                     {"mean", json_num(ref.empty() ? kNaN : stats::mean(ref))}};

    std::string plot = "series,x,y,reference\n";
    plot_hist_two_sample(plot, "centered_weight", x_main, ref, 40);

    ordered_json reference;
    reference["constants"] = constants_json(consts);
    return finish(cfg, std::move(reference), std::move(summary), std::move(checks),
                  std::move(raw), std::move(plot));
}

// ---------------------------------------------------------------------------
// dense: scaled weights (lambda_n - 1) W - log n against the sampled
// double-Gumbel limit, hopcounts standardized by beta_n log n.
ExperimentReport run_dense(const ExperimentConfig& cfg, const Resolved& rv) {
    const auto centering = theory::dense_centering_report(cfg.n, cfg.lambda);
    const double logn = std::log(static_cast<double>(cfg.n));
    const double hop_center = centering.beta_n * logn;
    const auto rows = collect_pairs(cfg.n, cfg.lambda, cfg.reps, cfg.cadence,
                                    cfg.master_seed, kLanePrimary, rv.threads);

    const std::int64_t chunk = 5000;
    const std::int64_t ref_units = (cfg.ref_draws + chunk - 1) / chunk;
    std::vector<std::vector<double>> ref_slots(
        static_cast<std::size_t>(ref_units));
    run_units(ref_units, rv.threads, [&](std::int64_t u) {
        auto stream =
            lane_stream(cfg.master_seed, kLaneDenseRef, static_cast<std::uint64_t>(u));
        const std::int64_t k = std::min(chunk, cfg.ref_draws - u * chunk);
        auto& out = ref_slots[static_cast<std::size_t>(u)];
        out.reserve(static_cast<std::size_t>(k));
        for (std::int64_t i = 0; i < k; ++i)
            out.push_back(theory::sample_dense_limit(stream));
    });
    std::vector<double> ref;
    ref.reserve(static_cast<std::size_t>(cfg.ref_draws));
    for (const auto& s : ref_slots) ref.insert(ref.end(), s.begin(), s.end());

    std::string raw = "side,unit,pair,u,v,connected,hops,weight,scaled_w,std_h\n";
    std::vector<double> w_scaled, h_std;
    for (const auto& row : rows) {
        double wi = kNaN, hi = kNaN;
        if (row.r.connected) {
            wi = (cfg.lambda - 1.0) * row.r.weight - logn;
            hi = (static_cast<double>(row.r.hops) - hop_center) / std::sqrt(logn);
            w_scaled.push_back(wi);
            h_std.push_back(hi);
        }
        std::vector<std::string> cells{"0"};
        append_pair_cells(cells, row);
        cells.push_back(fmt_real(wi));
        cells.push_back(fmt_real(hi));
        csv_row(raw, cells);
    }
    for (std::size_t i = 0; i < ref.size(); ++i)
        csv_row(raw, {"2", fmt_int(static_cast<std::int64_t>(i)), "0", "-1", "-1",
                      "1", "-1", fmt_real(kNaN), fmt_real(ref[i]), fmt_real(kNaN)});

    const std::int64_t connected = static_cast<std::int64_t>(w_scaled.size());
    const double w_ks =
        w_scaled.empty() ? kNaN : stats::ks_two_sample(w_scaled, ref);
    double h_ks = kNaN;
    if (!h_std.empty())
        h_ks = stats::ks_one_sample(h_std,
                                    [](double x) { return stats::normal_cdf(x); });

    CheckSet checks;
    checks.overrides = &cfg.threshold_overrides;
    checks.add("connected_pairs_found", static_cast<double>(connected), 1.0, ">=");
    if (connected == 0) {
        checks.skip("weight_ks_vs_limit", "no connected pairs");
        checks.skip("hop_ks_vs_normal", "no connected pairs");
    } else {
        checks.add("weight_ks_vs_limit", w_ks, 0.08, "<=");
        checks.add("hop_ks_vs_normal", h_ks, 0.1, "<=");
    }

    ordered_json summary;
    summary["attempts"] = cfg.reps;
    summary["connected_pairs"] = connected;
    summary["scaled_weight_mean"] =
        json_num(w_scaled.empty() ? kNaN : stats::mean(w_scaled));
    summary["weight_ks_vs_limit"] = json_num(w_ks);
    summary["std_hop_mean"] = json_num(h_std.empty() ? kNaN : stats::mean(h_std));
    summary["std_hop_var"] =
        json_num(h_std.size() >= 2 ? stats::variance(h_std) : kNaN);
    summary["hop_ks_vs_normal"] = json_num(h_ks);
    summary["reference_sample"] =
        ordered_json{{"draws", cfg.ref_draws},
                     {"mean", json_num(ref.empty() ? kNaN : stats::mean(ref))}};

    std::string plot = "series,x,y,reference\n";
    plot_hist_two_sample(plot, "scaled_weight", w_scaled, ref, 40);
    plot_hist_analytic(plot, "std_hopcount", h_std, 40, normal_pdf);

    ordered_json reference;
    reference["constants"] = constants_json(theory::constants(cfg.lambda));
    reference["centering"] =
        ordered_json{{"lambda_n", centering.lambda_n},
                     {"beta_n", centering.beta_n},
                     {"discriminant", centering.discriminant},
                     {"centering_replaceable", centering.centering_replaceable}};
    return finish(cfg, std::move(reference), std::move(summary), std::move(checks),
                  std::move(raw), std::move(plot));
}

// ---------------------------------------------------------------------------
// collision_time: two-tree meeting runs; surviving runs give C_n / a_n
// against Exp(1), plus the coupling miss-count bound.
ExperimentReport run_collision_time(const ExperimentConfig& cfg,
                                    const Resolved& rv) {
    const auto consts = theory::constants(cfg.lambda);
    const double p = er_probability(cfg.n, cfg.lambda);

    struct Row {
        bp::CollisionOutcome out;
        std::int64_t miss;
    };
    std::vector<Row> slots(static_cast<std::size_t>(cfg.reps));
    run_units(cfg.reps, rv.threads, [&](std::int64_t u) {
        auto stream =
            lane_stream(cfg.master_seed, kLaneCollision, static_cast<std::uint64_t>(u));
        bp::MarkedTree t1;
        auto out = bp::collision_experiment(cfg.n, p, stream, &t1, nullptr,
                                            cfg.a_n_override);
        slots[static_cast<std::size_t>(u)] = {
            out, bp::coupling_miss_count(t1, out.a_n)};
    });

    std::string raw =
        "rep,survived,a_n,c_n,g1_u,g2_c,a1_an,a2_c,h,w,scaled_c,miss_count\n";
    std::vector<double> scaled, miss;
    const std::int64_t a_n = slots.empty() ? 0 : slots.front().out.a_n;
    for (std::int64_t i = 0; i < cfg.reps; ++i) {
        const auto& r = slots[static_cast<std::size_t>(i)];
        double sc = kNaN;
        if (r.out.survived) {
            sc = static_cast<double>(r.out.C_n) / static_cast<double>(r.out.a_n);
            scaled.push_back(sc);
            miss.push_back(static_cast<double>(r.miss));
        }
        csv_row(raw,
                {fmt_int(i), fmt_int(r.out.survived ? 1 : 0), fmt_int(r.out.a_n),
                 fmt_int(r.out.C_n), fmt_int(r.out.G1_U), fmt_int(r.out.G2_C),
                 fmt_real(r.out.A1_an), fmt_real(r.out.A2_C), fmt_int(r.out.H),
                 fmt_real(r.out.W), fmt_real(sc), fmt_int(r.miss)});
    }

    const std::int64_t survivors = static_cast<std::int64_t>(scaled.size());
    const double frac =
        static_cast<double>(survivors) / static_cast<double>(cfg.reps);
    const double expected =
        (1.0 - consts.p_lambda) * (1.0 - consts.p_lambda);
    double ks = kNaN;
    if (survivors > 0)
        ks = stats::ks_one_sample(
            scaled, [](double x) { return stats::exponential_cdf(x, 1.0); });
    const double mean_miss = miss.empty() ? kNaN : stats::mean(miss);
    double miss_rse = 0.0;
    if (miss.size() >= 2 && mean_miss > 0.0)
        miss_rse = std::sqrt(stats::variance(miss) /
                             static_cast<double>(miss.size())) /
                   mean_miss;
    const double bound_base =
        static_cast<double>(a_n) * static_cast<double>(a_n) /
        static_cast<double>(cfg.n - a_n);
    const double miss_bound = bound_base * (1.0 + 3.0 * miss_rse);

    CheckSet checks;
    checks.overrides = &cfg.threshold_overrides;
    checks.add("survivors_found", static_cast<double>(survivors), 1.0, ">=");
    checks.add("survival_dev_abs", std::abs(frac - expected), 0.03, "<=");
    if (survivors == 0) {
        checks.skip("ks_scaled_vs_exponential", "no surviving runs");
        checks.skip("mean_miss_vs_bound", "no surviving runs");
    } else {
        checks.add("ks_scaled_vs_exponential", ks, 0.06, "<=");
        checks.add("mean_miss_vs_bound", mean_miss, miss_bound, "<=");
    }

    ordered_json summary;
    summary["reps"] = cfg.reps;
    summary["survivors"] = survivors;
    summary["survival_fraction"] = frac;
    summary["expected_survival_fraction"] = expected;
    summary["a_n"] = a_n;
    summary["scaled_mean"] = json_num(scaled.empty() ? kNaN : stats::mean(scaled));
    summary["ks_scaled_vs_exponential"] = json_num(ks);
    summary["mean_miss"] = json_num(mean_miss);
    summary["miss_rse"] = json_num(miss_rse);
    summary["miss_bound_base"] = json_num(bound_base);
    summary["miss_bound"] = json_num(miss_bound);

    std::string plot = "series,x,y,reference\n";
    plot_hist_analytic(plot, "scaled_collision_time", scaled, 40, exp1_pdf);

    ordered_json reference;
    reference["constants"] = constants_json(consts);
    return finish(cfg, std::move(reference), std::move(summary), std::move(checks),
                  std::move(raw), std::move(plot));
}

// ---------------------------------------------------------------------------
// thinning_equivalence: the two constructions of the passage from vertex 0 to
// vertex 1 -- shortest path on a weighted graph versus the pruned labeled
// tree -- compared as distributions.
ExperimentReport run_thinning_equivalence(const ExperimentConfig& cfg,
                                          const Resolved& rv) {
    const auto consts = theory::constants(cfg.lambda);
    const double p = er_probability(cfg.n, cfg.lambda);

    struct Side {
        bool reached;
        std::int64_t hops;
        double weight;
    };
    std::vector<Side> gslots(static_cast<std::size_t>(cfg.reps));
    std::vector<Side> tslots(static_cast<std::size_t>(cfg.reps));

    run_units(cfg.reps, rv.threads, [&](std::int64_t u) {
        auto stream =
            lane_stream(cfg.master_seed, kLaneThinGraph, static_cast<std::uint64_t>(u));
        auto g = graph::generate_er(cfg.n, p, stream);
        auto wg = graph::attach_weights(std::move(g), stream);
        const auto tree = fpp::shortest_weight_tree(wg, 0);
        const bool ok = std::isfinite(tree.weight[1]);
        gslots[static_cast<std::size_t>(u)] = {ok, ok ? tree.hops[1] : -1,
                                               ok ? tree.weight[1] : kInf};
    });
    run_units(cfg.reps, rv.threads, [&](std::int64_t u) {
        auto stream =
            lane_stream(cfg.master_seed, kLaneThinTree, static_cast<std::uint64_t>(u));
        const auto r = bp::thinned_fpp_to_target(cfg.n, p, 0, 1, stream);
        tslots[static_cast<std::size_t>(u)] = {r.reached, r.hops,
                                               r.reached ? r.weight : kInf};
    });

    std::string raw = "side,rep,reached,hops,weight\n";
    auto emit = [&raw](int side, const std::vector<Side>& rows) {
        for (std::size_t i = 0; i < rows.size(); ++i)
            csv_row(raw, {fmt_int(side), fmt_int(static_cast<std::int64_t>(i)),
                          fmt_int(rows[i].reached ? 1 : 0), fmt_int(rows[i].hops),
                          fmt_real(rows[i].weight)});
    };
    emit(0, gslots);
    emit(1, tslots);

    auto finite_weights = [](const std::vector<Side>& rows) {
        std::vector<double> out;
        for (const auto& r : rows)
            if (r.reached) out.push_back(r.weight);
        return out;
    };
    auto finite_hops = [](const std::vector<Side>& rows) {
        std::vector<double> out;
        for (const auto& r : rows)
            if (r.reached) out.push_back(static_cast<double>(r.hops));
        return out;
    };
    auto hop_pmf = [](const std::vector<Side>& rows) {
        std::map<std::int64_t, double> pmf;
        const double unit = 1.0 / static_cast<double>(rows.size());
        for (const auto& r : rows) pmf[r.reached ? r.hops : -1] += unit;
        return pmf;
    };

    const auto gw = finite_weights(gslots);
    const auto tw = finite_weights(tslots);
    const double gfrac_dis =
        1.0 - static_cast<double>(gw.size()) / static_cast<double>(cfg.reps);
    const double tfrac_dis =
        1.0 - static_cast<double>(tw.size()) / static_cast<double>(cfg.reps);
    const double dis_gap = std::abs(gfrac_dis - tfrac_dis);
    const double w_ks = (gw.empty() || tw.empty())
                            ? kNaN
                            : stats::ks_two_sample(gw, tw);
    const auto gh = finite_hops(gslots);
    const auto th = finite_hops(tslots);
    const double h_ks =
        (gh.empty() || th.empty()) ? kNaN : stats::ks_two_sample(gh, th);
    const double h_tv = stats::total_variation(hop_pmf(gslots), hop_pmf(tslots));

    CheckSet checks;
    checks.overrides = &cfg.threshold_overrides;
    if (gw.empty() || tw.empty()) {
        checks.skip("weight_ks_two_sample", "a side has no finite passage");
    } else {
        checks.add("weight_ks_two_sample", w_ks, 0.08, "<=");
    }
    checks.add("hop_tv_full", h_tv, 0.1, "<=");
    checks.add("disconnect_gap", dis_gap, 0.04, "<=");

    ordered_json summary;
    summary["reps_per_side"] = cfg.reps;
    summary["graph"] = ordered_json{
        {"disconnected_fraction", gfrac_dis},
        {"mean_weight", json_num(gw.empty() ? kNaN : stats::mean(gw))},
        {"mean_hops", json_num(gh.empty() ? kNaN : stats::mean(gh))}};
    summary["tree"] = ordered_json{
        {"disconnected_fraction", tfrac_dis},
        {"mean_weight", json_num(tw.empty() ? kNaN : stats::mean(tw))},
        {"mean_hops", json_num(th.empty() ? kNaN : stats::mean(th))}};
    summary["disconnect_gap"] = dis_gap;
    summary["weight_ks_two_sample"] = json_num(w_ks);
    summary["hop_ks_conditional"] = json_num(h_ks);
    summary["hop_tv_full"] = h_tv;

    std::string plot = "series,x,y,reference\n";
    plot_hist_two_sample(plot, "conditional_weight", gw, tw, 40);

    ordered_json reference;
    reference["constants"] = constants_json(consts);
    return finish(cfg, std::move(reference), std::move(summary), std::move(checks),
                  std::move(raw), std::move(plot));
}

// ---------------------------------------------------------------------------
// extrema: per-instance maximal weights/hopcounts over a ladder of sizes;
// medians must grow with n, and every reported maximum must dominate the
// instance's own median pair weight.
ExperimentReport run_extrema(const ExperimentConfig& cfg, const Resolved& rv) {
    const auto consts = theory::constants(cfg.lambda);
    const auto& ladder = rv.ladder;
    const std::int64_t rungs = static_cast<std::int64_t>(ladder.size());
    const std::int64_t total = rungs * cfg.reps;

    struct Row {
        fpp::ExtremaResult ex;
        double median_pair_weight;
    };
    std::vector<Row> slots(static_cast<std::size_t>(total));
    run_units(total, rv.threads, [&](std::int64_t u) {
        const std::int64_t rung = u / cfg.reps;
        const std::int64_t size = ladder[static_cast<std::size_t>(rung)];
        auto stream =
            lane_stream(cfg.master_seed, kLaneExtrema, static_cast<std::uint64_t>(u));
        auto g = graph::generate_er(size, er_probability(size, cfg.lambda), stream);
        auto wg = graph::attach_weights(std::move(g), stream);
        const auto ex = fpp::extrema_search(wg, cfg.lambda, stream);
        const auto pairs = fpp::sample_pair_statistics(wg, cfg.pair_probe, stream);
        std::vector<double> ws;
        for (const auto& pr : pairs)
            if (pr.connected) ws.push_back(pr.weight);
        slots[static_cast<std::size_t>(u)] = {ex, median_of(std::move(ws))};
    });

    std::string raw =
        "rung_n,rep,weight_i,weight_j,weight_max,hops_at_weight_max,hops_i,hops_j,"
        "hops_max,weight_ratio,hops_ratio,exhaustive,sources_scanned,"
        "median_pair_weight\n";
    for (std::int64_t u = 0; u < total; ++u) {
        const auto& r = slots[static_cast<std::size_t>(u)];
        const std::int64_t rung = u / cfg.reps;
        csv_row(raw, {fmt_int(ladder[static_cast<std::size_t>(rung)]),
                      fmt_int(u % cfg.reps), fmt_int(r.ex.weight_i),
                      fmt_int(r.ex.weight_j), fmt_real(r.ex.weight_max),
                      fmt_int(r.ex.hops_at_weight_max), fmt_int(r.ex.hops_i),
                      fmt_int(r.ex.hops_j), fmt_int(r.ex.hops_max),
                      fmt_real(r.ex.weight_ratio), fmt_real(r.ex.hops_ratio),
                      fmt_int(r.ex.exhaustive ? 1 : 0),
                      fmt_int(r.ex.sources_scanned),
                      fmt_real(r.median_pair_weight)});
    }

    ordered_json rung_rows = ordered_json::array();
    std::vector<double> rung_medians;
    std::int64_t dominance_hits = 0, dominance_total = 0;
    std::string plot = "series,x,y,reference\n";
    for (std::int64_t rung = 0; rung < rungs; ++rung) {
        const std::int64_t size = ladder[static_cast<std::size_t>(rung)];
        std::vector<double> wmax, hmax, wratio, hratio;
        std::int64_t exhaustive_count = 0, median_defined = 0;
        for (std::int64_t rep = 0; rep < cfg.reps; ++rep) {
            const auto& r = slots[static_cast<std::size_t>(rung * cfg.reps + rep)];
            wmax.push_back(r.ex.weight_max);
            hmax.push_back(static_cast<double>(r.ex.hops_max));
            wratio.push_back(r.ex.weight_ratio);
            hratio.push_back(r.ex.hops_ratio);
            if (r.ex.exhaustive) ++exhaustive_count;
            if (std::isfinite(r.median_pair_weight)) {
                ++median_defined;
                ++dominance_total;
                if (r.ex.weight_max >= r.median_pair_weight) ++dominance_hits;
            }
        }
        const double med_w = median_of(wmax);
        const double med_h = median_of(hmax);
        const double logn = std::log(static_cast<double>(size));
        rung_medians.push_back(med_w);
        rung_rows.push_back(ordered_json{
            {"n", size},
            {"reps", cfg.reps},
            {"exhaustive_fraction",
             static_cast<double>(exhaustive_count) / static_cast<double>(cfg.reps)},
            {"median_weight_max", json_num(med_w)},
            {"median_hops_max", json_num(med_h)},
            {"mean_weight_ratio", json_num(stats::mean(wratio))},
            {"mean_hops_ratio", json_num(stats::mean(hratio))},
            {"c_log_n", consts.c_lambda * logn},
            {"d_log_n", consts.d_lambda * logn},
            {"median_defined_reps", median_defined}});
        csv_row(plot, {"median_weight_max", fmt_int(size), fmt_real(med_w),
                       fmt_real(consts.c_lambda * logn)});
        csv_row(plot, {"median_hops_max", fmt_int(size), fmt_real(med_h),
                       fmt_real(consts.d_lambda * logn)});
    }

    bool monotone = true;
    for (std::size_t i = 1; i < rung_medians.size(); ++i)
        if (!(rung_medians[i] > rung_medians[i - 1])) monotone = false;
    const double dominance_fraction =
        dominance_total == 0 ? kNaN
                             : static_cast<double>(dominance_hits) /
                                   static_cast<double>(dominance_total);

    CheckSet checks;
    checks.overrides = &cfg.threshold_overrides;
    if (rungs < 2) {
        checks.skip("median_weight_monotone", "single ladder size");
    } else {
        checks.add("median_weight_monotone", monotone ? 1.0 : 0.0, 1.0, ">=");
    }
    if (dominance_total == 0) {
        checks.skip("weight_dominates_median", "no instance had a defined median");
    } else {
        checks.add("weight_dominates_median", dominance_fraction, 1.0, ">=");
    }

    ordered_json summary;
    summary["ladder"] = std::move(rung_rows);
    summary["medians_strictly_increasing"] = monotone;
    summary["dominance_fraction"] = json_num(dominance_fraction);

    ordered_json reference;
    reference["constants"] = constants_json(consts);
    return finish(cfg, std::move(reference), std::move(summary), std::move(checks),
                  std::move(raw), std::move(plot));
}

// ---------------------------------------------------------------------------
// tree_clt: whole-walk-positive attachment trees; the final generation is
// standardized by its own mean/variance and compared with the normal law, the
// final split time is centered by gamma log m and compared with the sampled
// time limit.
ExperimentReport run_tree_clt(const ExperimentConfig& cfg, const Resolved& rv) {
    const auto consts = theory::constants(cfg.lambda);
    const double glogm = consts.gamma * std::log(static_cast<double>(cfg.m));

    struct Row {
        std::int64_t generation;
        double split_time;
        double rho_mean;
        double rho_sum;
        std::int64_t attempts;
    };
    std::vector<Row> slots(static_cast<std::size_t>(cfg.reps));
    run_units(cfg.reps, rv.threads, [&](std::int64_t u) {
        auto stream =
            lane_stream(cfg.master_seed, kLaneTree, static_cast<std::uint64_t>(u));
        rng::RngStream base = stream;
        stream.next_u64();
        for (std::int64_t attempt = 0;; ++attempt) {
            auto sub = base.substream(static_cast<std::uint64_t>(attempt));
            bp::DegreeSequence d(static_cast<std::size_t>(cfg.m));
            for (auto& di : d) di = sub.poisson(cfg.lambda);
            if (!bp::alive_counts(d).all_positive) continue;
            const auto tf = bp::sample_tree_fpp(d, sub);
            slots[static_cast<std::size_t>(u)] = {tf.generation, tf.split_time,
                                                  bp::rho_mean(d), bp::rho_sum(d),
                                                  attempt + 1};
            return;
        }
    });

    // Reference draws of the centered-time limit, chunked for thread
    // independence; these are the expensive draws, so chunks stay small.
    const std::int64_t chunk = 250;
    const std::int64_t ref_units = (cfg.ref_draws + chunk - 1) / chunk;
    std::vector<std::vector<double>> ref_slots(
        static_cast<std::size_t>(ref_units));
    run_units(ref_units, rv.threads, [&](std::int64_t u) {
        auto stream =
            lane_stream(cfg.master_seed, kLaneTreeRef, static_cast<std::uint64_t>(u));
        const std::int64_t k = std::min(chunk, cfg.ref_draws - u * chunk);
        auto& out = ref_slots[static_cast<std::size_t>(u)];
        out.reserve(static_cast<std::size_t>(k));
        for (std::int64_t i = 0; i < k; ++i) {
            const double w = bp::sample_W_lambda(cfg.lambda, cfg.ref_m, stream);
            out.push_back(-consts.gamma * std::log(consts.gamma * w));
        }
    });
    std::vector<double> ref;
    ref.reserve(static_cast<std::size_t>(cfg.ref_draws));
    for (const auto& s : ref_slots) ref.insert(ref.end(), s.begin(), s.end());

    std::string raw =
        "side,rep,generation,split_time,rho_mean,rho_sum,attempts,std_g,"
        "centered_a\n";
    std::vector<double> z, a_centered, z_theorem;
    std::int64_t excluded = 0;
    const double blogm = consts.beta * std::log(static_cast<double>(cfg.m));
    for (std::int64_t i = 0; i < cfg.reps; ++i) {
        const auto& r = slots[static_cast<std::size_t>(i)];
        double zi = kNaN;
        const double ai = r.split_time - glogm;
        if (r.rho_sum > 0.0) {
            zi = (static_cast<double>(r.generation) - r.rho_mean) /
                 std::sqrt(r.rho_sum);
            z.push_back(zi);
            a_centered.push_back(ai);
            z_theorem.push_back((static_cast<double>(r.generation) - blogm) /
                                std::sqrt(blogm));
        } else {
            ++excluded;
        }
        csv_row(raw, {"0", fmt_int(i), fmt_int(r.generation),
                      fmt_real(r.split_time), fmt_real(r.rho_mean),
                      fmt_real(r.rho_sum), fmt_int(r.attempts), fmt_real(zi),
                      fmt_real(ai)});
    }
    for (std::size_t i = 0; i < ref.size(); ++i)
        csv_row(raw, {"2", fmt_int(static_cast<std::int64_t>(i)), "-1",
                      fmt_real(kNaN), fmt_real(kNaN), fmt_real(kNaN), "-1",
                      fmt_real(kNaN), fmt_real(ref[i])});

    // Equal-size standard-normal sample for the transport-distance surrogate.
    std::vector<double> normal_ref(z.size());
    {
        auto stream = lane_stream(cfg.master_seed, kLaneNormalRef, 0);
        for (auto& x : normal_ref) x = stream.normal();
        for (std::size_t i = 0; i < normal_ref.size(); ++i)
            csv_row(raw, {"3", fmt_int(static_cast<std::int64_t>(i)), "-1",
                          fmt_real(kNaN), fmt_real(kNaN), fmt_real(kNaN), "-1",
                          fmt_real(normal_ref[i]), fmt_real(kNaN)});
    }

    double g_ks = kNaN, a_ks = kNaN, corr = kNaN, w1 = kNaN, w1_bound = kNaN;
    double mean_rho_sum = kNaN;
    if (!z.empty()) {
        g_ks = stats::ks_one_sample(z, [](double x) { return stats::normal_cdf(x); });
        a_ks = stats::ks_two_sample(a_centered, ref);
        corr = z.size() >= 2 ? stats::pearson_correlation(z, a_centered) : kNaN;
        w1 = stats::wasserstein1(z, normal_ref);
        std::vector<double> rs;
        for (const auto& r : slots)
            if (r.rho_sum > 0.0) rs.push_back(r.rho_sum);
        mean_rho_sum = stats::mean(rs);
        w1_bound = 3.0 / std::sqrt(mean_rho_sum) + 0.05;
    }

    CheckSet checks;
    checks.overrides = &cfg.threshold_overrides;
    if (z.empty()) {
        checks.skip("std_g_ks", "no usable replications");
        checks.skip("a_ks_two_sample", "no usable replications");
        checks.skip("corr_abs", "no usable replications");
        checks.skip("w1_std_g", "no usable replications");
    } else {
        checks.add("std_g_ks", g_ks, 0.05, "<=");
        checks.add("a_ks_two_sample", a_ks, 0.08, "<=");
        checks.add("corr_abs", std::abs(corr), 0.05, "<=");
        checks.add("w1_std_g", w1, w1_bound, "<=");
    }

    ordered_json summary;
    summary["reps"] = cfg.reps;
    summary["m"] = cfg.m;
    summary["excluded_reps"] = excluded;
    summary["mean_generation"] =
        json_num(z.empty() ? kNaN
                           : [&] {
                                 std::vector<double> g;
                                 for (const auto& r : slots)
                                     g.push_back(static_cast<double>(r.generation));
                                 return stats::mean(g);
                             }());
    summary["mean_split_time"] = json_num([&] {
        std::vector<double> t;
        for (const auto& r : slots) t.push_back(r.split_time);
        return t.empty() ? kNaN : stats::mean(t);
    }());
    summary["mean_rho_sum"] = json_num(mean_rho_sum);
    summary["std_g_ks"] = json_num(g_ks);
    summary["centered_a_mean"] =
        json_num(a_centered.empty() ? kNaN : stats::mean(a_centered));
    summary["a_ks_two_sample"] = json_num(a_ks);
    summary["correlation"] = json_num(corr);
    summary["w1_std_g"] = json_num(w1);
    summary["w1_bound"] = json_num(w1_bound);
    summary["theorem_std_mean"] =
        json_num(z_theorem.empty() ? kNaN : stats::mean(z_theorem));
    summary["theorem_std_var"] =
        json_num(z_theorem.size() >= 2 ? stats::variance(z_theorem) : kNaN);
    summary["reference_sample"] =
        ordered_json{{"draws", cfg.ref_draws},
                     {"m", cfg.ref_m},
                     {"mean", json_num(ref.empty() ? kNaN : stats::mean(ref))}};

    std::string plot = "series,x,y,reference\n";
    plot_hist_analytic(plot, "std_generation", z, 40, normal_pdf);
    plot_hist_two_sample(plot, "centered_time", a_centered, ref, 40);

    ordered_json reference;
    reference["constants"] = constants_json(consts);
    return finish(cfg, std::move(reference), std::move(summary), std::move(checks),
                  std::move(raw), std::move(plot));
}

}  // namespace

// ---------------------------------------------------------------------------
std::string kind_name(Kind kind) {
    for (const auto& [k, name] : kind_table())
        if (k == kind) return name;
    throw std::domain_error("unknown experiment kind");
}

Kind kind_from_name(const std::string& name) {
    for (const auto& [k, kname] : kind_table())
        if (name == kname) return k;
    throw std::domain_error("unknown experiment kind \"" + name + "\"");
}

std::vector<std::string> check_names(Kind kind) {
    switch (kind) {
        case Kind::hopcount_clt:
            return {"connected_pairs_found", "std_mean_abs", "std_var_band",
                    "ks_vs_normal"};
        case Kind::weight_limit:
            return {"connected_pairs_found", "drift_connected_pairs_found",
                    "ks_vs_limit", "mean_drift_abs"};
        case Kind::dense:
            return {"connected_pairs_found", "weight_ks_vs_limit",
                    "hop_ks_vs_normal"};
        case Kind::collision_time:
            return {"survivors_found", "survival_dev_abs",
                    "ks_scaled_vs_exponential", "mean_miss_vs_bound"};
        case Kind::thinning_equivalence:
            return {"weight_ks_two_sample", "hop_tv_full", "disconnect_gap"};
        case Kind::extrema:
            return {"median_weight_monotone", "weight_dominates_median"};
        case Kind::tree_clt:
            return {"std_g_ks", "a_ks_two_sample", "corr_abs", "w1_std_g"};
    }
    throw std::domain_error("unknown experiment kind");
}

ordered_json config_to_json(const ExperimentConfig& c) {
    const Resolved rv = resolve(c);
    ordered_json j;
    j["kind"] = kind_name(c.kind);
    j["n"] = c.n;
    j["lambda"] = c.lambda;
    j["reps"] = c.reps;
    j["master_seed"] = c.master_seed;
    j["cadence"] = c.cadence;
    j["m"] = c.m;
    j["ref_m"] = c.ref_m;
    j["ref_draws"] = c.ref_draws;
    j["drift_n"] = rv.drift_n;
    j["drift_reps"] = rv.drift_reps;
    j["n_ladder"] = rv.ladder;
    j["a_n_override"] = c.a_n_override;
    j["pair_probe"] = c.pair_probe;
    ordered_json ov = ordered_json::object();
    for (const auto& [name, value] : c.threshold_overrides) ov[name] = value;
    j["threshold_overrides"] = std::move(ov);
    return j;
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ull;
    }
    char buf[17];
    for (int i = 15; i >= 0; --i) {
        buf[i] = "0123456789abcdef"[h & 0xf];
        h >>= 4;
    }
    buf[16] = '\0';
    return std::string(buf, 16);
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
    validate(config);
    const Resolved rv = resolve(config);
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentReport rep;
    switch (config.kind) {
        case Kind::hopcount_clt:
            rep = run_hopcount_clt(config, rv);
            break;
        case Kind::weight_limit:
            rep = run_weight_limit(config, rv);
            break;
        case Kind::dense:
            rep = run_dense(config, rv);
            break;
        case Kind::collision_time:
            rep = run_collision_time(config, rv);
            break;
        case Kind::thinning_equivalence:
            rep = run_thinning_equivalence(config, rv);
            break;
        case Kind::extrema:
            rep = run_extrema(config, rv);
            break;
        case Kind::tree_clt:
            rep = run_tree_clt(config, rv);
            break;
    }
    const auto t1 = std::chrono::steady_clock::now();
    rep.wall_ms =
        std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(t1 -
                                                                               t0)
            .count();
    return rep;
}

void write_outputs(const ExperimentReport& report, const std::string& out_dir,
                   const std::string& config_path) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    auto write_file = [&](const char* name, const std::string& content) {
        const fs::path path = fs::path(out_dir) / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + path.string());
        out.write(content.data(),
                  static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("short write to " + path.string());
    };
    write_file("report.json", report.document.dump(2) + "\n");
    write_file("raw.csv", report.raw_csv);
    write_file("plot.csv", report.plot_csv);

    char stamp[32];
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);

    ordered_json manifest;
    manifest["tool_version"] = kToolVersion;
    manifest["kind"] = kind_name(report.config.kind);
    manifest["master_seed"] = report.config.master_seed;
    manifest["config_hash"] = report.document.at("config_hash");
    manifest["config_path"] = config_path;
    manifest["out_dir"] = out_dir;
    manifest["threads"] = std::max<std::int64_t>(1, report.config.threads);
    manifest["overall_pass"] = report.overall_pass;
    manifest["wall_ms"] = report.wall_ms;
    manifest["written_utc"] = stamp;
    manifest["files"] = ordered_json{
        {"report", "report.json"}, {"raw", "raw.csv"}, {"plot", "plot.csv"}};
    write_file("manifest.json", manifest.dump(2) + "\n");
}

}  // namespace fpplab::experiments
