#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace fpplab::experiments {

// Experiment families the runner knows how to execute.
enum class Kind {
    hopcount_clt,
    weight_limit,
    dense,
    collision_time,
    thinning_equivalence,
    extrema,
    tree_clt,
};

std::string kind_name(Kind kind);
Kind kind_from_name(const std::string& name);  // throws std::domain_error on unknown names

struct ExperimentConfig {
    Kind kind = Kind::hopcount_clt;
    std::int64_t n = 1000;          // graph size (dense: size paired with lambda as lambda_n)
    double lambda = 2.0;            // mean degree; must exceed 1
    std::int64_t reps = 100;        // sampling attempts (pairs / runs / reps per ladder size)
    std::uint64_t master_seed = 1;  // root of every stream the run consumes
    std::int64_t threads = 1;       // worker count; execution detail, excluded from echo/hash
    std::int64_t cadence = 10;      // pairs drawn per freshly generated graph
    std::int64_t m = 10000;         // walk length for tree_clt
    std::int64_t ref_m = 3000;      // depth of the reference limit samplers
    std::int64_t ref_draws = 100000;  // reference sample size
    std::int64_t drift_n = 0;       // weight_limit companion size (0 -> max(2, n/10))
    std::int64_t drift_reps = 0;    // attempts at drift_n (0 -> reps)
    std::vector<std::int64_t> n_ladder;  // extrema sizes, strictly increasing (empty -> {n})
    std::int64_t a_n_override = 0;  // collision_time first-tree size (0 -> ceil(sqrt(n)))
    std::int64_t pair_probe = 30;   // extrema per-instance pair sample for the median probe
    std::map<std::string, double> threshold_overrides;  // check name -> replacement threshold
};

struct CheckResult {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    std::string op;      // "<=" or ">="
    bool pass = false;
    bool skipped = false;
    std::string reason;  // populated when skipped
};

struct ExperimentReport {
    ExperimentConfig config;
    nlohmann::ordered_json document;  // exact content of report.json
    std::string raw_csv;              // exact content of raw.csv
    std::string plot_csv;             // exact content of plot.csv
    std::vector<CheckResult> checks;
    bool overall_pass = false;
    double wall_ms = 0.0;  // measured wall clock; recorded in manifest.json only
};

extern const char* const kToolVersion;

// Valid check names for a kind; threshold overrides must use these.
std::vector<std::string> check_names(Kind kind);

// Echo form of a config (resolved defaults, no thread count) used for the
// report document and the config hash.
nlohmann::ordered_json config_to_json(const ExperimentConfig& config);

// FNV-1a 64-bit hash, hex encoded.
std::string fnv1a_hex(const std::string& bytes);

// Runs one experiment. A pure function of the config: identical configs give
// byte-identical document/raw_csv/plot_csv regardless of the thread count.
// Throws std::domain_error on invalid configs.
ExperimentReport run_experiment(const ExperimentConfig& config);

// Writes report.json, raw.csv, plot.csv and manifest.json into out_dir
// (created if missing). Only manifest.json may differ between reruns of the
// same config (timestamps, wall clock, thread count).
void write_outputs(const ExperimentReport& report, const std::string& out_dir,
                   const std::string& config_path = "");

}  // namespace fpplab::experiments
