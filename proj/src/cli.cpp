#include "fpplab/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <set>
#include <stdexcept>

#include "CLI11.hpp"
#include "fpplab/theory.hpp"

namespace fpplab::cli {

using experiments::ExperimentConfig;
using experiments::Kind;
using nlohmann::json;

namespace {

std::string fixed12(double x) {
    char buf[64];
    auto res =
        std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::fixed, 12);
    return std::string(buf, res.ptr);
}

std::string shortnum(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

// Subcommand names use dashes; experiment kinds use underscores.
std::string cli_name(Kind kind) {
    std::string s = experiments::kind_name(kind);
    for (auto& c : s)
        if (c == '_') c = '-';
    return s;
}

[[noreturn]] void config_error(const std::string& message) {
    throw std::domain_error("config: " + message);
}

std::int64_t want_integer(const json& doc, const std::string& key) {
    const auto& v = doc.at(key);
    if (!v.is_number_integer() && !v.is_number_unsigned())
        config_error("key \"" + key + "\" must be an integer");
    return v.get<std::int64_t>();
}

double want_number(const json& doc, const std::string& key) {
    const auto& v = doc.at(key);
    if (!v.is_number()) config_error("key \"" + key + "\" must be a number");
    return v.get<double>();
}

int run_theory(double lambda, bool as_json, std::ostream& out) {
    const auto k = theory::constants(lambda);
    if (as_json) {
        nlohmann::ordered_json j;
        j["beta"] = k.beta;
        j["gamma"] = k.gamma;
        j["p_lambda"] = k.p_lambda;
        j["mu_lambda"] = k.mu_lambda;
        j["theta_star"] = k.theta_star;
        j["c_lambda"] = k.c_lambda;
        j["d_lambda"] = k.d_lambda;
        out << j.dump(2) << "\n";
    } else {
        out << "beta        " << fixed12(k.beta) << "\n"
            << "gamma       " << fixed12(k.gamma) << "\n"
            << "p_lambda    " << fixed12(k.p_lambda) << "\n"
            << "mu_lambda   " << fixed12(k.mu_lambda) << "\n"
            << "theta_star  " << fixed12(k.theta_star) << "\n"
            << "c_lambda    " << fixed12(k.c_lambda) << "\n"
            << "d_lambda    " << fixed12(k.d_lambda) << "\n";
    }
    return 0;
}

}  // namespace

ExperimentConfig parse_config(const json& doc, bool* kind_present) {
    if (kind_present) *kind_present = false;
    if (!doc.is_object()) config_error("document must be a JSON object");

    static const std::set<std::string> known = {
        "schema_version", "kind",       "n",          "lambda",
        "reps",           "master_seed", "cadence",    "m",
        "ref_m",          "ref_draws",  "drift_n",    "drift_reps",
        "n_ladder",       "a_n_override", "pair_probe", "thresholds"};
    for (const auto& item : doc.items())
        if (known.find(item.key()) == known.end())
            config_error("unknown key \"" + item.key() + "\"");

    if (!doc.contains("schema_version"))
        config_error("missing required key \"schema_version\"");
    if (want_integer(doc, "schema_version") != 1)
        config_error("unsupported schema_version (expected 1)");

    ExperimentConfig cfg;
    if (doc.contains("kind")) {
        const auto& v = doc.at("kind");
        if (!v.is_string()) config_error("key \"kind\" must be a string");
        cfg.kind = experiments::kind_from_name(v.get<std::string>());
        if (kind_present) *kind_present = true;
    }
    if (doc.contains("n")) cfg.n = want_integer(doc, "n");
    if (doc.contains("lambda")) cfg.lambda = want_number(doc, "lambda");
    if (doc.contains("reps")) cfg.reps = want_integer(doc, "reps");
    if (doc.contains("master_seed")) {
        const auto& v = doc.at("master_seed");
        if (v.is_number_unsigned()) {
            cfg.master_seed = v.get<std::uint64_t>();
        } else if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
            cfg.master_seed = static_cast<std::uint64_t>(v.get<std::int64_t>());
        } else {
            config_error("key \"master_seed\" must be a non-negative integer");
        }
    }
    if (doc.contains("cadence")) cfg.cadence = want_integer(doc, "cadence");
    if (doc.contains("m")) cfg.m = want_integer(doc, "m");
    if (doc.contains("ref_m")) cfg.ref_m = want_integer(doc, "ref_m");
    if (doc.contains("ref_draws")) cfg.ref_draws = want_integer(doc, "ref_draws");
    if (doc.contains("drift_n")) cfg.drift_n = want_integer(doc, "drift_n");
    if (doc.contains("drift_reps"))
        cfg.drift_reps = want_integer(doc, "drift_reps");
    if (doc.contains("a_n_override"))
        cfg.a_n_override = want_integer(doc, "a_n_override");
    if (doc.contains("pair_probe"))
        cfg.pair_probe = want_integer(doc, "pair_probe");
    if (doc.contains("n_ladder")) {
        const auto& v = doc.at("n_ladder");
        if (!v.is_array()) config_error("key \"n_ladder\" must be an array");
        for (const auto& e : v) {
            if (!e.is_number_integer() && !e.is_number_unsigned())
                config_error("key \"n_ladder\" must hold integers");
            cfg.n_ladder.push_back(e.get<std::int64_t>());
        }
    }
    if (doc.contains("thresholds")) {
        const auto& v = doc.at("thresholds");
        if (!v.is_object())
            config_error("key \"thresholds\" must be an object of check names");
        for (const auto& item : v.items()) {
            if (!item.value().is_number())
                config_error("threshold \"" + item.key() + "\" must be a number");
            cfg.threshold_overrides[item.key()] = item.value().get<double>();
        }
    }
    return cfg;
}

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
    CLI::App app{"first-passage percolation laboratory"};
    app.require_subcommand(1);

    double theory_lambda = 0.0;
    bool theory_json = false;
    auto* theory_cmd =
        app.add_subcommand("theory", "print the limit constants for one lambda");
    theory_cmd->add_option("--lambda", theory_lambda, "mean degree (> 1)")
        ->required();
    theory_cmd->add_flag("--json", theory_json, "emit a JSON object");

    struct ExpOpts {
        std::string config_path;
        std::string out_dir;
        std::uint64_t seed = 0;
        std::int64_t reps = 0;
        std::int64_t n = 0;
        std::int64_t threads = 0;
        double lambda = 0.0;
        bool json = false;
    } opts;

    const Kind kinds[] = {Kind::hopcount_clt,   Kind::weight_limit,
                          Kind::dense,          Kind::collision_time,
                          Kind::thinning_equivalence, Kind::extrema,
                          Kind::tree_clt};
    std::vector<std::pair<CLI::App*, Kind>> subs;
    for (const Kind kind : kinds) {
        auto* cmd = app.add_subcommand(
            cli_name(kind), "run the " + experiments::kind_name(kind) +
                                " experiment and write its report");
        cmd->add_option("--config", opts.config_path,
                        "JSON config file (flags override it)");
        cmd->add_option("--seed", opts.seed, "master seed");
        cmd->add_option("--reps", opts.reps, "sampling attempts");
        cmd->add_option("--n", opts.n, "graph size");
        cmd->add_option("--lambda", opts.lambda, "mean degree (> 1)");
        cmd->add_option("--out", opts.out_dir, "output directory");
        cmd->add_option("--threads", opts.threads, "worker threads");
        cmd->add_flag("--json", opts.json, "print the full report to stdout");
        subs.emplace_back(cmd, kind);
    }

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("fpplab");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (theory_cmd->parsed()) return run_theory(theory_lambda, theory_json, out);

        CLI::App* active = nullptr;
        Kind kind = Kind::hopcount_clt;
        for (const auto& [cmd, k] : subs) {
            if (cmd->parsed()) {
                active = cmd;
                kind = k;
            }
        }
        if (!active) {
            err << "error: no subcommand selected\n";
            return 1;
        }

        ExperimentConfig cfg;
        if (active->count("--config") > 0) {
            std::ifstream in(opts.config_path);
            if (!in) {
                err << "error: cannot read config file " << opts.config_path
                    << "\n";
                return 1;
            }
            json doc;
            try {
                doc = json::parse(in);
            } catch (const json::parse_error& e) {
                err << "error: config is not valid JSON: " << e.what() << "\n";
                return 1;
            }
            bool kind_present = false;
            cfg = parse_config(doc, &kind_present);
            if (kind_present && cfg.kind != kind) {
                err << "error: config kind \"" << experiments::kind_name(cfg.kind)
                    << "\" does not match subcommand \""
                    << experiments::kind_name(kind) << "\"\n";
                return 1;
            }
        }
        cfg.kind = kind;
        if (active->count("--seed") > 0) cfg.master_seed = opts.seed;
        if (active->count("--reps") > 0) cfg.reps = opts.reps;
        if (active->count("--n") > 0) cfg.n = opts.n;
        if (active->count("--lambda") > 0) cfg.lambda = opts.lambda;
        if (active->count("--threads") > 0) cfg.threads = opts.threads;

        std::string out_dir;
        if (active->count("--out") > 0) {
            out_dir = opts.out_dir;
        } else {
            const char* root = std::getenv("FPPLAB_OUT");
            out_dir = std::string(root ? root : "out") + "/" +
                      experiments::kind_name(kind);
        }

        const auto report = experiments::run_experiment(cfg);
        experiments::write_outputs(report, out_dir, opts.config_path);

        if (opts.json) {
            out << report.document.dump(2) << "\n";
        } else {
            out << "kind: " << experiments::kind_name(kind) << "\n";
            out << "out:  " << out_dir << "\n";
            for (const auto& c : report.checks) {
                if (c.skipped) {
                    out << "[skip] " << c.name << " (" << c.reason << ")\n";
                } else {
                    out << (c.pass ? "[pass] " : "[FAIL] ") << c.name
                        << " value=" << shortnum(c.value) << " " << c.op << " "
                        << shortnum(c.threshold) << "\n";
                }
            }
            out << "overall: " << (report.overall_pass ? "PASS" : "FAIL") << "\n";
        }
        return report.overall_pass ? 0 : 2;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace fpplab::cli
