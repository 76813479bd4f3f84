#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fpplab/experiments.hpp"

namespace fpplab::cli {

// Parses a JSON config document into an experiment config. Strict: every key
// must be known (unknown keys are rejected by name), schema_version must be
// present and equal to 1, and values must have the right types. If the
// document carries a "kind" key, *kind_present is set (when non-null) so the
// caller can cross-check it against the chosen subcommand.
experiments::ExperimentConfig parse_config(const nlohmann::json& doc,
                                           bool* kind_present = nullptr);

// Command-line entry point. args excludes the program name. Writes regular
// output to `out` and diagnostics to `err`. Returns 0 on success, 2 when the
// run completed but a statistical check failed, 1 on any error.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace fpplab::cli
