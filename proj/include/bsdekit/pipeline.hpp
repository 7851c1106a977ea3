#pragma once

#include "bsdekit/config.hpp"
#include "bsdekit/control.hpp"

namespace bsdekit {

// Experiment pipelines. Each one validates the configured model, runs its
// solver, writes outputs (resolved_config.json plus command-specific CSV/JSON
// per cfg.formats) under cfg.out_dir, and returns the report it wrote.
// Failures propagate as ConfigError / NumericError.
JsonValue run_solve(const RunConfig& cfg, bool quiet = false);
JsonValue run_singular(const RunConfig& cfg, bool quiet = false);
JsonValue run_liquidate(const RunConfig& cfg, bool quiet = false);
JsonValue run_rbsde(const RunConfig& cfg, bool quiet = false);
JsonValue run_mollify_demo(const RunConfig& cfg, bool quiet = false);
JsonValue run_oracle(const RunConfig& cfg, bool quiet = false);

// Shared helpers (also used by tests).
void validate_or_throw(const Model& model, const TimeGrid& tg,
                       const StateGrid& sg);
std::string join_path(const std::string& dir, const std::string& file);

} // namespace bsdekit
