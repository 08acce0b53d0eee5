// SPDX-License-Identifier: Apache-2.0
#pragma once

// Config-driven runs behind the command-line subcommands. Each run validates
// its whole config (unknown keys rejected) before computing anything and
// echoes the resolved config, defaults filled in, inside its JSON summary so
// the summary's "config" block can be fed back in to repeat the run.
//
// Thread count is a run option, never part of a config: it cannot change the
// output.

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace wishart {

struct RunOutput {
  nlohmann::json summary;
  std::string csv;  ///< empty for runs without tabular output
};

/// {"profile": <profile spec>}
RunOutput run_profile(const nlohmann::json& config);
/// {"id": bound id, "profile": spec | "summary": {...}, ...id-specific knobs}
RunOutput run_bound(const nlohmann::json& config);
/// {"profile", "model", "reps", "seed", "tol", "quantiles", "tail": {"x": [...], "C": c}}
RunOutput run_simulate(const nlohmann::json& config, unsigned threads);
/// {"check": "comparison"|"contraction"|"deletion"|"paired", "profile", "q", "x": [5 ints]}
RunOutput run_oracle(const nlohmann::json& config);
/// {"family", "grid": [[p1, p2], ...] | {"random": {"count", "p_min", "p_max"}},
///  "sigma_range": [lo, hi], "model", "reps", "seed", "bound", "eps1", "eps2", "tol"}
RunOutput run_sweep(const nlohmann::json& config, unsigned threads);
/// {"n", "p", "sigmas": s | [...], "lambdas": [...], "lambda_unit": "absolute"|"threshold",
///  "direction": [...], "reps", "seed"}
RunOutput run_cluster(const nlohmann::json& config, unsigned threads);

/// Dispatches on the subcommand name.
RunOutput run_subcommand(std::string_view name, const nlohmann::json& config, unsigned threads);

/// Formula constants for audit (C1, C2 definitions and sample values, envelope C).
std::string constants_table();

inline constexpr const char* kLibraryVersion = "1.0.0";

}  // namespace wishart
