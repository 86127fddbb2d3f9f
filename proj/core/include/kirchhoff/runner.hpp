#pragma once

#include <optional>
#include <string>

#include "kirchhoff/config.hpp"

namespace kirchhoff {

/// Exit-code contract shared with the CLI:
///   0 pass, 1 check failed, 2 paper hypothesis not met with this config,
///   64 usage error, 65 config error.
struct ExecutionResult {
  int exit_code = 0;
  std::string verdict;  // verdict JSON document (also written to disk if asked)
};

/// Runs the experiment selected by `kind` (overriding config.experiment.kind
/// when set), writes CSV/verdict files per config.output, and returns the
/// verdict JSON. Deterministic for a fixed config and seed, except for the
/// "timestamp" field of the verdict.
ExecutionResult execute(const RunConfig& config,
                        std::optional<ExperimentKind> kind = std::nullopt,
                        const std::string& out_dir = "");

}  // namespace kirchhoff
