#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kirchhoff/integrator.hpp"
#include "kirchhoff/nonlinearity.hpp"
#include "kirchhoff/spectral.hpp"

namespace kirchhoff {

enum class ExperimentKind {
  simulate,
  first_order,
  pokhozhaev,
  identity,
  zero_crossing,
  gronwall,
  sweep,
  check_derivs,
};

std::string to_string(ExperimentKind kind);
std::optional<ExperimentKind> experiment_kind_from(std::string_view name);

/// Default pass tolerance of each verification kind. Echoed verbatim into
/// every verdict; there are no hidden thresholds.
double default_tolerance(ExperimentKind kind);

struct NonlinearityConfig {
  std::string family = "constant";
  double C1 = 1.0, C2 = 1.0;  // pokhozhaev
  double a = 1.0;             // affine_plus
  double alpha = 1.0;         // power_alpha
  double m0 = 1.0;            // constant
};

struct ExperimentConfig {
  std::optional<ExperimentKind> kind;
  double t_end = 10.0;
  std::optional<double> tolerance;  // default depends on kind
  std::vector<double> eps_list;     // sweep
  double kappa = 2.0;               // sweep threshold factor
  double cap_mult = 10.0;           // sweep cap multiplier
  double eps0 = 0.0;                // envelope scale; 0: largest of eps_list
  // check-derivs gate
  double grid_lo = 0.1, grid_hi = 2.0, grid_step = 0.1;
  double fd_h = 1e-5;
};

struct OutputConfig {
  std::string csv_path;      // empty: no CSV written
  std::string verdict_path;  // empty: stdout only
};

struct RunConfig {
  NonlinearityConfig nonlinearity;
  InitialDataSpec initial_data;
  IntegratorConfig integrator;
  ExperimentConfig experiment;
  OutputConfig output;
  std::uint64_t seed = 0;
};

/// Parses and fully validates a JSON config document. Strict: unknown keys
/// are rejected with their path; the top-level seed feeds the random initial
/// data profile. Throws ConfigError.
RunConfig parse_config(std::string_view json_text);

RunConfig load_config_file(const std::string& path);

/// Builds the Nonlinearity named by the config (throws ConfigError on bad
/// parameters, e.g. pokhozhaev with C1 = C2 = 0).
Nonlinearity make_nonlinearity(const NonlinearityConfig& cfg);

/// The config with every default filled in, as a deterministic JSON document;
/// embedded in verdicts so a run can be reproduced from its output alone.
std::string resolved_config_json(const RunConfig& cfg);

}  // namespace kirchhoff
