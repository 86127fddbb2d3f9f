#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kirchhoff/config.hpp"
#include "kirchhoff/output.hpp"
#include "kirchhoff/runner.hpp"

using namespace kirchhoff;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fixture(const std::string& name) {
  return std::string(KIRCHHOFF_FIXTURES_DIR) + "/" + name;
}

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("kirchhoff_test_" + tag);
  fs::create_directories(dir);
  return dir;
}

std::string strip_timestamp(const std::string& verdict_json) {
  auto doc = nlohmann::json::parse(verdict_json);
  doc.erase("timestamp");
  return doc.dump(2);
}

const char* kMinimalConfig = R"({
  "nonlinearity": {"family": "affine_plus", "a": 1.0},
  "initial_data": {"epsilon": 0.5, "modes": [{"k": [1], "c": 1.0, "v": 0.0}]}
})";

}  // namespace

TEST_CASE("parse_config: minimal document gets documented defaults") {
  const RunConfig cfg = parse_config(kMinimalConfig);
  CHECK(cfg.nonlinearity.family == "affine_plus");
  CHECK(cfg.integrator.rel_tol == 1e-10);
  CHECK(cfg.integrator.abs_tol == 1e-12);
  CHECK(cfg.integrator.max_steps == 100'000'000);
  CHECK(cfg.integrator.method_order == 5);
  CHECK(cfg.experiment.t_end == 10.0);
  CHECK(cfg.experiment.kappa == 2.0);
  CHECK(cfg.experiment.cap_mult == 10.0);
  CHECK(cfg.seed == 0);
  CHECK(!cfg.experiment.kind.has_value());

  // Defaults echoed back for reproducibility.
  const auto echo = nlohmann::json::parse(resolved_config_json(cfg));
  CHECK(echo["integrator"]["rel_tol"] == 1e-10);
  CHECK(echo["experiment"]["t_end"] == 10.0);
}

TEST_CASE("parse_config: unknown keys are rejected with their path") {
  const char* bad = R"({
    "nonlinearity": {"famly": "pokhozhaev"},
    "initial_data": {"modes": [{"k": [1], "c": 1.0}]}
  })";
  try {
    parse_config(bad);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("famly") != std::string::npos);
  }

  const char* bad_top = R"({
    "nonlinearity": {"family": "constant"},
    "initial_data": {"modes": [{"k": [1], "c": 1.0}]},
    "xyzzy": 1
  })";
  CHECK_THROWS_AS(parse_config(bad_top), ConfigError);
}

TEST_CASE("parse_config: pokhozhaev C1 = C2 = 0 is rejected") {
  const char* bad = R"({
    "nonlinearity": {"family": "pokhozhaev", "C1": 0.0, "C2": 0.0},
    "initial_data": {"modes": [{"k": [1], "c": 1.0}]}
  })";
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
}

TEST_CASE("parse_config: structural validation") {
  CHECK_THROWS_AS(parse_config("not json"), ConfigError);
  CHECK_THROWS_AS(parse_config("[]"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"initial_data": {}})"), ConfigError);
  // both modes and random
  const char* both = R"({
    "nonlinearity": {"family": "constant"},
    "initial_data": {"modes": [{"k": [1], "c": 1}], "random": {"cutoff": 4}}
  })";
  CHECK_THROWS_AS(parse_config(both), ConfigError);
  // eps_list must decrease
  const char* eps = R"({
    "nonlinearity": {"family": "constant"},
    "initial_data": {"modes": [{"k": [1], "c": 1}]},
    "experiment": {"eps_list": [0.3, 0.4]}
  })";
  CHECK_THROWS_AS(parse_config(eps), ConfigError);
  // dim mismatch in explicit mode
  const char* dim = R"({
    "nonlinearity": {"family": "constant"},
    "initial_data": {"dim": 2, "modes": [{"k": [1], "c": 1}]}
  })";
  CHECK_THROWS_AS(parse_config(dim), ConfigError);
}

TEST_CASE("parse_config: seed feeds the random profile") {
  const char* doc = R"({
    "nonlinearity": {"family": "constant"},
    "initial_data": {"epsilon": 0.1, "random": {"cutoff": 8, "decay": 2.0}},
    "seed": 42
  })";
  const RunConfig cfg = parse_config(doc);
  REQUIRE(cfg.initial_data.random.has_value());
  CHECK(cfg.initial_data.random->seed == 42);
  CHECK(cfg.initial_data.random->cutoff == 8);
}

TEST_CASE("trajectory csv: header-only, single row, I column policy") {
  Trajectory empty;
  CHECK(trajectory_csv(empty) ==
        "t,s,s_prime,s_second,E,F,I,H1,S,V,residual\n");

  Trajectory one;
  FunctionalSample smp;
  smp.t = 0.0;
  smp.s = 1.0;
  smp.F = 2.0;
  one.samples.push_back(smp);
  const std::string csv = trajectory_csv(one);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
  CHECK(csv.find(",,") != std::string::npos);  // empty I column

  smp.I = 3.25;
  one.samples[0] = smp;
  CHECK(trajectory_csv(one).find("3.25") != std::string::npos);
}

TEST_CASE("format_double round trip") {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, 12345.6789, -0.0}) {
    CHECK(std::stod(format_double(x)) == x);
  }
}

TEST_CASE("execute: golden csv byte comparison") {
  RunConfig cfg = load_config_file(fixture("golden_run.json"));
  const auto dir = temp_dir("golden");
  cfg.output.csv_path = (dir / "trajectory.csv").string();
  cfg.output.verdict_path.clear();
  execute(cfg, ExperimentKind::simulate);
  CHECK(slurp(dir / "trajectory.csv") == slurp(fixture("golden_run.csv")));
}

TEST_CASE("execute: determinism modulo timestamp") {
  RunConfig cfg = load_config_file(fixture("golden_run.json"));
  const auto dir = temp_dir("determinism");
  cfg.output.csv_path = (dir / "run.csv").string();
  const auto first = execute(cfg, ExperimentKind::simulate);
  const std::string csv_first = slurp(dir / "run.csv");
  const auto second = execute(cfg, ExperimentKind::simulate);
  CHECK(csv_first == slurp(dir / "run.csv"));
  CHECK(strip_timestamp(first.verdict) == strip_timestamp(second.verdict));
}

TEST_CASE("execute: verify verdict shape and exit codes") {
  RunConfig cfg = load_config_file(fixture("pokhozhaev_seed42.json"));
  cfg.experiment.t_end = 5.0;  // short for a unit test
  const auto res = execute(cfg, ExperimentKind::pokhozhaev);
  CHECK(res.exit_code == 0);
  const auto doc = nlohmann::json::parse(res.verdict);
  CHECK(doc["experiment"] == "pokhozhaev");
  CHECK(doc["verdict"] == "pass");
  CHECK(doc["metrics"]["quantity"] == "I");
  CHECK(doc["tolerances"].contains("tolerance"));
  CHECK(doc["params"]["seed"] == 42);
  CHECK(doc.contains("max_drift"));
  CHECK(doc.contains("timestamp"));
}

TEST_CASE("execute: hypothesis-not-met exit code") {
  // Zero-crossing verification on data whose s' never crosses zero within the
  // horizon: single mode with c = 0 keeps s identically ~ v^2 sin^2 ... use a
  // state with s'(t) of one sign over a tiny horizon instead.
  RunConfig cfg = parse_config(R"({
    "nonlinearity": {"family": "affine_plus", "a": 1.0},
    "initial_data": {"epsilon": 1.0, "modes": [{"k": [1], "c": 1.0, "v": 1.0}]},
    "experiment": {"t_end": 0.05}
  })");
  const auto res = execute(cfg, ExperimentKind::zero_crossing);
  CHECK(res.exit_code == 2);
  const auto doc = nlohmann::json::parse(res.verdict);
  CHECK(doc["verdict"] == "hypothesis_not_met");
}

TEST_CASE("execute: sweep verdict includes records and warnings fields") {
  RunConfig cfg = parse_config(R"({
    "nonlinearity": {"family": "affine_plus", "a": 1.0},
    "initial_data": {"epsilon": 1.0, "modes": [{"k": [1], "c": 1.0, "v": 0.5}]},
    "experiment": {"eps_list": [0.5, 0.4], "kappa": 2.0, "cap_mult": 0.05}
  })");
  const auto res = execute(cfg, ExperimentKind::sweep);
  const auto doc = nlohmann::json::parse(res.verdict);
  CHECK(doc["metrics"]["records"].size() == 2);
  CHECK(doc["metrics"].contains("exponent"));
  CHECK(doc.contains("warnings"));
}

TEST_CASE("execute: check-derivs runs the gate for the configured family") {
  RunConfig cfg = parse_config(R"({
    "nonlinearity": {"family": "pokhozhaev", "C1": 1.0, "C2": 2.0},
    "initial_data": {"epsilon": 1.0, "modes": [{"k": [1], "c": 1.0}]},
    "experiment": {"grid": {"lo": 0.1, "hi": 2.0, "step": 0.1}, "fd_h": 1e-5}
  })");
  const auto res = execute(cfg, ExperimentKind::check_derivs);
  CHECK(res.exit_code == 0);
  const auto doc = nlohmann::json::parse(res.verdict);
  CHECK(doc["max_drift"].get<double>() <= 1e-6);
  CHECK(doc["metrics"].contains("max_rel_err_g2"));
}
