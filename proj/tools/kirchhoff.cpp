#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "kirchhoff/config.hpp"
#include "kirchhoff/errors.hpp"
#include "kirchhoff/runner.hpp"

namespace {

constexpr int kExitUsage = 64;
constexpr int kExitConfig = 65;

int run(kirchhoff::ExperimentKind kind, const std::string& config_path,
        const std::string& out_dir, const std::optional<std::string>& verify_kind) {
  using namespace kirchhoff;
  RunConfig cfg = load_config_file(config_path);
  std::optional<ExperimentKind> selected = kind;
  if (verify_kind) {
    const auto k = experiment_kind_from(*verify_kind);
    if (!k || *k == ExperimentKind::simulate || *k == ExperimentKind::sweep ||
        *k == ExperimentKind::check_derivs)
      throw ConfigError("--kind",
                        "expected one of first-order|pokhozhaev|identity|"
                        "zero-crossing|gronwall");
    selected = k;
  }
  const ExecutionResult result = execute(cfg, selected, out_dir);
  std::cout << result.verdict;
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral Galerkin simulator and verification harness for the "
               "Kirchhoff equation"};
  app.require_subcommand(1);

  std::string config_path, out_dir, verify_kind;

  auto* simulate = app.add_subcommand("simulate", "Run one trajectory");
  simulate->add_option("--config", config_path, "JSON config file")->required();
  simulate->add_option("--out", out_dir, "Output directory");

  auto* verify = app.add_subcommand("verify", "Run a named verification");
  verify->add_option("--config", config_path, "JSON config file")->required();
  verify
      ->add_option("--kind", verify_kind,
                   "first-order|pokhozhaev|identity|zero-crossing|gronwall")
      ->required();
  verify->add_option("--out", out_dir, "Output directory");

  auto* sweep = app.add_subcommand("sweep", "Run the lifespan epsilon sweep");
  sweep->add_option("--config", config_path, "JSON config file")->required();
  sweep->add_option("--out", out_dir, "Output directory");

  auto* derivs = app.add_subcommand("check-derivs", "Run the derivative gate");
  derivs->add_option("--config", config_path, "JSON config file")->required();
  derivs->add_option("--out", out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  using kirchhoff::ExperimentKind;
  ExperimentKind kind = ExperimentKind::simulate;
  std::optional<std::string> kind_flag;
  if (verify->parsed()) {
    kind = ExperimentKind::first_order;  // replaced by --kind below
    kind_flag = verify_kind;
  } else if (sweep->parsed()) {
    kind = ExperimentKind::sweep;
  } else if (derivs->parsed()) {
    kind = ExperimentKind::check_derivs;
  }

  try {
    return run(kind, config_path, out_dir, kind_flag);
  } catch (const kirchhoff::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const kirchhoff::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
