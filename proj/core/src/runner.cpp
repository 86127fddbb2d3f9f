#include "kirchhoff/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "kirchhoff/experiments.hpp"
#include "kirchhoff/output.hpp"

namespace kirchhoff {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

const char* status_name(TrajectoryStatus st) {
  switch (st) {
    case TrajectoryStatus::reached_t_end: return "reached_t_end";
    case TrajectoryStatus::event_stop: return "event_stop";
    case TrajectoryStatus::step_failure: return "step_failure";
    case TrajectoryStatus::domain_exit: return "domain_exit";
  }
  return "?";
}

struct VerdictDoc {
  std::string verdict = "pass";  // pass | fail | hypothesis_not_met
  double max_drift = 0;
  ordered_json metrics = ordered_json::object();
  ordered_json tolerances = ordered_json::object();
  std::vector<std::string> warnings;
};

int exit_code_of(const std::string& verdict) {
  if (verdict == "pass") return 0;
  if (verdict == "hypothesis_not_met") return 2;
  return 1;
}

void stderr_progress(std::int64_t steps, double t) {
  std::fprintf(stderr, "[kirchhoff] %lld accepted steps, t = %.6g\n",
               static_cast<long long>(steps), t);
}

std::vector<double> build_grid(const ExperimentConfig& exp) {
  std::vector<double> grid;
  for (double s = exp.grid_lo; s <= exp.grid_hi + 0.5 * exp.grid_step;
       s += exp.grid_step)
    grid.push_back(s);
  return grid;
}

}  // namespace

ExecutionResult execute(const RunConfig& config,
                        std::optional<ExperimentKind> kind_override,
                        const std::string& out_dir) {
  const ExperimentKind kind = kind_override
                                  ? *kind_override
                                  : config.experiment.kind.value_or(
                                        ExperimentKind::simulate);
  const double tolerance =
      config.experiment.tolerance.value_or(default_tolerance(kind));
  const Nonlinearity nl = make_nonlinearity(config.nonlinearity);

  std::string csv_path = config.output.csv_path;
  std::string verdict_path = config.output.verdict_path;
  if (!out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + out_dir + "'");
    csv_path = out_dir + (kind == ExperimentKind::sweep ? "/sweep.csv"
                                                        : "/trajectory.csv");
    verdict_path = out_dir + "/verdict.json";
  }

  ExperimentSetup setup;
  setup.nl = nl;
  setup.data = config.initial_data;
  setup.integrator = config.integrator;
  setup.t_end = config.experiment.t_end;
  setup.tolerance = tolerance;
  if (!setup.integrator.progress) setup.integrator.progress = stderr_progress;

  VerdictDoc doc;
  doc.tolerances["tolerance"] = tolerance;
  std::string csv;

  switch (kind) {
    case ExperimentKind::simulate: {
      const SpectralState st0 = make_initial_state(setup.data);
      const Trajectory traj =
          integrate(st0, nl, setup.t_end, setup.integrator);
      doc.verdict =
          traj.status == TrajectoryStatus::step_failure ? "fail" : "pass";
      if (traj.status == TrajectoryStatus::domain_exit)
        doc.warnings.push_back("trajectory left the admissible interval J");
      doc.metrics["status"] = status_name(traj.status);
      doc.metrics["steps_accepted"] = traj.steps_accepted;
      doc.metrics["steps_rejected"] = traj.steps_rejected;
      doc.metrics["t_final"] = traj.final_state.t;
      doc.metrics["samples"] = traj.samples.size();
      csv = trajectory_csv(traj);
      break;
    }

    case ExperimentKind::first_order:
    case ExperimentKind::pokhozhaev: {
      if (kind == ExperimentKind::pokhozhaev &&
          nl.family() != Family::pokhozhaev)
        throw ConfigError("nonlinearity.family",
                          "the pokhozhaev check needs the pokhozhaev family");
      const auto rep = run_conservation_check(
          kind == ExperimentKind::pokhozhaev ? ConservationKind::pokhozhaev
                                             : ConservationKind::first_order,
          setup);
      doc.verdict = rep.pass ? "pass" : "fail";
      doc.max_drift = rep.max_rel_drift;
      doc.metrics["quantity"] = rep.quantity;
      doc.metrics["baseline"] = rep.baseline;
      doc.metrics["status"] = status_name(rep.status);
      if (rep.partial)
        doc.warnings.push_back("partial data: integration ended early");
      csv = trajectory_csv(rep.trajectory);
      break;
    }

    case ExperimentKind::identity: {
      const auto rep = run_identity_check(setup);
      doc.verdict = rep.pass ? "pass" : "fail";
      doc.max_drift = rep.max_abs_residual;
      doc.metrics["F0"] = rep.F0;
      doc.metrics["threshold"] = rep.threshold;
      doc.metrics["status"] = status_name(rep.status);
      if (rep.partial)
        doc.warnings.push_back("partial data: integration ended early");
      csv = trajectory_csv(rep.trajectory);
      break;
    }

    case ExperimentKind::zero_crossing:
    case ExperimentKind::gronwall: {
      const auto rep = run_zero_crossing_check(setup);
      doc.max_drift = kind == ExperimentKind::zero_crossing
                          ? rep.max_crossing_err
                          : rep.max_gronwall_excess;
      doc.metrics["n_events"] = rep.n_events;
      doc.metrics["max_crossing_err"] = rep.max_crossing_err;
      doc.metrics["groenwall_c"] = rep.groenwall_c;
      doc.metrics["max_gronwall_excess"] = rep.max_gronwall_excess;
      doc.metrics["status"] = status_name(rep.status);
      if (!rep.hypothesis_met) {
        doc.verdict = "hypothesis_not_met";
        doc.warnings.push_back("H1(0) >= sup M: s_bar undefined");
      } else if (kind == ExperimentKind::zero_crossing) {
        if (!rep.events_found) {
          doc.verdict = "hypothesis_not_met";
          doc.warnings.push_back("no s' zeros found in the horizon");
        } else {
          doc.verdict = rep.crossing_pass && rep.gronwall_pass ? "pass" : "fail";
        }
      } else {
        doc.verdict = rep.gronwall_pass ? "pass" : "fail";
      }
      csv = trajectory_csv(rep.trajectory);
      break;
    }

    case ExperimentKind::sweep: {
      if (config.experiment.eps_list.empty())
        throw ConfigError("experiment.eps_list", "required for sweep runs");
      const auto rep = run_lifespan_sweep(nl, setup.data,
                                          config.experiment.eps_list,
                                          config.experiment.kappa,
                                          config.experiment.cap_mult,
                                          setup.integrator);
      doc.verdict = rep.pass ? "pass" : "fail";
      doc.metrics["exponent"] = rep.exponent;
      doc.metrics["kappa"] = rep.kappa;
      doc.metrics["cap_mult"] = rep.cap_mult;
      if (rep.fitted_slope) doc.metrics["fitted_slope"] = *rep.fitted_slope;
      if (rep.envelope) {
        ordered_json env;
        env["N_eps"] = rep.envelope->N_eps;
        env["s_bar"] = rep.envelope->s_bar;
        env["m0"] = rep.envelope->m0;
        env["m1"] = rep.envelope->m1;
        env["c0"] = rep.envelope->c0;
        env["c1"] = rep.envelope->c1;
        env["c2"] = rep.envelope->c2;
        env["delta"] = rep.envelope->delta;
        env["Lambda0"] = rep.envelope->Lambda0;
        env["Lambda1"] = rep.envelope->Lambda1;
        env["Lambda2"] = rep.envelope->Lambda2;
        env["groenwall_c"] = rep.envelope->groenwall_c;
        doc.metrics["envelope"] = env;
      }
      ordered_json records = ordered_json::array();
      double max_ratio = 0;
      for (const auto& rec : rep.records) {
        ordered_json r;
        r["epsilon"] = rec.epsilon;
        r["T_event"] = rec.T_event;
        r["censored"] = rec.censored;
        r["sup_F_ratio"] = rec.sup_F_ratio;
        r["sup_F_ratio_horizon"] = rec.sup_F_ratio_horizon;
        r["t_cap"] = std::isfinite(rec.t_cap) ? ordered_json(rec.t_cap)
                                              : ordered_json("inf");
        r["scaling_pass"] = rec.scaling_pass;
        r["envelope_pass"] = rec.envelope_pass;
        records.push_back(r);
        max_ratio = std::max(max_ratio, rec.sup_F_ratio_horizon);
      }
      doc.metrics["records"] = records;
      doc.max_drift = max_ratio;
      doc.warnings = rep.warnings;
      csv = sweep_csv(rep);
      break;
    }

    case ExperimentKind::check_derivs: {
      const std::vector<double> grid = build_grid(config.experiment);
      const auto rep = check_derivatives(nl, grid, config.experiment.fd_h);
      doc.verdict = rep.max_rel_err() <= tolerance ? "pass" : "fail";
      doc.max_drift = rep.max_rel_err();
      doc.metrics["max_rel_err_m1"] = rep.max_rel_err_m1;
      doc.metrics["max_rel_err_m2"] = rep.max_rel_err_m2;
      doc.metrics["max_rel_err_g1"] = rep.max_rel_err_g1;
      doc.metrics["max_rel_err_g2"] = rep.max_rel_err_g2;
      doc.tolerances["fd_h"] = config.experiment.fd_h;
      break;
    }
  }

  if (!csv.empty() && !csv_path.empty()) write_text_file(csv_path, csv);

  ordered_json verdict;
  verdict["experiment"] = to_string(kind);
  verdict["params"] = ordered_json::parse(resolved_config_json(config));
  verdict["verdict"] = doc.verdict;
  verdict["max_drift"] = doc.max_drift;
  verdict["metrics"] = doc.metrics;
  verdict["tolerances"] = doc.tolerances;
  verdict["warnings"] = doc.warnings;
  verdict["per_sample_csv_path"] = csv.empty() ? "" : csv_path;
  verdict["timestamp"] = utc_timestamp();

  ExecutionResult result;
  result.verdict = verdict.dump(2) + "\n";
  result.exit_code = exit_code_of(doc.verdict);
  if (!verdict_path.empty()) write_text_file(verdict_path, result.verdict);
  return result;
}

}  // namespace kirchhoff
