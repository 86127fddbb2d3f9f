// Acceptance suite: one function per criterion, one [PASS]/[FAIL] line each.
// Run with no arguments for the full suite or with criterion numbers (1..11).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kirchhoff/config.hpp"
#include "kirchhoff/experiments.hpp"
#include "kirchhoff/output.hpp"
#include "kirchhoff/runner.hpp"

using namespace kirchhoff;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

InitialDataSpec seed42_profile(int cutoff, double eps) {
  InitialDataSpec d;
  d.random = RandomProfile{42, cutoff, 2.0, 1};
  d.epsilon = eps;
  return d;
}

InitialDataSpec two_mode_data() {
  InitialDataSpec d;
  d.explicit_modes = {{ModeIndex(1), 0.4, 0.1}, {ModeIndex(2), 0.2, -0.1}};
  return d;
}

IntegratorConfig tols(double rel, double abs) {
  IntegratorConfig cfg;
  cfg.rel_tol = rel;
  cfg.abs_tol = abs;
  return cfg;
}

double drift_of(const Trajectory& traj,
                const std::function<double(const FunctionalSample&)>& q) {
  const double q0 = q(traj.samples.front());
  double worst = 0;
  for (const auto& smp : traj.samples) {
    const double d = std::abs(q(smp) - q0);
    worst = std::max(worst, std::abs(q0) > 0 ? d / std::abs(q0) : d);
  }
  return worst;
}

std::string sweep_summary(const SweepReport& rep) {
  std::ostringstream os;
  for (const auto& rec : rep.records)
    os << " eps=" << rec.epsilon << (rec.censored ? " censored@" : " T=")
       << fmt(rec.censored ? rec.t_cap : rec.T_event)
       << (rec.scaling_pass ? "" : " SCALING-FAIL")
       << (rec.envelope_pass ? "" : " ENVELOPE-FAIL");
  if (rep.fitted_slope) os << " slope=" << fmt(*rep.fitted_slope);
  return os.str();
}

// --- 1. Pokhozhaev conservation ---------------------------------------------

Outcome criterion_1() {
  ExperimentSetup setup;
  setup.nl = Nonlinearity::pokhozhaev(1, 1);
  setup.data = seed42_profile(16, 0.3);
  setup.t_end = 50.0;
  setup.tolerance = 1e-6;
  setup.integrator = tols(1e-10, 1e-12);
  const auto coarse = run_conservation_check(ConservationKind::pokhozhaev, setup);

  setup.integrator = tols(1e-12, 1e-14);
  const auto fine = run_conservation_check(ConservationKind::pokhozhaev, setup);

  const bool shrink = fine.max_rel_drift <= coarse.max_rel_drift / 10.0;
  Outcome out;
  out.pass = coarse.pass && shrink;
  out.detail = "Iu drift " + fmt(coarse.max_rel_drift) +
               " <= 1e-6 at rel_tol 1e-10; " + fmt(fine.max_rel_drift) +
               " at 1e-12 (shrink x" +
               fmt(coarse.max_rel_drift / std::max(fine.max_rel_drift, 1e-300)) +
               " >= 10)";
  return out;
}

// --- 2. First-order conservation ---------------------------------------------

Outcome criterion_2() {
  ExperimentSetup setup;
  setup.nl = Nonlinearity::affine_plus(1.0);
  setup.data = seed42_profile(16, 0.3);
  setup.t_end = 50.0;
  setup.tolerance = 1e-8;
  setup.integrator = tols(1e-10, 1e-12);
  const auto rep = run_conservation_check(ConservationKind::first_order, setup);
  return {rep.pass, "H1 drift " + fmt(rep.max_rel_drift) + " <= 1e-8"};
}

// --- 3. Second-order identity --------------------------------------------------

Outcome criterion_3() {
  const auto nl = Nonlinearity::power_alpha(1.0);
  ExperimentSetup setup;
  setup.nl = nl;
  setup.data = seed42_profile(8, 0.3);
  setup.t_end = 20.0;
  setup.tolerance = 1e-6;
  setup.integrator = tols(1e-10, 1e-12);
  setup.integrator.dense_dt = 2e-3;
  const auto rep = run_identity_check(setup);

  // Composite-Simpson oracle for S over the dense lattice rows.
  const auto& rows = rep.trajectory.samples;
  std::vector<double> lt, lf;
  for (const auto& smp : rows) {
    const double k = smp.t / 2e-3;
    if (std::abs(k - std::round(k)) < 1e-9) {
      lt.push_back(smp.t);
      lf.push_back(nl.inv_sqrt_derivs(smp.s).g2 * smp.s_prime * smp.s_prime *
                   smp.s_prime);
    }
  }
  if (lt.size() % 2 == 0) {
    lt.pop_back();
    lf.pop_back();
  }
  double simpson = 0;
  for (std::size_t i = 0; i + 2 < lt.size(); i += 2)
    simpson += (lf[i] + 4 * lf[i + 1] + lf[i + 2]) * (lt[i + 2] - lt[i]) / 6.0;
  double S_at = 0;
  for (const auto& smp : rows)
    if (smp.t == lt.back()) S_at = smp.S_accum;
  const double s_err = std::abs(S_at - simpson);

  Outcome out;
  out.pass = rep.pass && s_err <= 1e-8;
  out.detail = "max |F - F0 + S/4| " + fmt(rep.max_abs_residual) + " <= " +
               fmt(rep.threshold) + "; |S - Simpson oracle| " + fmt(s_err) +
               " <= 1e-8";
  return out;
}

// --- 4. Degenerate-family consistency ------------------------------------------

Outcome criterion_4() {
  const SpectralState st0 = make_initial_state(seed42_profile(16, 0.3));
  const Trajectory traj =
      integrate(st0, Nonlinearity::constant(1.0), 50.0, tols(1e-12, 1e-16));

  const double dE = drift_of(traj, [](const FunctionalSample& s) { return s.E; });
  const double dF = drift_of(traj, [](const FunctionalSample& s) { return s.F; });
  const double dH = drift_of(traj, [](const FunctionalSample& s) { return s.H1; });

  bool g2_zero = true;
  for (const auto& nl : {Nonlinearity::pokhozhaev(1, 1),
                         Nonlinearity::pokhozhaev(2, 0.5),
                         Nonlinearity::pokhozhaev(-1, 2)}) {
    const double hi = std::min(nl.domain().hi * 0.9, 10.0);
    for (int i = 0; i < 1000; ++i)
      if (nl.inv_sqrt_derivs(hi * i / 999.0).g2 != 0.0) g2_zero = false;
  }

  Outcome out;
  out.pass = dE <= 1e-10 && dF <= 1e-10 && dH <= 1e-10 && g2_zero;
  out.detail = "constant-family drifts E " + fmt(dE) + ", F " + fmt(dF) +
               ", H1 " + fmt(dH) +
               " <= 1e-10; pokhozhaev g2 exactly 0 at 3000 points: " +
               (g2_zero ? "yes" : "no");
  return out;
}

// --- 5. Sandwich and Cauchy-Schwarz over the eps^-4 horizon --------------------

Outcome criterion_5() {
  const auto nl = Nonlinearity::affine_plus(1.0);
  const double eps = 0.1;
  const SpectralState st0 = make_initial_state(seed42_profile(16, eps));
  IntegratorConfig cfg = tols(1e-10, 1e-12);
  cfg.sample_stride = 0;

  long long bad_cs = 0, bad_sandwich = 0, n = 0;
  cfg.observer = [&](const FunctionalSample& smp) {
    ++n;
    const double m = 1.0 + smp.s;
    // sum lambda v^2 recovered from E and s'': slv = (2 sqrt(m) E + s'') / 4.
    const double slv = (2.0 * std::sqrt(m) * smp.E + smp.s_second) / 4.0;
    const double lhs = smp.s_prime * smp.s_prime;
    const double rhs = 4.0 * smp.s * slv;
    if (lhs > rhs * (1.0 + 1e-10) + 1e-30) ++bad_cs;
    if (smp.F < 0.5 * smp.E * (1.0 - 1e-12) ||
        smp.F > 1.5 * smp.E * (1.0 + 1e-12))
      ++bad_sandwich;
  };
  const Trajectory traj = integrate(st0, nl, std::pow(eps, -4.0), cfg);

  Outcome out;
  out.pass = traj.status == TrajectoryStatus::reached_t_end && bad_cs == 0 &&
             bad_sandwich == 0;
  out.detail = "t in [0, 1e4], " + std::to_string(n) + " samples: " +
               std::to_string(bad_cs) + " Cauchy-Schwarz and " +
               std::to_string(bad_sandwich) + " sandwich violations";
  return out;
}

// --- 6. Theorem 1 envelope and the eps^-4 sweep --------------------------------

Outcome criterion_6() {
  const auto nl = Nonlinearity::affine_plus(1.0);
  const double eps = 0.1;
  const SpectralState st0 = make_initial_state(seed42_profile(16, eps));
  IntegratorConfig cfg = tols(1e-10, 1e-12);
  cfg.sample_stride = 0;
  double F0 = 0, sup_ratio = 0;
  cfg.observer = [&](const FunctionalSample& smp) {
    if (F0 == 0) F0 = smp.F;
    sup_ratio = std::max(sup_ratio, smp.F / F0);
  };
  const Trajectory traj = integrate(st0, nl, std::pow(eps, -4.0), cfg);
  const bool envelope_ok =
      traj.status == TrajectoryStatus::reached_t_end && sup_ratio <= 4.0;

  const double eps_list[] = {0.5, 0.4, 0.3};
  const auto sweep = run_lifespan_sweep(nl, seed42_profile(16, 1.0), eps_list,
                                        2.0, 10.0, tols(1e-10, 1e-12));

  Outcome out;
  out.pass = envelope_ok && sweep.pass;
  out.detail = "sup F/F(0) = " + fmt(sup_ratio) + " <= 4 over t <= 1e4; sweep:" +
               sweep_summary(sweep);
  return out;
}

// --- 7. Corollary sweep with exponent 6 ----------------------------------------

Outcome criterion_7() {
  const auto nl = Nonlinearity::power_alpha(1.0);
  const double eps_list[] = {0.5, 0.4, 0.3};
  const auto sweep = run_lifespan_sweep(nl, seed42_profile(16, 1.0), eps_list,
                                        2.0, 10.0, tols(1e-10, 1e-12));
  Outcome out;
  out.pass = sweep.pass && sweep.exponent == 6.0;
  out.detail = "cap 10 eps^-6, records:" + sweep_summary(sweep);
  return out;
}

// --- 8. Theorem 5 skeleton -----------------------------------------------------

Outcome criterion_8() {
  ExperimentSetup setup;
  setup.nl = Nonlinearity::power_alpha(1.0);
  setup.data = two_mode_data();
  setup.t_end = 20.0;
  setup.tolerance = 1e-6;
  setup.integrator = tols(1e-10, 1e-12);
  const auto rep = run_zero_crossing_check(setup);
  Outcome out;
  out.pass = rep.n_events >= 5 && rep.crossing_pass && rep.gronwall_pass &&
             rep.hypothesis_met;
  out.detail = std::to_string(rep.n_events) + " zeros of s'; crossing err " +
               fmt(rep.max_crossing_err) + " <= 1e-6; Gronwall excess " +
               fmt(rep.max_gronwall_excess) + " <= 1e-9 with c = " +
               fmt(rep.groenwall_c);
  return out;
}

// --- 9. Oracle equivalence -----------------------------------------------------

Outcome criterion_9() {
  ExperimentSetup setup;
  setup.nl = Nonlinearity::affine_plus(1.0);
  // k = 2 and 5: fast enough that the oracle's h^4 error at h = 1e-3 clears
  // the roundoff floor and the order estimate is clean.
  setup.data.explicit_modes = {{ModeIndex(2), 0.4, 0.1},
                               {ModeIndex(5), 0.2, -0.1}};
  setup.t_end = 10.0;
  setup.tolerance = 1e-6;
  setup.integrator = tols(1e-10, 1e-12);
  const auto rep = run_oracle_compare(setup, 1e-4, 1e-3);
  Outcome out;
  out.pass = rep.pass;
  out.detail = "sup |adaptive - RK4(1e-4)| = " + fmt(rep.sup_state_diff) +
               " <= 1e-6; Richardson order " + fmt(rep.richardson_order) +
               " in [3.7, 4.3]";
  return out;
}

// --- 10. Derivative gate -------------------------------------------------------

Outcome criterion_10() {
  std::vector<double> grid;
  for (int i = 1; i <= 20; ++i) grid.push_back(0.1 * i);
  double worst = 0;
  for (const auto& nl :
       {Nonlinearity::constant(1.0), Nonlinearity::affine_plus(1.0),
        Nonlinearity::pokhozhaev(1, 1), Nonlinearity::pokhozhaev(1, 2),
        Nonlinearity::power_alpha(1.0)}) {
    const auto rep = check_derivatives(nl, grid, 1e-5);
    worst = std::max(worst, rep.max_rel_err());
  }
  return {worst <= 1e-6,
          "max relative error over the built-in families " + fmt(worst) +
              " <= 1e-6 (grid 0.1..2, h = 1e-5)"};
}

// --- 11. Determinism -----------------------------------------------------------

Outcome criterion_11() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "kirchhoff_acceptance_11";
  fs::create_directories(dir);

  RunConfig cfg = load_config_file(std::string(KIRCHHOFF_FIXTURES_DIR) +
                                   "/golden_run.json");
  const auto read = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };

  cfg.output.csv_path = (dir / "run.csv").string();
  const auto first = execute(cfg, ExperimentKind::simulate);
  const std::string csv_first = read(dir / "run.csv");
  const auto second = execute(cfg, ExperimentKind::simulate);

  auto ja = nlohmann::json::parse(first.verdict);
  auto jb = nlohmann::json::parse(second.verdict);
  ja.erase("timestamp");
  jb.erase("timestamp");

  const bool csv_same = csv_first == read(dir / "run.csv");
  const bool verdict_same = ja == jb;
  return {csv_same && verdict_same,
          std::string("fixture run twice: csv bytes ") +
              (csv_same ? "identical" : "DIFFER") + ", verdict (sans timestamp) " +
              (verdict_same ? "identical" : "DIFFERS")};
}

using CriterionFn = Outcome (*)();

struct Criterion {
  int id;
  const char* name;
  CriterionFn fn;
};

const Criterion kCriteria[] = {
    {1, "pokhozhaev-conservation", criterion_1},
    {2, "first-order-conservation", criterion_2},
    {3, "second-order-identity", criterion_3},
    {4, "degenerate-families", criterion_4},
    {5, "sandwich-cauchy-schwarz", criterion_5},
    {6, "theorem1-envelope-sweep", criterion_6},
    {7, "corollary-exponent6-sweep", criterion_7},
    {8, "theorem5-skeleton", criterion_8},
    {9, "oracle-equivalence", criterion_9},
    {10, "derivative-gate", criterion_10},
    {11, "determinism", criterion_11},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& crit : kCriteria) {
    if (!wanted.empty() &&
        std::find(wanted.begin(), wanted.end(), crit.id) == wanted.end())
      continue;
    Outcome out;
    try {
      out = crit.fn();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] %2d %-26s %s\n", out.pass ? "PASS" : "FAIL", crit.id,
                crit.name, out.detail.c_str());
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
