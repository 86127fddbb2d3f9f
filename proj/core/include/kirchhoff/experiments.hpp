#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kirchhoff/integrator.hpp"
#include "kirchhoff/nonlinearity.hpp"
#include "kirchhoff/spectral.hpp"

namespace kirchhoff {

/// The small-data envelope constants realized numerically for a given
/// coefficient and (unscaled) initial profile:
///   N(eps)   = eps^2 \int u1^2 + M(eps^2 \int |grad u0|^2)
///   s_bar    = M^-1(N(eps0))
///   m0 <= m <= m1 on [0, s_bar],  c0 = max over eps of M^-1(N(eps))/eps^2,
///   c1 = 4 c0 sqrt(m1),  c2 = max |g1|/4 on [0, c0 eps0^2],
///   delta = min(eps0, 1/sqrt(2 c2 c1)),
///   Lambda0 <= m <= Lambda1 and |m'| <= Lambda2 on [0, s_bar],
///   groenwall_c = max |sqrt(m) g1| on [0, s_bar].
struct EnvelopeConstants {
  double N_eps = 0;
  double s_bar = 0;
  double m0 = 0;
  double m1 = 0;
  double c0 = 0;
  double c1 = 0;
  double c2 = 0;
  double delta = 0;
  double Lambda0 = 0;
  double Lambda1 = 0;
  double Lambda2 = 0;
  double groenwall_c = 0;
};

/// Throws RangeError when N(eps0) >= sup M (the smallness hypothesis fails).
EnvelopeConstants compute_envelope(const Nonlinearity& nl,
                                   const InitialDataSpec& data, double eps0);

/// Shared experiment inputs. `tolerance` is the pass threshold of the
/// specific check; integrator tolerances live in `integrator`.
struct ExperimentSetup {
  Nonlinearity nl = Nonlinearity::constant(1.0);
  InitialDataSpec data;
  IntegratorConfig integrator;
  double t_end = 10.0;
  double tolerance = 1e-6;
};

enum class ConservationKind { first_order, pokhozhaev };

struct ConservationReport {
  std::string quantity;  // "H1" or "I"
  double baseline = 0;
  double max_rel_drift = 0;
  double tolerance = 0;
  bool pass = false;
  TrajectoryStatus status = TrajectoryStatus::reached_t_end;
  bool partial = false;  // domain exit / step failure: partial data, flagged
  Trajectory trajectory;
};

/// Max relative drift of the first-order invariant \int u_t^2 + M(s)
/// (kind first_order) or of the Pokhozhaev functional Iu (kind pokhozhaev,
/// requires that family).
ConservationReport run_conservation_check(ConservationKind kind,
                                          const ExperimentSetup& setup);

struct IdentityReport {
  double F0 = 0;
  double max_abs_residual = 0;  // max_t |F(t) - F(0) + S(t)/4|
  double threshold = 0;         // tolerance * max(1, |F0|)
  double tolerance = 0;
  bool pass = false;
  TrajectoryStatus status = TrajectoryStatus::reached_t_end;
  bool partial = false;
  Trajectory trajectory;
};

/// The exact balance law: F(t) - F(0) = -S(t)/4 along every trajectory.
IdentityReport run_identity_check(const ExperimentSetup& setup);

struct ZeroCrossingReport {
  std::size_t n_events = 0;
  bool events_found = false;
  double max_crossing_err = 0;  // relative to max(1, |E(0)|)
  bool crossing_pass = false;
  double groenwall_c = 0;
  double max_gronwall_excess = 0;  // max_t E/(E0 e^{c V}) - 1
  bool gronwall_pass = false;
  bool hypothesis_met = true;  // false when s_bar is not computable
  double tolerance = 0;
  TrajectoryStatus status = TrajectoryStatus::reached_t_end;
  Trajectory trajectory;
};

/// At every located zero t0 of s' checks
///   E(t0) = E(0) - (1/4) g1(s(0)) s'(0)^2 - S(t0)/4,
/// and at every sample the a-priori bound E(t) <= E(0) e^{c V(t)} with
/// c = max |sqrt(m) g1| on [0, s_bar], s_bar = M^-1(H1(0)).
ZeroCrossingReport run_zero_crossing_check(const ExperimentSetup& setup);

/// Per-epsilon lifespan-proxy measurement: first time F reaches kappa * F(0),
/// censored at t_cap = cap_mult * eps^-q (q = 4, or 4 + 2 alpha for the
/// power family).
struct SweepRecord {
  double epsilon = 0;
  double T_event = 0;  // event time; time reached when censored
  bool censored = false;
  double sup_F_ratio = 0;          // max F/F(0) over the whole run
  double sup_F_ratio_horizon = 0;  // max F/F(0) over t <= eps^-q
  double t_cap = 0;
  bool scaling_pass = false;   // T >= 0.5 T_ref (eps0/eps)^q, censored at cap
  bool envelope_pass = false;  // sup over the horizon <= 4
  std::vector<std::string> warnings;
};

struct SweepReport {
  std::vector<SweepRecord> records;
  std::optional<double> fitted_slope;  // log T vs log eps, uncensored only
  double kappa = 2;
  double cap_mult = 10;
  double exponent = 4;  // q
  std::optional<EnvelopeConstants> envelope;
  bool pass = false;
  std::vector<std::string> warnings;
};

/// Runs one trajectory per epsilon (decreasing list), in parallel; worker
/// count is capped by the KIRCHHOFF_THREADS environment variable. Records
/// are censored-first-class: a run that reaches its cap without the event
/// confirms the lower bound. eps > delta is reported as a warning, never a
/// failure. data.epsilon is overridden per entry.
SweepReport run_lifespan_sweep(const Nonlinearity& nl, const InitialDataSpec& data,
                               std::span<const double> eps_list, double kappa,
                               double cap_mult, const IntegratorConfig& cfg);

struct OracleReport {
  double sup_state_diff = 0;     // adaptive vs RK4(compare_h) at shared times
  double richardson_order = 0;   // from RK4(richardson_h) and RK4(richardson_h/2)
  double compare_h = 0;
  double richardson_h = 0;
  double tolerance = 0;
  bool pass = false;  // sup diff <= tolerance and order in [3.7, 4.3]
};

OracleReport run_oracle_compare(const ExperimentSetup& setup,
                                double compare_h = 1e-4,
                                double richardson_h = 1e-3);

}  // namespace kirchhoff
