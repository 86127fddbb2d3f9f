#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "kirchhoff/spectral.hpp"

namespace kirchhoff {

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double h_init = 1e-3;
  double h_max = std::numeric_limits<double>::infinity();
  std::int64_t max_steps = 100'000'000;
  int method_order = 5;  // embedded 5(4) pair; 5 is the only order built in

  /// Keep every Nth accepted step in Trajectory::samples (0: endpoints,
  /// events and dense times only). The initial and final samples are always
  /// kept, as is a sample at every located event time.
  int sample_stride = 1;

  /// Extra dense-output samples on the uniform grid t0 + i*dense_dt (0: off).
  double dense_dt = 0.0;

  /// Called at every accepted step, regardless of sample_stride.
  std::function<void(const FunctionalSample&)> observer;

  /// Progress checkpoint, called every 10^6 accepted steps.
  std::function<void(std::int64_t steps, double t)> progress;
};

enum class EventKind { sprime_zero, functional_threshold };
enum class EventTarget { F, E };
enum class EventDirection { any, up, down };

struct EventSpec {
  EventKind kind = EventKind::sprime_zero;
  EventTarget target = EventTarget::F;  // threshold events only
  double factor = 2.0;                  // threshold = factor * target(t0)
  EventDirection direction = EventDirection::any;
  bool stop = false;  // halt the run at the event
};

struct EventRecord {
  double t = 0;
  EventKind kind = EventKind::sprime_zero;
  std::size_t spec_index = 0;
};

enum class TrajectoryStatus { reached_t_end, event_stop, step_failure, domain_exit };

struct Trajectory {
  std::vector<FunctionalSample> samples;  // strictly increasing in t
  std::vector<EventRecord> events;
  SpectralState final_state;
  TrajectoryStatus status = TrajectoryStatus::reached_t_end;
  std::int64_t steps_accepted = 0;
  std::int64_t steps_rejected = 0;
};

/// One accepted Dormand-Prince step together with its free 4th-order
/// interpolant. eval() is exact (bit-for-bit) at both endpoints.
class DenseStep {
public:
  double t0() const { return t_start_; }
  double t1() const { return t_start_ + h_; }
  double h() const { return h_; }

  /// Interpolated flat state [c..., v...] at t in [t0, t1].
  /// Throws RangeError outside the span.
  void eval(double t, std::vector<double>& y) const;

  /// Interpolated SpectralState (modes copied from the trajectory).
  SpectralState eval(double t) const;

  /// Flat state [c..., v...] at the step start.
  const std::vector<double>& start_state() const { return y0_; }

  std::span<const double> lambda() const { return *lambda_; }

private:
  friend class Dopri5;

  double t_start_ = 0;
  double h_ = 0;
  std::vector<double> y0_, y1_;                // endpoint states
  std::vector<double> r3_, r4_, r5_;           // interpolation coefficients
  std::shared_ptr<const std::vector<ModeIndex>> modes_;
  std::shared_ptr<const std::vector<double>> lambda_;
};

/// Advances state0 to t_end > state0.t. Local error per step is controlled
/// to (rel_tol, abs_tol) by the embedded 5(4) pair with a PI controller
/// (safety 0.9, growth clamp [0.2, 5]). At every accepted step the running
/// quadratures S += \int g2(s) s'^3 and V += \int |s'| advance by Simpson on
/// (step start, dense midpoint, step end). Events are located on the dense
/// output by bisection to |t| accuracy 1e-10.
///
/// The run halts at t_end, at the first stopping event, or on domain exit
/// (s leaves J: a legitimate outcome, reported as status, never thrown).
/// status == step_failure when h underflows below 1e-14 without meeting the
/// tolerance, or when max_steps is exhausted; the trajectory then carries the
/// partial data up to the last accepted step.
Trajectory integrate(const SpectralState& state0, const Nonlinearity& nl,
                     double t_end, const IntegratorConfig& cfg,
                     std::span<const EventSpec> events = {},
                     const std::function<void(const DenseStep&)>& step_observer = {});

/// Earliest root of the event function within the step span, located to
/// 1e-10, or nullopt when the function does not cross. `threshold` is the
/// absolute trigger level for functional_threshold events (factor * value at
/// the run start, precomputed by the caller).
std::optional<double> locate_event(const DenseStep& step, const Nonlinearity& nl,
                                   const EventSpec& spec, double threshold = 0.0);

/// Classical fixed-step RK4 reference (the independent oracle the adaptive
/// path is checked against; keep free of any Dormand-Prince machinery).
/// Lands exactly on each requested sample time and returns the states there.
std::vector<SpectralState> rk4_reference(const SpectralState& state0,
                                         const Nonlinearity& nl, double h,
                                         std::span<const double> sample_times);

}  // namespace kirchhoff
