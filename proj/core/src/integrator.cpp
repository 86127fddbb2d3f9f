#include "kirchhoff/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kirchhoff {

namespace {

// Dormand-Prince 5(4) tableau (Hairer-Norsett-Wanner, DOPRI5). k7 = f(t1, y1)
// is first-same-as-last and feeds both the error estimate and the free
// 4th-order interpolant. The system is autonomous, so stage times drop out.
constexpr double kA21 = 1.0 / 5;
constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187,
                 kA53 = 64448.0 / 6561, kA54 = -212.0 / 729;
constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33,
                 kA63 = 46732.0 / 5247, kA64 = 49.0 / 176,
                 kA65 = -5103.0 / 18656;
constexpr double kB1 = 35.0 / 384, kB3 = 500.0 / 1113, kB4 = 125.0 / 192,
                 kB5 = -2187.0 / 6784, kB6 = 11.0 / 84;
constexpr double kE1 = 71.0 / 57600, kE3 = -71.0 / 16695, kE4 = 71.0 / 1920,
                 kE5 = -17253.0 / 339200, kE6 = 22.0 / 525, kE7 = -1.0 / 40;
constexpr double kD1 = -12715105075.0 / 11282082432.0,
                 kD3 = 87487479700.0 / 32700410799.0,
                 kD4 = -10690763975.0 / 1880347072.0,
                 kD5 = 701980252875.0 / 199316789632.0,
                 kD6 = -1453857185.0 / 822651844.0,
                 kD7 = 69997945.0 / 29380423.0;

constexpr double kMinStep = 1e-14;
constexpr double kEventLocateTol = 1e-10;
constexpr std::int64_t kProgressEvery = 1'000'000;

double event_value(const EventSpec& spec, double threshold,
                   std::span<const double> y, std::span<const double> lambda,
                   const Nonlinearity& nl) {
  const std::size_t n = lambda.size();
  const double* c = y.data();
  const double* v = y.data() + n;
  double sum_lcv = 0;
  for (std::size_t i = 0; i < n; ++i) sum_lcv += lambda[i] * c[i] * v[i];
  if (spec.kind == EventKind::sprime_zero) return 2.0 * sum_lcv;

  double sum_lc2 = 0, sum_lv2 = 0, sum_l2c2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double l = lambda[i];
    sum_lc2 += l * c[i] * c[i];
    sum_lv2 += l * v[i] * v[i];
    sum_l2c2 += l * l * c[i] * c[i];
  }
  const double m = nl.eval(sum_lc2).m;
  const double sqrt_m = std::sqrt(m);
  const double E = sum_lv2 / sqrt_m + sqrt_m * sum_l2c2;
  if (spec.target == EventTarget::E) return E - threshold;
  const double g1 = nl.inv_sqrt_derivs(sum_lc2).g1;
  const double sp = 2.0 * sum_lcv;
  return E - 0.25 * g1 * sp * sp - threshold;
}

bool is_crossing(double va, double vb, EventDirection dir) {
  // A zero exactly at the left node is not a crossing (it belongs to the
  // previous span or to the initial condition).
  const bool up = va < 0 && vb >= 0;
  const bool down = va > 0 && vb <= 0;
  switch (dir) {
    case EventDirection::up: return up;
    case EventDirection::down: return down;
    case EventDirection::any: return up || down;
  }
  return false;
}

}  // namespace

void DenseStep::eval(double t, std::vector<double>& y) const {
  if (t < t0() || t > t1()) throw RangeError("dense evaluation outside step span");
  if (t == t0()) { y = y0_; return; }
  if (t == t1()) { y = y1_; return; }
  const double th = (t - t_start_) / h_;
  const double th1 = 1.0 - th;
  const std::size_t n = y0_.size();
  y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double dy = y1_[i] - y0_[i];
    y[i] = y0_[i] + th * (dy + th1 * (r3_[i] + th * (r4_[i] + th1 * r5_[i])));
  }
}

SpectralState DenseStep::eval(double t) const {
  std::vector<double> y;
  eval(t, y);
  SpectralState st;
  st.t = t;
  st.modes = *modes_;
  const std::size_t n = modes_->size();
  st.c.assign(y.begin(), y.begin() + n);
  st.v.assign(y.begin() + n, y.end());
  return st;
}

std::optional<double> locate_event(const DenseStep& step, const Nonlinearity& nl,
                                   const EventSpec& spec, double threshold) {
  const auto lambda = step.lambda();
  std::vector<double> scratch;
  const auto value_at = [&](double t) {
    step.eval(t, scratch);
    return event_value(spec, threshold, scratch, lambda, nl);
  };
  // Scan a few subintervals so a crossing that comes and goes inside one
  // step is still seen; return the earliest root.
  constexpr int kParts = 4;
  const double ta = step.t0(), tb = step.t1();
  double prev_t = ta;
  double prev_v = value_at(ta);
  for (int j = 1; j <= kParts; ++j) {
    const double node_t = ta + (tb - ta) * j / kParts;
    const double node_v = value_at(node_t);
    if (is_crossing(prev_v, node_v, spec.direction)) {
      double lo = prev_t, hi = node_t, vlo = prev_v;
      while (hi - lo > kEventLocateTol) {
        const double mid = 0.5 * (lo + hi);
        const double vm = value_at(mid);
        if (vm == 0) return mid;
        if ((vlo < 0) != (vm < 0)) {
          hi = mid;
        } else {
          lo = mid;
          vlo = vm;
        }
      }
      return 0.5 * (lo + hi);
    }
    prev_t = node_t;
    prev_v = node_v;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

class Dopri5 {
public:
  Dopri5(const Nonlinearity& nl, const SpectralState& s0)
      : nl_(nl),
        modes_(std::make_shared<std::vector<ModeIndex>>(s0.modes)),
        lambda_(std::make_shared<std::vector<double>>()) {
    const std::size_t n = s0.size();
    lambda_->resize(n);
    for (std::size_t i = 0; i < n; ++i) (*lambda_)[i] = s0.modes[i].lambda;
    t_ = s0.t;
    y_.resize(2 * n);
    std::copy(s0.c.begin(), s0.c.end(), y_.begin());
    std::copy(s0.v.begin(), s0.v.end(), y_.begin() + n);
    for (auto* k : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_})
      k->resize(2 * n);
    ynew_.resize(2 * n);
    ytmp_.resize(2 * n);
    deriv(y_, k1_);
  }

  double t() const { return t_; }
  const std::vector<double>& y() const { return y_; }
  std::span<const double> lambda() const { return *lambda_; }

  SpectralState state_at(double t, const std::vector<double>& y) const {
    SpectralState st;
    st.t = t;
    st.modes = *modes_;
    const std::size_t n = modes_->size();
    st.c.assign(y.begin(), y.begin() + n);
    st.v.assign(y.begin() + n, y.end());
    return st;
  }

  /// One trial step of size h. Returns the scaled error norm (accept iff
  /// <= 1). Throws DomainError when a stage leaves J.
  double attempt(double h, double abs_tol, double rel_tol) {
    const std::size_t n2 = y_.size();
    for (std::size_t i = 0; i < n2; ++i)
      ytmp_[i] = y_[i] + h * kA21 * k1_[i];
    deriv(ytmp_, k2_);
    for (std::size_t i = 0; i < n2; ++i)
      ytmp_[i] = y_[i] + h * (kA31 * k1_[i] + kA32 * k2_[i]);
    deriv(ytmp_, k3_);
    for (std::size_t i = 0; i < n2; ++i)
      ytmp_[i] = y_[i] + h * (kA41 * k1_[i] + kA42 * k2_[i] + kA43 * k3_[i]);
    deriv(ytmp_, k4_);
    for (std::size_t i = 0; i < n2; ++i)
      ytmp_[i] = y_[i] + h * (kA51 * k1_[i] + kA52 * k2_[i] + kA53 * k3_[i] +
                              kA54 * k4_[i]);
    deriv(ytmp_, k5_);
    for (std::size_t i = 0; i < n2; ++i)
      ytmp_[i] = y_[i] + h * (kA61 * k1_[i] + kA62 * k2_[i] + kA63 * k3_[i] +
                              kA64 * k4_[i] + kA65 * k5_[i]);
    deriv(ytmp_, k6_);
    for (std::size_t i = 0; i < n2; ++i)
      ynew_[i] = y_[i] + h * (kB1 * k1_[i] + kB3 * k3_[i] + kB4 * k4_[i] +
                              kB5 * k5_[i] + kB6 * k6_[i]);
    deriv(ynew_, k7_);

    double err_sq = 0;
    for (std::size_t i = 0; i < n2; ++i) {
      const double e = h * (kE1 * k1_[i] + kE3 * k3_[i] + kE4 * k4_[i] +
                            kE5 * k5_[i] + kE6 * k6_[i] + kE7 * k7_[i]);
      const double sc =
          abs_tol + rel_tol * std::max(std::abs(y_[i]), std::abs(ynew_[i]));
      err_sq += (e / sc) * (e / sc);
    }
    return std::sqrt(err_sq / static_cast<double>(n2));
  }

  /// Commits the last attempted step as [t_, t1] and fills the interpolant.
  void accept(double t1, DenseStep& ds) {
    const double h = t1 - t_;
    const std::size_t n2 = y_.size();
    ds.t_start_ = t_;
    ds.h_ = h;
    ds.y0_ = y_;
    ds.y1_ = ynew_;
    ds.modes_ = modes_;
    ds.lambda_ = lambda_;
    ds.r3_.resize(n2);
    ds.r4_.resize(n2);
    ds.r5_.resize(n2);
    for (std::size_t i = 0; i < n2; ++i) {
      const double dy = ynew_[i] - y_[i];
      ds.r3_[i] = h * k1_[i] - dy;
      ds.r4_[i] = dy - h * k7_[i] - ds.r3_[i];
      ds.r5_[i] = h * (kD1 * k1_[i] + kD3 * k3_[i] + kD4 * k4_[i] +
                       kD5 * k5_[i] + kD6 * k6_[i] + kD7 * k7_[i]);
    }
    y_.swap(ynew_);
    k1_.swap(k7_);  // FSAL
    t_ = t1;
  }

  void deriv(const std::vector<double>& y, std::vector<double>& dy) const {
    const std::size_t n = lambda_->size();
    const double* c = y.data();
    const double* v = y.data() + n;
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += (*lambda_)[i] * c[i] * c[i];
    const double m = nl_.eval(s).m;  // throws DomainError outside J
    for (std::size_t i = 0; i < n; ++i) {
      dy[i] = v[i];
      dy[n + i] = -m * (*lambda_)[i] * c[i];
    }
  }

private:
  const Nonlinearity& nl_;
  std::shared_ptr<std::vector<ModeIndex>> modes_;
  std::shared_ptr<std::vector<double>> lambda_;
  double t_ = 0;
  std::vector<double> y_, ynew_, ytmp_;
  std::vector<double> k1_, k2_, k3_, k4_, k5_, k6_, k7_;
};

// ---------------------------------------------------------------------------

namespace {

struct PathPoint {  // s, s', g2(s) at a time node, for Simpson accumulation
  double s = 0, sp = 0, g2 = 0;
};

PathPoint path_point(std::span<const double> y, std::span<const double> lambda,
                     const Nonlinearity& nl) {
  const std::size_t n = lambda.size();
  const double* c = y.data();
  const double* v = y.data() + n;
  PathPoint p;
  double lcv = 0;
  for (std::size_t i = 0; i < n; ++i) {
    p.s += lambda[i] * c[i] * c[i];
    lcv += lambda[i] * c[i] * v[i];
  }
  p.sp = 2.0 * lcv;
  p.g2 = nl.inv_sqrt_derivs(p.s).g2;
  return p;
}

struct SimpsonIncrement {
  double dS = 0, dV = 0;
};

SimpsonIncrement simpson_span(const DenseStep& ds, const Nonlinearity& nl,
                              const PathPoint& at_start, double t_to,
                              std::vector<double>& scratch) {
  const double span = t_to - ds.t0();
  if (span <= 0) return {};
  ds.eval(ds.t0() + 0.5 * span, scratch);
  const PathPoint mid = path_point(scratch, ds.lambda(), nl);
  ds.eval(t_to, scratch);
  const PathPoint end = path_point(scratch, ds.lambda(), nl);
  const auto f_s = [](const PathPoint& p) { return p.g2 * p.sp * p.sp * p.sp; };
  const auto f_v = [](const PathPoint& p) { return std::abs(p.sp); };
  SimpsonIncrement inc;
  inc.dS = span / 6.0 * (f_s(at_start) + 4.0 * f_s(mid) + f_s(end));
  inc.dV = span / 6.0 * (f_v(at_start) + 4.0 * f_v(mid) + f_v(end));
  return inc;
}

}  // namespace

Trajectory integrate(const SpectralState& state0, const Nonlinearity& nl,
                     double t_end, const IntegratorConfig& cfg,
                     std::span<const EventSpec> events,
                     const std::function<void(const DenseStep&)>& step_observer) {
  if (!(cfg.rel_tol > 0) || !(cfg.abs_tol > 0))
    throw std::invalid_argument("integrator tolerances must be > 0");
  if (!(cfg.h_init > 0)) throw std::invalid_argument("h_init must be > 0");
  if (cfg.max_steps <= 0) throw std::invalid_argument("max_steps must be > 0");
  if (cfg.method_order != 5)
    throw std::invalid_argument("only the 5(4) Dormand-Prince pair is built in");
  if (cfg.sample_stride < 0)
    throw std::invalid_argument("sample_stride must be >= 0");
  if (!(t_end > state0.t))
    throw std::invalid_argument("t_end must exceed the initial time");
  if (state0.size() == 0) throw ConfigError("initial_data", "empty mode set");
  if (state0.c.size() != state0.size() || state0.v.size() != state0.size())
    throw std::invalid_argument("state coefficient arrays must match the mode set");
  for (std::size_t i = 0; i < state0.size(); ++i)
    if (!std::isfinite(state0.c[i]) || !std::isfinite(state0.v[i]))
      throw ConfigError("initial_data", "non-finite state entry");

  Dopri5 stepper(nl, state0);  // evaluates the RHS once; throws if s(0) not in J
  const auto lambda = stepper.lambda();

  Trajectory traj;
  FunctionalSample sample = observables(state0.t, state0.c, state0.v, lambda, nl);
  double S_accum = 0, V_accum = 0;
  traj.samples.push_back(sample);
  if (cfg.observer) cfg.observer(sample);

  // Event thresholds are anchored at the run start.
  std::vector<double> thresholds(events.size(), 0.0);
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].kind == EventKind::functional_threshold) {
      if (!(events[i].factor > 0))
        throw std::invalid_argument("threshold event factor must be > 0");
      thresholds[i] = events[i].factor *
                      (events[i].target == EventTarget::F ? sample.F : sample.E);
    }
  }
  PathPoint start_pt{sample.s, sample.s_prime,
                     nl.inv_sqrt_derivs(sample.s).g2};

  const double span = t_end - state0.t;
  double h = std::min(cfg.h_init, std::min(cfg.h_max, span));
  double errold = 1e-4;
  bool after_reject = false;
  // Dense grid times are built multiplicatively so the lattice does not pick
  // up accumulation rounding over long runs.
  std::int64_t dense_i = 1;
  double next_dense =
      cfg.dense_dt > 0 ? state0.t + cfg.dense_dt : 0.0;

  DenseStep ds;
  std::vector<double> scratch;

  const auto make_sample = [&](double t, const std::vector<double>& y,
                               double S, double V) {
    const std::size_t n = lambda.size();
    FunctionalSample smp = observables(
        t, std::span<const double>(y.data(), n),
        std::span<const double>(y.data() + n, n), lambda, nl);
    smp.S_accum = S;
    smp.V_accum = V;
    return smp;
  };

  const auto finish = [&](TrajectoryStatus st, double t, const std::vector<double>& y) {
    traj.status = st;
    traj.final_state = stepper.state_at(t, y);
    return traj;
  };

  while (true) {
    if (traj.steps_accepted + traj.steps_rejected >= cfg.max_steps)
      return finish(TrajectoryStatus::step_failure, stepper.t(), stepper.y());

    double h_trial = std::min(h, cfg.h_max);
    bool last = false;
    if (stepper.t() + 1.01 * h_trial >= t_end) {
      h_trial = t_end - stepper.t();
      last = true;
    }

    double err;
    try {
      err = stepper.attempt(h_trial, cfg.abs_tol, cfg.rel_tol);
    } catch (const DomainError&) {
      ++traj.steps_rejected;
      h = 0.5 * h_trial;
      after_reject = true;
      if (h < kMinStep)
        return finish(TrajectoryStatus::domain_exit, stepper.t(), stepper.y());
      continue;
    }
    if (!(err <= 1.0)) {  // also catches NaN
      ++traj.steps_rejected;
      const double fac = std::isfinite(err)
                             ? std::max(0.2, 0.9 * std::pow(err, -0.2))
                             : 0.2;
      h = h_trial * std::min(1.0, fac);
      after_reject = true;
      if (h < kMinStep)
        return finish(TrajectoryStatus::step_failure, stepper.t(), stepper.y());
      continue;
    }

    const double t1 = last ? t_end : stepper.t() + h_trial;
    stepper.accept(t1, ds);
    ++traj.steps_accepted;

    try {
      // Per-step path quadratures: Simpson on (start, dense midpoint, end).
      const SimpsonIncrement full = simpson_span(ds, nl, start_pt, t1, scratch);

      // Events, located on the dense output.
      struct Root { double t; std::size_t idx; };
      std::vector<Root> roots;
      std::optional<std::size_t> stop_at;
      for (std::size_t i = 0; i < events.size(); ++i) {
        const auto root = locate_event(ds, nl, events[i], thresholds[i]);
        if (root) roots.push_back({*root, i});
      }
      std::sort(roots.begin(), roots.end(),
                [](const Root& a, const Root& b) { return a.t < b.t; });
      for (std::size_t r = 0; r < roots.size(); ++r) {
        if (events[roots[r].idx].stop) {
          stop_at = r;
          roots.resize(r + 1);
          break;
        }
      }

      // Rows contributed by this step: dense-grid times and event times, in
      // order, then the step end itself.
      std::vector<double> row_times;
      const double t_stop = stop_at ? roots[*stop_at].t : t1;
      bool force_end = false;
      if (cfg.dense_dt > 0) {
        while (next_dense <= t_stop) {
          if (next_dense > ds.t0() && next_dense < t_stop)
            row_times.push_back(next_dense);
          else if (next_dense == t_stop)
            force_end = true;
          ++dense_i;
          next_dense = state0.t + cfg.dense_dt * static_cast<double>(dense_i);
        }
      }
      for (const Root& r : roots)
        if (r.t > ds.t0() && r.t < t_stop) row_times.push_back(r.t);
      std::sort(row_times.begin(), row_times.end());
      row_times.erase(std::unique(row_times.begin(), row_times.end()),
                      row_times.end());

      for (double tr : row_times) {
        const SimpsonIncrement part = simpson_span(ds, nl, start_pt, tr, scratch);
        ds.eval(tr, scratch);
        traj.samples.push_back(
            make_sample(tr, scratch, S_accum + part.dS, V_accum + part.dV));
      }
      for (const Root& r : roots)
        traj.events.push_back({r.t, events[r.idx].kind, r.idx});

      if (stop_at) {
        const double te = roots[*stop_at].t;
        const SimpsonIncrement part = simpson_span(ds, nl, start_pt, te, scratch);
        ds.eval(te, scratch);
        const FunctionalSample ev_sample =
            make_sample(te, scratch, S_accum + part.dS, V_accum + part.dV);
        if (traj.samples.back().t < te) traj.samples.push_back(ev_sample);
        if (cfg.observer) cfg.observer(ev_sample);
        return finish(TrajectoryStatus::event_stop, te, scratch);
      }

      S_accum += full.dS;
      V_accum += full.dV;
      const FunctionalSample end_sample = make_sample(t1, stepper.y(), S_accum, V_accum);
      const bool keep = last || force_end || !roots.empty() ||
                        (cfg.sample_stride > 0 &&
                         traj.steps_accepted % cfg.sample_stride == 0);
      if (keep && traj.samples.back().t < t1) traj.samples.push_back(end_sample);
      if (cfg.observer) cfg.observer(end_sample);
      if (step_observer) step_observer(ds);

      start_pt = {end_sample.s, end_sample.s_prime,
                  nl.inv_sqrt_derivs(end_sample.s).g2};
    } catch (const DomainError&) {
      // The accepted span grazes the boundary of J between its endpoints;
      // report the exit at the last fully processed state and drop any rows
      // this step already contributed.
      while (!traj.samples.empty() && traj.samples.back().t > ds.t0())
        traj.samples.pop_back();
      while (!traj.events.empty() && traj.events.back().t > ds.t0())
        traj.events.pop_back();
      return finish(TrajectoryStatus::domain_exit, ds.t0(), ds.start_state());
    }

    if (cfg.progress && traj.steps_accepted % kProgressEvery == 0)
      cfg.progress(traj.steps_accepted, t1);

    if (last) return finish(TrajectoryStatus::reached_t_end, t1, stepper.y());

    double fac = 0.9 * std::pow(err, -0.17) * std::pow(errold, 0.04);
    if (!std::isfinite(fac)) fac = 5.0;  // err == 0
    fac = std::clamp(fac, 0.2, 5.0);
    if (after_reject) fac = std::min(fac, 1.0);
    after_reject = false;
    errold = std::max(err, 1e-4);
    h = h_trial * fac;
  }
}

std::vector<SpectralState> rk4_reference(const SpectralState& state0,
                                         const Nonlinearity& nl, double h,
                                         std::span<const double> sample_times) {
  if (!(h > 0)) throw std::invalid_argument("rk4_reference needs h > 0");
  const std::size_t n = state0.size();
  std::vector<double> lambda(n);
  for (std::size_t i = 0; i < n; ++i) lambda[i] = state0.modes[i].lambda;

  std::vector<double> y(2 * n), k1(2 * n), k2(2 * n), k3(2 * n), k4(2 * n),
      yt(2 * n);
  std::copy(state0.c.begin(), state0.c.end(), y.begin());
  std::copy(state0.v.begin(), state0.v.end(), y.begin() + n);

  const auto f = [&](const std::vector<double>& yy, std::vector<double>& dy) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += lambda[i] * yy[i] * yy[i];
    const double m = nl.eval(s).m;
    for (std::size_t i = 0; i < n; ++i) {
      dy[i] = yy[n + i];
      dy[n + i] = -m * lambda[i] * yy[i];
    }
  };

  double t = state0.t;
  std::vector<SpectralState> out;
  out.reserve(sample_times.size());
  for (double target : sample_times) {
    if (!(target >= t)) throw std::invalid_argument("sample times must be increasing");
    if (target > t) {
      const auto steps = static_cast<std::int64_t>(std::ceil((target - t) / h - 1e-12));
      const double hs = (target - t) / static_cast<double>(std::max<std::int64_t>(steps, 1));
      for (std::int64_t q = 0; q < std::max<std::int64_t>(steps, 1); ++q) {
        f(y, k1);
        for (std::size_t i = 0; i < 2 * n; ++i) yt[i] = y[i] + 0.5 * hs * k1[i];
        f(yt, k2);
        for (std::size_t i = 0; i < 2 * n; ++i) yt[i] = y[i] + 0.5 * hs * k2[i];
        f(yt, k3);
        for (std::size_t i = 0; i < 2 * n; ++i) yt[i] = y[i] + hs * k3[i];
        f(yt, k4);
        for (std::size_t i = 0; i < 2 * n; ++i)
          y[i] += hs / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      }
      t = target;
    }
    SpectralState st;
    st.t = t;
    st.modes = state0.modes;
    st.c.assign(y.begin(), y.begin() + n);
    st.v.assign(y.begin() + n, y.end());
    out.push_back(std::move(st));
  }
  return out;
}

}  // namespace kirchhoff
