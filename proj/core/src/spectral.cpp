#include "kirchhoff/spectral.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "kirchhoff/rng.hpp"

namespace kirchhoff {

ModeIndex::ModeIndex(int k1) : k{k1, 0}, dim(1) {
  if (k1 < 1) throw std::invalid_argument("mode indices must be >= 1");
  lambda = static_cast<double>(k1) * k1;
}

ModeIndex::ModeIndex(int k1, int k2) : k{k1, k2}, dim(2) {
  if (k1 < 1 || k2 < 1) throw std::invalid_argument("mode indices must be >= 1");
  lambda = static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2;
}

FunctionalSample observables(double t, std::span<const double> c,
                             std::span<const double> v,
                             std::span<const double> lambda,
                             const Nonlinearity& nl) {
  const std::size_t n = lambda.size();
  double sum_lc2 = 0;   // s
  double sum_lv2 = 0;   // \int |grad u_t|^2
  double sum_l2c2 = 0;  // \int |Delta u|^2
  double sum_lcv = 0;   // \int grad u . grad u_t
  double sum_v2 = 0;    // \int u_t^2
  for (std::size_t i = 0; i < n; ++i) {
    const double l = lambda[i];
    sum_lc2 += l * c[i] * c[i];
    sum_lv2 += l * v[i] * v[i];
    sum_l2c2 += l * l * c[i] * c[i];
    sum_lcv += l * c[i] * v[i];
    sum_v2 += v[i] * v[i];
  }

  const auto d = nl.eval(sum_lc2);
  const auto g = nl.inv_sqrt_derivs(sum_lc2);
  const double sqrt_m = std::sqrt(d.m);

  FunctionalSample out;
  out.t = t;
  out.s = sum_lc2;
  out.s_prime = 2.0 * sum_lcv;
  out.s_second = 2.0 * sum_lv2 - 2.0 * d.m * sum_l2c2;
  out.E = sum_lv2 / sqrt_m + sqrt_m * sum_l2c2;
  out.F = out.E - 0.25 * g.g1 * out.s_prime * out.s_prime;
  out.H1 = sum_v2 + nl.mass(sum_lc2);
  if (nl.family() == Family::pokhozhaev) {
    const double q = nl.pokhozhaev_c1() * sum_lc2 + nl.pokhozhaev_c2();
    out.I = q * sum_lv2 + sum_l2c2 / q - nl.pokhozhaev_c1() * sum_lcv * sum_lcv;
  }
  return out;
}

FunctionalSample observables(const SpectralState& state, const Nonlinearity& nl) {
  std::vector<double> lambda(state.size());
  for (std::size_t i = 0; i < state.size(); ++i) lambda[i] = state.modes[i].lambda;
  return observables(state.t, state.c, state.v, lambda, nl);
}

void rhs(std::span<const double> c, std::span<const double> v,
         std::span<const double> lambda, const Nonlinearity& nl,
         std::span<double> dc, std::span<double> dv) {
  const std::size_t n = lambda.size();
  double s = 0;
  for (std::size_t i = 0; i < n; ++i) s += lambda[i] * c[i] * c[i];
  const double m = nl.eval(s).m;
  for (std::size_t i = 0; i < n; ++i) {
    dc[i] = v[i];
    dv[i] = -m * lambda[i] * c[i];
  }
}

void rhs(const SpectralState& state, const Nonlinearity& nl,
         std::vector<double>& dc, std::vector<double>& dv) {
  std::vector<double> lambda(state.size());
  for (std::size_t i = 0; i < state.size(); ++i) lambda[i] = state.modes[i].lambda;
  dc.resize(state.size());
  dv.resize(state.size());
  rhs(state.c, state.v, lambda, nl, dc, dv);
}

SpectralState make_initial_state(const InitialDataSpec& spec) {
  if (!(spec.epsilon >= 0) || !std::isfinite(spec.epsilon))
    throw ConfigError("initial_data.epsilon", "must be finite and >= 0");
  if (!spec.explicit_modes.empty() && spec.random)
    throw ConfigError("initial_data", "give either explicit modes or a random profile, not both");

  SpectralState st;
  st.t = 0.0;

  if (!spec.explicit_modes.empty()) {
    st.modes.reserve(spec.explicit_modes.size());
    for (const auto& em : spec.explicit_modes) {
      if (!std::isfinite(em.c) || !std::isfinite(em.v))
        throw ConfigError("initial_data.modes", "non-finite coefficient");
      st.modes.push_back(em.k);
      st.c.push_back(spec.epsilon * em.c);
      st.v.push_back(spec.epsilon * em.v);
    }
    return st;
  }

  if (!spec.random) throw ConfigError("initial_data", "empty mode set");
  const RandomProfile& rp = *spec.random;
  if (rp.dim != 1 && rp.dim != 2)
    throw ConfigError("initial_data.random.dim", "dim must be 1 or 2");
  if (rp.cutoff < 1) throw ConfigError("initial_data.random.cutoff", "cutoff must be >= 1");
  const double threshold = 1.0 + rp.dim / 4.0;
  if (!(rp.decay > threshold)) {
    std::ostringstream os;
    os << "decay " << rp.decay << " too small for H^2 data in dim " << rp.dim
       << " (need > " << threshold << ")";
    throw ConfigError("initial_data.random.decay", os.str());
  }

  SplitMix64 rng(rp.seed);
  const auto emit = [&](const ModeIndex& mi) {
    const double scale = std::pow(mi.lambda, -rp.decay);
    st.modes.push_back(mi);
    st.c.push_back(spec.epsilon * rng.symmetric() * scale);
    st.v.push_back(spec.epsilon * rng.symmetric() * scale);
  };
  if (rp.dim == 1) {
    for (int k = 1; k <= rp.cutoff; ++k) emit(ModeIndex(k));
  } else {
    for (int k1 = 1; k1 <= rp.cutoff; ++k1)
      for (int k2 = 1; k2 <= rp.cutoff; ++k2) emit(ModeIndex(k1, k2));
  }
  return st;
}

}  // namespace kirchhoff
