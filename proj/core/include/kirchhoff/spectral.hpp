#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "kirchhoff/nonlinearity.hpp"

namespace kirchhoff {

/// One Dirichlet eigenmode of -Laplace on (0, pi)^dim. The orthonormal basis
/// function is prod_i sqrt(2/pi) sin(k_i x_i) and lambda = sum_i k_i^2 is its
/// eigenvalue, so every integral below is a plain mode sum:
///   \int |grad u|^2  = sum lambda_k c_k^2      \int |Delta u|^2 = sum lambda_k^2 c_k^2
///   \int |grad u_t|^2 = sum lambda_k v_k^2      \int u_t^2       = sum v_k^2
struct ModeIndex {
  std::array<int, 2> k{0, 0};  // k[1] unused when dim == 1
  int dim = 1;
  double lambda = 0.0;

  ModeIndex() = default;
  explicit ModeIndex(int k1);
  ModeIndex(int k1, int k2);
};

/// Galerkin-truncated solution at a single time: u = sum c_k e_k,
/// u_t = sum v_k e_k. Pure value type.
struct SpectralState {
  double t = 0.0;
  std::vector<ModeIndex> modes;
  std::vector<double> c;
  std::vector<double> v;

  std::size_t size() const { return modes.size(); }
};

/// Every functional of one time slice. S_accum and V_accum are the running
/// path quadratures \int_0^t g2(s) s'^3 and \int_0^t |s'|; they are owned by
/// the integrator and observables() leaves them at zero.
struct FunctionalSample {
  double t = 0;
  double s = 0;        // \int |grad u|^2
  double s_prime = 0;  // 2 \int grad u . grad u_t
  double s_second = 0;
  double E = 0;  // m^-1/2 \int |grad u_t|^2 + m^1/2 \int |Delta u|^2
  double F = 0;  // E - (1/4) g1(s) s'^2
  std::optional<double> I;  // Pokhozhaev functional; that family only
  double H1 = 0;            // \int u_t^2 + M(s)
  double S_accum = 0;
  double V_accum = 0;
};

struct ExplicitMode {
  ModeIndex k;
  double c = 0;
  double v = 0;
};

/// Random H^2 x H^1 profile: modes {1..cutoff}^dim, coefficients
/// c_k = U_k lambda_k^-decay, v_k = W_k lambda_k^-decay with U, W drawn
/// uniformly from [-1,1) by SplitMix64(seed) in canonical mode order
/// (row-major over k, c before v per mode). decay > 1 + dim/4 keeps
/// sum lambda^2 c^2 bounded as the cutoff grows.
struct RandomProfile {
  std::uint64_t seed = 0;
  int cutoff = 8;
  double decay = 2.0;
  int dim = 1;
};

/// Initial data (u0, u1) and the size factor: u(0) = eps u0, u_t(0) = eps u1.
struct InitialDataSpec {
  std::vector<ExplicitMode> explicit_modes;  // used when non-empty
  std::optional<RandomProfile> random;
  double epsilon = 1.0;
};

/// All functionals of the state in one pass over the modes.
/// Throws DomainError when s = sum lambda c^2 is outside J.
FunctionalSample observables(const SpectralState& state, const Nonlinearity& nl);

/// Same, on flat coefficient spans (integrator hot path).
FunctionalSample observables(double t, std::span<const double> c,
                             std::span<const double> v,
                             std::span<const double> lambda,
                             const Nonlinearity& nl);

/// dc_k = v_k, dv_k = -m(s) lambda_k c_k, with the shared scalar s evaluated
/// once per call.
void rhs(const SpectralState& state, const Nonlinearity& nl,
         std::vector<double>& dc, std::vector<double>& dv);

void rhs(std::span<const double> c, std::span<const double> v,
         std::span<const double> lambda, const Nonlinearity& nl,
         std::span<double> dc, std::span<double> dv);

/// Builds the epsilon-scaled initial state at t = 0. Deterministic for a
/// fixed seed. Throws ConfigError on an empty mode set, non-finite entries,
/// or a decay exponent at or below the H^2 threshold.
SpectralState make_initial_state(const InitialDataSpec& spec);

}  // namespace kirchhoff
