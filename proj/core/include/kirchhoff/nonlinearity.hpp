#pragma once

#include <functional>
#include <limits>
#include <span>
#include <string>

#include "kirchhoff/errors.hpp"

namespace kirchhoff {

/// Admissible interval J for the nonlocal argument s. The upper end is
/// always open; the lower end may be closed (the power family starts
/// at s = 0 because s^alpha is undefined for s < 0 at fractional alpha).
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool lo_closed = false;

  bool contains(double s) const {
    return (lo_closed ? s >= lo : s > lo) && s < hi;
  }
};

enum class Family { constant, affine_plus, pokhozhaev, power_alpha, custom };

/// User-supplied coefficient: m and its first two derivatives as callbacks.
/// The antiderivative M falls back to adaptive quadrature.
struct CustomNonlinearity {
  std::function<double(double)> m;
  std::function<double(double)> m1;
  std::function<double(double)> m2;
  Interval domain;
  bool coercive_at_infinity = false;
};

/// A C^2 coefficient m(s) > 0 on an interval J, with everything the
/// experiments derive from it: m', m'', the antiderivative M(s) = \int_0^s m,
/// its inverse, and the first two s-derivatives of 1/sqrt(m).
///
/// Immutable after construction; safe to share across sweep workers.
class Nonlinearity {
public:
  struct Derivs {
    double m;
    double m1;  // dm/ds
    double m2;  // d2m/ds2
  };
  struct InvSqrtDerivs {
    double g1;  // d/ds   (1/sqrt m)
    double g2;  // d2/ds2 (1/sqrt m)
  };

  static Nonlinearity constant(double m0);
  /// m(s) = 1 + a s, a >= 0.
  static Nonlinearity affine_plus(double a);
  /// m(s) = (c1 s + c2)^-2, (c1, c2) not both zero. The pair is sign-normalized
  /// so that c1 s + c2 > 0 on J (m only depends on its square).
  static Nonlinearity pokhozhaev(double c1, double c2);
  /// m(s) = (1 + s^(2+alpha))^-2, alpha > 0, on [0, inf).
  static Nonlinearity power_alpha(double alpha);
  static Nonlinearity custom(CustomNonlinearity spec);

  Family family() const { return family_; }
  const Interval& domain() const { return domain_; }
  bool coercive_at_infinity() const { return coercive_; }

  /// m(s), m'(s), m''(s). Throws DomainError outside J, PositivityError if a
  /// custom callback returns m <= 0.
  Derivs eval(double s) const;

  /// Closed-form chain-rule derivatives of 1/sqrt(m):
  ///   g1 = -m' / (2 m^{3/2}),  g2 = 3 m'^2 / (4 m^{5/2}) - m'' / (2 m^{3/2}).
  /// The pokhozhaev, power_alpha and constant families return the exactly
  /// simplified forms (g2 is identically zero for pokhozhaev).
  InvSqrtDerivs inv_sqrt_derivs(double s) const;

  /// M(s) = \int_0^s m(h) dh. Closed form for the built-in families except
  /// power_alpha; adaptive Gauss-Kronrod at relative tolerance 1e-12 otherwise.
  double mass(double s) const;

  /// M^-1(y) for y >= 0, y < mass_sup(). |M(s) - y| <= 1e-12 max(1, y).
  /// Throws RangeError when y is not attained (smallness condition fails).
  double mass_inverse(double y) const;

  /// sup of M over J (may be +inf; finite iff the family is not coercive and
  /// J reaches +inf, or J is bounded with integrable m).
  double mass_sup() const { return mass_sup_; }

  // Family parameters. Meaningful only for the matching family.
  double pokhozhaev_c1() const { return p0_; }
  double pokhozhaev_c2() const { return p1_; }
  double alpha() const { return p0_; }

  std::string describe() const;

private:
  Nonlinearity() = default;

  double mass_quadrature(double s) const;
  double mass_inverse_numeric(double y) const;

  Family family_ = Family::constant;
  double p0_ = 1.0;  // m0 | a | c1 | alpha
  double p1_ = 0.0;  // c2
  Interval domain_;
  bool coercive_ = true;
  double mass_sup_ = std::numeric_limits<double>::infinity();
  CustomNonlinearity custom_;
};

/// Result of the finite-difference gate over a grid of s values.
struct DerivativeReport {
  double max_rel_err_m1 = 0;
  double max_rel_err_m2 = 0;
  double max_rel_err_g1 = 0;
  double max_rel_err_g2 = 0;

  double max_rel_err() const;
};

/// Compares the analytic derivatives against central finite differences with
/// stencil width h at every grid point. First derivatives are differenced
/// from the level values (m, 1/sqrt m); second derivatives are differenced
/// from the analytic first derivatives, which keeps the oracle noise at
/// ~eps/h instead of the unusable ~eps/h^2 of a double second difference.
/// Relative errors use denominator max(1, |analytic|).
DerivativeReport check_derivatives(const Nonlinearity& nl,
                                   std::span<const double> grid, double h);

}  // namespace kirchhoff
