#include "kirchhoff/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace kirchhoff {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void throw_domain(double s, const Interval& j) {
  std::ostringstream os;
  os << "s = " << s << " outside admissible interval "
     << (j.lo_closed ? '[' : '(') << j.lo << ", " << j.hi << ")";
  throw DomainError(os.str());
}

}  // namespace

Nonlinearity Nonlinearity::constant(double m0) {
  if (!(m0 > 0)) throw std::invalid_argument("constant family needs m0 > 0");
  Nonlinearity nl;
  nl.family_ = Family::constant;
  nl.p0_ = m0;
  nl.domain_ = {};  // all of R
  nl.coercive_ = true;
  nl.mass_sup_ = kInf;
  return nl;
}

Nonlinearity Nonlinearity::affine_plus(double a) {
  if (!(a >= 0) || !std::isfinite(a))
    throw std::invalid_argument("affine_plus family needs a >= 0");
  Nonlinearity nl;
  nl.family_ = Family::affine_plus;
  nl.p0_ = a;
  nl.domain_.lo = a > 0 ? -1.0 / a : -kInf;
  nl.coercive_ = true;
  nl.mass_sup_ = kInf;
  return nl;
}

Nonlinearity Nonlinearity::pokhozhaev(double c1, double c2) {
  if (!std::isfinite(c1) || !std::isfinite(c2))
    throw std::invalid_argument("pokhozhaev family needs finite C1, C2");
  if (c1 == 0 && c2 == 0)
    throw std::invalid_argument("pokhozhaev family needs C1, C2 not both zero");
  // m depends only on (c1 s + c2)^2; pick the branch with 1/sqrt(m) > 0 at s=0.
  if (c2 < 0 || (c2 == 0 && c1 < 0)) {
    c1 = -c1;
    c2 = -c2;
  }
  Nonlinearity nl;
  nl.family_ = Family::pokhozhaev;
  nl.p0_ = c1;
  nl.p1_ = c2;
  if (c1 > 0) {
    nl.domain_.lo = -c2 / c1;  // = 0 when c2 == 0
    nl.coercive_ = false;
    // M(s) = s / (c2 (c1 s + c2)) -> 1/(c1 c2) as s -> inf; diverges if c2 = 0.
    nl.mass_sup_ = c2 > 0 ? 1.0 / (c1 * c2) : kInf;
  } else if (c1 == 0) {
    nl.coercive_ = true;
    nl.mass_sup_ = kInf;
  } else {
    nl.domain_.lo = c2 / c1;   // -c2/|c1|
    nl.domain_.hi = -c2 / c1;  // +c2/|c1|; m blows up there, M -> inf
    nl.coercive_ = false;
    nl.mass_sup_ = kInf;
  }
  return nl;
}

Nonlinearity Nonlinearity::power_alpha(double alpha) {
  if (!(alpha > 0) || !std::isfinite(alpha))
    throw std::invalid_argument("power_alpha family needs alpha > 0");
  Nonlinearity nl;
  nl.family_ = Family::power_alpha;
  nl.p0_ = alpha;
  nl.domain_.lo = 0.0;
  nl.domain_.lo_closed = true;
  nl.coercive_ = false;
  nl.mass_sup_ = nl.mass_quadrature(kInf);  // finite: integrand ~ h^-(4+2a)
  return nl;
}

Nonlinearity Nonlinearity::custom(CustomNonlinearity spec) {
  if (!spec.m || !spec.m1 || !spec.m2)
    throw std::invalid_argument("custom family needs m, m1, m2 callbacks");
  Nonlinearity nl;
  nl.family_ = Family::custom;
  nl.domain_ = spec.domain;
  nl.coercive_ = spec.coercive_at_infinity;
  nl.custom_ = std::move(spec);
  if (nl.coercive_) {
    nl.mass_sup_ = kInf;
  } else {
    // If m is not integrable up to the domain's end (or the callbacks are
    // broken, which eval() reports at evaluation time), the estimate is
    // garbage; fall back to +inf and let the bracketed inverse do the honest
    // work.
    try {
      const auto f = [&nl](double h) { return nl.eval(h).m; };
      double error = 0;
      const double total =
          boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
              f, 0.0, nl.domain_.hi, 15, 1e-12, &error);
      nl.mass_sup_ = (std::isfinite(total) && error <= 1e-6 * std::max(1.0, total))
                         ? total
                         : kInf;
    } catch (const std::runtime_error&) {
      nl.mass_sup_ = kInf;
    }
  }
  return nl;
}

Nonlinearity::Derivs Nonlinearity::eval(double s) const {
  if (!domain_.contains(s)) throw_domain(s, domain_);
  switch (family_) {
    case Family::constant:
      return {p0_, 0.0, 0.0};
    case Family::affine_plus:
      return {1.0 + p0_ * s, p0_, 0.0};
    case Family::pokhozhaev: {
      const double q = p0_ * s + p1_;  // > 0 on J
      const double q2 = q * q;
      return {1.0 / q2, -2.0 * p0_ / (q2 * q), 6.0 * p0_ * p0_ / (q2 * q2)};
    }
    case Family::power_alpha: {
      const double a = p0_;
      const double q = 1.0 + std::pow(s, 2.0 + a);
      const double q1 = (2.0 + a) * std::pow(s, 1.0 + a);
      const double q2 = (2.0 + a) * (1.0 + a) * std::pow(s, a);
      const double inv3 = 1.0 / (q * q * q);
      return {1.0 / (q * q), -2.0 * q1 * inv3,
              6.0 * q1 * q1 * inv3 / q - 2.0 * q2 * inv3};
    }
    case Family::custom: {
      Derivs d{custom_.m(s), custom_.m1(s), custom_.m2(s)};
      if (!(d.m > 0)) {
        std::ostringstream os;
        os << "custom nonlinearity returned m(" << s << ") = " << d.m << " <= 0";
        throw PositivityError(os.str());
      }
      return d;
    }
  }
  throw std::logic_error("unreachable family");
}

Nonlinearity::InvSqrtDerivs Nonlinearity::inv_sqrt_derivs(double s) const {
  if (!domain_.contains(s)) throw_domain(s, domain_);
  switch (family_) {
    case Family::constant:
      return {0.0, 0.0};
    case Family::pokhozhaev:
      // 1/sqrt(m) = c1 s + c2 exactly; the second derivative vanishes.
      return {p0_, 0.0};
    case Family::power_alpha: {
      // 1/sqrt(m) = 1 + s^(2+a)
      const double a = p0_;
      return {(2.0 + a) * std::pow(s, 1.0 + a),
              (2.0 + a) * (1.0 + a) * std::pow(s, a)};
    }
    default: {
      const Derivs d = eval(s);
      const double sm = std::sqrt(d.m);
      const double m32 = d.m * sm;
      const double m52 = d.m * m32;
      return {-d.m1 / (2.0 * m32),
              0.75 * d.m1 * d.m1 / m52 - d.m2 / (2.0 * m32)};
    }
  }
}

double Nonlinearity::mass_quadrature(double s) const {
  const auto f = [this](double h) { return eval(h).m; };
  // The Gauss-Kronrod error estimate is floored at ~2 eps |I| in unit-scaled
  // coordinates, so on a short interval a 1e-12 relative request can never
  // be met and the splitting burns to full depth for nothing: one GK15 panel
  // is already at machine precision there. Loosen the request to what the
  // floor allows.
  double tol = 1e-12;
  const double scale = 0.5 * std::abs(s);
  if (std::isfinite(scale) && scale > 0 && scale < 1.0)
    tol = std::max(tol, 10.0 * std::numeric_limits<double>::epsilon() / scale);
  double error = 0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, 0.0, s, 15, tol, &error);
}

double Nonlinearity::mass(double s) const {
  // [0, s] must sit in the closure of J.
  const double a = std::min(0.0, s), b = std::max(0.0, s);
  if (!(a >= domain_.lo && b <= domain_.hi)) throw_domain(s, domain_);
  switch (family_) {
    case Family::constant:
      return p0_ * s;
    case Family::affine_plus:
      return s * (1.0 + 0.5 * p0_ * s);
    case Family::pokhozhaev: {
      if (p1_ == 0)
        throw DomainError("pokhozhaev with C2 = 0: M diverges at s = 0");
      if (p0_ == 0) return s / (p1_ * p1_);
      return s / (p1_ * (p0_ * s + p1_));
    }
    default:
      if (s == 0) return 0.0;
      return mass_quadrature(s);
  }
}

double Nonlinearity::mass_inverse(double y) const {
  if (!(y >= 0)) throw RangeError("mass_inverse needs y >= 0");
  if (y == 0) return 0.0;
  if (y >= mass_sup_) {
    std::ostringstream os;
    os << "y = " << y << " >= sup M = " << mass_sup_
       << ": smallness condition fails";
    throw RangeError(os.str());
  }
  switch (family_) {
    case Family::constant:
      return y / p0_;
    case Family::affine_plus:
      return p0_ > 0 ? 2.0 * y / (1.0 + std::sqrt(1.0 + 2.0 * p0_ * y)) : y;
    case Family::pokhozhaev: {
      if (p1_ == 0)
        throw DomainError("pokhozhaev with C2 = 0: M diverges at s = 0");
      // y = s / (c2 (c1 s + c2))  =>  s = y c2^2 / (1 - c1 c2 y)
      return y * p1_ * p1_ / (1.0 - p0_ * p1_ * y);
    }
    default:
      return mass_inverse_numeric(y);
  }
}

double Nonlinearity::mass_inverse_numeric(double y) const {
  // Bracket [lo, hi] with M(hi) >= y, growing toward the domain's upper end.
  double lo = 0.0, hi = 1.0;
  if (std::isfinite(domain_.hi)) hi = 0.5 * domain_.hi;
  double mhi = mass(hi);
  int guard = 0;
  while (mhi < y) {
    lo = hi;
    hi = std::isfinite(domain_.hi) ? 0.5 * (hi + domain_.hi) : 2.0 * hi;
    mhi = mass(hi);
    if (++guard > 600) throw RangeError("mass_inverse: bracketing failed");
  }
  // Bisection to a rough root, then Newton with M' = m.
  for (int i = 0; i < 40 && (hi - lo) > 1e-12 * std::max(1.0, hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    (mass(mid) < y ? lo : hi) = mid;
  }
  double s = 0.5 * (lo + hi);
  const double target = 1e-12 * std::max(1.0, y);
  for (int i = 0; i < 12; ++i) {
    const double r = mass(s) - y;
    if (std::abs(r) <= 0.5 * target) break;
    const double step = r / eval(s).m;
    double next = s - step;
    if (next < lo || next > hi) next = 0.5 * (lo + hi);  // keep the bracket
    (mass(next) < y ? lo : hi) = next;
    s = next;
  }
  return s;
}

std::string Nonlinearity::describe() const {
  std::ostringstream os;
  switch (family_) {
    case Family::constant: os << "constant(" << p0_ << ")"; break;
    case Family::affine_plus: os << "affine_plus(" << p0_ << ")"; break;
    case Family::pokhozhaev: os << "pokhozhaev(" << p0_ << ", " << p1_ << ")"; break;
    case Family::power_alpha: os << "power_alpha(" << p0_ << ")"; break;
    case Family::custom: os << "custom"; break;
  }
  return os.str();
}

double DerivativeReport::max_rel_err() const {
  return std::max(std::max(max_rel_err_m1, max_rel_err_m2),
                  std::max(max_rel_err_g1, max_rel_err_g2));
}

DerivativeReport check_derivatives(const Nonlinearity& nl,
                                   std::span<const double> grid, double h) {
  if (!(h > 0)) throw std::invalid_argument("check_derivatives needs h > 0");
  DerivativeReport rep;
  const auto rel = [](double analytic, double fd) {
    return std::abs(analytic - fd) / std::max(1.0, std::abs(analytic));
  };
  for (double s : grid) {
    const auto mid = nl.eval(s);
    const auto lft = nl.eval(s - h);
    const auto rgt = nl.eval(s + h);
    const auto gmid = nl.inv_sqrt_derivs(s);
    const auto glft = nl.inv_sqrt_derivs(s - h);
    const auto grgt = nl.inv_sqrt_derivs(s + h);

    const double fd_m1 = (rgt.m - lft.m) / (2.0 * h);
    const double fd_m2 = (rgt.m1 - lft.m1) / (2.0 * h);
    const double fd_g1 =
        (1.0 / std::sqrt(rgt.m) - 1.0 / std::sqrt(lft.m)) / (2.0 * h);
    const double fd_g2 = (grgt.g1 - glft.g1) / (2.0 * h);

    rep.max_rel_err_m1 = std::max(rep.max_rel_err_m1, rel(mid.m1, fd_m1));
    rep.max_rel_err_m2 = std::max(rep.max_rel_err_m2, rel(mid.m2, fd_m2));
    rep.max_rel_err_g1 = std::max(rep.max_rel_err_g1, rel(gmid.g1, fd_g1));
    rep.max_rel_err_g2 = std::max(rep.max_rel_err_g2, rel(gmid.g2, fd_g2));
  }
  return rep;
}

}  // namespace kirchhoff
