#ifndef NAHM_ELLIPTIC_HPP
#define NAHM_ELLIPTIC_HPP

// Jacobi elliptic functions sn, cn, dn and the complete elliptic integral K
// by the arithmetic-geometric mean (descending Landen) recursion.

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "nahm/errors.hpp"

namespace nahm::elliptic {

/// Modulus kappa in [0, 1).  kappa = 1 is accepted by `jacobi` directly.
struct EllipticModulus {
  double kappa;

  explicit EllipticModulus(double k) : kappa(k) {
    if (!(k >= 0.0 && k < 1.0)) {
      throw DomainError("elliptic modulus must lie in [0,1), got " + std::to_string(k));
    }
  }
};

struct SnCnDn {
  double sn;
  double cn;
  double dn;
};

inline double agm(double a, double b) {
  for (int it = 0; it < 64 && std::abs(a - b) > 1e-16 * a; ++it) {
    const double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
  }
  return 0.5 * (a + b);
}

/// K(kappa) = integral over [0, pi/2] of dtheta / sqrt(1 - kappa^2 sin^2 theta).
inline double complete_K(EllipticModulus m) {
  return std::numbers::pi / (2.0 * agm(1.0, std::sqrt((1.0 - m.kappa) * (1.0 + m.kappa))));
}

inline double complete_K(double kappa) { return complete_K(EllipticModulus(kappa)); }

/// sn, cn, dn of modulus kappa in [0,1].  kappa = 1 gives tanh, sech, sech.
inline SnCnDn jacobi(double u, double kappa) {
  if (!(kappa >= 0.0 && kappa <= 1.0)) {
    throw DomainError("jacobi: modulus must lie in [0,1], got " + std::to_string(kappa));
  }
  if (kappa == 1.0) {
    const double s = 1.0 / std::cosh(u);
    return {std::tanh(u), s, s};
  }
  if (kappa == 0.0) return {std::sin(u), std::cos(u), 1.0};

  // Reduce into one period so the doubling below stays accurate.
  const double period = 4.0 * complete_K(kappa);
  u -= period * std::round(u / period);

  constexpr int kMaxLevels = 32;
  std::array<double, kMaxLevels + 1> a{};
  std::array<double, kMaxLevels + 1> c{};
  a[0] = 1.0;
  double b = std::sqrt((1.0 - kappa) * (1.0 + kappa));
  c[0] = kappa;
  int levels = 0;
  while (std::abs(c[levels]) > 1e-16 && levels < kMaxLevels) {
    const double an = a[levels];
    a[levels + 1] = 0.5 * (an + b);
    c[levels + 1] = 0.5 * (an - b);
    b = std::sqrt(an * b);
    ++levels;
  }

  double phi = std::ldexp(a[levels] * u, levels);
  for (int k = levels; k >= 1; --k) phi = 0.5 * (phi + std::asin(c[k] / a[k] * std::sin(phi)));
  const double sn = std::sin(phi);
  // dn >= sqrt(1 - kappa^2) > 0, so the square root loses nothing; the
  // quotient form cn / cos(phi_1 - phi_0) is 0/0 at odd multiples of K.
  return {sn, std::cos(phi), std::sqrt((1.0 - kappa * sn) * (1.0 + kappa * sn))};
}

}  // namespace nahm::elliptic

#endif  // NAHM_ELLIPTIC_HPP
