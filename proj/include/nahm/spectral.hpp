#ifndef NAHM_SPECTRAL_HPP
#define NAHM_SPECTRAL_HPP

// Lax form T(zeta)' = [T(zeta), T+(zeta)] with
//   T(zeta)  = beta - zeta (alpha + alpha^*) + zeta^2 beta^*
//   T+(zeta) = alpha - zeta beta^*
// and the spectral curve det(eta - T(zeta)) = 0.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "nahm/errors.hpp"
#include "nahm/flow.hpp"
#include "nahm/grid.hpp"
#include "nahm/liealg.hpp"

namespace nahm {

struct LaxPolynomial {
  Matrix L0, L1, L2;  ///< T(zeta) = L0 + L1 zeta + L2 zeta^2
  Matrix M0, M1;      ///< T+(zeta) = M0 + M1 zeta

  Matrix T(cplx z) const { return L0 + z * L1 + (z * z) * L2; }
  Matrix T_plus(cplx z) const { return M0 + z * M1; }
  Eigen::Index n() const { return L0.rows(); }

  /// max(|L2 - L0^*|, |L1 - L1^*|): zero for data built from anti-Hermitian T.
  double reality_defect() const {
    return std::max((L2 - L0.adjoint()).cwiseAbs().maxCoeff(), (L1 - L1.adjoint()).cwiseAbs().maxCoeff());
  }
};

inline LaxPolynomial lax_from_quadruple(const Quadruple& q) {
  const ComplexPair c = complex_coords(q);
  return {c.beta, Matrix(-(c.alpha + c.alpha.adjoint())), c.beta.adjoint(), c.alpha, Matrix(-c.beta.adjoint())};
}

inline const std::vector<cplx>& default_zeta_samples() {
  static const std::vector<cplx> z{{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}, {2, 0}};
  return z;
}

/// sup over nodes and zeta of |dT(zeta)/dt - [T(zeta), T+(zeta)]|.
inline double lax_residual(const Trajectory& traj, const std::vector<cplx>& zeta = default_zeta_samples()) {
  const std::size_t N = traj.samples.size();
  std::vector<LaxPolynomial> L;
  L.reserve(N);
  std::vector<Matrix> c0, c1, c2;
  for (const auto& q : traj.samples) {
    L.push_back(lax_from_quadruple(q));
    c0.push_back(L.back().L0);
    c1.push_back(L.back().L1);
    c2.push_back(L.back().L2);
  }
  const double h = traj.h();
  const auto d0 = grid::derivative(c0, h);
  const auto d1 = grid::derivative(c1, h);
  const auto d2 = grid::derivative(c2, h);
  double r = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    for (const cplx z : zeta) {
      const Matrix dT = d0[k] + z * d1[k] + (z * z) * d2[k];
      const Matrix Tz = L[k].T(z);
      r = std::max(r, (dT - (Tz * L[k].T_plus(z) - L[k].T_plus(z) * Tz)).norm());
    }
  }
  return r;
}

/// det(eta - T(zeta)) = eta^n + sum_{k=1..n} (sum_{j=0..2k} c_{k,j} zeta^j) eta^{n-k}.
struct SpectralCurve {
  Eigen::Index n = 0;
  std::vector<std::vector<cplx>> c;  ///< c[k-1][j], j = 0..2k

  cplx coeff(int k, int j) const {
    if (k < 1 || k > n || j < 0 || j > 2 * k) return 0.0;
    return c[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(j)];
  }

  /// max |c_{k,j} - conj(c_{k,2k-j})|.
  double reality_defect() const {
    double d = 0.0;
    for (int k = 1; k <= n; ++k) {
      for (int j = 0; j <= 2 * k; ++j) d = std::max(d, std::abs(coeff(k, j) - std::conj(coeff(k, 2 * k - j))));
    }
    return d;
  }

  double max_abs_difference(const SpectralCurve& o) const {
    double d = 0.0;
    for (int k = 1; k <= n; ++k) {
      for (int j = 0; j <= 2 * k; ++j) d = std::max(d, std::abs(coeff(k, j) - o.coeff(k, j)));
    }
    return d;
  }
};

/// Coefficients p_0..p_n of det(eta I - M) = sum_k p_k eta^{n-k}, from
/// determinants at n+1 points on a circle and an inverse DFT.
inline std::vector<cplx> char_poly_coeffs(const Matrix& M) {
  const Eigen::Index n = M.rows();
  const std::size_t m = static_cast<std::size_t>(n) + 1;
  const double rho = 1.0 + M.cwiseAbs().rowwise().sum().maxCoeff();
  std::vector<cplx> vals(m);
  for (std::size_t j = 0; j < m; ++j) {
    const cplx eta = std::polar(rho, 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(m));
    vals[j] = Eigen::PartialPivLU<Matrix>(eta * Matrix::Identity(n, n) - M).determinant();
  }
  std::vector<cplx> p(m);
  for (std::size_t r = 0; r < m; ++r) {
    cplx s = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      s += vals[j] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(j * r) / static_cast<double>(m));
    }
    // s / m = p_{n-r} rho^r
    p[static_cast<std::size_t>(n) - r] = s / (static_cast<double>(m) * std::pow(rho, static_cast<double>(r)));
  }
  return p;
}

inline SpectralCurve char_poly(const LaxPolynomial& L) {
  const Eigen::Index n = L.n();
  SpectralCurve sc;
  sc.n = n;
  const std::size_t m = 2 * static_cast<std::size_t>(n) + 1;
  std::vector<std::vector<cplx>> p(m);
  std::vector<cplx> zeta(m);
  for (std::size_t s = 0; s < m; ++s) {
    zeta[s] = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(s) / static_cast<double>(m));
    p[s] = char_poly_coeffs(L.T(zeta[s]));
  }
  sc.c.resize(static_cast<std::size_t>(n));
  for (Eigen::Index k = 1; k <= n; ++k) {
    auto& row = sc.c[static_cast<std::size_t>(k - 1)];
    row.resize(static_cast<std::size_t>(2 * k + 1));
    for (Eigen::Index j = 0; j <= 2 * k; ++j) {
      cplx acc = 0.0;
      for (std::size_t s = 0; s < m; ++s) acc += p[s][static_cast<std::size_t>(k)] * std::pow(zeta[s], -static_cast<double>(j));
      row[static_cast<std::size_t>(j)] = acc / static_cast<double>(m);
    }
  }
  return sc;
}

/// max over nodes, k, j of |c_{k,j}(t) - c_{k,j}(t_start)|.
inline double isospectral_drift(const Trajectory& traj) {
  const SpectralCurve c0 = char_poly(lax_from_quadruple(traj.samples.front()));
  double d = 0.0;
  for (const auto& q : traj.samples) d = std::max(d, char_poly(lax_from_quadruple(q)).max_abs_difference(c0));
  return d;
}

/// The zeta^2 coefficient of tr T(zeta)^2, i.e. tr(2 L0 L2 + L1^2).  Equals
/// C = 2|T1|^2 + |T2|^2 + |T3|^2 for the scale-2 inner product; for scale s
/// the identity reads C = (s/2) * value.
inline double conserved_C_from_trace(const LaxPolynomial& L) {
  return (2.0 * L.L0 * L.L2 + L.L1 * L.L1).trace().real();
}

inline double C_trace_factor(const InnerProduct& ip) { return ip.scale / 2.0; }

}  // namespace nahm

#endif  // NAHM_SPECTRAL_HPP
