#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nahm/spectral.hpp"

namespace spectral_test {

using namespace nahm;

double maxabs(const Matrix& X) { return X.size() ? X.cwiseAbs().maxCoeff() : 0.0; }

Trajectory elliptic(double kappa, double a, double b, int steps = 2000) {
  SolverConfig cfg;
  cfg.steps = steps;
  return integrate(su2_closed_form(a, b, kappa, 0.0), 0.0, 1.0, cfg);
}

Quadruple random_quadruple(Eigen::Index n, std::mt19937_64& rng) {
  return {random_lie(n, rng), random_lie(n, rng), random_lie(n, rng), random_lie(n, rng)};
}

/// Smooth path that does not solve the equations.
Trajectory control_path(int steps = 400) {
  std::mt19937_64 rng(51);
  const auto e = su2_basis();
  Trajectory T{0.0, 1.0, {}};
  for (int k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) / steps;
    T.samples.push_back({Matrix::Zero(2, 2), (1 + t) * e[0], std::cos(3 * t) * e[1] + e[0], t * t * e[2]});
  }
  return T;
}

TEST(Spectral, LaxPolynomialOfZeroIsZero) {
  const auto L = lax_from_quadruple(Quadruple::zero(3));
  for (const Matrix* M : {&L.L0, &L.L1, &L.L2, &L.M0, &L.M1}) EXPECT_EQ(maxabs(*M), 0.0);
  const auto c = char_poly(L);
  for (int k = 1; k <= 3; ++k) {
    for (int j = 0; j <= 2 * k; ++j) EXPECT_LT(std::abs(c.coeff(k, j)), 1e-14);
  }
}

TEST(Spectral, LaxCoefficients) {
  std::mt19937_64 rng(52);
  const auto q = random_quadruple(3, rng);
  const auto L = lax_from_quadruple(q);
  EXPECT_LT(maxabs(L.L0 - (q[2] + I_unit * q[3])), 1e-15);
  EXPECT_LT(maxabs(L.L2 - (-q[2] + I_unit * q[3])), 1e-15);
  const Quadruple q0(Matrix::Zero(3, 3), q[1], q[2], q[3]);
  EXPECT_LT(maxabs(lax_from_quadruple(q0).L1 - 2.0 * I_unit * q[1]), 1e-15);
}

TEST(Spectral, EllipticLaxMatrixMatchesDisplay) {
  const double a = 1.1, kappa = 0.7, t = 0.37;
  const auto q = su2_closed_form(a, 0.0, kappa, t);
  const auto j = elliptic::jacobi(a * t, kappa);
  const double f1 = a * kappa * j.sn, f2 = a * kappa * j.cn, f3 = -a * j.dn;
  const auto L = lax_from_quadruple(q);
  for (cplx z : {cplx(0.3, 0.2), cplx(-1.0, 0.5), cplx(2.0, 0.0)}) {
    Matrix ref(2, 2);
    ref << -2.0 * f1 * z, f2 * (1.0 - z * z) - f3 * (1.0 + z * z), -f2 * (1.0 - z * z) - f3 * (1.0 + z * z),
        2.0 * f1 * z;
    ref *= 0.5;
    EXPECT_LT(maxabs(L.T(z) - ref), 1e-14);
  }
}

TEST(Spectral, RealityTwist) {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 100; ++trial) {
    const auto L = lax_from_quadruple(random_quadruple(1 + trial % 3, rng));
    EXPECT_LT(L.reality_defect(), 1e-10);
    const cplx z(0.4, -1.3);
    const Matrix lhs = L.T(z);
    const Matrix rhs = (z * z) * L.T(1.0 / std::conj(z)).adjoint();
    EXPECT_LT(maxabs(lhs - rhs), 1e-12);
  }
}

TEST(Spectral, LaxResidual) {
  SolverConfig cfg;
  cfg.steps = 50;
  EXPECT_EQ(lax_residual(integrate(Quadruple::zero(2), 0.0, 1.0, cfg)), 0.0);
  EXPECT_LT(lax_residual(elliptic(0.8, 1.0, 0.0), {0.0, 1.0, I_unit, 2.0}), 1e-6);
  EXPECT_GT(lax_residual(control_path()), 0.1);
}

TEST(Spectral, LaxResidualWithT0) {
  std::mt19937_64 rng(54);
  const LieElement X = random_lie(2, rng, 0.5);
  const auto q = random_quadruple(2, rng);
  const auto T = integrate(q, 0.0, 1.0, {}, [X](double t) -> LieElement { return std::exp(-t) * X; });
  EXPECT_LT(lax_residual(T), 1e-6);
}

TEST(Spectral, CharPolyCoeffsOfKnownMatrix) {
  Matrix M = Matrix::Zero(3, 3);
  M.diagonal() << 1.0, 2.0, cplx(0.0, 3.0);
  // (x - 1)(x - 2)(x - 3i)
  const auto p = char_poly_coeffs(M);
  EXPECT_LT(std::abs(p[0] - 1.0), 1e-13);
  EXPECT_LT(std::abs(p[1] - cplx(-3.0, -3.0)), 1e-12);
  EXPECT_LT(std::abs(p[2] - cplx(2.0, 9.0)), 1e-12);
  EXPECT_LT(std::abs(p[3] - cplx(0.0, -6.0)), 1e-12);
}

TEST(Spectral, EllipticCurveCoefficients) {
  for (double kappa : {0.3, 0.8}) {
    for (double a : {1.0, 2.5}) {
      const auto c = char_poly(lax_from_quadruple(su2_closed_form(a, 0.2, kappa, 0.4)));
      ASSERT_EQ(c.n, 2);
      for (int j = 0; j <= 2; ++j) EXPECT_LT(std::abs(c.coeff(1, j)), 1e-12);
      const double c0 = 0.25 * a * a * (kappa * kappa - 1.0);
      EXPECT_LT(std::abs(c.coeff(2, 0) - c0), 1e-12);
      EXPECT_LT(std::abs(c.coeff(2, 1)), 1e-12);
      EXPECT_LT(std::abs(c.coeff(2, 2) + 0.5 * a * a * (1 + kappa * kappa)), 1e-12);
      EXPECT_LT(std::abs(c.coeff(2, 3)), 1e-12);
      EXPECT_LT(std::abs(c.coeff(2, 4) - c0), 1e-12);
    }
  }
}

TEST(Spectral, CurveMatchesDirectDeterminant) {
  std::mt19937_64 rng(55);
  for (Eigen::Index n = 1; n <= 3; ++n) {
    const auto L = lax_from_quadruple(random_quadruple(n, rng));
    const auto c = char_poly(L);
    EXPECT_LT(c.reality_defect(), 1e-8);
    for (cplx z : {cplx(0.3, 0.7), cplx(-1.2, 0.1)}) {
      for (cplx eta : {cplx(0.5, -0.2), cplx(2.0, 1.0)}) {
        const cplx direct = (eta * Matrix::Identity(n, n) - L.T(z)).determinant();
        cplx poly = std::pow(eta, static_cast<double>(n));
        for (int k = 1; k <= n; ++k) {
          cplx s = 0.0;
          for (int j = 0; j <= 2 * k; ++j) s += c.coeff(k, j) * std::pow(z, static_cast<double>(j));
          poly += s * std::pow(eta, static_cast<double>(n - k));
        }
        EXPECT_LT(std::abs(direct - poly), 1e-10 * std::max(1.0, std::abs(direct)));
      }
    }
    // The zeta-linear part of the eta^{n-1} coefficient is minus a trace.
    for (int j = 0; j <= 2; ++j) {
      const Matrix& Lj = j == 0 ? L.L0 : (j == 1 ? L.L1 : L.L2);
      EXPECT_LT(std::abs(c.coeff(1, j) + Lj.trace()), 1e-10);
    }
  }
}

TEST(Spectral, Isospectrality) {
  SolverConfig cfg;
  cfg.steps = 50;
  EXPECT_EQ(isospectral_drift(integrate(Quadruple::zero(2), 0.0, 1.0, cfg)), 0.0);
  EXPECT_LT(isospectral_drift(elliptic(0.8, 1.0, 0.0)), 1e-8);
  std::mt19937_64 rng(56);
  const auto T = integrate(random_quadruple(3, rng), 0.0, 1.0);
  EXPECT_LT(isospectral_drift(T), 1e-8);
  EXPECT_GT(isospectral_drift(control_path()), 0.1);
}

TEST(Spectral, IsospectralDriftScalesAtFourthOrder) {
  std::mt19937_64 rng(57);
  Quadruple q = random_quadruple(2, rng);
  q[0].setZero();
  for (auto& X : q.T) X *= 2.0;
  auto drift = [&](int steps) {
    SolverConfig cfg;
    cfg.steps = steps;
    return isospectral_drift(integrate(q, 0.0, 1.0, cfg));
  };
  const double ratio = drift(50) / drift(100);
  EXPECT_GT(ratio, 8.0);
  EXPECT_LT(ratio, 40.0);
}

TEST(Spectral, CurveIsGaugeInvariant) {
  const auto T = elliptic(0.6, 1.4, 0.1, 1000);
  std::mt19937_64 rng(58);
  const LieElement Y = random_lie(2, rng);
  const auto u = GaugePath::sample([Y](double t) { return exp_unitary(std::sin(std::numbers::pi * t) * Y); }, T);
  const auto G = gauge_apply(u, T);
  for (std::size_t k = 0; k < T.samples.size(); k += 97) {
    const auto a = char_poly(lax_from_quadruple(T.samples[k]));
    const auto b = char_poly(lax_from_quadruple(G.samples[k]));
    EXPECT_LT(a.max_abs_difference(b), 1e-8);
  }
}

TEST(Spectral, ConservedCFromTrace) {
  EXPECT_EQ(conserved_C_from_trace(lax_from_quadruple(Quadruple::zero(2))), 0.0);
  const double a = 1.3, kappa = 0.45;
  EXPECT_NEAR(conserved_C_from_trace(lax_from_quadruple(su2_closed_form(a, 0.1, kappa, 0.7))),
              a * a * (1 + kappa * kappa), 1e-12);
  std::mt19937_64 rng(59);
  for (int trial = 0; trial < 100; ++trial) {
    const auto q = random_quadruple(1 + trial % 3, rng);
    const double C = conserved_values(q)[5];
    EXPECT_NEAR(conserved_C_from_trace(lax_from_quadruple(q)), C, 1e-10 * std::max(1.0, C));
    const InnerProduct ip(1.0);
    EXPECT_NEAR(C_trace_factor(ip) * conserved_C_from_trace(lax_from_quadruple(q)), conserved_values(q, ip)[5],
                1e-10 * std::max(1.0, C));
  }
}

}  // namespace spectral_test
