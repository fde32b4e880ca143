#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nahm/positive.hpp"

namespace positive_test {

using namespace nahm;

double maxabs(const Matrix& X) { return X.size() ? X.cwiseAbs().maxCoeff() : 0.0; }

Matrix scalar(cplx z) { return Matrix::Constant(1, 1, z); }

/// Random u(n) triple pushed into the positive part by a central shift of T1.
Triple random_positive(Eigen::Index n, std::mt19937_64& rng, double mu = 2.0) {
  Triple T{random_lie(n, rng, 0.5), random_lie(n, rng, 0.5), random_lie(n, rng, 0.5)};
  T[0] -= I_unit * mu * Matrix::Identity(n, n);
  return T;
}

TEST(Positive, ScalarPositivity) {
  // T1 = -i, T2 + i T3 = 0.5 gives H(theta) = 2 + cos(theta).
  const auto r = positivity_report(scalar(-I_unit), scalar(0.0), scalar(-0.5 * I_unit));
  EXPECT_NEAR(r.min_eig, 1.0, 1e-14);
  EXPECT_NEAR(r.theta_min, std::numbers::pi, 1e-14);
  EXPECT_TRUE(r.certified());
  EXPECT_STREQ(r.status(), "positive");
  for (double th : {0.0, 0.7, 2.0}) {
    EXPECT_NEAR(positivity_matrix(scalar(-I_unit), scalar(0.0), scalar(-0.5 * I_unit), th)(0, 0).real(),
                2.0 + std::cos(th), 1e-14);
  }
}

TEST(Positive, TracelessDataIsNeverPositive) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    const auto r = positivity_report(random_lie(2, rng, 1.0, Algebra::sun), random_lie(2, rng, 1.0, Algebra::sun),
                                     random_lie(2, rng, 1.0, Algebra::sun));
    EXPECT_LE(r.min_eig, 1e-14);
    EXPECT_FALSE(r.certified());
  }
}

TEST(Positive, CentralShiftRaisesEigenvaluesByTwiceMu) {
  const auto q = su2_closed_form(1.0, 0.0, 0.8, 0.3);
  const auto base = positivity_report(q[1], q[2], q[3]);
  const double mu = 3.0;
  const LieElement T1 = q[1] - I_unit * mu * Matrix::Identity(2, 2);
  const auto shifted = positivity_report(T1, q[2], q[3]);
  EXPECT_NEAR(shifted.min_eig - base.min_eig, 2.0 * mu, 1e-12);
  EXPECT_TRUE(shifted.certified());
  EXPECT_THROW(positivity_report(T1, q[2], q[3], 0), DomainError);
}

TEST(Positive, FactorizeWithoutConstantTerm) {
  // T(zeta) = 2 zeta.
  const auto f = rosenblatt_factorize(scalar(-I_unit), scalar(0.0), scalar(0.0));
  EXPECT_LT(std::abs(f.A(0, 0)), 1e-12);
  EXPECT_NEAR(f.B(0, 0).real(), std::sqrt(2.0), 1e-12);
  EXPECT_LT(f.residual, 1e-12);
}

TEST(Positive, ScalarFactorization) {
  const auto f = rosenblatt_factorize(scalar(-I_unit), scalar(0.0), scalar(-0.5 * I_unit));
  EXPECT_NEAR(f.A(0, 0).real(), (std::sqrt(3.0) - 1) / 2, 1e-12);
  EXPECT_NEAR(f.B(0, 0).real(), (std::sqrt(3.0) + 1) / 2, 1e-12);
  EXPECT_LT(std::abs(f.A(0, 0).imag()) + std::abs(f.B(0, 0).imag()), 1e-12);
  EXPECT_LT(f.residual, 1e-12);
  EXPECT_GT(f.root_margin, 0.0);
  // The right factor's root -B/A lies outside the disk.
  EXPECT_NEAR(f.root_margin, std::abs(f.B(0, 0) / f.A(0, 0)) - 1.0, 1e-10);
  const auto T = reconstruct(f.A, f.B);
  EXPECT_NEAR(T[0](0, 0).imag(), -1.0, 1e-12);
  const cplx beta = T[1](0, 0) + I_unit * T[2](0, 0);
  EXPECT_LT(std::abs(beta - 0.5), 1e-12);
}

TEST(Positive, RandomFactorizationsRoundTrip) {
  std::mt19937_64 rng(62);
  int done = 0;
  while (done < 30) {
    const Eigen::Index n = 1 + done % 3;
    const auto T = random_positive(n, rng);
    if (!positivity_report(T[0], T[1], T[2]).sampled_positive()) continue;
    ++done;
    const auto f = rosenblatt_factorize(T[0], T[1], T[2]);
    EXPECT_LT(f.residual, 1e-8);
    EXPECT_LT(maxabs(f.B - f.B.adjoint()), 1e-12);
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(f.B));
    EXPECT_GT(es.eigenvalues()(0), 0.0);
    EXPECT_GT(f.root_margin, 0.0);
    const auto L = lax_from_quadruple({Matrix::Zero(n, n), T[0], T[1], T[2]});
    for (cplx z : {cplx(0.0), cplx(1.0), cplx(-1.0), I_unit, cplx(2.0)}) {
      EXPECT_LT((L.T(z) - factor_product(f.A, f.B, z)).norm(), 1e-8);
    }
    // det(B + A^* zeta) has no root in the closed disk.
    Eigen::ComplexEigenSolver<Matrix> ces(Matrix(-f.B.inverse() * f.A.adjoint()), false);
    for (Eigen::Index k = 0; k < ces.eigenvalues().size(); ++k) EXPECT_LT(std::abs(ces.eigenvalues()(k)), 1.0);
    const auto back = reconstruct(f.A, f.B);
    for (int i = 0; i < 3; ++i) EXPECT_LT(maxabs(back[i] - T[i]), 1e-8);
  }
}

TEST(Positive, FactorizationRejectsBadInput) {
  const auto e = su2_basis();
  EXPECT_THROW(rosenblatt_factorize(e[0], e[1], e[2]), DomainError);
  LaxPolynomial L{scalar(1.0), scalar(2.0), scalar(3.0), scalar(0.0), scalar(0.0)};
  EXPECT_THROW(rosenblatt_factorize(L), DomainError);
}

TEST(Positive, FlowRhsProperties) {
  Matrix A = Matrix::Zero(2, 2), B = Matrix::Zero(2, 2);
  A.diagonal() << 1.0, 2.0;
  B.diagonal() << -0.5, 3.0;
  const auto [dA, dB] = ab_flow_rhs(A, B);
  EXPECT_EQ(maxabs(dA) + maxabs(dB), 0.0);

  std::mt19937_64 rng(63);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    Matrix X(3, 3), Y(3, 3);
    for (Eigen::Index i = 0; i < 9; ++i) {
      X(i) = cplx(g(rng), g(rng));
      Y(i) = cplx(g(rng), g(rng));
    }
    const auto [dX, dY] = ab_flow_rhs(X, Y);
    const auto [sY, sX] = ab_flow_rhs(Y, X);
    EXPECT_LT(maxabs(sX - dX), 1e-13);
    EXPECT_LT(maxabs(sY - dY), 1e-13);
    const double dtr = 2.0 * (dX * X.adjoint() + Y.adjoint() * dY).trace().real();
    EXPECT_NEAR(dtr, 0.0, 1e-12);
  }
  EXPECT_THROW(ab_flow_rhs(Matrix::Zero(2, 2), Matrix::Zero(3, 3)), DimensionError);
}

TEST(Positive, StationaryDiagonalFlow) {
  Matrix A = Matrix::Zero(2, 2), B = Matrix::Zero(2, 2);
  A.diagonal() << 0.3, 0.2;
  B.diagonal() << 1.0, 1.5;
  SolverConfig cfg;
  cfg.steps = 100;
  const auto p = integrate_ab(A, B, 0.0, 1.0, cfg);
  ASSERT_EQ(p.A.size(), 101u);
  for (std::size_t k = 0; k < p.A.size(); ++k) {
    EXPECT_LT(maxabs(p.A[k] - A), 1e-15);
    EXPECT_LT(maxabs(p.B[k] - B), 1e-15);
  }
}

TEST(Positive, FlowReconstructionMatchesDirectIntegration) {
  const double mu = 2.0;
  Quadruple init = su2_closed_form(1.0, 0.0, 0.8, 0.0);
  init[1] -= I_unit * mu * Matrix::Identity(2, 2);
  const auto direct = integrate(init, 0.0, 1.0);
  const auto f = rosenblatt_factorize(init[1], init[2], init[3]);
  const auto path = integrate_ab(f.A, f.B, 0.0, 1.0);
  const auto rec = reconstruct(path);
  double err = 0.0, drift = 0.0;
  const double tr0 = ab_trace_invariant(path.A.front(), path.B.front());
  for (std::size_t k = 0; k < rec.samples.size(); ++k) {
    for (std::size_t i = 1; i < 4; ++i) err = std::max(err, maxabs(rec.samples[k][i] - direct.samples[k][i]));
    drift = std::max(drift, std::abs(ab_trace_invariant(path.A[k], path.B[k]) - tr0));
    const auto& q = rec.samples[k];
    EXPECT_TRUE(positivity_report(q[1], q[2], q[3]).sampled_positive());
  }
  EXPECT_LT(err, 1e-6);
  EXPECT_LT(drift, 1e-10);
  EXPECT_LT(equation_residual(rec), 1e-6);
}

TEST(Positive, NormBound) {
  std::mt19937_64 rng(64);
  const LieElement T1 = random_lie(2, rng);
  const auto z = norm_bound_check(T1, Matrix::Zero(2, 2), Matrix::Zero(2, 2));
  EXPECT_EQ(z.lhs, 0.0);
  EXPECT_TRUE(z.holds);
  const auto s = norm_bound_check(scalar(-I_unit), scalar(0.0), scalar(-0.5 * I_unit));
  EXPECT_NEAR(s.lhs, 0.5, 1e-15);
  EXPECT_NEAR(s.rhs, 2.0, 1e-15);
  EXPECT_TRUE(s.holds);
  int done = 0;
  while (done < 100) {
    const auto T = random_positive(2, rng, 1.0);
    if (!positivity_report(T[0], T[1], T[2]).sampled_positive()) continue;
    ++done;
    EXPECT_TRUE(norm_bound_check(T[0], T[1], T[2]).holds);
  }
}

}  // namespace positive_test
