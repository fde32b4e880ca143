#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nahm/stability.hpp"

namespace stability_test {

using namespace nahm;

Matrix zero2() { return Matrix::Zero(2, 2); }

/// Centered-difference Jacobian of rhs_reduced in orthonormal coordinates.
Eigen::MatrixXd fd_jacobian(const CommutingTriple& tau, const std::vector<LieElement>& basis) {
  const auto d = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd J(3 * d, 3 * d);
  const double s = 1e-5;
  for (Eigen::Index c = 0; c < 3 * d; ++c) {
    Triple p{tau.tau1, tau.tau2, tau.tau3}, m = p;
    p[static_cast<std::size_t>(c / d)] += s * basis[static_cast<std::size_t>(c % d)];
    m[static_cast<std::size_t>(c / d)] -= s * basis[static_cast<std::size_t>(c % d)];
    const auto fp = rhs_reduced(p[0], p[1], p[2]);
    const auto fm = rhs_reduced(m[0], m[1], m[2]);
    for (std::size_t i = 0; i < 3; ++i) {
      J.block(static_cast<Eigen::Index>(i) * d, c, d, 1) = to_coords(Matrix((fp[i] - fm[i]) / (2 * s)), basis);
    }
  }
  return J;
}

TEST(Stability, CommutingTripleValidates) {
  const auto e = su2_basis();
  EXPECT_THROW(CommutingTriple(e[0], e[1], zero2()), DomainError);
  EXPECT_THROW(CommutingTriple(e[0], Matrix::Zero(3, 3), zero2()), DimensionError);
  EXPECT_EQ(CommutingTriple(e[0], zero2(), zero2()).algebra(), Algebra::sun);
  EXPECT_EQ(CommutingTriple(I_unit * Matrix::Identity(2, 2), zero2(), zero2()).algebra(), Algebra::un);
}

TEST(Stability, TimelikeTripleIsStable) {
  const auto e = su2_basis();
  const auto r = stability_spectrum(CommutingTriple(e[0], zero2(), zero2()));
  ASSERT_EQ(r.operator_spectrum.size(), 3);
  EXPECT_NEAR(r.operator_spectrum(0), 0.0, 1e-14);
  EXPECT_NEAR(r.operator_spectrum(1), 1.0, 1e-14);
  EXPECT_NEAR(r.operator_spectrum(2), 1.0, 1e-14);
  EXPECT_TRUE(r.stable);
  EXPECT_NEAR(r.eta, 1.0, 1e-12);
  EXPECT_NEAR(r.dv_spectrum(0).real(), -1.0, 1e-12);
  EXPECT_NEAR(r.dv_spectrum(r.dv_spectrum.size() - 1).real(), 1.0, 1e-12);
}

TEST(Stability, SpacelikeTripleIsUnstable) {
  const auto e = su2_basis();
  const auto r = stability_spectrum(CommutingTriple(zero2(), e[0], zero2()));
  EXPECT_NEAR(r.operator_spectrum(0), -1.0, 1e-14);
  EXPECT_NEAR(r.operator_spectrum(1), -1.0, 1e-14);
  EXPECT_FALSE(r.stable);
}

TEST(Stability, MixedTriple) {
  const auto e = su2_basis();
  const CommutingTriple tau(2.0 * e[0], e[0], zero2());
  const auto r = stability_spectrum(tau);
  EXPECT_TRUE(r.stable);
  EXPECT_NEAR(r.operator_spectrum(0), 0.0, 1e-13);
  EXPECT_NEAR(r.operator_spectrum(1), 3.0, 1e-13);
  EXPECT_NEAR(r.eta, std::sqrt(3.0), 1e-10);
  const auto basis = orthonormal_basis(2, Algebra::sun);
  const Eigen::MatrixXd J = dv_jacobian(tau, basis);
  EXPECT_LT((J - fd_jacobian(tau, basis)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Stability, JacobianMatchesFiniteDifferencesInUn) {
  std::mt19937_64 rng(71);
  // Commuting triples in u(3): simultaneously diagonal in a random frame.
  const auto U = random_unitary(3, rng);
  std::normal_distribution<double> g;
  std::array<LieElement, 3> t;
  for (auto& X : t) {
    Matrix D = Matrix::Zero(3, 3);
    for (int k = 0; k < 3; ++k) D(k, k) = I_unit * g(rng);
    X = project_antihermitian(U * D * U.adjoint());
  }
  const CommutingTriple tau(t[0], t[1], t[2]);
  const auto basis = orthonormal_basis(3, Algebra::un);
  const Eigen::MatrixXd J = dv_jacobian(tau, basis);
  const Eigen::MatrixXd F = fd_jacobian(tau, basis);
  EXPECT_LT((J - F).cwiseAbs().maxCoeff(), 1e-6);
  // Same spectrum, compared as sorted lists.
  Eigen::EigenSolver<Eigen::MatrixXd> ef(F, false);
  std::vector<cplx> lf(ef.eigenvalues().data(), ef.eigenvalues().data() + ef.eigenvalues().size());
  const auto r = stability_spectrum(tau);
  std::vector<cplx> lr(r.dv_spectrum.data(), r.dv_spectrum.data() + r.dv_spectrum.size());
  ASSERT_EQ(lf.size(), lr.size());
  auto less = [](cplx x, cplx y) {
    if (std::abs(x.real() - y.real()) > 1e-6) return x.real() < y.real();
    return x.imag() < y.imag() - 1e-6;
  };
  std::sort(lf.begin(), lf.end(), less);
  std::sort(lr.begin(), lr.end(), less);
  for (std::size_t k = 0; k < lf.size(); ++k) EXPECT_LT(std::abs(lf[k] - lr[k]), 1e-6);
}

TEST(Stability, TimelikeTriplesArePositiveSemidefinite) {
  std::mt19937_64 rng(72);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 2 + trial % 2;
    const auto r = stability_spectrum(CommutingTriple(random_lie(n, rng), Matrix::Zero(n, n), Matrix::Zero(n, n)));
    EXPECT_TRUE(r.stable);
    EXPECT_GT(r.operator_spectrum(0), -1e-10);
  }
}

TEST(Stability, RegularSu2Triples) {
  const auto e = su2_basis();
  std::mt19937_64 rng(73);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int trial = 0; trial < 30; ++trial) {
    const double c1 = U(rng), c2 = U(rng), c3 = U(rng);
    const auto r = stability_spectrum(CommutingTriple(c1 * e[0], c2 * e[0], c3 * e[0]));
    const double v = c1 * c1 - c2 * c2 - c3 * c3;
    std::vector<double> expect{0.0, v, v};
    std::sort(expect.begin(), expect.end());
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(r.operator_spectrum(k), expect[static_cast<std::size_t>(k)], 1e-12);
    EXPECT_EQ(r.stable, v >= 0.0);
    // Nonzero DV eigenvalues square to c1^2 - c2^2 - c3^2.
    for (Eigen::Index k = 0; k < r.dv_spectrum.size(); ++k) {
      const cplx z = r.dv_spectrum(k);
      if (std::abs(z) > 1e-9) EXPECT_LT(std::abs(z * z - v), 1e-9);
    }
  }
}

TEST(Stability, EigenDirections) {
  const auto e = su2_basis();
  const CommutingTriple tau(e[0], zero2(), zero2());
  const auto basis = orthonormal_basis(2, Algebra::sun);
  const Eigen::MatrixXd J = dv_jacobian(tau, basis);
  for (bool stable : {true, false}) {
    const auto dirs = stable ? stable_directions(tau) : unstable_directions(tau);
    ASSERT_EQ(dirs.directions.size(), 2u);
    for (std::size_t k = 0; k < dirs.directions.size(); ++k) {
      EXPECT_NEAR(dirs.eigenvalues[k], stable ? -1.0 : 1.0, 1e-10);
      const auto& x = dirs.directions[k];
      Eigen::VectorXd v(9);
      for (int i = 0; i < 3; ++i) v.segment(3 * i, 3) = to_coords(x[static_cast<std::size_t>(i)], basis);
      EXPECT_LT((J * v - dirs.eigenvalues[k] * v).norm(), 1e-10);
      EXPECT_NEAR(detail::triple_norm(x), 1.0, 1e-12);
    }
  }
}

TEST(Stability, HalflineConvergenceRate) {
  const auto e = su2_basis();
  const CommutingTriple tau(e[0], zero2(), zero2());
  const auto dirs = stable_directions(tau);
  ASSERT_FALSE(dirs.directions.empty());
  const auto r = halfline_convergence(tau, dirs.directions[0], 1e-3);
  EXPECT_FALSE(r.diverged);
  EXPECT_FALSE(r.indeterminate);
  EXPECT_NEAR(r.fitted_rate, -dirs.eigenvalues[0], 0.1 * std::abs(dirs.eigenvalues[0]));
  EXPECT_LT(r.final_distance, r.initial_distance);
}

TEST(Stability, HalflineControls) {
  const auto e = su2_basis();
  const CommutingTriple tau(e[0], zero2(), zero2());
  const Triple dir = stable_directions(tau).directions[0];
  const auto z = halfline_convergence(tau, dir, 0.0);
  EXPECT_TRUE(z.indeterminate);
  EXPECT_TRUE(std::isnan(z.fitted_rate));
  const auto u = halfline_convergence(tau, unstable_directions(tau).directions[0], 1e-3);
  EXPECT_TRUE(u.diverged);
  EXPECT_THROW(halfline_convergence(tau, dir, 1e-3, -1.0), DomainError);
}

}  // namespace stability_test
