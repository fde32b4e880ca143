#ifndef NAHM_POSITIVE_HPP
#define NAHM_POSITIVE_HPP

// The positive part: triples with T(zeta) zeta^-1 positive definite on
// |zeta| = 1, their factorization T(zeta) = (A + B^* zeta)(B + A^* zeta)
// with B Hermitian positive definite, and the A-B flow
//   A' = (B^*B A - A B B^*) / 2,   B' = (A^*A B - B A A^*) / 2.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "nahm/errors.hpp"
#include "nahm/flow.hpp"
#include "nahm/grid.hpp"
#include "nahm/liealg.hpp"
#include "nahm/spectral.hpp"

namespace nahm {

struct PositivityReport {
  double min_eig = 0.0;  ///< min over samples of lambda_min(H(theta))
  double theta_min = 0.0;
  int samples = 0;
  /// min_eig minus the largest possible dip between samples
  /// (|H'(theta)| <= 2|beta|, so at most 2|beta| pi / samples).
  double margin = 0.0;

  bool sampled_positive() const { return min_eig > 0.0; }
  bool certified() const { return margin > 0.0; }
  const char* status() const {
    return certified() ? "positive" : (sampled_positive() ? "sampled-positive only" : "not positive");
  }
};

/// H(theta) = beta e^{-i theta} + 2i T1 + beta^* e^{i theta}, beta = T2 + i T3.
inline Matrix positivity_matrix(const LieElement& T1, const LieElement& T2, const LieElement& T3, double theta) {
  const Matrix beta = T2 + I_unit * T3;
  const cplx z = std::polar(1.0, theta);
  return hermitian_part(beta * std::conj(z) + 2.0 * I_unit * T1 + beta.adjoint() * z);
}

inline PositivityReport positivity_report(const LieElement& T1, const LieElement& T2, const LieElement& T3,
                                          int samples = 64) {
  require_same_size(T1, T2, "positivity_report");
  require_same_size(T1, T3, "positivity_report");
  if (samples < 1) throw DomainError("positivity_report: samples must be >= 1");
  PositivityReport r;
  r.samples = samples;
  r.min_eig = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const double th = 2.0 * std::numbers::pi * s / samples;
    Eigen::SelfAdjointEigenSolver<Matrix> es(positivity_matrix(T1, T2, T3, th), Eigen::EigenvaluesOnly);
    if (es.eigenvalues()(0) < r.min_eig) {
      r.min_eig = es.eigenvalues()(0);
      r.theta_min = th;
    }
  }
  r.margin = r.min_eig - 2.0 * spectral_norm(T2 + I_unit * T3) * std::numbers::pi / samples;
  return r;
}

struct FactorPair {
  Matrix A;
  Matrix B;            ///< Hermitian positive definite
  double residual = 0.0;  ///< max |T(zeta) - (A + B^* zeta)(B + A^* zeta)| over 16 circle points and {0, 2}
  /// min |zeta| over roots of det(B + A^* zeta), minus 1; infinite when A = 0.
  double root_margin = std::numeric_limits<double>::infinity();
};

inline Matrix factor_product(const Matrix& A, const Matrix& B, cplx z) {
  return (A + B.adjoint() * z) * (B + A.adjoint() * z);
}

inline double factorization_residual(const LaxPolynomial& L, const Matrix& A, const Matrix& B) {
  std::vector<cplx> pts{0.0, 2.0};
  for (int s = 0; s < 16; ++s) pts.push_back(std::polar(1.0, 2.0 * std::numbers::pi * s / 16));
  double r = 0.0;
  for (const cplx z : pts) r = std::max(r, (L.T(z) - factor_product(A, B, z)).norm());
  return r;
}

namespace detail {

/// Matrix sign function by scaled Newton iteration.
inline Matrix matrix_sign(Matrix S) {
  const Eigen::Index m = S.rows();
  for (int it = 0; it < 100; ++it) {
    Eigen::PartialPivLU<Matrix> lu(S);
    const Matrix Si = lu.inverse();
    if (!Si.allFinite()) throw NumericalError("matrix_sign: singular iterate");
    const double mu = it < 20 ? std::pow(std::abs(lu.determinant()), -1.0 / static_cast<double>(m)) : 1.0;
    const double muc = std::isfinite(mu) && mu > 0 ? mu : 1.0;
    const Matrix next = 0.5 * (muc * S + Si / muc);
    const double change = (next - S).norm();
    S = next;
    if (change <= 1e-14 * S.norm()) return S;
  }
  if (((S * S) - Matrix::Identity(m, m)).norm() > 1e-8 * static_cast<double>(m)) {
    throw NumericalError("matrix_sign: Newton iteration did not converge");
  }
  return S;
}

}  // namespace detail

/// Factorizes T(zeta) = L0 + L1 zeta + L2 zeta^2, positive on the circle.
///
/// The roots of det P(mu), P(mu) = L0 mu^2 + L1 mu + L2 (mu = 1/zeta), split
/// n inside / n outside the unit circle.  The invariant subspace of the
/// companion pencil for the inside roots gives a solvent Y with
/// L0 Y^2 + L1 Y + L2 = 0; then B^2 = P solves P + Y^* P Y = L1 and
/// A = -Y^* B, so that L0 = AB and L2 = B A^*.
inline FactorPair rosenblatt_factorize(const LaxPolynomial& L) {
  const Eigen::Index n = L.n();
  if (L.reality_defect() > 1e-8 * std::max(1.0, L.L1.norm())) {
    throw DomainError("rosenblatt_factorize: coefficients must satisfy L2 = L0^* and L1 = L1^*");
  }
  // H(theta) = L0 e^{-i theta} + L1 + L2 e^{i theta}: the positivity precondition.
  const Matrix T1 = -0.5 * I_unit * L.L1;
  const Matrix T2 = 0.5 * (L.L0 - L.L0.adjoint());
  const Matrix T3 = -0.5 * I_unit * (L.L0 + L.L0.adjoint());
  const PositivityReport pos = positivity_report(T1, T2, T3);
  if (!pos.sampled_positive()) {
    throw DomainError("rosenblatt_factorize: T(zeta)/zeta is not positive definite on the unit circle (min eig " +
                      std::to_string(pos.min_eig) + ")");
  }

  const Eigen::Index m = 2 * n;
  const Matrix I = Matrix::Identity(n, n);
  Matrix Acal = Matrix::Zero(m, m), Bcal = Matrix::Zero(m, m);
  Acal.topRightCorner(n, n) = I;
  Acal.bottomLeftCorner(n, n) = -L.L2;
  Acal.bottomRightCorner(n, n) = -L.L1;
  Bcal.topLeftCorner(n, n) = I;
  Bcal.bottomRightCorner(n, n) = L.L0;

  // Cayley map: |mu| < 1  <->  Re c < 0.  A + B is invertible since T(-1) is.
  Eigen::PartialPivLU<Matrix> lu(Acal + Bcal);
  const Matrix Cay = lu.solve(Acal - Bcal);
  const Matrix sgn = detail::matrix_sign(Cay);
  const Matrix Pi = 0.5 * (Matrix::Identity(m, m) - sgn);

  Eigen::ColPivHouseholderQR<Matrix> qr(Pi);
  if (qr.rank() != n) {
    throw NumericalError("rosenblatt_factorize: root splitting failed (" + std::to_string(qr.rank()) +
                         " roots inside the disk, expected " + std::to_string(n) + ")");
  }
  const Matrix Z = Matrix(qr.householderQ()).leftCols(n);
  const Matrix Z1 = Z.topRows(n);
  const Matrix Z2 = Z.bottomRows(n);
  Eigen::FullPivLU<Matrix> z1lu(Z1);
  if (!z1lu.isInvertible()) throw NumericalError("rosenblatt_factorize: invariant subspace is not a graph");
  const Matrix Y = Z2 * z1lu.inverse();

  // P + Y^* P Y = L1 as a linear system on vec(P).
  const Eigen::Index n2 = n * n;
  Matrix Kr = Matrix::Identity(n2, n2);
  const Matrix Ys = Y.adjoint();
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      // vec(Y^* P Y) = (Y^T kron Y^*) vec(P), column-major vec.
      Kr.block(a * n, b * n, n, n) += Y(b, a) * Ys;
    }
  }
  const Eigen::VectorXcd rhs = Eigen::Map<const Eigen::VectorXcd>(Matrix(L.L1).data(), n2);
  const Eigen::VectorXcd vp = Kr.partialPivLu().solve(rhs);
  const Matrix P = hermitian_part(Eigen::Map<const Matrix>(vp.data(), n, n));
  Eigen::SelfAdjointEigenSolver<Matrix> pes(P, Eigen::EigenvaluesOnly);
  if (!(pes.eigenvalues()(0) > 0.0)) throw NumericalError("rosenblatt_factorize: B^2 is not positive definite");

  FactorPair fp;
  fp.B = sqrt_hermitian(P);
  fp.A = -Ys * fp.B;
  fp.residual = factorization_residual(L, fp.A, fp.B);
  Eigen::ComplexEigenSolver<Matrix> yes(Y, false);
  const double rho = yes.eigenvalues().cwiseAbs().maxCoeff();
  fp.root_margin = rho > 1e-300 ? 1.0 / rho - 1.0 : std::numeric_limits<double>::infinity();
  if (fp.root_margin < 1e-8) throw NumericalError("rosenblatt_factorize: root on the unit circle");
  return fp;
}

inline FactorPair rosenblatt_factorize(const LieElement& T1, const LieElement& T2, const LieElement& T3) {
  return rosenblatt_factorize(lax_from_quadruple({Matrix::Zero(T1.rows(), T1.cols()), T1, T2, T3}));
}

// ---------------------------------------------------------------------------
// A-B flow

inline std::pair<Matrix, Matrix> ab_flow_rhs(const Matrix& A, const Matrix& B) {
  require_same_size(A, B, "ab_flow_rhs");
  return {0.5 * (B.adjoint() * B * A - A * B * B.adjoint()), 0.5 * (A.adjoint() * A * B - B * A * A.adjoint())};
}

inline double ab_trace_invariant(const Matrix& A, const Matrix& B) {
  return (A * A.adjoint() + B.adjoint() * B).trace().real();
}

struct ABPath {
  double t_start = 0.0;
  double t_end = 1.0;
  std::vector<Matrix> A, B;

  double time(std::size_t k) const { return t_start + (t_end - t_start) * static_cast<double>(k) / (A.size() - 1); }
};

inline ABPath integrate_ab(const Matrix& A0, const Matrix& B0, double t_start, double t_end,
                           const SolverConfig& cfg = {}) {
  require_same_size(A0, B0, "integrate_ab");
  cfg.validate();
  ABPath p{t_start, t_end, {A0}, {B0}};
  const double h = (t_end - t_start) / cfg.steps;
  grid::MatTuple<2> y{{A0, B0}};
  auto f = [](int, const grid::MatTuple<2>& v) {
    auto [dA, dB] = ab_flow_rhs(v[0], v[1]);
    return grid::MatTuple<2>{{std::move(dA), std::move(dB)}};
  };
  for (int k = 0; k < cfg.steps; ++k) {
    y = grid::rk4_step(y, h, f);
    if (!y.all_finite()) throw NumericalError("integrate_ab: non-finite state at step " + std::to_string(k + 1));
    p.A.push_back(y[0]);
    p.B.push_back(y[1]);
  }
  return p;
}

/// T1 = -(i/2)(A A^* + B^* B), T2 + i T3 = A B.
inline Triple reconstruct(const Matrix& A, const Matrix& B) {
  require_same_size(A, B, "reconstruct");
  const Matrix M = A * B;
  return {project_antihermitian(-0.5 * I_unit * (A * A.adjoint() + B.adjoint() * B)),
          project_antihermitian(0.5 * (M - M.adjoint())), project_antihermitian(-0.5 * I_unit * (M + M.adjoint()))};
}

inline Trajectory reconstruct(const ABPath& p) {
  Trajectory tr{p.t_start, p.t_end, {}};
  for (std::size_t k = 0; k < p.A.size(); ++k) {
    const auto T = reconstruct(p.A[k], p.B[k]);
    tr.samples.push_back({Matrix::Zero(T[0].rows(), T[0].cols()), T[0], T[1], T[2]});
  }
  return tr;
}

struct NormBound {
  double lhs = 0.0;  ///< |T2 + i T3| (spectral)
  double rhs = 0.0;  ///< 2 |T1| (spectral)
  bool holds = false;
};

inline NormBound norm_bound_check(const LieElement& T1, const LieElement& T2, const LieElement& T3) {
  NormBound b;
  b.lhs = spectral_norm(T2 + I_unit * T3);
  b.rhs = 2.0 * spectral_norm(T1);
  b.holds = b.lhs <= b.rhs + 1e-10;
  return b;
}

}  // namespace nahm

#endif  // NAHM_POSITIVE_HPP
