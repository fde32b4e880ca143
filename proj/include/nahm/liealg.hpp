#ifndef NAHM_LIEALG_HPP
#define NAHM_LIEALG_HPP

// Dense kernel for u(n) / su(n): brackets, the Ad-invariant inner product,
// exponentials and logarithms, orthonormal bases and random elements.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "nahm/errors.hpp"

namespace nahm {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
/// Anti-Hermitian n x n matrix (an element of u(n)).
using LieElement = Eigen::MatrixXcd;
/// Element of U(n).
using UnitaryMatrix = Eigen::MatrixXcd;

inline constexpr cplx I_unit{0.0, 1.0};

/// <X,Y> = -scale * Re tr(XY).  scale = 2 makes the standard su(2) basis
/// orthonormal.
struct InnerProduct {
  double scale = 2.0;

  explicit InnerProduct(double s = 2.0) : scale(s) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw DomainError("inner product scale must be positive, got " + std::to_string(s));
    }
  }
};

enum class Algebra { un, sun };

inline void require_same_size(const Matrix& X, const Matrix& Y, const char* what) {
  if (X.rows() != Y.rows() || X.cols() != Y.cols()) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(X.rows()) + "x" +
                         std::to_string(X.cols()) + " vs " + std::to_string(Y.rows()) + "x" +
                         std::to_string(Y.cols()) + ")");
  }
}

inline Matrix bracket(const Matrix& X, const Matrix& Y) {
  require_same_size(X, Y, "bracket");
  return X * Y - Y * X;
}

inline double inner(const Matrix& X, const Matrix& Y, const InnerProduct& ip = InnerProduct{}) {
  require_same_size(X, Y, "inner");
  // Re tr(XY) without forming the product.
  double acc = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index k = 0; k < X.cols(); ++k) {
      acc += (X(i, k) * Y(k, i)).real();
    }
  }
  return -ip.scale * acc;
}

inline double norm_sq(const Matrix& X, const InnerProduct& ip = InnerProduct{}) { return inner(X, X, ip); }

inline double norm(const Matrix& X, const InnerProduct& ip = InnerProduct{}) {
  return std::sqrt(std::max(0.0, norm_sq(X, ip)));
}

inline LieElement project_antihermitian(const Matrix& X) { return 0.5 * (X - X.adjoint()); }

inline Matrix hermitian_part(const Matrix& X) { return 0.5 * (X + X.adjoint()); }

/// Max-entry deviation from anti-Hermiticity.
inline double antihermitian_defect(const Matrix& X) {
  if (X.size() == 0) return 0.0;
  return (X + X.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_antihermitian(const Matrix& X, double tol = 1e-12) {
  return X.rows() == X.cols() && antihermitian_defect(X) <= tol;
}

inline double unitary_defect(const Matrix& U) {
  const Eigen::Index n = U.rows();
  return (U * U.adjoint() - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
}

/// exp(X) for anti-Hermitian X via the Hermitian eigendecomposition of iX.
inline UnitaryMatrix exp_unitary(const LieElement& X) {
  const Eigen::Index n = X.rows();
  if (n == 0) return UnitaryMatrix(0, 0);
  const Matrix H = hermitian_part(I_unit * X);
  Eigen::SelfAdjointEigenSolver<Matrix> es(H);
  Eigen::VectorXcd phase(n);
  for (Eigen::Index k = 0; k < n; ++k) phase(k) = std::exp(-I_unit * es.eigenvalues()(k));
  return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

/// exp(H) for Hermitian H; the result is Hermitian positive definite.
inline Matrix exp_hermitian(const Matrix& H) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(H));
  const Eigen::VectorXd e = es.eigenvalues().array().exp();
  return es.eigenvectors() * e.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

/// Hermitian square root of a Hermitian positive semidefinite matrix.
inline Matrix sqrt_hermitian(const Matrix& P) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(P));
  const Eigen::VectorXd e = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * e.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

/// Principal logarithm of a unitary matrix, returned anti-Hermitian.
/// Throws DomainError when an eigenvalue sits within `tol` of -1.
inline LieElement log_unitary(const UnitaryMatrix& U, double tol = 1e-9) {
  const Eigen::Index n = U.rows();
  if (n == 0) return LieElement(0, 0);
  // A unitary matrix is normal, so its complex Schur form is diagonal.
  Eigen::ComplexSchur<Matrix> schur(U);
  const Matrix& Q = schur.matrixU();
  const Matrix& Tri = schur.matrixT();
  Eigen::VectorXcd logs(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double angle = std::arg(Tri(k, k));
    if (std::numbers::pi - std::abs(angle) < tol) {
      throw DomainError("log_unitary: eigenvalue -1, principal logarithm undefined");
    }
    logs(k) = cplx(std::log(std::abs(Tri(k, k))), angle);
  }
  return project_antihermitian(Q * logs.asDiagonal() * Q.adjoint());
}

/// Nearest unitary matrix (unitary factor of the polar decomposition).
inline UnitaryMatrix polar_unitary(const Matrix& M) {
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

/// Spectral norm (largest singular value).
inline double spectral_norm(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(M);
  return svd.singularValues()(0);
}

// ---------------------------------------------------------------------------
// su(2)

/// Standard basis of su(2) with [e1,e2] = e3 and cyclic.
inline std::array<LieElement, 3> su2_basis() {
  LieElement e1(2, 2), e2(2, 2), e3(2, 2);
  e1 << 0.5 * I_unit, 0.0, 0.0, -0.5 * I_unit;
  e2 << 0.0, 0.5, -0.5, 0.0;
  e3 << 0.0, 0.5 * I_unit, 0.5 * I_unit, 0.0;
  return {e1, e2, e3};
}

inline std::array<LieElement, 3> su2_from_components(double f1, double f2, double f3) {
  const auto e = su2_basis();
  return {f1 * e[0], f2 * e[1], f3 * e[2]};
}

// ---------------------------------------------------------------------------
// Orthonormal bases and coordinates

inline Eigen::Index algebra_dim(Eigen::Index n, Algebra alg) { return alg == Algebra::un ? n * n : n * n - 1; }

/// Orthonormal basis of u(n) or su(n) for the given inner product: diagonal
/// elements first, then for each k < l the pair (E_kl - E_lk), i(E_kl + E_lk).
/// For su(2) with scale 2 this is exactly (e1, e2, e3).
inline std::vector<LieElement> orthonormal_basis(Eigen::Index n, Algebra alg, const InnerProduct& ip = InnerProduct{}) {
  std::vector<LieElement> basis;
  const double s = ip.scale;
  if (alg == Algebra::un) {
    for (Eigen::Index k = 0; k < n; ++k) {
      LieElement X = LieElement::Zero(n, n);
      X(k, k) = I_unit / std::sqrt(s);
      basis.push_back(X);
    }
  } else {
    for (Eigen::Index k = 1; k < n; ++k) {
      LieElement X = LieElement::Zero(n, n);
      const double c = 1.0 / std::sqrt(s * static_cast<double>(k * (k + 1)));
      for (Eigen::Index j = 0; j < k; ++j) X(j, j) = I_unit * c;
      X(k, k) = -I_unit * (static_cast<double>(k) * c);
      basis.push_back(X);
    }
  }
  const double c = 1.0 / std::sqrt(2.0 * s);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index l = k + 1; l < n; ++l) {
      LieElement R = LieElement::Zero(n, n);
      R(k, l) = c;
      R(l, k) = -c;
      LieElement J = LieElement::Zero(n, n);
      J(k, l) = I_unit * c;
      J(l, k) = I_unit * c;
      basis.push_back(R);
      basis.push_back(J);
    }
  }
  return basis;
}

inline Eigen::VectorXd to_coords(const LieElement& X, const std::vector<LieElement>& basis,
                                 const InnerProduct& ip = InnerProduct{}) {
  Eigen::VectorXd c(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k) c(static_cast<Eigen::Index>(k)) = inner(basis[k], X, ip);
  return c;
}

inline LieElement from_coords(const Eigen::VectorXd& c, const std::vector<LieElement>& basis) {
  LieElement X = LieElement::Zero(basis.front().rows(), basis.front().cols());
  for (std::size_t k = 0; k < basis.size(); ++k) X += c(static_cast<Eigen::Index>(k)) * basis[k];
  return X;
}

/// Real matrix of ad(X) in an orthonormal basis; antisymmetric.
inline Eigen::MatrixXd ad_matrix(const LieElement& X, const std::vector<LieElement>& basis,
                                 const InnerProduct& ip = InnerProduct{}) {
  const auto d = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd M(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const LieElement img = bracket(X, basis[static_cast<std::size_t>(k)]);
    M.col(k) = to_coords(img, basis, ip);
  }
  return M;
}

/// True when every element is traceless to `tol`.
inline bool all_traceless(std::initializer_list<const Matrix*> xs, double tol = 1e-10) {
  for (const Matrix* X : xs) {
    if (std::abs(X->trace()) > tol) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Random elements

/// Random anti-Hermitian matrix with i.i.d. Gaussian entries of width `sigma`.
template <class Rng>
LieElement random_lie(Eigen::Index n, Rng& rng, double sigma = 1.0, Algebra alg = Algebra::un) {
  std::normal_distribution<double> g(0.0, sigma);
  Matrix X(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) X(i, j) = cplx(g(rng), g(rng));
  }
  LieElement A = project_antihermitian(X);
  if (alg == Algebra::sun) A -= (A.trace() / static_cast<double>(n)) * Matrix::Identity(n, n);
  return A;
}

template <class Rng>
UnitaryMatrix random_unitary(Eigen::Index n, Rng& rng, double spread = 2.0) {
  return exp_unitary(random_lie(n, rng, spread));
}

}  // namespace nahm

#endif  // NAHM_LIEALG_HPP
