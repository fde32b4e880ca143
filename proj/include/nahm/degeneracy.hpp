#ifndef NAHM_DEGENERACY_HPP
#define NAHM_DEGENERACY_HPP

// The operator
//   Delta_T xi = xi'' + [T0', xi] + 2[T0, xi'] + sum_i eta_ii [T_i, [T_i, xi]],  eta = (1, 1, -1, -1)
// and the Dirichlet kernel test by shooting xi'(0) -> xi(1) with xi(0) = 0.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "nahm/errors.hpp"
#include "nahm/flow.hpp"
#include "nahm/grid.hpp"
#include "nahm/liealg.hpp"

namespace nahm {

inline constexpr std::array<double, 4> kEta4{1.0, 1.0, -1.0, -1.0};

inline std::vector<LieElement> delta_apply(const Trajectory& T, const std::vector<LieElement>& xi) {
  require_same_grid(T, xi.size(), "delta_apply");
  for (const auto& X : xi) require_same_size(T.samples.front()[0], X, "delta_apply");
  const double h = T.h();
  const auto dxi = grid::derivative(xi, h);
  const auto ddxi = grid::second_derivative(xi, h);
  const auto dT0 = grid::derivative(T.component(0), h);
  std::vector<LieElement> out(xi.size());
  for (std::size_t k = 0; k < xi.size(); ++k) {
    const Quadruple& q = T.samples[k];
    Matrix r = ddxi[k] + bracket(dT0[k], xi[k]) + 2.0 * bracket(q[0], dxi[k]);
    for (std::size_t i = 0; i < 4; ++i) r += kEta4[i] * bracket(q[i], bracket(q[i], xi[k]));
    out[k] = project_antihermitian(r);
  }
  return out;
}

enum class Verdict { degenerate, nondegenerate, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::degenerate:
      return "degenerate";
    case Verdict::nondegenerate:
      return "nondegenerate";
    default:
      return "inconclusive";
  }
}

/// su(n) when every sample is traceless, u(n) otherwise.
inline Algebra detect_algebra(const Trajectory& T, double tol = 1e-10) {
  for (const auto& q : T.samples) {
    for (const auto& X : q.T) {
      if (std::abs(X.trace()) > tol) return Algebra::un;
    }
  }
  return Algebra::sun;
}

namespace detail {

/// Coefficients of the first-order system z' = [[0, 1], [K, M]] z in
/// orthonormal coordinates: K = -(ad T0' + sum eta_ii ad(T_i)^2), M = -2 ad T0.
struct ShootingCoeffs {
  Eigen::MatrixXd K;
  Eigen::MatrixXd M;
};

inline ShootingCoeffs shooting_coeffs(const Quadruple& q, const Matrix& dT0, const std::vector<LieElement>& basis,
                                      const InnerProduct& ip) {
  const Eigen::MatrixXd ad0 = ad_matrix(q[0], basis, ip);
  Eigen::MatrixXd K = -ad_matrix(dT0, basis, ip);
  for (std::size_t i = 0; i < 4; ++i) {
    const Eigen::MatrixXd a = i == 0 ? ad0 : ad_matrix(q[i], basis, ip);
    K -= kEta4[i] * (a * a);
  }
  return {K, -2.0 * ad0};
}

struct Fundamental {
  Eigen::MatrixXd X;  // xi
  Eigen::MatrixXd V;  // xi'

  friend Fundamental operator+(const Fundamental& a, const Fundamental& b) { return {a.X + b.X, a.V + b.V}; }
  friend Fundamental operator*(double s, const Fundamental& a) { return {s * a.X, s * a.V}; }
};

inline Eigen::MatrixXd shoot(const std::vector<ShootingCoeffs>& nodes, const std::vector<ShootingCoeffs>& mids,
                             double h) {
  const Eigen::Index d = nodes.front().K.rows();
  Fundamental z{Eigen::MatrixXd::Zero(d, d), Eigen::MatrixXd::Identity(d, d)};
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    auto f = [&](int s, const Fundamental& y) {
      const ShootingCoeffs& c = s == 0 ? nodes[k] : (s == 1 ? mids[k] : nodes[k + 1]);
      return Fundamental{y.V, c.K * y.X + c.M * y.V};
    };
    z = grid::rk4_step(z, h, f);
    if (!z.X.allFinite() || !z.V.allFinite()) {
      throw NumericalError("shooting_matrix: non-finite value at step " + std::to_string(k + 1));
    }
  }
  return z.X;
}

}  // namespace detail

/// Column k is the coordinate vector of xi(1) for Delta_T xi = 0, xi(0) = 0,
/// xi'(0) = b_k, with {b_k} orthonormal in the chosen algebra.  T between
/// nodes comes from cubic interpolation of the samples.
inline Eigen::MatrixXd shooting_matrix(const Trajectory& T, Algebra alg, const InnerProduct& ip = InnerProduct{}) {
  if (T.samples.size() < 6) throw DimensionError("shooting_matrix: need at least 5 steps");
  const auto basis = orthonormal_basis(T.n(), alg, ip);
  const double h = T.h();
  std::array<std::vector<Matrix>, 4> comp;
  std::array<std::vector<Matrix>, 4> comp_mid;
  for (std::size_t i = 0; i < 4; ++i) {
    comp[i] = T.component(i);
    comp_mid[i] = grid::midpoints(std::span<const Matrix>(comp[i]));
  }
  const auto dT0 = grid::derivative(comp[0], h);
  const auto dT0_mid = grid::midpoints(std::span<const Matrix>(dT0));
  std::vector<detail::ShootingCoeffs> nodes, mids;
  nodes.reserve(T.samples.size());
  mids.reserve(T.samples.size());
  for (std::size_t k = 0; k < T.samples.size(); ++k) {
    nodes.push_back(detail::shooting_coeffs(T.samples[k], dT0[k], basis, ip));
    if (k + 1 < T.samples.size()) {
      const Quadruple qm(comp_mid[0][k], comp_mid[1][k], comp_mid[2][k], comp_mid[3][k]);
      mids.push_back(detail::shooting_coeffs(qm, dT0_mid[k], basis, ip));
    }
  }
  return detail::shoot(nodes, mids, h);
}

inline Eigen::MatrixXd shooting_matrix(const Trajectory& T, const InnerProduct& ip = InnerProduct{}) {
  return shooting_matrix(T, detect_algebra(T), ip);
}

/// Shooting with T evaluated exactly at every RK4 stage (e.g. closed forms).
/// T0' comes from `dT0` when given, else from a fourth-order difference.
inline Eigen::MatrixXd shooting_matrix(const std::function<Quadruple(double)>& T, double t_start, double t_end,
                                       int steps, Algebra alg, const InnerProduct& ip = InnerProduct{},
                                       const std::function<LieElement(double)>& dT0 = {}) {
  if (steps < 1) throw DomainError("shooting_matrix: steps must be >= 1");
  const Eigen::Index n = T(t_start).n();
  const auto basis = orthonormal_basis(n, alg, ip);
  const double h = (t_end - t_start) / steps;
  auto deriv0 = [&](double t) -> Matrix {
    if (dT0) return dT0(t);
    const double d = 1e-4;
    return (-T(t + 2 * d)[0] + 8.0 * T(t + d)[0] - 8.0 * T(t - d)[0] + T(t - 2 * d)[0]) / (12.0 * d);
  };
  std::vector<detail::ShootingCoeffs> nodes, mids;
  for (int k = 0; k <= steps; ++k) {
    const double t = t_start + k * h;
    nodes.push_back(detail::shooting_coeffs(T(t), deriv0(t), basis, ip));
    if (k < steps) mids.push_back(detail::shooting_coeffs(T(t + 0.5 * h), deriv0(t + 0.5 * h), basis, ip));
  }
  return detail::shoot(nodes, mids, h);
}

struct DegeneracyReport {
  Eigen::MatrixXd shooting_matrix;
  Eigen::VectorXd singular_values;  ///< descending
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  double determinant = 0.0;
  Verdict verdict = Verdict::inconclusive;
  Algebra algebra = Algebra::un;
  double tol_low = 1e-6;
  double tol_high = 1e-3;
};

inline DegeneracyReport degeneracy_report_from_matrix(const Eigen::MatrixXd& S, Algebra alg, double tol_low = 1e-6,
                                                      double tol_high = 1e-3) {
  DegeneracyReport r;
  r.shooting_matrix = S;
  r.algebra = alg;
  r.tol_low = tol_low;
  r.tol_high = tol_high;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(S);
  r.singular_values = svd.singularValues();
  r.sigma_max = r.singular_values(0);
  r.sigma_min = r.singular_values(r.singular_values.size() - 1);
  r.determinant = S.determinant();
  if (r.sigma_min <= tol_low * r.sigma_max) {
    r.verdict = Verdict::degenerate;
  } else if (r.sigma_min > tol_high * r.sigma_max) {
    r.verdict = Verdict::nondegenerate;
  } else {
    r.verdict = Verdict::inconclusive;
  }
  return r;
}

inline DegeneracyReport degeneracy_report(const Trajectory& T, double tol_low = 1e-6, double tol_high = 1e-3,
                                          const InnerProduct& ip = InnerProduct{}) {
  const Algebra alg = detect_algebra(T);
  return degeneracy_report_from_matrix(shooting_matrix(T, alg, ip), alg, tol_low, tol_high);
}

struct PiBound {
  double bound_value = 0.0;  ///< 2 sup (|T2|^2 + |T3|^2)
  bool certified_nondegenerate = false;
};

/// One-sided sufficient test: bound < pi^2 rules out degeneracy.
inline PiBound pi_bound_precheck(const Trajectory& T, const InnerProduct& ip = InnerProduct{}) {
  PiBound b;
  for (const auto& q : T.samples) b.bound_value = std::max(b.bound_value, 2.0 * (norm_sq(q[2], ip) + norm_sq(q[3], ip)));
  b.certified_nondegenerate = b.bound_value < std::numbers::pi * std::numbers::pi;
  return b;
}

}  // namespace nahm

#endif  // NAHM_DEGENERACY_HPP
