#ifndef NAHM_STABILITY_HPP
#define NAHM_STABILITY_HPP

// Commuting triples as critical points of the reduced flow: the operator
// (ad tau2)^2 + (ad tau3)^2 - (ad tau1)^2, the Jacobian of the flow and
// finite-horizon convergence experiments.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "nahm/degeneracy.hpp"
#include "nahm/errors.hpp"
#include "nahm/flow.hpp"
#include "nahm/liealg.hpp"

namespace nahm {

struct CommutingTriple {
  LieElement tau1, tau2, tau3;

  CommutingTriple(LieElement t1, LieElement t2, LieElement t3, double tol = 1e-10)
      : tau1(std::move(t1)), tau2(std::move(t2)), tau3(std::move(t3)) {
    require_same_size(tau1, tau2, "CommutingTriple");
    require_same_size(tau1, tau3, "CommutingTriple");
    const double c = std::max({bracket(tau1, tau2).norm(), bracket(tau1, tau3).norm(), bracket(tau2, tau3).norm()});
    if (c > tol) throw DomainError("CommutingTriple: brackets do not vanish (" + std::to_string(c) + ")");
  }

  Eigen::Index n() const { return tau1.rows(); }
  Algebra algebra() const {
    return all_traceless({&tau1, &tau2, &tau3}) ? Algebra::sun : Algebra::un;
  }
};

struct StabilityReport {
  Eigen::VectorXd operator_spectrum;  ///< ascending
  Eigen::VectorXcd dv_spectrum;       ///< sorted by real part, then imaginary part
  bool stable = false;
  double eta = 0.0;  ///< smallest positive real part among DV eigenvalues, 0 if none
  Algebra algebra = Algebra::sun;
};

/// Jacobian of (T1,T2,T3) -> (-[T2,T3], [T3,T1], [T1,T2]) at tau in
/// orthonormal coordinates:
///   [[0, ad3, -ad2], [ad3, 0, -ad1], [-ad2, ad1, 0]].
inline Eigen::MatrixXd dv_jacobian(const CommutingTriple& tau, const std::vector<LieElement>& basis,
                                   const InnerProduct& ip = InnerProduct{}) {
  const Eigen::MatrixXd a1 = ad_matrix(tau.tau1, basis, ip);
  const Eigen::MatrixXd a2 = ad_matrix(tau.tau2, basis, ip);
  const Eigen::MatrixXd a3 = ad_matrix(tau.tau3, basis, ip);
  const Eigen::Index d = a1.rows();
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(3 * d, 3 * d);
  J.block(0, d, d, d) = a3;
  J.block(0, 2 * d, d, d) = -a2;
  J.block(d, 0, d, d) = a3;
  J.block(d, 2 * d, d, d) = -a1;
  J.block(2 * d, 0, d, d) = -a2;
  J.block(2 * d, d, d, d) = a1;
  return J;
}

inline StabilityReport stability_spectrum(const CommutingTriple& tau, const InnerProduct& ip = InnerProduct{}) {
  StabilityReport r;
  r.algebra = tau.algebra();
  const auto basis = orthonormal_basis(tau.n(), r.algebra, ip);
  const Eigen::MatrixXd a1 = ad_matrix(tau.tau1, basis, ip);
  const Eigen::MatrixXd a2 = ad_matrix(tau.tau2, basis, ip);
  const Eigen::MatrixXd a3 = ad_matrix(tau.tau3, basis, ip);
  const Eigen::MatrixXd O = a2 * a2 + a3 * a3 - a1 * a1;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (O + O.transpose()), Eigen::EigenvaluesOnly);
  r.operator_spectrum = es.eigenvalues();
  const double scale = std::max(1.0, O.cwiseAbs().maxCoeff());
  r.stable = r.operator_spectrum.size() == 0 || r.operator_spectrum(0) >= -1e-10 * scale;

  Eigen::EigenSolver<Eigen::MatrixXd> ev(dv_jacobian(tau, basis, ip), false);
  std::vector<cplx> lam(ev.eigenvalues().data(), ev.eigenvalues().data() + ev.eigenvalues().size());
  for (auto& z : lam) {
    // Clean rounding noise so the ordering is reproducible.
    if (std::abs(z.real()) < 1e-12 * scale) z.real(0.0);
    if (std::abs(z.imag()) < 1e-12 * scale) z.imag(0.0);
  }
  std::sort(lam.begin(), lam.end(), [](cplx x, cplx y) { return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag(); });
  r.dv_spectrum = Eigen::Map<Eigen::VectorXcd>(lam.data(), static_cast<Eigen::Index>(lam.size()));
  double eta = std::numeric_limits<double>::infinity();
  for (const cplx z : lam) {
    if (z.real() > 1e-9 * scale) eta = std::min(eta, z.real());
  }
  r.eta = std::isfinite(eta) ? eta : 0.0;
  return r;
}

struct EigenDirections {
  std::vector<double> eigenvalues;  ///< one entry per direction
  std::vector<Triple> directions;   ///< unit vectors (Frobenius over the three components)
};

namespace detail {

inline Triple triple_from_coords(const Eigen::VectorXd& v, const std::vector<LieElement>& basis) {
  const auto d = static_cast<Eigen::Index>(basis.size());
  return {from_coords(v.segment(0, d), basis), from_coords(v.segment(d, d), basis),
          from_coords(v.segment(2 * d, d), basis)};
}

inline double triple_norm(const Triple& x) {
  return std::sqrt(x[0].squaredNorm() + x[1].squaredNorm() + x[2].squaredNorm());
}

/// Real eigenvectors of J for real eigenvalues with the requested sign.
inline EigenDirections real_eigendirections(const CommutingTriple& tau, const InnerProduct& ip, bool negative) {
  const auto basis = orthonormal_basis(tau.n(), tau.algebra(), ip);
  const Eigen::MatrixXd J = dv_jacobian(tau, basis, ip);
  const double scale = std::max(1.0, J.cwiseAbs().maxCoeff());
  Eigen::EigenSolver<Eigen::MatrixXd> ev(J, false);
  std::vector<double> lam;
  for (Eigen::Index k = 0; k < ev.eigenvalues().size(); ++k) {
    const cplx z = ev.eigenvalues()(k);
    if (std::abs(z.imag()) > 1e-9 * scale) continue;
    if ((negative && z.real() < -1e-9 * scale) || (!negative && z.real() > 1e-9 * scale)) lam.push_back(z.real());
  }
  std::sort(lam.begin(), lam.end());
  // Merge numerically repeated eigenvalues; the kernel dimension supplies multiplicity.
  std::vector<double> distinct;
  for (double l : lam) {
    if (distinct.empty() || std::abs(l - distinct.back()) > 1e-7 * scale) distinct.push_back(l);
  }
  EigenDirections out;
  const Eigen::Index m = J.rows();
  for (double l : distinct) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J - l * Eigen::MatrixXd::Identity(m, m), Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    for (Eigen::Index k = m - 1; k >= 0 && s(k) <= 1e-8 * scale; --k) {
      Triple x = triple_from_coords(svd.matrixV().col(k), basis);
      const double nx = triple_norm(x);
      for (auto& X : x) X /= nx;
      out.eigenvalues.push_back(l);
      out.directions.push_back(std::move(x));
    }
  }
  return out;
}

}  // namespace detail

/// Directions spanning the real stable eigenspaces (negative eigenvalues) of the Jacobian.
inline EigenDirections stable_directions(const CommutingTriple& tau, const InnerProduct& ip = InnerProduct{}) {
  return detail::real_eigendirections(tau, ip, true);
}

inline EigenDirections unstable_directions(const CommutingTriple& tau, const InnerProduct& ip = InnerProduct{}) {
  return detail::real_eigendirections(tau, ip, false);
}

struct HalflineResult {
  double fitted_rate = std::numeric_limits<double>::quiet_NaN();
  double max_residual = 0.0;  ///< max |log d(t) - fit| over the window
  double initial_distance = 0.0;
  double final_distance = 0.0;  ///< |T(horizon) - tau|
  bool diverged = false;
  bool indeterminate = false;
};

/// Integrates the reduced flow from tau + amplitude * direction and fits the
/// decay rate of log |T(t) - T_inf| over the last `fit_fraction` of
/// [0, horizon].  T_inf is estimated by T(2 * horizon), since the limit is a
/// nearby commuting triple rather than tau itself.
inline HalflineResult halfline_convergence(const CommutingTriple& tau, const Triple& direction, double amplitude,
                                           double horizon = 20.0, int steps_per_unit = 100,
                                           double fit_fraction = 0.5) {
  for (const auto& X : direction) require_same_size(tau.tau1, X, "halfline_convergence");
  if (!(horizon > 0.0) || !(fit_fraction > 0.0 && fit_fraction <= 1.0) || steps_per_unit < 1) {
    throw DomainError("halfline_convergence: need horizon > 0, fit fraction in (0,1], steps_per_unit >= 1");
  }
  HalflineResult r;
  const Eigen::Index n = tau.n();
  const Triple t0{tau.tau1, tau.tau2, tau.tau3};
  Quadruple init{LieElement::Zero(n, n), t0[0] + amplitude * direction[0], t0[1] + amplitude * direction[1],
                 t0[2] + amplitude * direction[2]};
  auto dist = [](const Quadruple& q, const Triple& ref) {
    return std::sqrt((q[1] - ref[0]).squaredNorm() + (q[2] - ref[1]).squaredNorm() + (q[3] - ref[2]).squaredNorm());
  };
  r.initial_distance = dist(init, t0);
  if (r.initial_distance == 0.0) {
    r.indeterminate = true;
    return r;
  }
  SolverConfig cfg;
  cfg.steps = static_cast<int>(std::ceil(2.0 * horizon * steps_per_unit));
  const Trajectory T = integrate(init, 0.0, 2.0 * horizon, cfg);
  const std::size_t K = T.samples.size() / 2;  // node at t = horizon
  r.final_distance = dist(T.samples[K], t0);
  r.diverged = r.final_distance > r.initial_distance;

  const Triple tinf{T.samples.back()[1], T.samples.back()[2], T.samples.back()[3]};
  const auto k0 = static_cast<std::size_t>(std::floor((1.0 - fit_fraction) * static_cast<double>(K)));
  std::vector<double> ts, ys;
  for (std::size_t k = k0; k <= K; ++k) {
    const double d = dist(T.samples[k], tinf);
    if (d > 0.0) {
      ts.push_back(T.time(k));
      ys.push_back(std::log(d));
    }
  }
  if (ts.size() < 2) {
    r.indeterminate = true;
    return r;
  }
  Eigen::MatrixXd X(static_cast<Eigen::Index>(ts.size()), 2);
  Eigen::VectorXd y(static_cast<Eigen::Index>(ts.size()));
  for (std::size_t i = 0; i < ts.size(); ++i) {
    X(static_cast<Eigen::Index>(i), 0) = 1.0;
    X(static_cast<Eigen::Index>(i), 1) = ts[i];
    y(static_cast<Eigen::Index>(i)) = ys[i];
  }
  const Eigen::Vector2d c = X.colPivHouseholderQr().solve(y);
  r.fitted_rate = -c(1);
  r.max_residual = (X * c - y).cwiseAbs().maxCoeff();
  return r;
}

}  // namespace nahm

#endif  // NAHM_STABILITY_HPP
