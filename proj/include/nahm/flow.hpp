#ifndef NAHM_FLOW_HPP
#define NAHM_FLOW_HPP

// Quadruples, trajectories and the flows of the Nahm-Schmid system:
//
//   T1' + [T0,T1] + [T2,T3] = 0
//   T2' + [T0,T2] - [T3,T1] = 0
//   T3' + [T0,T3] - [T1,T2] = 0
//
// with gauge, boundary and SO(1,2) actions, the explicit su(2) solutions
// and the complex / product reformulations.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "nahm/elliptic.hpp"
#include "nahm/errors.hpp"
#include "nahm/grid.hpp"
#include "nahm/liealg.hpp"

namespace nahm {

struct Quadruple {
  std::array<LieElement, 4> T;

  Quadruple() = default;
  Quadruple(LieElement T0, LieElement T1, LieElement T2, LieElement T3)
      : T{std::move(T0), std::move(T1), std::move(T2), std::move(T3)} {
    for (int i = 1; i < 4; ++i) require_same_size(T[0], T[i], "Quadruple");
    if (T[0].rows() != T[0].cols()) throw DimensionError("Quadruple: components must be square");
  }

  static Quadruple zero(Eigen::Index n) {
    const LieElement Z = LieElement::Zero(n, n);
    return {Z, Z, Z, Z};
  }

  Eigen::Index n() const { return T[0].rows(); }
  LieElement& operator[](std::size_t i) { return T[i]; }
  const LieElement& operator[](std::size_t i) const { return T[i]; }

  double antihermitian_defect() const {
    double d = 0.0;
    for (const auto& X : T) d = std::max(d, nahm::antihermitian_defect(X));
    return d;
  }

  Quadruple projected() const {
    return {project_antihermitian(T[0]), project_antihermitian(T[1]), project_antihermitian(T[2]),
            project_antihermitian(T[3])};
  }
};

/// Samples of a quadruple at steps+1 uniform nodes of [t_start, t_end].
struct Trajectory {
  double t_start = 0.0;
  double t_end = 1.0;
  std::vector<Quadruple> samples;

  std::size_t steps() const { return samples.empty() ? 0 : samples.size() - 1; }
  double h() const { return (t_end - t_start) / static_cast<double>(steps()); }
  double time(std::size_t k) const { return t_start + static_cast<double>(k) * h(); }
  Eigen::Index n() const { return samples.front().n(); }

  std::vector<Matrix> component(std::size_t i) const {
    std::vector<Matrix> c;
    c.reserve(samples.size());
    for (const auto& q : samples) c.push_back(q[i]);
    return c;
  }
};

inline void require_same_grid(const Trajectory& a, std::size_t other_size, const char* what) {
  if (a.samples.size() != other_size) {
    throw DimensionError(std::string(what) + ": grid mismatch (" + std::to_string(a.samples.size()) + " vs " +
                         std::to_string(other_size) + " nodes)");
  }
}

enum class Method {
  rk4,                    ///< RK4 on (T1,T2,T3) with T0 prescribed
  rk4_reunitarized_gauge  ///< RK4 in the T0 = 0 gauge, then a re-unitarized gauge transport
};

struct SolverConfig {
  int steps = 2000;
  Method method = Method::rk4;
  double tolerance = 1e-8;

  void validate() const {
    if (steps < 1) throw DomainError("SolverConfig: steps must be >= 1, got " + std::to_string(steps));
  }
};

struct GaugePath {
  std::vector<UnitaryMatrix> samples;

  GaugePath() = default;
  explicit GaugePath(std::vector<UnitaryMatrix> s, double tol = 1e-10) : samples(std::move(s)) {
    for (std::size_t k = 0; k < samples.size(); ++k) {
      if (unitary_defect(samples[k]) > tol) {
        throw DomainError("GaugePath: sample " + std::to_string(k) + " is not unitary");
      }
    }
  }

  static GaugePath identity(Eigen::Index n, std::size_t nodes) {
    return GaugePath(std::vector<UnitaryMatrix>(nodes, UnitaryMatrix::Identity(n, n)));
  }

  /// Samples u(t) on the grid of `like`.
  static GaugePath sample(const std::function<UnitaryMatrix(double)>& u, const Trajectory& like) {
    std::vector<UnitaryMatrix> s;
    s.reserve(like.samples.size());
    for (std::size_t k = 0; k < like.samples.size(); ++k) s.push_back(u(like.time(k)));
    return GaugePath(std::move(s), 1e-9);
  }
};

inline const Eigen::Matrix3d& eta3() {
  static const Eigen::Matrix3d e = Eigen::Vector3d(1.0, -1.0, -1.0).asDiagonal();
  return e;
}

/// Element of SO(1,2) acting on (T1,T2,T3); T1 is the timelike direction.
struct LorentzElement {
  Eigen::Matrix3d A;

  explicit LorentzElement(const Eigen::Matrix3d& m, double tol = 1e-10) : A(m) {
    const double scale = std::max(1.0, m.squaredNorm());
    const double defect = (m.transpose() * eta3() * m - eta3()).cwiseAbs().maxCoeff();
    if (defect > tol * scale) {
      throw DomainError("LorentzElement: A^T eta A != eta (defect " + std::to_string(defect) + ")");
    }
    if (std::abs(m.determinant() - 1.0) > tol * scale) {
      throw DomainError("LorentzElement: det A must be 1");
    }
  }

  static LorentzElement identity() { return LorentzElement(Eigen::Matrix3d::Identity()); }

  /// Boost mixing T1 with T_j (j = 2 or 3) by rapidity r.
  static LorentzElement boost(int j, double r) {
    if (j != 2 && j != 3) throw DomainError("boost: plane must be (1,2) or (1,3)");
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    const int k = j - 1;
    m(0, 0) = m(k, k) = std::cosh(r);
    m(0, k) = m(k, 0) = std::sinh(r);
    return LorentzElement(m);
  }

  /// Rotation of (T2,T3) by angle theta.
  static LorentzElement rotation23(double theta) {
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    m(1, 1) = m(2, 2) = std::cos(theta);
    m(1, 2) = -std::sin(theta);
    m(2, 1) = std::sin(theta);
    return LorentzElement(m);
  }

  LorentzElement inverse() const { return LorentzElement(eta3() * A.transpose() * eta3()); }
  LorentzElement operator*(const LorentzElement& o) const { return LorentzElement(A * o.A, 1e-9); }
};

// ---------------------------------------------------------------------------
// Right-hand sides

using Triple = std::array<LieElement, 3>;

inline Triple rhs_reduced(const LieElement& T1, const LieElement& T2, const LieElement& T3) {
  return {Matrix(-bracket(T2, T3)), bracket(T3, T1), bracket(T1, T2)};
}

inline Triple rhs_full(const Quadruple& q) {
  const auto r = rhs_reduced(q[1], q[2], q[3]);
  return {Matrix(r[0] - bracket(q[0], q[1])), Matrix(r[1] - bracket(q[0], q[2])), Matrix(r[2] - bracket(q[0], q[3]))};
}

/// phi(T1,T2,T3) = <[T1,T2],T3>; rhs_reduced is minus its gradient for the
/// metric diag(1,-1,-1) on the three factors.
inline double phi(const LieElement& T1, const LieElement& T2, const LieElement& T3,
                  const InnerProduct& ip = InnerProduct{}) {
  return inner(bracket(T1, T2), T3, ip);
}

// ---------------------------------------------------------------------------
// Integration

using T0Profile = std::function<LieElement(double)>;

namespace detail {

inline Trajectory integrate_rk4(const Quadruple& init, double t0, double t1, int steps, const T0Profile& T0) {
  Trajectory tr{t0, t1, {}};
  tr.samples.reserve(static_cast<std::size_t>(steps) + 1);
  const double h = (t1 - t0) / steps;
  auto T0_at = [&](double t) -> LieElement { return T0 ? project_antihermitian(T0(t)) : init[0]; };

  grid::MatTuple<3> y{{init[1], init[2], init[3]}};
  tr.samples.push_back({T0_at(t0), y[0], y[1], y[2]});
  for (int k = 0; k < steps; ++k) {
    const double t = t0 + k * h;
    const std::array<LieElement, 3> stage_T0{T0_at(t), T0_at(t + 0.5 * h), T0_at(t + h)};
    auto f = [&](int s, const grid::MatTuple<3>& v) {
      const auto r = rhs_full(Quadruple(stage_T0[static_cast<std::size_t>(s)], v[0], v[1], v[2]));
      return grid::MatTuple<3>{r};
    };
    y = grid::rk4_step(y, h, f);
    if (!y.all_finite()) {
      throw NumericalError("integrate: non-finite state at step " + std::to_string(k + 1) + " (t = " +
                           std::to_string(t + h) + ")");
    }
    for (auto& m : y.m) m = project_antihermitian(m);
    tr.samples.push_back({stage_T0[2], y[0], y[1], y[2]});
  }
  return tr;
}

}  // namespace detail

Trajectory gauge_apply(const GaugePath& u, const Trajectory& T);

/// Integrates the system from T_init over [t_start, t_end].  T0 follows
/// `T0_profile` when given and is held at T_init.T0 otherwise.
inline Trajectory integrate(const Quadruple& T_init, double t_start, double t_end, const SolverConfig& cfg = {},
                            const T0Profile& T0_profile = {}) {
  cfg.validate();
  if (!(t_end > t_start)) throw DomainError("integrate: need t_end > t_start");
  const Quadruple init = T_init.projected();
  if (cfg.method == Method::rk4) return detail::integrate_rk4(init, t_start, t_end, cfg.steps, T0_profile);

  // Solve in the T0 = 0 gauge, then transport back with g' = -T0 g.
  const Eigen::Index n = init.n();
  Quadruple reduced = init;
  reduced[0] = LieElement::Zero(n, n);
  const Trajectory S = detail::integrate_rk4(reduced, t_start, t_end, cfg.steps, {});
  const double h = S.h();
  std::vector<Matrix> nodes, mids;
  for (std::size_t k = 0; k < S.samples.size(); ++k) {
    nodes.push_back(T0_profile ? project_antihermitian(T0_profile(S.time(k))) : init[0]);
    if (k + 1 < S.samples.size()) {
      mids.push_back(T0_profile ? project_antihermitian(T0_profile(S.time(k) + 0.5 * h)) : init[0]);
    }
  }
  const auto g = grid::transport(grid::HalfStepField<Matrix>(nodes, mids), h, grid::TransportSide::left);
  Trajectory out = S;
  for (std::size_t k = 0; k < S.samples.size(); ++k) {
    out.samples[k][0] = nodes[k];
    for (std::size_t i = 1; i < 4; ++i) {
      out.samples[k][i] = project_antihermitian(g[k] * S.samples[k][i] * g[k].adjoint());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Residuals and conserved quantities

/// Grid sup (Frobenius) of the three moment-map residuals
///   mu_I = -T1' - [T0,T1] - [T2,T3]
///   mu_S =  T2' + [T0,T2] - [T3,T1]
///   mu_T =  T3' + [T0,T3] - [T1,T2]
/// with time derivatives from fourth-order differences.
inline std::array<double, 3> moment_map_residuals(const Trajectory& T) {
  std::array<std::vector<Matrix>, 3> d;
  for (std::size_t i = 0; i < 3; ++i) d[i] = grid::derivative(T.component(i + 1), T.h());
  std::array<double, 3> r{0.0, 0.0, 0.0};
  for (std::size_t k = 0; k < T.samples.size(); ++k) {
    const auto f = rhs_full(T.samples[k]);
    r[0] = std::max(r[0], (d[0][k] - f[0]).norm());
    r[1] = std::max(r[1], (d[1][k] - f[1]).norm());
    r[2] = std::max(r[2], (d[2][k] - f[2]).norm());
  }
  return r;
}

inline double equation_residual(const Trajectory& T) {
  const auto r = moment_map_residuals(T);
  return std::max({r[0], r[1], r[2]});
}

inline constexpr std::array<const char*, 6> kConservedNames{"|T1|^2+|T2|^2", "|T1|^2+|T3|^2", "<T1,T2>",
                                                            "<T1,T3>",       "<T2,T3>",       "C"};

inline std::array<double, 6> conserved_values(const Quadruple& q, const InnerProduct& ip = InnerProduct{}) {
  const double n1 = norm_sq(q[1], ip), n2 = norm_sq(q[2], ip), n3 = norm_sq(q[3], ip);
  return {n1 + n2, n1 + n3, inner(q[1], q[2], ip), inner(q[1], q[3], ip), inner(q[2], q[3], ip),
          2.0 * n1 + n2 + n3};
}

struct ConservedReport {
  double scale = 2.0;
  std::array<double, 6> initial{};
  std::array<double, 6> drift{};  ///< max |q(t) - q(0)| over the grid
  double max_component_norm_sq = 0.0;  ///< sup over t and i of |T_i(t)|^2

  /// Drift relative to |q(0)|, or absolute when |q(0)| <= floor.
  double relative_drift(std::size_t i, double floor = 1e-12) const {
    return std::abs(initial[i]) > floor ? drift[i] / std::abs(initial[i]) : drift[i];
  }
  double max_relative_drift(double floor = 1e-12) const {
    double m = 0.0;
    for (std::size_t i = 0; i < 6; ++i) m = std::max(m, relative_drift(i, floor));
    return m;
  }
};

inline ConservedReport conserved_report(const Trajectory& T, const InnerProduct& ip = InnerProduct{}) {
  ConservedReport rep;
  rep.scale = ip.scale;
  if (T.samples.empty()) return rep;
  rep.initial = conserved_values(T.samples.front(), ip);
  for (const auto& q : T.samples) {
    const auto v = conserved_values(q, ip);
    for (std::size_t i = 0; i < 6; ++i) rep.drift[i] = std::max(rep.drift[i], std::abs(v[i] - rep.initial[i]));
    for (std::size_t i = 1; i < 4; ++i) rep.max_component_norm_sq = std::max(rep.max_component_norm_sq, norm_sq(q[i], ip));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Gauge action, gauge fixing, monodromy

/// u.(T0, T_i) = (u T0 u^-1 - u' u^-1, u T_i u^-1), u' by fourth-order differences.
inline Trajectory gauge_apply(const GaugePath& u, const Trajectory& T) {
  require_same_grid(T, u.samples.size(), "gauge_apply");
  const auto du = grid::derivative(u.samples, T.h());
  Trajectory out{T.t_start, T.t_end, {}};
  out.samples.reserve(T.samples.size());
  for (std::size_t k = 0; k < T.samples.size(); ++k) {
    const UnitaryMatrix& g = u.samples[k];
    const Matrix gi = g.adjoint();
    const Quadruple& q = T.samples[k];
    out.samples.push_back({project_antihermitian(g * q[0] * gi - du[k] * gi), project_antihermitian(g * q[1] * gi),
                           project_antihermitian(g * q[2] * gi), project_antihermitian(g * q[3] * gi)});
  }
  return out;
}

/// Constant gauge transformation (no derivative term).
inline Trajectory conjugate(const UnitaryMatrix& g, const Trajectory& T) {
  Trajectory out = T;
  const Matrix gi = g.adjoint();
  for (auto& q : out.samples) {
    for (auto& X : q.T) X = project_antihermitian(g * X * gi);
  }
  return out;
}

struct GaugeFixResult {
  Trajectory T;  ///< gauge-fixed, T0 = 0
  GaugePath u;
  double T0_residual = 0.0;  ///< sup |u T0 u^-1 - u' u^-1| with u' from differences
};

/// Solves u' = u T0, u(0) = 1 so that u.T has T0 = 0.
inline GaugeFixResult gauge_fix(const Trajectory& T) {
  const auto T0 = T.component(0);
  auto u = grid::transport(grid::HalfStepField<Matrix>(T0), T.h(), grid::TransportSide::right);
  GaugeFixResult res{T, GaugePath(std::move(u), 1e-9), 0.0};
  const auto du = grid::derivative(res.u.samples, T.h());
  for (std::size_t k = 0; k < T.samples.size(); ++k) {
    const Matrix& g = res.u.samples[k];
    const Matrix gi = g.adjoint();
    res.T0_residual = std::max(res.T0_residual, (g * T0[k] * gi - du[k] * gi).norm());
    auto& q = res.T.samples[k];
    q[0].setZero();
    for (std::size_t i = 1; i < 4; ++i) q[i] = project_antihermitian(g * q[i] * gi);
  }
  return res;
}

struct MonodromyReport {
  UnitaryMatrix gamma;  ///< u0(1)
  Triple xi;            ///< (T1(0), T2(0), T3(0))
  /// Boundary moment maps as (value at 0, value at 1):
  /// mu_I = (-T1(0), T1(1)), mu_S = (T2(0), -T2(1)), mu_T = (T3(0), -T3(1)).
  std::array<std::pair<LieElement, LieElement>, 3> boundary_moment;
};

/// Psi(T) = (u0(1), T1(0), T2(0), T3(0)) with u0' = -T0 u0, u0(0) = 1.
inline MonodromyReport monodromy(const Trajectory& T) {
  if (std::abs(T.t_start) > 1e-12 || std::abs(T.t_end - 1.0) > 1e-12) {
    throw DomainError("monodromy: trajectory must live on [0,1]");
  }
  const auto u0 = grid::transport(grid::HalfStepField<Matrix>(T.component(0)), T.h(), grid::TransportSide::left);
  const Quadruple& a = T.samples.front();
  const Quadruple& b = T.samples.back();
  return {u0.back(),
          {a[1], a[2], a[3]},
          {{{Matrix(-a[1]), b[1]}, {a[2], Matrix(-b[2])}, {a[3], Matrix(-b[3])}}}};
}

/// Inverse of the monodromy map: integrates the T0 = 0 system from xi and
/// applies u(t) = exp(t log gamma), so that T0 = -log gamma.
inline Trajectory from_boundary_data(const UnitaryMatrix& gamma, const Triple& xi, const SolverConfig& cfg = {}) {
  for (const auto& X : xi) require_same_size(gamma, X, "from_boundary_data");
  const LieElement L = log_unitary(gamma);
  const Eigen::Index n = gamma.rows();
  const Trajectory S = integrate({LieElement::Zero(n, n), xi[0], xi[1], xi[2]}, 0.0, 1.0, cfg);
  Trajectory out = S;
  for (std::size_t k = 0; k < S.samples.size(); ++k) {
    const UnitaryMatrix u = exp_unitary(S.time(k) * L);
    const Matrix ui = u.adjoint();
    auto& q = out.samples[k];
    q[0] = -L;
    for (std::size_t i = 1; i < 4; ++i) q[i] = project_antihermitian(u * S.samples[k][i] * ui);
  }
  return out;
}

// ---------------------------------------------------------------------------
// SO(1,2) action

inline Quadruple lorentz_apply(const LorentzElement& A, const Quadruple& q) {
  Quadruple r = q;
  for (int i = 0; i < 3; ++i) {
    r[static_cast<std::size_t>(i + 1)] = A.A(i, 0) * q[1] + A.A(i, 1) * q[2] + A.A(i, 2) * q[3];
  }
  return r;
}

inline Trajectory lorentz_apply(const LorentzElement& A, const Trajectory& T) {
  Trajectory out = T;
  for (auto& q : out.samples) q = lorentz_apply(A, q);
  return out;
}

/// G_ij = <T_i, T_j>, i,j = 1..3.
inline Eigen::Matrix3d gram(const Quadruple& q, const InnerProduct& ip = InnerProduct{}) {
  Eigen::Matrix3d G;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      G(i, j) = inner(q[static_cast<std::size_t>(i + 1)], q[static_cast<std::size_t>(j + 1)], ip);
    }
  }
  return G;
}

// ---------------------------------------------------------------------------
// Explicit su(2) solutions

/// (0, a k sn(at+b) e1, a k cn(at+b) e2, -a dn(at+b) e3), kappa in [0,1].
inline Quadruple su2_closed_form(double a, double b, double kappa, double t) {
  const auto j = elliptic::jacobi(a * t + b, kappa);
  const auto T = su2_from_components(a * kappa * j.sn, a * kappa * j.cn, -a * j.dn);
  return {LieElement::Zero(2, 2), T[0], T[1], T[2]};
}

inline Trajectory su2_closed_form_trajectory(double a, double b, double kappa, double t_start, double t_end,
                                             int steps) {
  Trajectory tr{t_start, t_end, {}};
  tr.samples.reserve(static_cast<std::size_t>(steps) + 1);
  const double h = (t_end - t_start) / steps;
  for (int k = 0; k <= steps; ++k) tr.samples.push_back(su2_closed_form(a, b, kappa, t_start + k * h));
  return tr;
}

struct CanonicalForm {
  LorentzElement lorentz = LorentzElement::identity();
  GaugePath gauge;
  std::array<std::vector<double>, 3> profiles;  ///< f_j with u.(A.T)_j = f_j e_j
  double axis_residual = 0.0;
};

namespace detail {

/// Rotation-generator map: Ad(exp(sum th_k e_k)) on coordinates.
inline Eigen::Matrix3d su2_adjoint(const UnitaryMatrix& g) {
  const auto e = su2_basis();
  Eigen::Matrix3d M;
  for (int m = 0; m < 3; ++m) {
    const Matrix img = g * e[static_cast<std::size_t>(m)] * g.adjoint();
    for (int l = 0; l < 3; ++l) M(l, m) = inner(e[static_cast<std::size_t>(l)], img);
  }
  return M;
}

}  // namespace detail

/// Brings an su(2) solution to the form (0, f1 e1, f2 e2, f3 e3): gauges T0
/// away, diagonalizes the Gram form with an SO(1,2) element, reads off the
/// fixed axes and rotates them onto the standard basis.
inline CanonicalForm su2_canonicalize(const Trajectory& T, double tol = 1e-6) {
  if (T.n() != 2) throw DimensionError("su2_canonicalize: need 2x2 data");
  for (const auto& q : T.samples) {
    for (const auto& X : q.T) {
      if (std::abs(X.trace()) > 1e-9) throw DomainError("su2_canonicalize: data must be traceless");
    }
  }
  const InnerProduct ip;
  GaugeFixResult fixed = gauge_fix(T);

  // eta G(t) = eta G_c + g11(t) I, so its eigenvectors are time independent.
  const Eigen::Matrix3d G = gram(fixed.T.samples.front(), ip);
  const Eigen::Matrix3d etaG = eta3() * G;
  Eigen::EigenSolver<Eigen::Matrix3d> es(etaG);
  const double gscale = std::max(1.0, G.cwiseAbs().maxCoeff());
  for (int k = 0; k < 3; ++k) {
    if (std::abs(es.eigenvalues()(k).imag()) > 1e-9 * gscale) {
      throw DomainError("su2_canonicalize: non-canonicalizable (complex eigenvalues of the Gram pencil)");
    }
  }
  Eigen::Vector3d lam = es.eigenvalues().real();
  Eigen::Matrix3d P = es.eigenvectors().real();

  // eta-orthonormalize within clusters of equal eigenvalues.
  std::array<int, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int x, int y) { return lam(x) > lam(y); });
  {
    Eigen::Matrix3d Ps;
    Eigen::Vector3d ls;
    for (int k = 0; k < 3; ++k) {
      Ps.col(k) = P.col(order[static_cast<std::size_t>(k)]);
      ls(k) = lam(order[static_cast<std::size_t>(k)]);
    }
    P = Ps;
    lam = ls;
  }
  Eigen::Vector3d sig;
  for (int k = 0; k < 3; ++k) {
    Eigen::Vector3d p = P.col(k);
    for (int j = 0; j < k; ++j) {
      if (std::abs(lam(j) - lam(k)) <= 1e-9 * gscale) p -= (P.col(j).dot(eta3() * p) * sig(j)) * P.col(j);
    }
    const double q = p.dot(eta3() * p);
    if (std::abs(q) < 1e-10 * p.squaredNorm()) {
      throw DomainError("su2_canonicalize: non-canonicalizable (null eigenvector of the Gram pencil)");
    }
    sig(k) = q > 0 ? 1.0 : -1.0;
    p /= std::sqrt(std::abs(q));
    Eigen::Index imax;
    p.cwiseAbs().maxCoeff(&imax);
    if (p(imax) < 0) p = -p;
    P.col(k) = p;
  }
  if ((sig.array() > 0).count() != 1) {
    throw DomainError("su2_canonicalize: non-canonicalizable (signature of the Gram pencil)");
  }
  // Timelike first; spacelike keep descending eigenvalue order.
  Eigen::Matrix3d Q;
  int col = 1;
  for (int k = 0; k < 3; ++k) {
    if (sig(k) > 0) {
      Q.col(0) = P.col(k);
    } else {
      Q.col(col++) = P.col(k);
    }
  }
  if (Q.determinant() < 0) Q.col(2) = -Q.col(2);
  const LorentzElement A(Q.transpose(), 1e-8);

  const Trajectory S = lorentz_apply(A, fixed.T);
  const std::size_t N = S.samples.size();

  // Fixed axes from the node of largest norm of each component.
  std::array<LieElement, 3> v;
  std::array<bool, 3> known{};
  for (std::size_t i = 0; i < 3; ++i) {
    std::size_t kbest = 0;
    double best = -1.0;
    for (std::size_t k = 0; k < N; ++k) {
      const double nn = norm(S.samples[k][i + 1], ip);
      if (nn > best) {
        best = nn;
        kbest = k;
      }
    }
    known[i] = best > 1e-12;
    if (known[i]) v[i] = S.samples[kbest][i + 1] / best;
  }
  const auto e = su2_basis();
  const int nknown = static_cast<int>(known[0]) + static_cast<int>(known[1]) + static_cast<int>(known[2]);
  if (nknown == 0) {
    v = e;
  } else if (nknown == 1) {
    const std::size_t i = known[0] ? 0 : (known[1] ? 1 : 2);
    std::size_t mbest = 0;
    double least = 2.0;
    for (std::size_t m = 0; m < 3; ++m) {
      const double c = std::abs(inner(e[m], v[i], ip));
      if (c < least) {
        least = c;
        mbest = m;
      }
    }
    const std::size_t j = (i + 1) % 3;
    const std::size_t k = (i + 2) % 3;
    LieElement w = e[mbest] - inner(e[mbest], v[i], ip) * v[i];
    v[j] = w / norm(w, ip);
    v[k] = bracket(v[i], v[j]);
  } else if (nknown == 2) {
    const std::size_t k = !known[0] ? 0 : (!known[1] ? 1 : 2);
    v[k] = bracket(v[(k + 1) % 3], v[(k + 2) % 3]);
  }
  if (inner(bracket(v[0], v[1]), v[2], ip) < 0) v[2] = -v[2];

  CanonicalForm out;
  out.lorentz = A;
  for (std::size_t i = 0; i < 3; ++i) {
    out.profiles[i].resize(N);
    for (std::size_t k = 0; k < N; ++k) {
      const LieElement& X = S.samples[k][i + 1];
      const double f = inner(X, v[i], ip);
      out.profiles[i][k] = f;
      out.axis_residual = std::max(out.axis_residual, norm(X - f * v[i], ip));
    }
  }
  if (out.axis_residual > tol) {
    throw DomainError("su2_canonicalize: axes not constant (residual " + std::to_string(out.axis_residual) + ")");
  }

  // Rotation R with v_i = sum_m R(m,i) e_m; find g with Ad(g) = R^T.
  Eigen::Matrix3d R;
  for (int i = 0; i < 3; ++i) {
    for (int m = 0; m < 3; ++m) R(m, i) = inner(e[static_cast<std::size_t>(m)], v[static_cast<std::size_t>(i)], ip);
  }
  const Eigen::Matrix3d target = R.transpose();
  const Eigen::AngleAxisd aa(target);
  auto make_g = [&](double th) {
    return exp_unitary(th * (aa.axis()(0) * e[0] + aa.axis()(1) * e[1] + aa.axis()(2) * e[2]));
  };
  UnitaryMatrix g = make_g(aa.angle());
  if ((detail::su2_adjoint(g) - target).cwiseAbs().maxCoeff() > 1e-8) g = make_g(-aa.angle());
  if ((detail::su2_adjoint(g) - target).cwiseAbs().maxCoeff() > 1e-8) {
    throw NumericalError("su2_canonicalize: failed to rotate axes onto the standard basis");
  }
  std::vector<UnitaryMatrix> us;
  us.reserve(N);
  for (const auto& u : fixed.u.samples) us.push_back(polar_unitary(g * u));
  out.gauge = GaugePath(std::move(us), 1e-9);
  return out;
}

// ---------------------------------------------------------------------------
// Complex coordinates

struct ComplexPair {
  Matrix alpha;  ///< T0 - i T1
  Matrix beta;   ///< T2 + i T3
};

inline ComplexPair complex_coords(const Quadruple& q) { return {q[0] - I_unit * q[1], q[2] + I_unit * q[3]}; }

inline Quadruple from_complex_coords(const ComplexPair& c) {
  const Matrix& a = c.alpha;
  const Matrix& b = c.beta;
  return {project_antihermitian(0.5 * (a - a.adjoint())), project_antihermitian(0.5 * I_unit * (a + a.adjoint())),
          project_antihermitian(0.5 * (b - b.adjoint())), project_antihermitian(-0.5 * I_unit * (b + b.adjoint()))};
}

/// m(alpha, beta) = alpha' + alpha'^* + [alpha, alpha^*] - [beta, beta^*].
inline std::vector<Matrix> real_equation(const std::vector<Matrix>& alpha, const std::vector<Matrix>& beta, double h) {
  const auto da = grid::derivative(alpha, h);
  std::vector<Matrix> m(alpha.size());
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    m[k] = da[k] + da[k].adjoint() + bracket(alpha[k], alpha[k].adjoint()) - bracket(beta[k], beta[k].adjoint());
  }
  return m;
}

struct ComplexResiduals {
  double complex_eq = 0.0;  ///< sup |beta' + [alpha, beta]|
  double real_eq = 0.0;     ///< sup |m(alpha, beta)|
};

inline std::pair<std::vector<Matrix>, std::vector<Matrix>> complex_paths(const Trajectory& T) {
  std::vector<Matrix> a, b;
  a.reserve(T.samples.size());
  b.reserve(T.samples.size());
  for (const auto& q : T.samples) {
    const auto c = complex_coords(q);
    a.push_back(c.alpha);
    b.push_back(c.beta);
  }
  return {std::move(a), std::move(b)};
}

inline ComplexResiduals complex_residuals(const Trajectory& T) {
  const auto [a, b] = complex_paths(T);
  const auto db = grid::derivative(b, T.h());
  const auto m = real_equation(a, b, T.h());
  ComplexResiduals r;
  for (std::size_t k = 0; k < a.size(); ++k) {
    r.complex_eq = std::max(r.complex_eq, (db[k] + bracket(a[k], b[k])).norm());
    r.real_eq = std::max(r.real_eq, m[k].norm());
  }
  return r;
}

namespace detail {

/// -dbar_alpha(h^-1 d_alpha h) + dbar_beta(h^-1 d_beta h), with
///   d_alpha h = h' - [alpha^*, h],  dbar_alpha Y = Y' + [alpha, Y],
///   d_beta h = -[beta^*, h],        dbar_beta Y = [beta, Y].
inline std::vector<Matrix> complex_gauge_correction(const std::vector<Matrix>& alpha, const std::vector<Matrix>& beta,
                                                    const std::vector<Matrix>& hpath, double step) {
  const std::size_t N = alpha.size();
  const auto dh = grid::derivative(hpath, step);
  std::vector<Matrix> Ya(N), Yb(N);
  for (std::size_t k = 0; k < N; ++k) {
    const Matrix hinv = hpath[k].inverse();
    Ya[k] = hinv * (dh[k] - bracket(alpha[k].adjoint(), hpath[k]));
    Yb[k] = hinv * (-bracket(beta[k].adjoint(), hpath[k]));
  }
  const auto dYa = grid::derivative(Ya, step);
  std::vector<Matrix> out(N);
  for (std::size_t k = 0; k < N; ++k) {
    out[k] = -(dYa[k] + bracket(alpha[k], Ya[k])) + bracket(beta[k], Yb[k]);
  }
  return out;
}

inline void require_path(const Trajectory& T, const std::vector<LieElement>& xi, const char* what) {
  require_same_grid(T, xi.size(), what);
  for (const auto& X : xi) require_same_size(T.samples.front()[0], X, what);
}

}  // namespace detail

/// Max-norm difference between the two sides of the complex gauge identity
///   u^-1 m(u.alpha, u.beta) u = m(alpha, beta) - dbar_alpha(h^-1 d_alpha h) + dbar_beta(h^-1 d_beta h)
/// for u = exp(i xi) (self-adjoint), h = u^* u.
inline double complex_gauge_identity_check(const Trajectory& T, const std::vector<LieElement>& xi) {
  detail::require_path(T, xi, "complex_gauge_identity_check");
  const auto [a, b] = complex_paths(T);
  const std::size_t N = a.size();
  const double step = T.h();
  std::vector<Matrix> u(N), hpath(N);
  for (std::size_t k = 0; k < N; ++k) {
    u[k] = exp_hermitian(I_unit * xi[k]);
    hpath[k] = u[k].adjoint() * u[k];
  }
  const auto du = grid::derivative(u, step);
  std::vector<Matrix> ua(N), ub(N), uinv(N);
  for (std::size_t k = 0; k < N; ++k) {
    uinv[k] = u[k].inverse();
    ua[k] = u[k] * a[k] * uinv[k] - du[k] * uinv[k];
    ub[k] = u[k] * b[k] * uinv[k];
  }
  const auto lhs_m = real_equation(ua, ub, step);
  const auto m = real_equation(a, b, step);
  const auto corr = detail::complex_gauge_correction(a, b, hpath, step);
  double r = 0.0;
  for (std::size_t k = 0; k < N; ++k) r = std::max(r, (uinv[k] * lhs_m[k] * u[k] - (m[k] + corr[k])).norm());
  return r;
}

/// The complex-gauge part of the real-equation map, rotated back into the
/// Lie algebra: R(xi) = -i (-dbar_alpha(h^-1 d_alpha h) + dbar_beta(h^-1 d_beta h)), h = exp(i xi).
inline std::vector<Matrix> real_equation_map(const Trajectory& T, const std::vector<LieElement>& xi) {
  detail::require_path(T, xi, "real_equation_map");
  const auto [a, b] = complex_paths(T);
  std::vector<Matrix> hpath(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) hpath[k] = exp_hermitian(I_unit * xi[k]);
  auto c = detail::complex_gauge_correction(a, b, hpath, T.h());
  for (auto& X : c) X = Matrix(-I_unit * X);
  return c;
}

/// Centered difference (R(s xi) - R(-s xi)) / 2s: the linearization of the
/// real-equation map at xi = 0, which should equal -Delta_T xi.
inline std::vector<Matrix> real_equation_linearization(const Trajectory& T, const std::vector<LieElement>& xi,
                                                       double s = 1e-4) {
  std::vector<LieElement> xp(xi.size()), xm(xi.size());
  for (std::size_t k = 0; k < xi.size(); ++k) {
    xp[k] = s * xi[k];
    xm[k] = -s * xi[k];
  }
  const auto rp = real_equation_map(T, xp);
  const auto rm = real_equation_map(T, xm);
  std::vector<Matrix> d(xi.size());
  for (std::size_t k = 0; k < xi.size(); ++k) d[k] = (rp[k] - rm[k]) / (2.0 * s);
  return d;
}

// ---------------------------------------------------------------------------
// Product splitting

struct ProductSplit {
  std::vector<LieElement> A1, B1, A2, B2;  ///< A1 = T0+T2, A2 = T0-T2, B1 = T1+T3, B2 = T1-T3
  double paracomplex1 = 0.0;               ///< sup |B1' + [A1,B1]|
  double paracomplex2 = 0.0;               ///< sup |B2' + [A2,B2]|
  double third_line = 0.0;  ///< sup |A1' - A2' + [(A1+A2)/2, A1-A2] - [B1,B2]|
  double coulomb = 0.0;     ///< sup |A1' - A2' + [A2, A1-A2] + [B2, B1-B2]|
  UnitaryMatrix monodromy1, monodromy2;  ///< u_i(1), u_i' = -A_i u_i, u_i(0) = 1
};

inline ProductSplit product_split(const Trajectory& T) {
  ProductSplit p;
  const std::size_t N = T.samples.size();
  for (const auto& q : T.samples) {
    p.A1.push_back(q[0] + q[2]);
    p.A2.push_back(q[0] - q[2]);
    p.B1.push_back(q[1] + q[3]);
    p.B2.push_back(q[1] - q[3]);
  }
  const double h = T.h();
  const auto dA1 = grid::derivative(p.A1, h);
  const auto dA2 = grid::derivative(p.A2, h);
  const auto dB1 = grid::derivative(p.B1, h);
  const auto dB2 = grid::derivative(p.B2, h);
  for (std::size_t k = 0; k < N; ++k) {
    p.paracomplex1 = std::max(p.paracomplex1, (dB1[k] + bracket(p.A1[k], p.B1[k])).norm());
    p.paracomplex2 = std::max(p.paracomplex2, (dB2[k] + bracket(p.A2[k], p.B2[k])).norm());
    const Matrix dA = dA1[k] - dA2[k];
    const Matrix diff = p.A1[k] - p.A2[k];
    p.third_line =
        std::max(p.third_line, (dA + bracket(0.5 * (p.A1[k] + p.A2[k]), diff) - bracket(p.B1[k], p.B2[k])).norm());
    p.coulomb =
        std::max(p.coulomb, (dA + bracket(p.A2[k], diff) + bracket(p.B2[k], p.B1[k] - p.B2[k])).norm());
  }
  p.monodromy1 = grid::transport(grid::HalfStepField<Matrix>(p.A1), h, grid::TransportSide::left).back();
  p.monodromy2 = grid::transport(grid::HalfStepField<Matrix>(p.A2), h, grid::TransportSide::left).back();
  return p;
}

}  // namespace nahm

#endif  // NAHM_FLOW_HPP
