#ifndef NAHM_GRID_HPP
#define NAHM_GRID_HPP

// Uniform-grid numerics shared by the flow, degeneracy and spectral modules:
// fourth-order finite differences, cubic midpoint interpolation, classical
// RK4 and re-unitarized transport of group-valued paths.

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nahm/errors.hpp"
#include "nahm/liealg.hpp"

namespace nahm::grid {

/// Fourth-order first derivative of samples on a uniform grid with spacing h.
/// Centered in the interior, one-sided at the two nodes nearest each end.
template <class V>
std::vector<V> derivative(std::span<const V> f, double h) {
  const std::size_t N = f.size();
  if (N < 5) throw DimensionError("derivative: need at least 5 grid nodes, got " + std::to_string(N));
  std::vector<V> d(N);
  const double w = 1.0 / (12.0 * h);
  const std::size_t L = N - 1;
  d[0] = V(w * (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]));
  d[1] = V(w * (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]));
  for (std::size_t k = 2; k + 2 < N; ++k) {
    d[k] = V(w * (f[k - 2] - 8.0 * f[k - 1] + 8.0 * f[k + 1] - f[k + 2]));
  }
  d[L - 1] = V(-w * (-3.0 * f[L] - 10.0 * f[L - 1] + 18.0 * f[L - 2] - 6.0 * f[L - 3] + f[L - 4]));
  d[L] = V(-w * (-25.0 * f[L] + 48.0 * f[L - 1] - 36.0 * f[L - 2] + 16.0 * f[L - 3] - 3.0 * f[L - 4]));
  return d;
}

/// Fourth-order second derivative; one-sided six-point stencils at the ends.
template <class V>
std::vector<V> second_derivative(std::span<const V> f, double h) {
  const std::size_t N = f.size();
  if (N < 6) throw DimensionError("second_derivative: need at least 6 grid nodes, got " + std::to_string(N));
  std::vector<V> d(N);
  const double w = 1.0 / (12.0 * h * h);
  const std::size_t L = N - 1;
  d[0] = V(w * (45.0 * f[0] - 154.0 * f[1] + 214.0 * f[2] - 156.0 * f[3] + 61.0 * f[4] - 10.0 * f[5]));
  d[1] = V(w * (10.0 * f[0] - 15.0 * f[1] - 4.0 * f[2] + 14.0 * f[3] - 6.0 * f[4] + f[5]));
  for (std::size_t k = 2; k + 2 < N; ++k) {
    d[k] = V(w * (-f[k - 2] + 16.0 * f[k - 1] - 30.0 * f[k] + 16.0 * f[k + 1] - f[k + 2]));
  }
  d[L - 1] = V(w * (10.0 * f[L] - 15.0 * f[L - 1] - 4.0 * f[L - 2] + 14.0 * f[L - 3] - 6.0 * f[L - 4] + f[L - 5]));
  d[L] = V(w * (45.0 * f[L] - 154.0 * f[L - 1] + 214.0 * f[L - 2] - 156.0 * f[L - 3] + 61.0 * f[L - 4] -
                10.0 * f[L - 5]));
  return d;
}

template <class V>
std::vector<V> derivative(const std::vector<V>& f, double h) {
  return derivative(std::span<const V>(f), h);
}

template <class V>
std::vector<V> second_derivative(const std::vector<V>& f, double h) {
  return second_derivative(std::span<const V>(f), h);
}

/// Cubic (four-point Lagrange) value at the midpoint of interval [k, k+1].
template <class V>
V midpoint(std::span<const V> f, std::size_t k) {
  const std::size_t N = f.size();
  if (N < 4) throw DimensionError("midpoint: need at least 4 grid nodes");
  if (k == 0) return V((5.0 * f[0] + 15.0 * f[1] - 5.0 * f[2] + f[3]) / 16.0);
  if (k + 2 >= N) {
    const std::size_t L = N - 1;
    return V((5.0 * f[L] + 15.0 * f[L - 1] - 5.0 * f[L - 2] + f[L - 3]) / 16.0);
  }
  return V((-f[k - 1] + 9.0 * f[k] + 9.0 * f[k + 1] - f[k + 2]) / 16.0);
}

template <class V>
std::vector<V> midpoints(std::span<const V> f) {
  std::vector<V> m;
  m.reserve(f.size() - 1);
  for (std::size_t k = 0; k + 1 < f.size(); ++k) m.push_back(midpoint(f, k));
  return m;
}

/// Values of a sampled field at the nodes and interval midpoints of a grid,
/// as needed by RK4 stages.  Index with the half-step counter j = 2k (node k)
/// or j = 2k+1 (midpoint of [k, k+1]).
template <class V>
class HalfStepField {
 public:
  HalfStepField(std::vector<V> nodes) : nodes_(std::move(nodes)), mids_(midpoints(std::span<const V>(nodes_))) {}
  HalfStepField(std::vector<V> nodes, std::vector<V> mids) : nodes_(std::move(nodes)), mids_(std::move(mids)) {}

  const V& node(std::size_t k) const { return nodes_[k]; }
  const V& mid(std::size_t k) const { return mids_[k]; }
  std::size_t size() const { return nodes_.size(); }

 private:
  std::vector<V> nodes_;
  std::vector<V> mids_;
};

/// One classical RK4 step.  `f(stage, y)` returns the derivative at stage
/// 0 (start), 1 (midpoint) or 2 (end); the caller supplies time-dependent
/// coefficients for each stage.  State must support + and scalar *.
template <class State, class F>
State rk4_step(const State& y, double h, F&& f) {
  const State k1 = f(0, y);
  const State k2 = f(1, State(y + (0.5 * h) * k1));
  const State k3 = f(1, State(y + (0.5 * h) * k2));
  const State k4 = f(2, State(y + h * k3));
  return State(y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

/// Fixed-size tuple of complex matrices with vector-space operations, the
/// state type for the matrix ODEs integrated here.
template <std::size_t K>
struct MatTuple {
  std::array<Matrix, K> m;

  Matrix& operator[](std::size_t i) { return m[i]; }
  const Matrix& operator[](std::size_t i) const { return m[i]; }

  friend MatTuple operator+(const MatTuple& a, const MatTuple& b) {
    MatTuple r;
    for (std::size_t i = 0; i < K; ++i) r.m[i] = a.m[i] + b.m[i];
    return r;
  }
  friend MatTuple operator*(double s, const MatTuple& a) {
    MatTuple r;
    for (std::size_t i = 0; i < K; ++i) r.m[i] = s * a.m[i];
    return r;
  }

  bool all_finite() const {
    for (const auto& x : m) {
      if (!x.allFinite()) return false;
    }
    return true;
  }
};

enum class TransportSide {
  left,   ///< u' = -X u   (X = -u' u^{-1})
  right,  ///< u' =  u X   (u X u^{-1} - u' u^{-1} = 0)
};

/// Integrates a unitary path from u(0) = 1 with RK4 driven by the sampled
/// generator X, re-unitarizing by polar decomposition after every step.
inline std::vector<UnitaryMatrix> transport(const HalfStepField<Matrix>& X, double h, TransportSide side) {
  const std::size_t N = X.size();
  const Eigen::Index n = X.node(0).rows();
  std::vector<UnitaryMatrix> u;
  u.reserve(N);
  u.push_back(UnitaryMatrix::Identity(n, n));
  for (std::size_t k = 0; k + 1 < N; ++k) {
    auto f = [&](int stage, const Matrix& v) -> Matrix {
      const Matrix& gen = stage == 0 ? X.node(k) : (stage == 1 ? X.mid(k) : X.node(k + 1));
      return side == TransportSide::left ? Matrix(-gen * v) : Matrix(v * gen);
    };
    Matrix next = rk4_step<Matrix>(u.back(), h, f);
    if (!next.allFinite()) throw NumericalError("transport: non-finite value at step " + std::to_string(k));
    u.push_back(polar_unitary(next));
  }
  return u;
}

}  // namespace nahm::grid

#endif  // NAHM_GRID_HPP
