#ifndef NAHM_IO_HPP
#define NAHM_IO_HPP

// JSON / CSV encodings.  Matrices are row-major arrays of rows, each entry a
// [re, im] pair.  Doubles are written in shortest round-trip form, so equal
// inputs produce byte-identical files.

#include <cmath>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "nahm/degeneracy.hpp"
#include "nahm/flow.hpp"
#include "nahm/positive.hpp"
#include "nahm/spectral.hpp"
#include "nahm/stability.hpp"

namespace nahm::io {

using json = nlohmann::ordered_json;

/// NaN / infinity become null.
inline json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json to_json(const Matrix& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(json::array({M(i, j).real(), M(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json to_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw DimensionError("matrix: expected a non-empty array of rows");
  const auto n = static_cast<Eigen::Index>(j.size());
  Matrix M(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
      throw DimensionError("matrix: expected a square array of rows");
    }
    for (Eigen::Index c = 0; c < n; ++c) {
      const json& e = row[static_cast<std::size_t>(c)];
      if (e.is_number()) {
        M(r, c) = cplx(e.get<double>(), 0.0);
      } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        M(r, c) = cplx(e[0].get<double>(), e[1].get<double>());
      } else {
        throw DimensionError("matrix: entries must be numbers or [re, im] pairs");
      }
    }
  }
  return M;
}

inline json to_json(const Quadruple& q) {
  return json{{"T0", to_json(q[0])}, {"T1", to_json(q[1])}, {"T2", to_json(q[2])}, {"T3", to_json(q[3])}};
}

/// Reads {"T0": M, "T1": M, "T2": M, "T3": M} (T0 optional, default 0).
/// Components more than `tol` from anti-Hermitian are reprojected and a
/// warning is appended.
inline Quadruple quadruple_from_json(const json& j, std::vector<std::string>* warnings = nullptr,
                                     double tol = 1e-8) {
  if (!j.is_object()) throw DimensionError("initial data: expected an object with T1, T2, T3");
  for (const char* key : {"T1", "T2", "T3"}) {
    if (!j.contains(key)) throw DimensionError(std::string("initial data: missing ") + key);
  }
  std::array<Matrix, 4> T;
  for (int i = 1; i < 4; ++i) T[static_cast<std::size_t>(i)] = matrix_from_json(j.at("T" + std::to_string(i)));
  T[0] = j.contains("T0") ? matrix_from_json(j.at("T0")) : Matrix::Zero(T[1].rows(), T[1].cols());
  for (std::size_t i = 0; i < 4; ++i) {
    const double d = antihermitian_defect(T[i]);
    if (d > tol && warnings) {
      std::ostringstream os;
      os << "T" << i << " deviates from anti-Hermitian by " << d << "; reprojected";
      warnings->push_back(os.str());
    }
  }
  return Quadruple(T[0], T[1], T[2], T[3]).projected();
}

inline json to_json(const Trajectory& tr) {
  json s = json::array();
  for (std::size_t k = 0; k < tr.samples.size(); ++k) {
    json node = to_json(tr.samples[k]);
    node["t"] = tr.time(k);
    s.push_back(std::move(node));
  }
  return json{{"t_start", tr.t_start}, {"t_end", tr.t_end}, {"steps", tr.steps()}, {"n", tr.n()}, {"samples", s}};
}

/// Columns: t, then T0..T3 entries in row-major order as Ti_rc_re, Ti_rc_im.
inline void write_csv(std::ostream& os, const Trajectory& tr) {
  const Eigen::Index n = tr.n();
  os << "t";
  for (int i = 0; i < 4; ++i) {
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index c = 0; c < n; ++c) os << ",T" << i << "_" << r << c << "_re,T" << i << "_" << r << c << "_im";
    }
  }
  os << "\n";
  const auto old = os.precision(17);
  for (std::size_t k = 0; k < tr.samples.size(); ++k) {
    os << tr.time(k);
    for (const auto& X : tr.samples[k].T) {
      for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < n; ++c) os << "," << X(r, c).real() << "," << X(r, c).imag();
      }
    }
    os << "\n";
  }
  os.precision(old);
}

inline json to_json(const ConservedReport& r) {
  json q = json::array();
  for (std::size_t i = 0; i < 6; ++i) {
    q.push_back(json{{"name", kConservedNames[i]},
                     {"initial", r.initial[i]},
                     {"drift", r.drift[i]},
                     {"relative_drift", r.relative_drift(i)}});
  }
  return json{{"scale", r.scale},
              {"quantities", q},
              {"max_relative_drift", r.max_relative_drift()},
              {"max_component_norm_sq", r.max_component_norm_sq},
              {"C", r.initial[5]}};
}

inline json to_json(const SpectralCurve& c) {
  json coeffs = json::array();
  for (int k = 1; k <= c.n; ++k) {
    for (int j = 0; j <= 2 * k; ++j) {
      const cplx v = c.coeff(k, j);
      coeffs.push_back(json::array({k, j, v.real(), v.imag()}));
    }
  }
  return json{{"n", c.n}, {"coefficients", coeffs}};
}

inline json to_json(const DegeneracyReport& r) {
  json sv = json::array();
  for (Eigen::Index k = 0; k < r.singular_values.size(); ++k) sv.push_back(r.singular_values(k));
  return json{{"algebra", r.algebra == Algebra::sun ? "su" : "u"},
              {"verdict", to_string(r.verdict)},
              {"sigma_min", r.sigma_min},
              {"sigma_max", r.sigma_max},
              {"determinant", r.determinant},
              {"tol_low", r.tol_low},
              {"tol_high", r.tol_high},
              {"singular_values", sv},
              {"shooting_matrix", to_json(r.shooting_matrix)}};
}

inline json to_json(const PiBound& b) {
  return json{{"bound_value", b.bound_value}, {"certified_nondegenerate", b.certified_nondegenerate}};
}

inline json to_json(const PositivityReport& r) {
  return json{{"min_eig", r.min_eig},
              {"theta_min", r.theta_min},
              {"samples", r.samples},
              {"margin", r.margin},
              {"status", r.status()}};
}

inline json to_json(const FactorPair& f) {
  return json{{"A", to_json(f.A)}, {"B", to_json(f.B)}, {"residual", f.residual}, {"root_margin", num(f.root_margin)}};
}

inline json to_json(const NormBound& b) { return json{{"lhs", b.lhs}, {"rhs", b.rhs}, {"holds", b.holds}}; }

inline json to_json(const StabilityReport& r) {
  json op = json::array();
  for (Eigen::Index k = 0; k < r.operator_spectrum.size(); ++k) op.push_back(r.operator_spectrum(k));
  json dv = json::array();
  for (Eigen::Index k = 0; k < r.dv_spectrum.size(); ++k) {
    dv.push_back(json::array({r.dv_spectrum(k).real(), r.dv_spectrum(k).imag()}));
  }
  return json{{"algebra", r.algebra == Algebra::sun ? "su" : "u"},
              {"operator_spectrum", op},
              {"dv_spectrum", dv},
              {"stable", r.stable},
              {"eta", r.eta}};
}

inline json to_json(const HalflineResult& h) {
  return json{{"fitted_rate", num(h.fitted_rate)},
              {"max_residual", h.max_residual},
              {"initial_distance", h.initial_distance},
              {"final_distance", h.final_distance},
              {"diverged", h.diverged},
              {"indeterminate", h.indeterminate}};
}

}  // namespace nahm::io

#endif  // NAHM_IO_HPP
