#ifndef NAHM_ERRORS_HPP
#define NAHM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace nahm {

/// Operands of incompatible matrix size or mismatched time grids.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation
/// (e.g. K(kappa) for kappa >= 1, a non-positive matrix polynomial).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The numerics broke down: NaN/Inf in an integration, an ill-conditioned
/// factorization, a non-convergent iteration.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nahm

#endif  // NAHM_ERRORS_HPP
