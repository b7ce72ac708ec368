#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

/**
 * \file core.hpp
 *
 * @brief Vector aliases and the exception hierarchy shared by every module.
 */

namespace chisd {

  using Vector = Eigen::VectorXd;
  using Matrix = Eigen::MatrixXd;

  /// Root of every error thrown by the library.
  class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
  };

  /// Operand lengths do not agree.
  class DimensionError : public Error {
  public:
    using Error::Error;
  };

  /// Orthonormalization met a (numerically) dependent vector.
  class RankDeficiencyError : public Error {
  public:
    RankDeficiencyError(std::size_t index, double pivot);

    std::size_t index() const noexcept { return index_; }
    double pivot() const noexcept { return pivot_; }

  private:
    std::size_t index_;
    double pivot_;
  };

  /// Constraint gradients are not linearly independent at the evaluation point.
  class LicqError : public Error {
  public:
    LicqError(const std::string& what, double condition_estimate);

    double condition_estimate() const noexcept { return condition_; }

  private:
    double condition_;
  };

  /// Argument outside the domain of an operation (e.g. a non-tangent direction).
  class DomainError : public Error {
  public:
    using Error::Error;
  };

  /// Two particles coincide.
  class SingularityError : public Error {
  public:
    using Error::Error;
  };

  /// An iterative method ran out of budget.
  class ConvergenceError : public Error {
  public:
    using Error::Error;
  };

  /// File or stream failure; the message carries the path.
  class IoError : public Error {
  public:
    using Error::Error;
  };

}  // namespace chisd
