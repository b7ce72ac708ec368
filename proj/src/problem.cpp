#include "chisd/problem.hpp"

namespace chisd {

  Vector Problem::hess_vec(const Vector&, const Vector&) const {
    throw Error("problem '" + name() + "' has no analytic Hessian");
  }

  bool Problem::prefilter(const Vector&, const Vector&, double) const { return true; }

  double Problem::aligned_distance(const Vector& a, const Vector& b) const { return (a - b).norm(); }

  LinearProblem LinearProblem::height() { return LinearProblem(Eigen::Vector3d(0.0, 0.0, 1.0)); }

  double LinearProblem::energy(const Vector& x) const { return a_.dot(x); }

  Vector LinearProblem::gradient(const Vector&) const { return a_; }

  Vector LinearProblem::hess_vec(const Vector&, const Vector& eta) const { return Vector::Zero(eta.size()); }

  QuadraticProblem::QuadraticProblem(Matrix m, Vector b) : m_(std::move(m)), b_(std::move(b)) {
    if (m_.rows() != m_.cols() || m_.rows() != b_.size()) {
      throw DimensionError("QuadraticProblem: matrix and offset sizes disagree");
    }
    if (!m_.isApprox(m_.transpose())) {
      throw DomainError("QuadraticProblem: matrix is not symmetric");
    }
  }

  QuadraticProblem::QuadraticProblem(Matrix m) : QuadraticProblem(m, Vector::Zero(m.rows())) {}

  double QuadraticProblem::energy(const Vector& x) const { return 0.5 * x.dot(m_ * x) + b_.dot(x); }

  Vector QuadraticProblem::gradient(const Vector& x) const { return m_ * x + b_; }

  Vector QuadraticProblem::hess_vec(const Vector&, const Vector& eta) const { return m_ * eta; }

}  // namespace chisd
