#pragma once

#include <cstddef>
#include <string>

#include "chisd/core.hpp"

/**
 * \file problem.hpp
 *
 * @brief Energy interface consumed by the dynamics, eigensolver and landscape modules.
 */

namespace chisd {

  /**
   * @brief A smooth energy on the ambient space of a chart.
   *
   * gradient() returns the Riesz representative with respect to the chart's inner product. Problems also own the
   * identity predicate used to deduplicate landscape nodes, because solution equality depends on the symmetries of
   * the energy.
   */
  class Problem {
  public:
    virtual ~Problem() = default;

    virtual std::string name() const = 0;
    virtual std::size_t dim() const = 0;

    virtual double energy(const Vector& x) const = 0;
    virtual Vector gradient(const Vector& x) const = 0;

    virtual bool has_hessian() const { return false; }
    /// Ambient (Hess E)(x) eta; throws Error unless has_hessian().
    virtual Vector hess_vec(const Vector& x, const Vector& eta) const;

    /// Cheap necessary condition for a and b to be the same solution up to symmetry.
    virtual bool prefilter(const Vector& a, const Vector& b, double tol) const;
    /// Distance after factoring out the symmetries the problem knows about.
    virtual double aligned_distance(const Vector& a, const Vector& b) const;
  };

  /// E(x) = <a, x> in Euclidean coordinates; with a = e_z on S^2 this is the height function.
  class LinearProblem final : public Problem {
  public:
    explicit LinearProblem(Vector a) : a_(std::move(a)) {}

    /// Height function z on R^3.
    static LinearProblem height();

    std::string name() const override { return "linear"; }
    std::size_t dim() const override { return static_cast<std::size_t>(a_.size()); }
    double energy(const Vector& x) const override;
    Vector gradient(const Vector& x) const override;
    bool has_hessian() const override { return true; }
    Vector hess_vec(const Vector& x, const Vector& eta) const override;

  private:
    Vector a_;
  };

  /// E(x) = 1/2 x^T M x + b^T x with symmetric M.
  class QuadraticProblem final : public Problem {
  public:
    QuadraticProblem(Matrix m, Vector b);
    explicit QuadraticProblem(Matrix m);

    std::string name() const override { return "quadratic"; }
    std::size_t dim() const override { return static_cast<std::size_t>(b_.size()); }
    double energy(const Vector& x) const override;
    Vector gradient(const Vector& x) const override;
    bool has_hessian() const override { return true; }
    Vector hess_vec(const Vector& x, const Vector& eta) const override;

    const Matrix& matrix() const noexcept { return m_; }

  private:
    Matrix m_;
    Vector b_;
  };

}  // namespace chisd
