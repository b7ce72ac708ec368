#pragma once

#include <cstddef>
#include <functional>
#include <string_view>

#include "chisd/core.hpp"
#include "chisd/space.hpp"

/**
 * \file manifold.hpp
 *
 * @brief Equality-constraint geometry: projections, Riemannian derivatives, retractions and vector transport.
 */

namespace chisd {

  enum class RetractionKind { exponential, normalization };
  enum class TransportKind { parallel, differentiated, projection };

  RetractionKind parse_retraction(std::string_view name);
  TransportKind parse_transport(std::string_view name);
  std::string_view to_string(RetractionKind k);
  std::string_view to_string(TransportKind k);

  /**
   * @brief A feasible set {x : c(x) = 0} embedded in a RealSpace.
   *
   * Subclasses provide the constraint data c, A = (grad c_1 .. grad c_m) and the products (Hess c_l) u, plus a
   * retraction and vector transport. The geometry operations have dense default implementations in terms of those
   * primitives (solving the m x m Gram system by Cholesky); structured charts override them with closed forms.
   *
   * All gradients are Riesz representatives in space(), so for a weighted space A's columns already include the
   * inverse metric.
   *
   * Charts are immutable after construction and safe to share across threads.
   */
  class Manifold {
  public:
    Manifold(RealSpace space, RetractionKind retraction, TransportKind transport);
    virtual ~Manifold() = default;

    const RealSpace& space() const noexcept { return space_; }
    std::size_t dim() const noexcept { return space_.dim(); }
    RetractionKind retraction_kind() const noexcept { return retraction_; }
    TransportKind transport_kind() const noexcept { return transport_; }

    virtual std::size_t constraint_count() const = 0;
    virtual Vector constraints(const Vector& x) const = 0;
    /// d x m matrix whose columns are the constraint gradients.
    virtual Matrix constraint_grads(const Vector& x) const = 0;
    /// d x m matrix whose l-th column is (Hess c_l)(x) u.
    virtual Matrix constraint_hess_vec(const Vector& x, const Vector& u) const = 0;

    std::size_t tangent_dim() const { return dim() - constraint_count(); }

    /// A(x)^T u, the m normal coordinates of u.
    virtual Vector normal_components(const Vector& x, const Vector& u) const;
    /// (A^T A)^{-1} A^T u. Throws LicqError when the Gram matrix is singular.
    virtual Vector multipliers(const Vector& x, const Vector& u) const;
    /// (I - A (A^T A)^{-1} A^T) u. Valid off the manifold wherever LICQ holds.
    virtual Vector project_tangent(const Vector& x, const Vector& u) const;
    /// sum_l xi_l (Hess c_l)(x) eta.
    virtual Vector curvature(const Vector& x, const Vector& eta, const Vector& xi) const;

    virtual Vector retract(const Vector& x, const Vector& eta) const = 0;
    /// Moves xi in T(x) to T(retract(x, eta)).
    virtual Vector transport(const Vector& x, const Vector& eta, const Vector& xi) const = 0;

    /// max_l |c_l(x)|.
    double feasibility(const Vector& x) const;
    /// max_l |<grad c_l(x), u>|.
    double tangency(const Vector& x, const Vector& u) const;

    /// Frame-wise projection to T(x).
    Frame project_frame(const Vector& x, const Frame& frame) const;

  protected:
    Vector dense_multipliers(const Vector& x, const Vector& u) const;

  private:
    RealSpace space_;
    RetractionKind retraction_;
    TransportKind transport_;
  };

  /// Tolerance of the tangency precondition in riemannian_hess_vec.
  inline constexpr double kTangencyTolerance = 1e-8;

  /// grad E(x) = P_T(x) egrad.
  Vector riemannian_grad(const Manifold& chart, const Vector& x, const Vector& egrad);

  /**
   * @brief Riemannian Hessian-vector product.
   *
   * Returns P_T(hess_eta - sum_l xi_l (Hess c_l) eta) with xi = (A^T A)^{-1} A^T egrad, where hess_eta is the ambient
   * product (Hess E)(x) eta supplied by the caller. Throws DomainError if eta is not tangent within kTangencyTolerance.
   */
  Vector riemannian_hess_vec(const Manifold& chart, const Vector& x, const Vector& eta, const Vector& egrad, const Vector& hess_eta);

  /**
   * @brief Chart assembled from user callbacks, with every geometric operation on the dense path.
   *
   * Retraction: Gauss-Newton projection of x + eta back onto c = 0 along the constraint normals. Transport: tangent
   * projection at the destination. Used to validate the closed forms of the structured charts.
   */
  class ConstraintChart final : public Manifold {
  public:
    struct Callbacks {
      std::size_t count = 0;
      std::function<Vector(const Vector&)> eval;
      std::function<Matrix(const Vector&)> grads;
      std::function<Matrix(const Vector&, const Vector&)> hess_vec;
    };

    ConstraintChart(RealSpace space, Callbacks callbacks, double retraction_tol = 1e-14, int retraction_max_iter = 50);

    std::size_t constraint_count() const override { return cb_.count; }
    Vector constraints(const Vector& x) const override { return cb_.eval(x); }
    Matrix constraint_grads(const Vector& x) const override { return cb_.grads(x); }
    Matrix constraint_hess_vec(const Vector& x, const Vector& u) const override { return cb_.hess_vec(x, u); }

    Vector retract(const Vector& x, const Vector& eta) const override;
    Vector transport(const Vector& x, const Vector& eta, const Vector& xi) const override;

  private:
    Callbacks cb_;
    double tol_;
    int max_iter_;
  };

}  // namespace chisd
