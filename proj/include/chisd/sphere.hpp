#pragma once

#include <cmath>

#include "chisd/manifold.hpp"

/**
 * \file sphere.hpp
 *
 * @brief Closed-form geometry of the unit sphere {x : <x, x> = 1} in a (weighted) inner-product space.
 *
 * The templates take the inner product as a callable so the same formulas serve the weighted L2 sphere of a grid
 * field and the Euclidean 2- and 3-blocks of particle charts.
 */

namespace chisd::sphere {

  /// Below this step norm the trigonometric ratios are evaluated by their Taylor series.
  inline constexpr double kSeriesThreshold = 1e-4;

  /// sin(t)/t.
  inline double sinc(double t) { return t < kSeriesThreshold ? 1.0 - t * t / 6.0 : std::sin(t) / t; }

  /// (cos(t) - 1)/t^2.
  // (cos t - 1) / t^2 written as -sinc(t/2)^2 / 2, which avoids the cancellation near 0.
  inline double cosc(double t) {
    const double s = sinc(0.5 * t);
    return -0.5 * s * s;
  }

  /// Exp_x(eta) = cos|eta| x + sin|eta|/|eta| eta, renormalized to shed round-off.
  template <typename V, typename Dot>
  V exp_map(const V& x, const V& eta, Dot dot) {
    const double t = std::sqrt(dot(eta, eta));
    V y = std::cos(t) * x + sinc(t) * eta;
    return y / std::sqrt(dot(y, y));
  }

  /// (x + eta)/|x + eta|.
  template <typename V, typename Dot>
  V normalize_retraction(const V& x, const V& eta, Dot dot) {
    V y = x + eta;
    return y / std::sqrt(dot(y, y));
  }

  /// Parallel translation of xi along the geodesic t -> Exp_x(t eta), t in [0, 1].
  template <typename V, typename Dot>
  V parallel_transport(const V& x, const V& eta, const V& xi, Dot dot) {
    const double t = std::sqrt(dot(eta, eta));
    const double a = dot(eta, xi);
    return xi + (cosc(t) * a) * eta - (sinc(t) * a) * x;
  }

  /// d/ds R_x(eta + s xi) at s = 0 for the normalization retraction.
  template <typename V, typename Dot>
  V differentiated_transport(const V& x, const V& eta, const V& xi, Dot dot) {
    const V y = x + eta;
    const double n = std::sqrt(dot(y, y));
    return xi / n - (dot(xi, y) / (n * n * n)) * y;
  }

  /// Tangent projection of xi at the point y (any nonzero y; the normal direction is y itself).
  template <typename V, typename Dot>
  V project(const V& y, const V& xi, Dot dot) {
    return xi - (dot(xi, y) / dot(y, y)) * y;
  }

  template <typename V, typename Dot>
  V retract(RetractionKind kind, const V& x, const V& eta, Dot dot) {
    return kind == RetractionKind::exponential ? exp_map(x, eta, dot) : normalize_retraction(x, eta, dot);
  }

  template <typename V, typename Dot>
  V transport(RetractionKind r, TransportKind t, const V& x, const V& eta, const V& xi, Dot dot) {
    switch (t) {
      case TransportKind::parallel:
        return parallel_transport(x, eta, xi, dot);
      case TransportKind::differentiated:
        return differentiated_transport(x, eta, xi, dot);
      case TransportKind::projection:
        break;
    }
    return project(retract(r, x, eta, dot), xi, dot);
  }

}  // namespace chisd::sphere

namespace chisd {

  /**
   * @brief Unit sphere <x, x> = 1 of a RealSpace, constraint c(x) = (<x, x> - 1)/2.
   *
   * Covers S^{d-1} (unit weights) and the normalized-field sphere of a quadrature-weighted grid. Every operation is
   * closed form; no Gram system is solved.
   */
  class SphereChart final : public Manifold {
  public:
    explicit SphereChart(RealSpace space, RetractionKind retraction = RetractionKind::exponential,
                         TransportKind transport = TransportKind::parallel);

    std::size_t constraint_count() const override { return 1; }
    Vector constraints(const Vector& x) const override;
    Matrix constraint_grads(const Vector& x) const override;
    Matrix constraint_hess_vec(const Vector& x, const Vector& u) const override;

    Vector normal_components(const Vector& x, const Vector& u) const override;
    Vector multipliers(const Vector& x, const Vector& u) const override;
    Vector project_tangent(const Vector& x, const Vector& u) const override;
    Vector curvature(const Vector& x, const Vector& eta, const Vector& xi) const override;

    Vector retract(const Vector& x, const Vector& eta) const override;
    Vector transport(const Vector& x, const Vector& eta, const Vector& xi) const override;

    /// u scaled to unit norm.
    Vector normalize(const Vector& u) const;

  private:
    auto dot() const {
      return [this](const Vector& a, const Vector& b) { return space().inner(a, b); };
    }
  };

}  // namespace chisd
