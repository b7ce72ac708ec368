#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "chisd/core.hpp"

/**
 * \file space.hpp
 *
 * @brief Weighted real inner-product spaces and orthonormal frames.
 */

namespace chisd {

  /**
   * @brief A finite-dimensional real Hilbert space with a diagonal metric.
   *
   * The inner product is sum_i w_i u_i v_i. Euclidean spaces carry unit weights and take a faster path that gives
   * identical results. Reductions always run left to right so a run is reproducible bit-for-bit.
   */
  class RealSpace {
  public:
    /// Euclidean space of dimension dim.
    explicit RealSpace(std::size_t dim);

    /// Weighted space; every weight must be positive.
    explicit RealSpace(Vector weights);

    /// Uniform weight w on dim coordinates (quadrature on a uniform grid).
    static RealSpace uniform(std::size_t dim, double w);

    std::size_t dim() const noexcept { return dim_; }
    bool euclidean() const noexcept { return euclidean_; }
    const Vector& weights() const noexcept { return weights_; }

    double inner(const Vector& u, const Vector& v) const;
    double norm(const Vector& u) const;
    double norm2(const Vector& u) const { return inner(u, u); }

    /// Throws DimensionError unless u has length dim().
    void check(const Vector& u) const;

  private:
    std::size_t dim_;
    Vector weights_;
    bool euclidean_;
  };

  /**
   * @brief Ordered set of k vectors in a common space.
   *
   * Orthonormality is a post-condition of gram_schmidt, not a class invariant, so intermediate (pre-orthonormalized)
   * frames can live in the same type.
   */
  class Frame {
  public:
    Frame() = default;
    explicit Frame(std::vector<Vector> vectors) : vectors_(std::move(vectors)) {}
    Frame(std::initializer_list<Vector> vectors) : vectors_(vectors) {}

    std::size_t size() const noexcept { return vectors_.size(); }
    bool empty() const noexcept { return vectors_.empty(); }

    Vector& operator[](std::size_t i) { return vectors_[i]; }
    const Vector& operator[](std::size_t i) const { return vectors_[i]; }

    void push_back(Vector v) { vectors_.push_back(std::move(v)); }

    auto begin() { return vectors_.begin(); }
    auto end() { return vectors_.end(); }
    auto begin() const { return vectors_.begin(); }
    auto end() const { return vectors_.end(); }

    /// First n vectors.
    Frame head(std::size_t n) const;

    const std::vector<Vector>& vectors() const noexcept { return vectors_; }

  private:
    std::vector<Vector> vectors_;
  };

  /// Gram matrix G_ij = <f_i, f_j>.
  Matrix gram_matrix(const RealSpace& space, const Frame& frame);

  /// max_ij |G_ij - delta_ij|.
  double orthonormality_defect(const RealSpace& space, const Frame& frame);

  /// Relative pivot below which gram_schmidt reports rank loss.
  inline constexpr double kRankDropTolerance = 1e-10;

  /**
   * @brief Modified Gram-Schmidt with one re-orthogonalization pass.
   *
   * The first output is the normalized first input and the span is preserved prefix by prefix. A pivot norm below
   * kRankDropTolerance times the norm of the first input throws RankDeficiencyError carrying the index.
   */
  Frame gram_schmidt(const RealSpace& space, const Frame& frame);

}  // namespace chisd
