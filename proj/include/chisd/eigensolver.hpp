#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "chisd/manifold.hpp"
#include "chisd/space.hpp"

/**
 * \file eigensolver.hpp
 *
 * @brief Smallest eigenpairs of a symmetric operator on the tangent space at a point, from operator products only.
 */

namespace chisd {

  /// A linear map T(x) -> T(x), typically v -> Hess E(x)[v].
  using TangentOperator = std::function<Vector(const Vector&)>;

  struct EigenOptions {
    /// Accept a pair once |H v - lambda v| <= tol * max(1, |lambda|).
    double tol = 1e-6;
    /// Budget of operator applications.
    std::size_t max_matvecs = 400'000;
    /// Seed of the start block.
    std::uint64_t seed = 0x5eed;
    /// Extra block vectors beyond K; 0 selects max(3, K/2).
    std::size_t guard = 0;
    /// Chebyshev filter degree per sweep. Degree 1 is a plain shifted power step.
    int degree = 10;
    /// Lanczos steps used to bound the top of the spectrum.
    int lanczos_steps = 20;
    /// Workers for the block products. Results do not depend on this.
    std::size_t threads = 1;
  };

  struct SpectrumResult {
    /// Ascending.
    std::vector<double> eigenvalues;
    Frame eigenvectors;
    std::vector<double> residuals;
    /// Upper bound of the spectrum from the Lanczos estimate.
    double spectral_scale = 0.0;
    std::size_t matvecs = 0;
  };

  /// Thrown when the budget runs out; carries the residuals reached so far.
  class EigenConvergenceError : public ConvergenceError {
  public:
    EigenConvergenceError(const std::string& what, std::vector<double> residuals)
        : ConvergenceError(what), residuals_(std::move(residuals)) {}

    const std::vector<double>& residuals() const noexcept { return residuals_; }

  private:
    std::vector<double> residuals_;
  };

  /**
   * @brief The K smallest eigenpairs of op restricted to T(x).
   *
   * Chebyshev-filtered subspace iteration: the block is repeatedly filtered by a Chebyshev polynomial that damps
   * [theta_p, lambda_max] and amplifies what lies below, then rotated by Rayleigh-Ritz. lambda_max is bounded by a
   * short Lanczos run. The start block is a seeded pseudo-random tangent block, so results are deterministic.
   *
   * Throws DomainError if K exceeds dim T(x) and EigenConvergenceError if the budget runs out.
   */
  SpectrumResult smallest_eigenpairs(const TangentOperator& op, const Manifold& chart, const Vector& x, std::size_t K,
                                     const EigenOptions& options = {});

  /// Dense matrix of op in a tangent orthonormal basis B (returned in basis), so the spectrum matches op on T(x).
  Matrix assemble_tangent_matrix(const TangentOperator& op, const Manifold& chart, const Vector& x, Frame* basis = nullptr);

}  // namespace chisd
