#pragma once

#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "chisd/manifold.hpp"
#include "chisd/problem.hpp"
#include "chisd/space.hpp"

/**
 * \file dynamics.hpp
 *
 * @brief Constrained high-index saddle dynamics: the discrete k-saddle search and its continuous-time stability test.
 */

namespace chisd {

  /// How the v-step evaluates Hess E(x)[v].
  enum class HessianMode {
    dimer,    ///< central difference of the (extended) Riemannian gradient at x +- l v
    analytic  ///< riemannian_hess_vec with the problem's ambient Hessian
  };

  HessianMode parse_hessian_mode(std::string_view name);
  std::string_view to_string(HessianMode mode);

  struct SearchConfig {
    /// Target index; the frame carries k directions.
    std::size_t k = 0;
    /// x step size.
    double alpha = 1e-4;
    /// v step size.
    double beta = 1e-3;
    /// Dimer half-length l.
    double dimer_length = 1e-3;
    /// Converged once |grad E| <= grad_tol.
    double grad_tol = 1e-8;
    long max_iter = 1'000'000;
    HessianMode hessian = HessianMode::dimer;
    /// Inner v-updates per x-step.
    int v_repeats = 1;
    /// Abort once E exceeds this.
    double divergence_energy = 1e8;
    /// The energy-based divergence test runs every this many steps.
    long energy_check_every = 100;
    /// Hard bound on max_l |c_l(x)| after every step.
    double feasibility_tol = 1e-8;
    /// Record (iter, E, |grad E|) every this many steps; 0 disables the trace.
    long trace_every = 0;

    /// Throws Error naming the first offending field.
    void validate() const;
  };

  struct SearchState {
    Vector x;
    Frame frame;
    long iter = 0;
    double last_grad_norm = std::numeric_limits<double>::infinity();
  };

  enum class SearchStatus { converged, max_iter, diverged, rank_loss };

  std::string_view to_string(SearchStatus status);

  struct TracePoint {
    long iter;
    double energy;
    double grad_norm;
  };

  struct SearchOutcome {
    SearchStatus status = SearchStatus::max_iter;
    SearchState state;
    double energy = std::numeric_limits<double>::quiet_NaN();
    double grad_norm = std::numeric_limits<double>::infinity();
    long iterations = 0;
    std::vector<TracePoint> trace;
    std::string message;

    bool converged() const noexcept { return status == SearchStatus::converged; }
  };

  /**
   * @brief Builds a state at x from raw directions: projects them to T(x) and orthonormalizes.
   *
   * Throws DomainError if x is infeasible beyond 1e-8 and RankDeficiencyError if the directions are dependent.
   */
  SearchState make_state(const Manifold& chart, Vector x, const Frame& directions);

  /// Throws DomainError unless x is feasible within 1e-8 and the frame is tangent and orthonormal within 1e-10.
  void check_state(const Manifold& chart, const SearchState& state);

  /**
   * @brief Dimer estimate of Hess E(x)[v] for a unit tangent v.
   *
   * P_T(x) (grad E(x + l v) - grad E(x - l v)) / (2 l), with grad E extended off the manifold by projecting at the
   * evaluation point.
   */
  Vector dimer_hess_vec(const Problem& problem, const Manifold& chart, const Vector& x, const Vector& v, double l);

  /// Hess E(x)[v] under the given mode; egrad is the ambient gradient at x (used by the analytic mode only).
  Vector hessian_action(const Problem& problem, const Manifold& chart, HessianMode mode, double l, const Vector& x,
                        const Vector& egrad, const Vector& v);

  /**
   * @brief One iteration of k-CHiSD.
   *
   * x' = R_x(alpha g) with g = -(I - 2 sum v_i v_i^T) grad E(x). Each v_i is transported along alpha g, updated by
   * one deflated gradient step of size beta using Hess E(x')[v_i], and the frame is re-orthonormalized.
   *
   * Throws RankDeficiencyError on frame collapse and DomainError on feasibility drift or non-finite iterates.
   */
  SearchState step(const Problem& problem, const Manifold& chart, const SearchConfig& config, const SearchState& state);

  /// Iterates step() until |grad E| <= grad_tol, max_iter, or failure. Failures are reported, not thrown.
  SearchOutcome run(const Problem& problem, const Manifold& chart, const SearchConfig& config, const SearchState& init);

  struct StabilityOptions {
    /// Finite-difference step for the Jacobian.
    double fd_step = 1e-6;
    /// Two-sided differences by default: the one-sided O(h) bias is about 4e-6 on the penalty eigenvalue at mu = 2.5.
    bool central = true;
    /// Precondition on |grad E(x*)|.
    double stationarity_tol = 1e-6;
    /// Upper bound on d (1 + k).
    std::size_t max_unknowns = 200;
  };

  /**
   * @brief Right-hand side of the penalty-stabilized continuous dynamics on the augmented state (x, v_1..v_k).
   *
   * x' = -(I - 2 sum v_i v_i^T) grad E(x) - mu sum_l c_l(x) grad c_l(x)
   * v_i' = -(I - v_i v_i^T - 2 sum_{j<i} v_j v_j^T) HessExt(x)[v_i] - A (A^T A)^{-1} ((Hess c) x')^T v_i
   *
   * with HessExt(x)[v] = Hess E(x)[P_T(x) v]. The augmented vector is x followed by v_1..v_k.
   */
  Vector modified_dynamics_rhs(const Problem& problem, const Manifold& chart, std::size_t k, const Vector& z, double mu);

  /**
   * @brief Spectrum of the Jacobian of modified_dynamics_rhs at (x*, frame*), by dense finite differences.
   *
   * For a nondegenerate k-saddle with an eigenvector frame every eigenvalue has negative real part, and the m
   * eigenvalues -mu |grad c_l|^2 appear from the penalty term.
   */
  std::vector<std::complex<double>> stability_spectrum(const Problem& problem, const Manifold& chart, std::size_t k,
                                                       const Vector& x, const Frame& frame, double mu,
                                                       const StabilityOptions& options = {});

}  // namespace chisd
