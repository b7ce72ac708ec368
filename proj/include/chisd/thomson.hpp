#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "chisd/manifold.hpp"
#include "chisd/problem.hpp"

/**
 * \file thomson.hpp
 *
 * @brief N unit charges on S^2 with the Coulomb energy, on the gauge-fixed product-of-spheres chart.
 *
 * Configurations are flattened to 3N vectors (x_1, y_1, z_1, x_2, ...). The gauge pins particle 1 to the north pole
 * and particle 2 to the great circle x = 0, which removes the SO(3) orbit.
 */

namespace chisd::thomson {

  /// Pairs closer than this raise SingularityError.
  inline constexpr double kCoincidence = 1e-12;

  double energy(const Vector& x);
  Vector gradient(const Vector& x);
  Vector hess_vec(const Vector& x, const Vector& eta);

  /// Ascending list of the N(N-1)/2 pairwise distances; invariant under O(3) and relabeling.
  Vector distance_spectrum(const Vector& x);

  /// (x, y, z) -> (sx x, sy y, z) on every particle; with sx, sy in {+1, -1} these preserve the gauge.
  Vector reflect(const Vector& x, int sx, int sy);

  /// The four gauge-preserving reflections of x (identity first).
  std::vector<Vector> gauge_images(const Vector& x);

  /// Rotates an arbitrary configuration (points normalized first) into the gauge.
  Vector gauge_fix(const Vector& x);

  /// max_i |(|x_i| - 1)|, |x_1 - e_z| and |x-coordinate of particle 2|.
  double gauge_defect(const Vector& x);

  enum class ReferenceKind { planar_polygon, dipyramid, pole_ring, pyramid };

  ReferenceKind parse_reference(std::string_view name);
  std::string_view to_string(ReferenceKind kind);

  /// N points evenly spaced on the great circle x = 0.
  Vector planar_polygon(std::size_t n);
  /// Both poles and an (N-2)-gon on the equator.
  Vector dipyramid(std::size_t n);
  /// The north pole and an (N-1)-gon on the latitude z = h.
  Vector pole_ring(std::size_t n, double h);
  /// Height of the energy-minimizing ring, by golden-section search over h.
  double pyramid_height(std::size_t n);
  /// pole_ring at pyramid_height.
  Vector pyramid(std::size_t n);

  /// Throws DomainError for N < 3 (and for the dipyramid, N < 4).
  Vector reference_config(ReferenceKind kind, std::size_t n, double h = 0.0);

  /**
   * @brief {x_1 = e_z} x {x_2 in S^1 of the yz-plane} x (S^2)^{N-2}.
   *
   * Constraints, in order: the three coordinates of particle 1, the x-coordinate of particle 2, then
   * (|x_i|^2 - 1)/2 for i = 2..N. m = N + 3 and dim T = 2N - 3. Every geometric operation is block-wise closed form.
   */
  class Chart final : public Manifold {
  public:
    explicit Chart(std::size_t n, RetractionKind retraction = RetractionKind::exponential,
                   TransportKind transport = TransportKind::parallel);

    std::size_t particles() const noexcept { return n_; }

    std::size_t constraint_count() const override { return n_ + 3; }
    Vector constraints(const Vector& x) const override;
    Matrix constraint_grads(const Vector& x) const override;
    Matrix constraint_hess_vec(const Vector& x, const Vector& u) const override;

    Vector multipliers(const Vector& x, const Vector& u) const override;
    Vector project_tangent(const Vector& x, const Vector& u) const override;
    Vector curvature(const Vector& x, const Vector& eta, const Vector& xi) const override;

    Vector retract(const Vector& x, const Vector& eta) const override;
    Vector transport(const Vector& x, const Vector& eta, const Vector& xi) const override;

  private:
    std::size_t n_;
  };

  /// Coulomb energy with analytic derivatives; configurations compare by their distance spectra.
  class Problem final : public chisd::Problem {
  public:
    explicit Problem(std::size_t n);

    std::string name() const override { return "thomson"; }
    std::size_t dim() const override { return 3 * n_; }
    double energy(const Vector& x) const override { return thomson::energy(x); }
    Vector gradient(const Vector& x) const override { return thomson::gradient(x); }
    bool has_hessian() const override { return true; }
    Vector hess_vec(const Vector& x, const Vector& eta) const override { return thomson::hess_vec(x, eta); }

    bool prefilter(const Vector& a, const Vector& b, double tol) const override;
    double aligned_distance(const Vector& a, const Vector& b) const override;

  private:
    std::size_t n_;
  };

}  // namespace chisd::thomson
