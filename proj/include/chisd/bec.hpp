#pragma once

#include <complex>
#include <cstdint>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "chisd/problem.hpp"
#include "chisd/sphere.hpp"

/**
 * \file bec.hpp
 *
 * @brief Stationary states of the 2D Gross-Pitaevskii energy on a truncated square with zero boundary values.
 *
 * A complex field on the N x N interior nodes is stored as 2 N^2 reals, (Re, Im) interleaved, node (ix, iy) at
 * pair index iy * N + ix. The inner product is the real part of the L^2 product, h^2 sum (Re u Re v + Im u Im v),
 * so the normalization constraint is the unit sphere of RealSpace::uniform(2 N^2, h^2).
 */

namespace chisd::bec {

  /// Cell-centred nodes x_i = -M + (i + 1/2) h, h = 2M / N; values outside the nodes are zero.
  struct Grid2D {
    double half_width;
    std::size_t nodes;

    Grid2D(double half_width, std::size_t nodes);

    double h() const noexcept { return 2.0 * half_width / static_cast<double>(nodes); }
    double coord(std::size_t i) const noexcept { return -half_width + (static_cast<double>(i) + 0.5) * h(); }
    std::size_t pairs() const noexcept { return nodes * nodes; }
    std::size_t dim() const noexcept { return 2 * pairs(); }
    std::size_t pair(std::size_t ix, std::size_t iy) const noexcept { return iy * nodes + ix; }

    RealSpace space() const { return RealSpace::uniform(dim(), h() * h()); }
  };

  using Potential = std::function<double(double, double)>;

  /// V(x, y) = (x^2 + y^2) / 2.
  double harmonic(double x, double y);

  std::complex<double> value(const Vector& field, std::size_t pair);

  /// E = h^2 sum (|grad phi|^2 / 2 + V |phi|^2 + beta |phi|^4 / 2), with edge differences for the gradient term.
  class Problem final : public chisd::Problem {
  public:
    Problem(Grid2D grid, double beta, Potential potential = harmonic);

    const Grid2D& grid() const noexcept { return grid_; }
    double beta() const noexcept { return beta_; }
    const Vector& potential() const noexcept { return v_; }

    std::string name() const override { return "bec"; }
    std::size_t dim() const override { return grid_.dim(); }
    double energy(const Vector& phi) const override;
    /// -Delta_h phi + 2 V phi + 2 beta |phi|^2 phi.
    Vector gradient(const Vector& phi) const override;
    bool has_hessian() const override { return true; }
    /// -Delta_h eta + 2 V eta + 2 beta (2 |phi|^2 eta + phi^2 conj(eta)); real-linear, not complex-linear.
    Vector hess_vec(const Vector& phi, const Vector& eta) const override;

    /// E + (beta / 2) h^2 sum |phi|^4.
    double chemical_potential(const Vector& phi) const;
    /// h^2 sum |phi|^4.
    double quartic(const Vector& phi) const;

    /// Necessary condition via the D4- and phase-invariant second moment h^2 sum r^2 |phi|^2.
    bool prefilter(const Vector& a, const Vector& b, double tol) const override;
    /// Distance minimized over the global phase, the 8 grid symmetries and complex conjugation.
    double aligned_distance(const Vector& a, const Vector& b) const override;

  private:
    Vector laplacian(const Vector& u) const;

    Grid2D grid_;
    double beta_;
    Vector v_;
    Vector r2_;
  };

  /// The normalization sphere h^2 sum |phi|^2 = 1.
  SphereChart make_chart(const Grid2D& grid, RetractionKind retraction = RetractionKind::exponential,
                         TransportKind transport = TransportKind::parallel);

  /// Normalizes any nonzero field in the weighted L^2 norm.
  Vector normalized(const Grid2D& grid, Vector phi);

  /// sqrt(max(mu_TF - V, 0) / beta) with mu_TF = sqrt(beta / pi), normalized; falls back to the Gaussian for beta <= 0.
  Vector thomas_fermi(const Grid2D& grid, double beta);
  /// exp(-r^2 / 2), normalized.
  Vector gaussian(const Grid2D& grid);
  /// ((x - x0) + i sign(q) (y - y0))^|q| exp(-r^2 / 2), normalized.
  Vector vortex(const Grid2D& grid, int charge = 1, double x0 = 0.0, double y0 = 0.0);

  /// Image of phi under grid symmetry g in [0, 8) (g = 0 is the identity), conjugated if conj.
  Vector symmetry_image(const Grid2D& grid, const Vector& phi, int g, bool conj);

  struct Vortex {
    double x;
    double y;
    int charge;
  };

  /**
   * @brief Phase windings around the plaquettes whose four corner densities exceed density_floor * max |phi|^2.
   *
   * The floor keeps the phase noise of the near-empty region outside the condensate from registering as vortices.
   */
  std::vector<Vortex> find_vortices(const Grid2D& grid, const Vector& phi, double density_floor = 1e-2);

  /**
   * @brief |phi(x, y)|^2 with phi interpolated bilinearly from the four surrounding nodes; zero outside the grid.
   *
   * The grid is cell centred, so the origin is a plaquette corner; interpolating phi rather than |phi|^2 lets a vortex
   * core at the origin read as the density hole it is.
   */
  double density_at(const Grid2D& grid, const Vector& phi, double x, double y);
  double max_density(const Grid2D& grid, const Vector& phi);

  /**
   * @brief Writes |phi|^2 as a 16-bit binary PGM scaled to [0, max], top row = largest y, plus path + ".txt" with
   * the scale and grid metadata. Throws IoError naming the path.
   */
  void export_density(const Grid2D& grid, const Vector& phi, const std::filesystem::path& path);

  /// Reads back a PGM written by export_density as raw 16-bit samples, row-major.
  std::vector<std::uint16_t> read_pgm16(const std::filesystem::path& path, std::size_t* width = nullptr, std::size_t* height = nullptr);

  /**
   * @brief Binary field dump: 8-byte magic "CHISDWF1", uint32 endianness tag 0x01020304 in writer byte order,
   * float64 M, uint64 N, then 2 N^2 float64 values (Re, Im interleaved) in writer byte order.
   */
  void write_field(const Grid2D& grid, const Vector& phi, const std::filesystem::path& path);

  struct FieldFile {
    Grid2D grid;
    Vector phi;
  };

  /// Accepts either byte order. Throws IoError on malformed input.
  FieldFile read_field(const std::filesystem::path& path);

}  // namespace chisd::bec
