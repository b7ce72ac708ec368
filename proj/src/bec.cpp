#include "chisd/bec.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace chisd::bec {

  Grid2D::Grid2D(double half_width_, std::size_t nodes_) : half_width(half_width_), nodes(nodes_) {
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
      throw DomainError("bec::Grid2D: half-width M must be positive");
    }
    if (nodes < 2) {
      throw DomainError("bec::Grid2D: need at least 2 nodes per dimension");
    }
  }

  double harmonic(double x, double y) { return 0.5 * (x * x + y * y); }

  std::complex<double> value(const Vector& field, std::size_t pair) {
    const auto k = static_cast<Eigen::Index>(2 * pair);
    return {field[k], field[k + 1]};
  }

  Problem::Problem(Grid2D grid, double beta, Potential potential) : grid_(grid), beta_(beta) {
    if (!std::isfinite(beta)) {
      throw DomainError("bec::Problem: beta must be finite");
    }
    if (!potential) {
      throw DomainError("bec::Problem: potential is empty");
    }
    const std::size_t n = grid_.nodes;
    v_.resize(static_cast<Eigen::Index>(grid_.pairs()));
    r2_.resize(static_cast<Eigen::Index>(grid_.pairs()));
    for (std::size_t iy = 0; iy < n; ++iy) {
      for (std::size_t ix = 0; ix < n; ++ix) {
        const double x = grid_.coord(ix);
        const double y = grid_.coord(iy);
        const auto k = static_cast<Eigen::Index>(grid_.pair(ix, iy));
        v_[k] = potential(x, y);
        r2_[k] = x * x + y * y;
        if (!std::isfinite(v_[k])) {
          throw DomainError("bec::Problem: potential is not finite at node (" + std::to_string(ix) + ", " + std::to_string(iy) + ")");
        }
      }
    }
  }

  Vector Problem::laplacian(const Vector& u) const {
    if (static_cast<std::size_t>(u.size()) != grid_.dim()) {
      throw DimensionError("bec: field length " + std::to_string(u.size()) + ", expected " + std::to_string(grid_.dim()));
    }
    const std::size_t n = grid_.nodes;
    const double ih2 = 1.0 / (grid_.h() * grid_.h());
    Vector out(u.size());
    const double* p = u.data();
    double* q = out.data();
    const std::size_t row = 2 * n;
    for (std::size_t iy = 0; iy < n; ++iy) {
      for (std::size_t ix = 0; ix < n; ++ix) {
        const std::size_t k = 2 * (iy * n + ix);
        for (std::size_t c = 0; c < 2; ++c) {
          const double centre = p[k + c];
          const double w = ix > 0 ? p[k + c - 2] : 0.0;
          const double e = ix + 1 < n ? p[k + c + 2] : 0.0;
          const double s = iy > 0 ? p[k + c - row] : 0.0;
          const double nn = iy + 1 < n ? p[k + c + row] : 0.0;
          q[k + c] = (w + e + s + nn - 4.0 * centre) * ih2;
        }
      }
    }
    return out;
  }

  double Problem::energy(const Vector& phi) const {
    if (static_cast<std::size_t>(phi.size()) != grid_.dim()) {
      throw DimensionError("bec: field length " + std::to_string(phi.size()) + ", expected " + std::to_string(grid_.dim()));
    }
    const std::size_t n = grid_.nodes;
    const double h2 = grid_.h() * grid_.h();
    const double* p = phi.data();
    // Edge differences, including the edges to the zero boundary values; the 1/h^2 cancels the h^2 weight.
    double kin = 0.0;
    for (std::size_t iy = 0; iy < n; ++iy) {
      for (std::size_t ix = 0; ix <= n; ++ix) {
        for (std::size_t c = 0; c < 2; ++c) {
          const double a = ix > 0 ? p[2 * (iy * n + ix - 1) + c] : 0.0;
          const double b = ix < n ? p[2 * (iy * n + ix) + c] : 0.0;
          kin += (b - a) * (b - a);
        }
      }
    }
    for (std::size_t ix = 0; ix < n; ++ix) {
      for (std::size_t iy = 0; iy <= n; ++iy) {
        for (std::size_t c = 0; c < 2; ++c) {
          const double a = iy > 0 ? p[2 * ((iy - 1) * n + ix) + c] : 0.0;
          const double b = iy < n ? p[2 * (iy * n + ix) + c] : 0.0;
          kin += (b - a) * (b - a);
        }
      }
    }
    double pot = 0.0;
    double quart = 0.0;
    for (std::size_t k = 0; k < grid_.pairs(); ++k) {
      const double rho = p[2 * k] * p[2 * k] + p[2 * k + 1] * p[2 * k + 1];
      pot += v_[static_cast<Eigen::Index>(k)] * rho;
      quart += rho * rho;
    }
    return 0.5 * kin + h2 * (pot + 0.5 * beta_ * quart);
  }

  Vector Problem::gradient(const Vector& phi) const {
    Vector g = -laplacian(phi);
    const double* p = phi.data();
    double* q = g.data();
    for (std::size_t k = 0; k < grid_.pairs(); ++k) {
      const double re = p[2 * k];
      const double im = p[2 * k + 1];
      const double f = 2.0 * v_[static_cast<Eigen::Index>(k)] + 2.0 * beta_ * (re * re + im * im);
      q[2 * k] += f * re;
      q[2 * k + 1] += f * im;
    }
    return g;
  }

  Vector Problem::hess_vec(const Vector& phi, const Vector& eta) const {
    if (phi.size() != eta.size()) {
      throw DimensionError("bec::hess_vec: direction length differs from the field");
    }
    Vector out = -laplacian(eta);
    const double* p = phi.data();
    const double* e = eta.data();
    double* q = out.data();
    for (std::size_t k = 0; k < grid_.pairs(); ++k) {
      const double a = p[2 * k];
      const double b = p[2 * k + 1];
      const double u = e[2 * k];
      const double w = e[2 * k + 1];
      const double rho = a * a + b * b;
      const double vk = 2.0 * v_[static_cast<Eigen::Index>(k)];
      // 2|phi|^2 eta + phi^2 conj(eta) with phi^2 = (a^2 - b^2) + 2iab.
      const double re = 2.0 * rho * u + (a * a - b * b) * u + 2.0 * a * b * w;
      const double im = 2.0 * rho * w + 2.0 * a * b * u - (a * a - b * b) * w;
      q[2 * k] += vk * u + 2.0 * beta_ * re;
      q[2 * k + 1] += vk * w + 2.0 * beta_ * im;
    }
    return out;
  }

  double Problem::quartic(const Vector& phi) const {
    if (static_cast<std::size_t>(phi.size()) != grid_.dim()) {
      throw DimensionError("bec: field length mismatch");
    }
    double s = 0.0;
    for (std::size_t k = 0; k < grid_.pairs(); ++k) {
      const double rho = phi[static_cast<Eigen::Index>(2 * k)] * phi[static_cast<Eigen::Index>(2 * k)]
                         + phi[static_cast<Eigen::Index>(2 * k + 1)] * phi[static_cast<Eigen::Index>(2 * k + 1)];
      s += rho * rho;
    }
    return grid_.h() * grid_.h() * s;
  }

  double Problem::chemical_potential(const Vector& phi) const { return energy(phi) + 0.5 * beta_ * quartic(phi); }

  namespace {

    double second_moment(const Grid2D& grid, const Vector& r2, const Vector& phi) {
      double s = 0.0;
      for (std::size_t k = 0; k < grid.pairs(); ++k) {
        const auto i = static_cast<Eigen::Index>(2 * k);
        s += r2[static_cast<Eigen::Index>(k)] * (phi[i] * phi[i] + phi[i + 1] * phi[i + 1]);
      }
      return grid.h() * grid.h() * s;
    }

  }  // namespace

  bool Problem::prefilter(const Vector& a, const Vector& b, double tol) const {
    const RealSpace space = grid_.space();
    const double bound = r2_.maxCoeff() * (space.norm(a) + space.norm(b)) * tol;
    return std::abs(second_moment(grid_, r2_, a) - second_moment(grid_, r2_, b)) <= bound * (1.0 + 1e-12);
  }

  double Problem::aligned_distance(const Vector& a, const Vector& b) const {
    const double h2 = grid_.h() * grid_.h();
    double best = INFINITY;
    for (int g = 0; g < 8; ++g) {
      for (bool conj : {false, true}) {
        const Vector gb = symmetry_image(grid_, b, g, conj);
        // |a - e^{i theta} g b| is minimized when e^{i theta} is the phase of <gb, a>, the complex L^2 product.
        double re = 0.0;
        double im = 0.0;
        for (std::size_t k = 0; k < grid_.pairs(); ++k) {
          const auto i = static_cast<Eigen::Index>(2 * k);
          re += gb[i] * a[i] + gb[i + 1] * a[i + 1];
          im += gb[i] * a[i + 1] - gb[i + 1] * a[i];
        }
        const double r = std::hypot(re, im);
        const double c = r > 0.0 ? re / r : 1.0;
        const double s = r > 0.0 ? im / r : 0.0;
        // The explicit difference, not aa + bb - 2|<gb, a>|, which cancels to sqrt(eps) for equal states.
        double d2 = 0.0;
        for (std::size_t k = 0; k < grid_.pairs(); ++k) {
          const auto i = static_cast<Eigen::Index>(2 * k);
          const double dr = a[i] - (c * gb[i] - s * gb[i + 1]);
          const double di = a[i + 1] - (s * gb[i] + c * gb[i + 1]);
          d2 += dr * dr + di * di;
        }
        best = std::min(best, std::sqrt(h2 * d2));
      }
    }
    return best;
  }

  SphereChart make_chart(const Grid2D& grid, RetractionKind retraction, TransportKind transport) {
    return SphereChart(grid.space(), retraction, transport);
  }

  Vector normalized(const Grid2D& grid, Vector phi) {
    const double n = grid.space().norm(phi);
    if (!(n > 0.0)) {
      throw DomainError("bec: cannot normalize the zero field");
    }
    return phi / n;
  }

  namespace {

    template <typename F>
    Vector sample(const Grid2D& grid, F f) {
      Vector phi(static_cast<Eigen::Index>(grid.dim()));
      for (std::size_t iy = 0; iy < grid.nodes; ++iy) {
        for (std::size_t ix = 0; ix < grid.nodes; ++ix) {
          const std::complex<double> z = f(grid.coord(ix), grid.coord(iy));
          const auto k = static_cast<Eigen::Index>(2 * grid.pair(ix, iy));
          phi[k] = z.real();
          phi[k + 1] = z.imag();
        }
      }
      return phi;
    }

  }  // namespace

  Vector gaussian(const Grid2D& grid) {
    return normalized(grid, sample(grid, [](double x, double y) { return std::complex<double>(std::exp(-0.5 * (x * x + y * y))); }));
  }

  Vector thomas_fermi(const Grid2D& grid, double beta) {
    if (!(beta > 0.0)) {
      return gaussian(grid);
    }
    const double mu = std::sqrt(beta / std::numbers::pi);
    return normalized(grid, sample(grid, [&](double x, double y) {
                        return std::complex<double>(std::sqrt(std::max(mu - harmonic(x, y), 0.0) / beta));
                      }));
  }

  Vector vortex(const Grid2D& grid, int charge, double x0, double y0) {
    const int m = std::abs(charge);
    const double s = charge < 0 ? -1.0 : 1.0;
    return normalized(grid, sample(grid, [&](double x, double y) {
                        const std::complex<double> z(x - x0, s * (y - y0));
                        return std::pow(z, m) * std::exp(-0.5 * (x * x + y * y));
                      }));
  }

  Vector symmetry_image(const Grid2D& grid, const Vector& phi, int g, bool conj) {
    if (g < 0 || g >= 8) {
      throw DomainError("bec::symmetry_image: element must lie in [0, 8)");
    }
    const std::size_t n = grid.nodes;
    const std::size_t last = n - 1;
    Vector out(phi.size());
    for (std::size_t iy = 0; iy < n; ++iy) {
      for (std::size_t ix = 0; ix < n; ++ix) {
        // g = rotation count (g mod 4) by 90 degrees, followed by the x-mirror when g >= 4.
        std::size_t sx = ix;
        std::size_t sy = iy;
        for (int r = 0; r < g % 4; ++r) {
          const std::size_t tx = last - sy;
          sy = sx;
          sx = tx;
        }
        if (g >= 4) {
          sx = last - sx;
        }
        const auto src = static_cast<Eigen::Index>(2 * grid.pair(ix, iy));
        const auto dst = static_cast<Eigen::Index>(2 * grid.pair(sx, sy));
        out[dst] = phi[src];
        out[dst + 1] = conj ? -phi[src + 1] : phi[src + 1];
      }
    }
    return out;
  }

  std::vector<Vortex> find_vortices(const Grid2D& grid, const Vector& phi, double density_floor) {
    const std::size_t n = grid.nodes;
    const double floor = density_floor * max_density(grid, phi);
    auto wrap = [](double d) { return std::remainder(d, 2.0 * std::numbers::pi); };
    std::vector<Vortex> out;
    for (std::size_t iy = 0; iy + 1 < n; ++iy) {
      for (std::size_t ix = 0; ix + 1 < n; ++ix) {
        const std::size_t corners[4] = {grid.pair(ix, iy), grid.pair(ix + 1, iy), grid.pair(ix + 1, iy + 1), grid.pair(ix, iy + 1)};
        bool dense = true;
        double arg[4];
        for (int c = 0; c < 4; ++c) {
          const std::complex<double> z = value(phi, corners[c]);
          dense = dense && std::norm(z) > floor;
          arg[c] = std::arg(z);
        }
        if (!dense) continue;
        double w = 0.0;
        for (int c = 0; c < 4; ++c) {
          w += wrap(arg[(c + 1) % 4] - arg[c]);
        }
        const int q = static_cast<int>(std::lround(w / (2.0 * std::numbers::pi)));
        if (q != 0) {
          out.push_back({grid.coord(ix) + 0.5 * grid.h(), grid.coord(iy) + 0.5 * grid.h(), q});
        }
      }
    }
    return out;
  }

  double density_at(const Grid2D& grid, const Vector& phi, double x, double y) {
    const double h = grid.h();
    const double last = static_cast<double>(grid.nodes - 1);
    // Fractional node coordinates; node i sits at -M + (i + 1/2) h.
    const double fx = (x + grid.half_width) / h - 0.5;
    const double fy = (y + grid.half_width) / h - 0.5;
    if (!(fx >= -0.5 && fx <= last + 0.5 && fy >= -0.5 && fy <= last + 0.5)) return 0.0;
    const double cx = std::clamp(fx, 0.0, last);
    const double cy = std::clamp(fy, 0.0, last);
    const auto ix = static_cast<std::size_t>(std::min(std::floor(cx), last - 1.0));
    const auto iy = static_cast<std::size_t>(std::min(std::floor(cy), last - 1.0));
    const double tx = cx - static_cast<double>(ix);
    const double ty = cy - static_cast<double>(iy);
    const std::complex<double> z = (1 - tx) * (1 - ty) * value(phi, grid.pair(ix, iy)) + tx * (1 - ty) * value(phi, grid.pair(ix + 1, iy))
                                   + (1 - tx) * ty * value(phi, grid.pair(ix, iy + 1)) + tx * ty * value(phi, grid.pair(ix + 1, iy + 1));
    return std::norm(z);
  }

  double max_density(const Grid2D& grid, const Vector& phi) {
    double m = 0.0;
    for (std::size_t k = 0; k < grid.pairs(); ++k) {
      m = std::max(m, std::norm(value(phi, k)));
    }
    return m;
  }

}  // namespace chisd::bec
