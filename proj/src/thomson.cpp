#include "chisd/thomson.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "chisd/sphere.hpp"

namespace chisd::thomson {

  namespace {

    using V2 = Eigen::Vector2d;
    using V3 = Eigen::Vector3d;

    std::size_t count(const Vector& x) {
      if (x.size() % 3 != 0 || x.size() < 6) {
        throw DimensionError("thomson: configuration length " + std::to_string(x.size()) + " is not 3N with N >= 2");
      }
      return static_cast<std::size_t>(x.size() / 3);
    }

    V3 particle(const Vector& x, std::size_t i) { return x.segment<3>(static_cast<Eigen::Index>(3 * i)); }

    void set(Vector& x, std::size_t i, const V3& p) { x.segment<3>(static_cast<Eigen::Index>(3 * i)) = p; }

    double pair_distance(const V3& d, std::size_t i, std::size_t j) {
      const double r = d.norm();
      if (!(r >= kCoincidence)) {
        throw SingularityError("thomson: particles " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
      }
      return r;
    }

    constexpr auto dot = [](const auto& a, const auto& b) { return a.dot(b); };

  }  // namespace

  double energy(const Vector& x) {
    const std::size_t n = count(x);
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const V3 xi = particle(x, i);
      for (std::size_t j = i + 1; j < n; ++j) {
        e += 1.0 / pair_distance(xi - particle(x, j), i, j);
      }
    }
    return e;
  }

  Vector gradient(const Vector& x) {
    const std::size_t n = count(x);
    Vector g = Vector::Zero(x.size());
    for (std::size_t i = 0; i < n; ++i) {
      const V3 xi = particle(x, i);
      for (std::size_t j = i + 1; j < n; ++j) {
        const V3 d = xi - particle(x, j);
        const double r = pair_distance(d, i, j);
        const V3 f = d / (r * r * r);
        g.segment<3>(static_cast<Eigen::Index>(3 * i)) -= f;
        g.segment<3>(static_cast<Eigen::Index>(3 * j)) += f;
      }
    }
    return g;
  }

  Vector hess_vec(const Vector& x, const Vector& eta) {
    const std::size_t n = count(x);
    if (eta.size() != x.size()) {
      throw DimensionError("thomson::hess_vec: direction length differs from the configuration");
    }
    Vector out = Vector::Zero(x.size());
    for (std::size_t i = 0; i < n; ++i) {
      const V3 xi = particle(x, i);
      for (std::size_t j = i + 1; j < n; ++j) {
        const V3 d = xi - particle(x, j);
        const double r = pair_distance(d, i, j);
        const double r2 = r * r;
        const double r3 = r2 * r;
        const V3 w = particle(eta, i) - particle(eta, j);
        // Hessian of 1/|d| is (3 d d^T / r^2 - I) / r^3.
        const V3 b = (3.0 * d.dot(w) / r2 * d - w) / r3;
        out.segment<3>(static_cast<Eigen::Index>(3 * i)) += b;
        out.segment<3>(static_cast<Eigen::Index>(3 * j)) -= b;
      }
    }
    return out;
  }

  Vector distance_spectrum(const Vector& x) {
    const std::size_t n = count(x);
    std::vector<double> d;
    d.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        d.push_back((particle(x, i) - particle(x, j)).norm());
      }
    }
    std::sort(d.begin(), d.end());
    return Eigen::Map<Vector>(d.data(), static_cast<Eigen::Index>(d.size()));
  }

  Vector reflect(const Vector& x, int sx, int sy) {
    const std::size_t n = count(x);
    Vector y = x;
    for (std::size_t i = 0; i < n; ++i) {
      y[static_cast<Eigen::Index>(3 * i)] *= sx;
      y[static_cast<Eigen::Index>(3 * i + 1)] *= sy;
    }
    return y;
  }

  std::vector<Vector> gauge_images(const Vector& x) {
    return {x, reflect(x, -1, 1), reflect(x, 1, -1), reflect(x, -1, -1)};
  }

  Vector gauge_fix(const Vector& x) {
    const std::size_t n = count(x);
    Vector y(x.size());
    for (std::size_t i = 0; i < n; ++i) {
      const V3 p = particle(x, i);
      const double r = p.norm();
      if (!(r > 0.0)) {
        throw DomainError("thomson::gauge_fix: particle " + std::to_string(i) + " is at the origin");
      }
      set(y, i, p / r);
    }
    const Eigen::Quaterniond to_pole = Eigen::Quaterniond::FromTwoVectors(particle(y, 0), V3::UnitZ());
    for (std::size_t i = 0; i < n; ++i) {
      set(y, i, to_pole * particle(y, i));
    }
    const V3 p2 = particle(y, 1);
    const double phi = std::atan2(p2.y(), p2.x());
    // Rotate about z so particle 2 lands on the half-plane x = 0, y >= 0.
    const Eigen::AngleAxisd spin(std::numbers::pi / 2 - phi, V3::UnitZ());
    for (std::size_t i = 0; i < n; ++i) {
      set(y, i, spin * particle(y, i));
    }
    set(y, 0, V3::UnitZ());
    y[3] = 0.0;
    const V2 yz = y.segment<2>(4);
    y.segment<2>(4) = yz / yz.norm();
    return y;
  }

  double gauge_defect(const Vector& x) {
    const std::size_t n = count(x);
    double g = std::max((particle(x, 0) - V3::UnitZ()).cwiseAbs().maxCoeff(), std::abs(x[3]));
    for (std::size_t i = 1; i < n; ++i) {
      g = std::max(g, std::abs(particle(x, i).norm() - 1.0));
    }
    return g;
  }

  ReferenceKind parse_reference(std::string_view name) {
    if (name == "pp") return ReferenceKind::planar_polygon;
    if (name == "rd") return ReferenceKind::dipyramid;
    if (name == "ring") return ReferenceKind::pole_ring;
    if (name == "rp") return ReferenceKind::pyramid;
    throw Error("unknown reference configuration '" + std::string(name) + "' (expected pp|rd|rp|ring)");
  }

  std::string_view to_string(ReferenceKind kind) {
    switch (kind) {
      case ReferenceKind::planar_polygon:
        return "pp";
      case ReferenceKind::dipyramid:
        return "rd";
      case ReferenceKind::pole_ring:
        return "ring";
      case ReferenceKind::pyramid:
        return "rp";
    }
    return "?";
  }

  Vector planar_polygon(std::size_t n) {
    if (n < 3) throw DomainError("thomson: the planar polygon needs N >= 3");
    Vector x(static_cast<Eigen::Index>(3 * n));
    for (std::size_t i = 0; i < n; ++i) {
      const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
      set(x, i, V3(0.0, std::sin(t), std::cos(t)));
    }
    set(x, 0, V3::UnitZ());
    return x;
  }

  Vector dipyramid(std::size_t n) {
    if (n < 4) throw DomainError("thomson: the dipyramid needs N >= 4");
    Vector x(static_cast<Eigen::Index>(3 * n));
    set(x, 0, V3::UnitZ());
    set(x, 1, V3::UnitY());
    set(x, 2, -V3::UnitZ());
    const std::size_t ring = n - 2;
    for (std::size_t k = 1; k < ring; ++k) {
      const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(ring);
      set(x, k + 2, V3(-std::sin(t), std::cos(t), 0.0));
    }
    return x;
  }

  Vector pole_ring(std::size_t n, double h) {
    if (n < 3) throw DomainError("thomson: the pole ring needs N >= 3");
    if (!(std::abs(h) < 1.0)) throw DomainError("thomson: ring height must lie in (-1, 1)");
    Vector x(static_cast<Eigen::Index>(3 * n));
    set(x, 0, V3::UnitZ());
    const double r = std::sqrt(1.0 - h * h);
    const std::size_t ring = n - 1;
    for (std::size_t k = 0; k < ring; ++k) {
      const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(ring);
      set(x, k + 1, V3(-r * std::sin(t), r * std::cos(t), h));
    }
    x[3] = 0.0;
    return x;
  }

  double pyramid_height(std::size_t n) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = -0.999;
    double b = 0.999;
    double c = b - phi * (b - a);
    double d = a + phi * (b - a);
    double fc = energy(pole_ring(n, c));
    double fd = energy(pole_ring(n, d));
    while (b - a > 1e-13) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - phi * (b - a);
        fc = energy(pole_ring(n, c));
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + phi * (b - a);
        fd = energy(pole_ring(n, d));
      }
    }
    // Energy values only pin h to about sqrt(eps); polish with secant steps on dE/dh.
    const auto slope = [n](double h) {
      const double t = 1e-5;
      return gradient(pole_ring(n, h)).dot(pole_ring(n, h + t) - pole_ring(n, h - t)) / (2.0 * t);
    };
    double h0 = 0.5 * (a + b);
    double h1 = h0 + 1e-7;
    double s0 = slope(h0);
    for (int it = 0; it < 20; ++it) {
      const double s1 = slope(h1);
      if (s1 == s0 || std::abs(h1 - h0) < 1e-16) break;
      const double h2 = h1 - s1 * (h1 - h0) / (s1 - s0);
      h0 = h1;
      s0 = s1;
      h1 = std::clamp(h2, -0.999, 0.999);
    }
    return h1;
  }

  Vector pyramid(std::size_t n) { return pole_ring(n, pyramid_height(n)); }

  Vector reference_config(ReferenceKind kind, std::size_t n, double h) {
    switch (kind) {
      case ReferenceKind::planar_polygon:
        return planar_polygon(n);
      case ReferenceKind::dipyramid:
        return dipyramid(n);
      case ReferenceKind::pole_ring:
        return pole_ring(n, h);
      case ReferenceKind::pyramid:
        return pyramid(n);
    }
    throw DomainError("thomson: unknown reference kind");
  }

  Chart::Chart(std::size_t n, RetractionKind retraction, TransportKind transport)
      : Manifold(RealSpace(3 * n), retraction, transport), n_(n) {
    if (n < 3) {
      throw DomainError("thomson::Chart: needs N >= 3");
    }
  }

  Vector Chart::constraints(const Vector& x) const {
    space().check(x);
    Vector c(static_cast<Eigen::Index>(n_ + 3));
    c.head<3>() = particle(x, 0) - V3::UnitZ();
    c[3] = x[3];
    for (std::size_t i = 1; i < n_; ++i) {
      c[static_cast<Eigen::Index>(i + 3)] = 0.5 * (particle(x, i).squaredNorm() - 1.0);
    }
    return c;
  }

  Matrix Chart::constraint_grads(const Vector& x) const {
    space().check(x);
    Matrix a = Matrix::Zero(x.size(), static_cast<Eigen::Index>(n_ + 3));
    a(0, 0) = a(1, 1) = a(2, 2) = 1.0;
    a(3, 3) = 1.0;
    for (std::size_t i = 1; i < n_; ++i) {
      a.block<3, 1>(static_cast<Eigen::Index>(3 * i), static_cast<Eigen::Index>(i + 3)) = particle(x, i);
    }
    return a;
  }

  Matrix Chart::constraint_hess_vec(const Vector& x, const Vector& u) const {
    space().check(x);
    Matrix h = Matrix::Zero(x.size(), static_cast<Eigen::Index>(n_ + 3));
    for (std::size_t i = 1; i < n_; ++i) {
      h.block<3, 1>(static_cast<Eigen::Index>(3 * i), static_cast<Eigen::Index>(i + 3)) = particle(u, i);
    }
    return h;
  }

  Vector Chart::multipliers(const Vector& x, const Vector& u) const {
    space().check(x);
    space().check(u);
    Vector xi(static_cast<Eigen::Index>(n_ + 3));
    xi.head<3>() = particle(u, 0);
    // Particle 2: normals e_x and p; solve the 2x2 Gram system [[1, p_x], [p_x, |p|^2]].
    const V3 p = particle(x, 1);
    const V3 w = particle(u, 1);
    const double det = p.squaredNorm() - p.x() * p.x();
    if (!(det > 1e-28)) {
      throw LicqError("thomson::Chart: particle 2 lies on the x-axis", INFINITY);
    }
    const double b = (p.dot(w) - p.x() * w.x()) / det;
    xi[3] = w.x() - p.x() * b;
    xi[4] = b;
    for (std::size_t i = 2; i < n_; ++i) {
      const V3 q = particle(x, i);
      const double qq = q.squaredNorm();
      if (!(qq > 0.0)) {
        throw LicqError("thomson::Chart: particle at the origin", INFINITY);
      }
      xi[static_cast<Eigen::Index>(i + 3)] = q.dot(particle(u, i)) / qq;
    }
    return xi;
  }

  Vector Chart::project_tangent(const Vector& x, const Vector& u) const {
    const Vector xi = multipliers(x, u);
    Vector out = u;
    out.head<3>().setZero();
    out[3] -= xi[3];
    for (std::size_t i = 1; i < n_; ++i) {
      out.segment<3>(static_cast<Eigen::Index>(3 * i)) -= xi[static_cast<Eigen::Index>(i + 3)] * particle(x, i);
    }
    return out;
  }

  Vector Chart::curvature(const Vector& x, const Vector& eta, const Vector& xi) const {
    space().check(x);
    Vector out = Vector::Zero(eta.size());
    for (std::size_t i = 1; i < n_; ++i) {
      out.segment<3>(static_cast<Eigen::Index>(3 * i)) = xi[static_cast<Eigen::Index>(i + 3)] * particle(eta, i);
    }
    return out;
  }

  Vector Chart::retract(const Vector& x, const Vector& eta) const {
    space().check(x);
    space().check(eta);
    Vector y = x;
    const V2 p2 = x.segment<2>(4);
    const V2 e2 = eta.segment<2>(4);
    y.segment<2>(4) = sphere::retract(retraction_kind(), p2, e2, dot);
    for (std::size_t i = 2; i < n_; ++i) {
      set(y, i, sphere::retract(retraction_kind(), particle(x, i), particle(eta, i), dot));
    }
    return y;
  }

  Vector Chart::transport(const Vector& x, const Vector& eta, const Vector& xi) const {
    space().check(x);
    space().check(eta);
    space().check(xi);
    Vector out = Vector::Zero(x.size());
    const V2 p2 = x.segment<2>(4);
    const V2 e2 = eta.segment<2>(4);
    const V2 x2 = xi.segment<2>(4);
    out.segment<2>(4) = sphere::transport(retraction_kind(), transport_kind(), p2, e2, x2, dot);
    for (std::size_t i = 2; i < n_; ++i) {
      set(out, i, sphere::transport(retraction_kind(), transport_kind(), particle(x, i), particle(eta, i), particle(xi, i), dot));
    }
    return out;
  }

  Problem::Problem(std::size_t n) : n_(n) {
    if (n < 2) {
      throw DomainError("thomson::Problem: needs N >= 2");
    }
  }

  bool Problem::prefilter(const Vector& a, const Vector& b, double tol) const {
    return (distance_spectrum(a) - distance_spectrum(b)).cwiseAbs().maxCoeff() <= tol;
  }

  double Problem::aligned_distance(const Vector& a, const Vector& b) const {
    return (distance_spectrum(a) - distance_spectrum(b)).cwiseAbs().maxCoeff();
  }

}  // namespace chisd::thomson
