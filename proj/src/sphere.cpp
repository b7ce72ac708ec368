#include "chisd/sphere.hpp"

namespace chisd {

  SphereChart::SphereChart(RealSpace space, RetractionKind retraction, TransportKind transport)
      : Manifold(std::move(space), retraction, transport) {}

  Vector SphereChart::constraints(const Vector& x) const {
    Vector c(1);
    c[0] = 0.5 * (space().norm2(x) - 1.0);
    return c;
  }

  Matrix SphereChart::constraint_grads(const Vector& x) const {
    space().check(x);
    return x;
  }

  Matrix SphereChart::constraint_hess_vec(const Vector& x, const Vector& u) const {
    space().check(x);
    return u;
  }

  Vector SphereChart::normal_components(const Vector& x, const Vector& u) const {
    Vector out(1);
    out[0] = space().inner(x, u);
    return out;
  }

  Vector SphereChart::multipliers(const Vector& x, const Vector& u) const {
    const double xx = space().norm2(x);
    if (!(xx > 0.0)) {
      throw LicqError("SphereChart: zero point has no normal", INFINITY);
    }
    Vector out(1);
    out[0] = space().inner(x, u) / xx;
    return out;
  }

  Vector SphereChart::project_tangent(const Vector& x, const Vector& u) const {
    const double xx = space().norm2(x);
    if (!(xx > 0.0)) {
      throw LicqError("SphereChart: zero point has no normal", INFINITY);
    }
    return sphere::project(x, u, dot());
  }

  Vector SphereChart::curvature(const Vector&, const Vector& eta, const Vector& xi) const { return xi[0] * eta; }

  Vector SphereChart::retract(const Vector& x, const Vector& eta) const { return sphere::retract(retraction_kind(), x, eta, dot()); }

  Vector SphereChart::transport(const Vector& x, const Vector& eta, const Vector& xi) const {
    return sphere::transport(retraction_kind(), transport_kind(), x, eta, xi, dot());
  }

  Vector SphereChart::normalize(const Vector& u) const { return u / space().norm(u); }

}  // namespace chisd
