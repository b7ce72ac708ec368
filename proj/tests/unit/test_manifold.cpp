#include <cmath>

#include "doctest.h"
#include "helpers.hpp"

#include "chisd/problem.hpp"
#include "chisd/sphere.hpp"
#include "chisd/thomson.hpp"

using namespace chisd;
using testing_support::normal_vector;
using testing_support::random_tangent;

namespace {

  struct Geometry {
    const Manifold& m;
    std::mt19937_64& rng;

    Vector point() const {
      const Vector y = normal_vector(rng, m.dim());
      if (const auto* sc = dynamic_cast<const SphereChart*>(&m)) return sc->normalize(y);
      return thomson::gauge_fix(y);
    }
  };

  void geometry_properties(const Manifold& m, std::uint64_t seed, int samples) {
    std::mt19937_64 rng(seed);
    const Geometry g{m, rng};
    std::uniform_real_distribution<double> scale(0.0, 2.0);
    double feas = 0, tang = 0, iso = 0, idem = 0;
    for (int s = 0; s < samples; ++s) {
      const Vector x = g.point();
      Vector eta = random_tangent(m, x, rng);
      eta *= scale(rng) / m.space().norm(eta);
      const Vector xi = random_tangent(m, x, rng);
      const Vector y = m.retract(x, eta);
      const Vector t = m.transport(x, eta, xi);
      feas = std::max(feas, m.feasibility(y));
      tang = std::max(tang, m.tangency(y, t) / m.space().norm(xi));
      if (m.transport_kind() == TransportKind::parallel) {
        iso = std::max(iso, std::abs(m.space().norm(t) - m.space().norm(xi)) / m.space().norm(xi));
      }
      const Vector u = normal_vector(rng, m.dim());
      const Vector p = m.project_tangent(x, u);
      idem = std::max(idem, m.space().norm(m.project_tangent(x, p) - p) / m.space().norm(u));
    }
    CHECK(feas <= 1e-12);
    CHECK(tang <= 1e-10);
    CHECK(iso <= 1e-12);
    CHECK(idem <= 1e-13);
  }

}  // namespace

TEST_CASE("sphere geometry holds on S^2, S^9 and a weighted sphere") {
  for (auto [r, t] : {std::pair{RetractionKind::exponential, TransportKind::parallel},
                      std::pair{RetractionKind::normalization, TransportKind::differentiated},
                      std::pair{RetractionKind::normalization, TransportKind::projection},
                      std::pair{RetractionKind::exponential, TransportKind::projection}}) {
    CAPTURE(to_string(r));
    CAPTURE(to_string(t));
    geometry_properties(SphereChart(RealSpace(3), r, t), 1, 300);
    geometry_properties(SphereChart(RealSpace(10), r, t), 2, 300);
    std::mt19937_64 rng(3);
    Vector w = normal_vector(rng, 40).cwiseAbs().array() + 0.05;
    geometry_properties(SphereChart(RealSpace(w), r, t), 3, 300);
  }
}

TEST_CASE("thomson chart geometry") {
  geometry_properties(thomson::Chart(7), 4, 300);
  geometry_properties(thomson::Chart(7, RetractionKind::normalization, TransportKind::differentiated), 5, 300);
}

TEST_CASE("incompatible retraction and transport are rejected") {
  CHECK_THROWS_AS(SphereChart(RealSpace(3), RetractionKind::normalization, TransportKind::parallel), Error);
  CHECK_THROWS_AS(SphereChart(RealSpace(3), RetractionKind::exponential, TransportKind::differentiated), Error);
  CHECK_THROWS_AS(parse_retraction("cayley"), Error);
  CHECK(parse_transport("projection") == TransportKind::projection);
}

TEST_CASE("exponential map follows the great circle") {
  const SphereChart s(RealSpace(3));
  const Vector x = Vector::Unit(3, 2);
  for (double t : {1e-9, 5e-5, 1e-3, 0.7, 2.5}) {
    CAPTURE(t);
    const Vector y = s.retract(x, t * Vector::Unit(3, 0));
    CHECK(y[0] == doctest::Approx(std::sin(t)).epsilon(1e-14));
    CHECK(y[2] == doctest::Approx(std::cos(t)).epsilon(1e-14));
  }
}

TEST_CASE("series branch of the sphere formulas is continuous at the threshold") {
  const double below = sphere::kSeriesThreshold * (1.0 - 1e-9);
  const double above = sphere::kSeriesThreshold * (1.0 + 1e-9);
  CHECK(std::abs(sphere::sinc(below) - sphere::sinc(above)) < 1e-15);
  CHECK(std::abs(sphere::cosc(below) - sphere::cosc(above)) < 1e-9);
}

TEST_CASE("parallel transport carries the velocity along the geodesic") {
  std::mt19937_64 rng(11);
  const SphereChart s(RealSpace(6));
  for (int i = 0; i < 50; ++i) {
    const Vector x = s.normalize(normal_vector(rng, 6));
    const Vector eta = random_tangent(s, x, rng);
    const double t = 1e-6;
    // velocity at the end point by central difference of the geodesic
    const Vector vel = (s.retract(x, (1.0 + t) * eta) - s.retract(x, (1.0 - t) * eta)) / (2.0 * t);
    CHECK((s.transport(x, eta, eta) - vel).norm() < 1e-8 * std::max(1.0, eta.norm()));
  }
}

TEST_CASE("generic constraint chart agrees with the sphere chart") {
  const RealSpace space(5);
  ConstraintChart::Callbacks cb;
  cb.count = 1;
  cb.eval = [](const Vector& x) { return Vector::Constant(1, 0.5 * (x.squaredNorm() - 1.0)); };
  cb.grads = [](const Vector& x) { return Matrix(x); };
  cb.hess_vec = [](const Vector&, const Vector& u) { return Matrix(u); };
  const ConstraintChart generic(space, cb);
  const SphereChart sphere(space, RetractionKind::normalization, TransportKind::projection);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const Vector x = sphere.normalize(normal_vector(rng, 5));
    const Vector u = normal_vector(rng, 5);
    CHECK((generic.project_tangent(x, u) - sphere.project_tangent(x, u)).norm() < 1e-13);
    CHECK((generic.multipliers(x, u) - sphere.multipliers(x, u)).norm() < 1e-13);
    const Vector eta = 0.3 * random_tangent(sphere, x, rng);
    CHECK(generic.feasibility(generic.retract(x, eta)) < 1e-13);
    // the Newton projection lands on the same radial point for the sphere
    CHECK((generic.retract(x, eta) - sphere.retract(x, eta)).norm() < 1e-12);
  }
}

TEST_CASE("riemannian hessian matches the second derivative along geodesics") {
  std::mt19937_64 rng(17);
  Matrix a = Matrix::Random(6, 6);
  const QuadraticProblem q(a + a.transpose(), normal_vector(rng, 6));
  const SphereChart s(RealSpace(6));
  const thomson::Problem tp(6);
  const thomson::Chart tc(6);
  auto check = [&](const Problem& p, const Manifold& m, const Vector& x) {
    const Vector eta = random_tangent(m, x, rng);
    const Vector egrad = p.gradient(x);
    const Vector h = riemannian_hess_vec(m, x, eta, egrad, p.hess_vec(x, eta));
    const double t = 1e-4;
    const double second = (p.energy(m.retract(x, t * eta)) - 2.0 * p.energy(x) + p.energy(m.retract(x, -t * eta))) / (t * t);
    CHECK(m.tangency(x, h) < 1e-10);
    CHECK(m.space().inner(h, eta) == doctest::Approx(second).epsilon(1e-5).scale(1.0));
  };
  for (int i = 0; i < 20; ++i) {
    check(q, s, s.normalize(normal_vector(rng, 6)));
    check(tp, tc, thomson::gauge_fix(normal_vector(rng, 18)));
  }
}

TEST_CASE("riemannian gradient of the height function") {
  const LinearProblem h = LinearProblem::height();
  const SphereChart s(RealSpace(3));
  Vector x(3);
  x << 0.6, 0.0, 0.8;
  const Vector g = riemannian_grad(s, x, h.gradient(x));
  // grad z = e_z - z x
  CHECK((g - (Vector::Unit(3, 2) - 0.8 * x)).norm() < 1e-15);
}
