#include <cmath>
#include <complex>

#include "doctest.h"
#include "helpers.hpp"

#include "chisd/dynamics.hpp"
#include "chisd/sphere.hpp"
#include "chisd/thomson.hpp"

using namespace chisd;
using testing_support::normal_vector;
using testing_support::random_tangent;

namespace {

  QuadraticProblem three_level() {
    Matrix m = Matrix::Zero(3, 3);
    m.diagonal() << 1.0, 2.0, 3.0;
    return QuadraticProblem(m);
  }

  Vector unit(double a, double b, double c) {
    Vector v(3);
    v << a, b, c;
    return v.normalized();
  }

}  // namespace

TEST_CASE("k=0 step is exactly a retracted gradient step") {
  const SphereChart s(RealSpace(3));
  const QuadraticProblem q = three_level();
  SearchConfig cfg;
  cfg.alpha = 0.05;
  const Vector x = unit(0.3, 0.5, 0.8);
  const SearchState next = step(q, s, cfg, make_state(s, x, {}));
  const Vector expect = s.retract(x, -cfg.alpha * riemannian_grad(s, x, q.gradient(x)));
  CHECK(next.x == expect);
  CHECK(next.frame.empty());
}

TEST_CASE("k=0 descent lowers the energy monotonically and reaches the minimum") {
  const SphereChart s(RealSpace(3));
  const QuadraticProblem q = three_level();
  SearchConfig cfg;
  cfg.alpha = 0.05;
  cfg.max_iter = 20000;
  SearchState st = make_state(s, unit(0.2, 0.6, 0.7), {});
  double e = q.energy(st.x);
  for (int i = 0; i < 200; ++i) {
    st = step(q, s, cfg, st);
    const double en = q.energy(st.x);
    CHECK(en <= e + 1e-14);
    e = en;
  }
  const SearchOutcome out = run(q, s, cfg, st);
  REQUIRE(out.converged());
  CHECK(out.grad_norm <= cfg.grad_tol);
  CHECK(std::abs(std::abs(out.state.x[0]) - 1.0) < 1e-12);
  CHECK(out.energy == doctest::Approx(0.5));
}

TEST_CASE("1-CHiSD converges to the index-1 point and aligns v with its unstable direction") {
  const SphereChart s(RealSpace(3));
  const QuadraticProblem q = three_level();
  for (HessianMode mode : {HessianMode::analytic, HessianMode::dimer}) {
    CAPTURE(to_string(mode));
    SearchConfig cfg;
    cfg.k = 1;
    cfg.alpha = 0.05;
    cfg.beta = 0.05;
    cfg.hessian = mode;
    cfg.grad_tol = 1e-9;
    cfg.max_iter = 100000;
    const Vector x0 = unit(0.3, 1.0, 0.3);
    const SearchOutcome out = run(q, s, cfg, make_state(s, x0, Frame{Vector::Unit(3, 0)}));
    REQUIRE(out.converged());
    CHECK(std::abs(std::abs(out.state.x[1]) - 1.0) < 1e-9);
    CHECK(out.energy == doctest::Approx(1.0));
    // Hessian at +-e_y is diag(1-2, 3-2) on the tangent plane, unstable along e_x
    CHECK(std::abs(out.state.frame[0][0]) == doctest::Approx(1.0).epsilon(1e-5));
  }
}

TEST_CASE("search state invariants survive every step") {
  const thomson::Chart c(6);
  const thomson::Problem p(6);
  std::mt19937_64 rng(3);
  SearchConfig cfg;
  cfg.k = 2;
  cfg.hessian = HessianMode::analytic;
  cfg.alpha = 1e-3;
  SearchState st = make_state(c, thomson::gauge_fix(normal_vector(rng, 18)),
                              Frame{normal_vector(rng, 18), normal_vector(rng, 18)});
  for (int i = 0; i < 200; ++i) {
    st = step(p, c, cfg, st);
    CHECK(c.feasibility(st.x) < 1e-12);
    CHECK(orthonormality_defect(c.space(), st.frame) < 1e-12);
    for (const Vector& v : st.frame) CHECK(c.tangency(st.x, v) < 1e-10);
  }
}

TEST_CASE("dimer operator converges to the analytic Hessian at second order") {
  const thomson::Chart c(5);
  const thomson::Problem p(5);
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    const Vector x = thomson::gauge_fix(normal_vector(rng, 15));
    Vector v = random_tangent(c, x, rng);
    v /= v.norm();
    const Vector g = p.gradient(x);
    const Vector exact = hessian_action(p, c, HessianMode::analytic, 0.0, x, g, v);
    const double l = 2e-2;
    const double e1 = (dimer_hess_vec(p, c, x, v, l) - exact).norm();
    const double e2 = (dimer_hess_vec(p, c, x, v, l / 2) - exact).norm();
    CAPTURE(e1);
    CHECK(e1 / e2 >= 3.2);
    CHECK(e1 / e2 <= 4.8);
  }
}

TEST_CASE("analytic Hessian action is symmetric on the tangent space") {
  const thomson::Chart c(7);
  const thomson::Problem p(7);
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector x = thomson::gauge_fix(normal_vector(rng, 21));
    const Vector g = p.gradient(x);
    const Vector a = random_tangent(c, x, rng);
    const Vector b = random_tangent(c, x, rng);
    const double ab = hessian_action(p, c, HessianMode::analytic, 0.0, x, g, a).dot(b);
    const double ba = hessian_action(p, c, HessianMode::analytic, 0.0, x, g, b).dot(a);
    CHECK(std::abs(ab - ba) < 1e-8 * std::max(1.0, std::abs(ab)));
  }
}

TEST_CASE("runs are deterministic") {
  const thomson::Chart c(5);
  const thomson::Problem p(5);
  SearchConfig cfg;
  cfg.k = 1;
  cfg.alpha = 1e-3;
  cfg.max_iter = 3000;
  std::mt19937_64 rng(1);
  const SearchState init = make_state(c, thomson::gauge_fix(normal_vector(rng, 15)), Frame{normal_vector(rng, 15)});
  const SearchOutcome a = run(p, c, cfg, init);
  const SearchOutcome b = run(p, c, cfg, init);
  CHECK(a.state.x == b.state.x);
  CHECK(a.state.frame[0] == b.state.frame[0]);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("configuration and state errors") {
  const SphereChart s(RealSpace(3));
  const QuadraticProblem q = three_level();
  SearchConfig cfg;
  cfg.alpha = -1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.alpha = 0.1;
  cfg.k = 1;
  CHECK_THROWS(step(q, s, cfg, make_state(s, unit(1, 1, 1), {})));
  CHECK_THROWS_AS(make_state(s, Vector::Constant(3, 2.0), {}), DomainError);
  CHECK_THROWS_AS(make_state(s, unit(0, 0, 1), Frame{unit(1, 0, 0), unit(1, 0, 0)}), RankDeficiencyError);
  CHECK(parse_hessian_mode("dimer") == HessianMode::dimer);
  CHECK_THROWS(parse_hessian_mode("bfgs"));
}

TEST_CASE("energy above the divergence bound stops the run") {
  const SphereChart s(RealSpace(3));
  const QuadraticProblem q = three_level();
  SearchConfig cfg;
  cfg.divergence_energy = 0.1;
  cfg.energy_check_every = 1;
  cfg.grad_tol = 1e-14;
  const SearchOutcome out = run(q, s, cfg, make_state(s, unit(0.5, 0.5, 0.5), {}));
  CHECK(out.status == SearchStatus::diverged);
  CHECK_FALSE(out.converged());
}

TEST_CASE("modified dynamics: nondegenerate index-2 pole is linearly stable only with the full frame") {
  // E = z + x^2/4: the north pole is an index-2 point with Hessian eigenvalues -1 (e_y) and -1/2 (e_x)
  Matrix m = Matrix::Zero(3, 3);
  m(0, 0) = 0.5;
  const QuadraticProblem p(m, Vector::Unit(3, 2));
  const SphereChart s(RealSpace(3));
  const Vector x = Vector::Unit(3, 2);
  const double mu = 2.5;
  for (bool central : {false, true}) {
    StabilityOptions opt;
    opt.central = central;
    const auto full = stability_spectrum(p, s, 2, x, Frame{Vector::Unit(3, 1), Vector::Unit(3, 0)}, mu, opt);
    CHECK(full.size() == 9);
    for (const auto& z : full) CHECK(z.real() < -0.1);
    const auto one = stability_spectrum(p, s, 1, x, Frame{Vector::Unit(3, 1)}, mu, opt);
    bool positive = false;
    bool penalty = false;
    for (const auto& z : one) {
      positive = positive || z.real() > 0.1;
      penalty = penalty || std::abs(z - std::complex<double>(-mu, 0.0)) < 1e-6;
    }
    CHECK(positive);
    // one-sided differences carry an O(fd_step) bias of a few 1e-6 here
    if (central) CHECK(penalty);
  }
  CHECK_THROWS_AS(stability_spectrum(p, s, 1, unit(1, 1, 1), Frame{Vector::Unit(3, 1)}, mu), DomainError);
  CHECK_THROWS_AS(stability_spectrum(p, s, 1, x, Frame{Vector::Unit(3, 1)}, -1.0), DomainError);
}
