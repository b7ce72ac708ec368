#pragma once

#include <random>

#include "chisd/manifold.hpp"
#include "chisd/problem.hpp"

namespace testing_support {

  using chisd::Vector;

  inline Vector normal_vector(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> d;
    Vector v(static_cast<Eigen::Index>(n));
    for (auto& c : v) c = d(rng);
    return v;
  }

  inline Vector random_tangent(const chisd::Manifold& m, const Vector& x, std::mt19937_64& rng) {
    return m.project_tangent(x, normal_vector(rng, m.dim()));
  }

  // Central difference of E along eta, using only energy evaluations.
  inline double fd_directional(const chisd::Problem& p, const Vector& x, const Vector& eta, double t) {
    return (p.energy(x + t * eta) - p.energy(x - t * eta)) / (2.0 * t);
  }

  inline Vector fd_hess_vec(const chisd::Problem& p, const Vector& x, const Vector& eta, double t) {
    return (p.gradient(x + t * eta) - p.gradient(x - t * eta)) / (2.0 * t);
  }

}  // namespace testing_support
