#include "chisd/space.hpp"

#include <cmath>
#include <string>

namespace chisd {

  RealSpace::RealSpace(std::size_t dim) : dim_(dim), weights_(Vector::Ones(static_cast<Eigen::Index>(dim))), euclidean_(true) {
    if (dim == 0) {
      throw DimensionError("RealSpace: dimension must be positive");
    }
  }

  RealSpace::RealSpace(Vector weights) : dim_(static_cast<std::size_t>(weights.size())), weights_(std::move(weights)), euclidean_(true) {
    if (dim_ == 0) {
      throw DimensionError("RealSpace: dimension must be positive");
    }
    for (Eigen::Index i = 0; i < weights_.size(); ++i) {
      if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i])) {
        throw DomainError("RealSpace: weight " + std::to_string(i) + " is not a positive finite number");
      }
      if (weights_[i] != 1.0) {
        euclidean_ = false;
      }
    }
  }

  RealSpace RealSpace::uniform(std::size_t dim, double w) {
    return RealSpace(Vector::Constant(static_cast<Eigen::Index>(dim), w));
  }

  void RealSpace::check(const Vector& u) const {
    if (static_cast<std::size_t>(u.size()) != dim_) {
      throw DimensionError("RealSpace: vector of length " + std::to_string(u.size()) + " in space of dimension " + std::to_string(dim_));
    }
  }

  double RealSpace::inner(const Vector& u, const Vector& v) const {
    check(u);
    check(v);
    const double* a = u.data();
    const double* b = v.data();
    double sum = 0.0;
    if (euclidean_) {
      for (std::size_t i = 0; i < dim_; ++i) {
        sum += a[i] * b[i];
      }
    } else {
      // w * (u * v): the inner product is commutative in the product, so inner(u, v) == inner(v, u) bitwise.
      const double* w = weights_.data();
      for (std::size_t i = 0; i < dim_; ++i) {
        sum += w[i] * (a[i] * b[i]);
      }
    }
    return sum;
  }

  double RealSpace::norm(const Vector& u) const { return std::sqrt(inner(u, u)); }

  Frame Frame::head(std::size_t n) const {
    std::vector<Vector> out(vectors_.begin(), vectors_.begin() + static_cast<std::ptrdiff_t>(std::min(n, vectors_.size())));
    return Frame(std::move(out));
  }

  Matrix gram_matrix(const RealSpace& space, const Frame& frame) {
    const auto k = static_cast<Eigen::Index>(frame.size());
    Matrix g(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        g(i, j) = g(j, i) = space.inner(frame[static_cast<std::size_t>(i)], frame[static_cast<std::size_t>(j)]);
      }
    }
    return g;
  }

  double orthonormality_defect(const RealSpace& space, const Frame& frame) {
    if (frame.empty()) {
      return 0.0;
    }
    const Matrix g = gram_matrix(space, frame);
    return (g - Matrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
  }

  Frame gram_schmidt(const RealSpace& space, const Frame& frame) {
    Frame out;
    if (frame.empty()) {
      return out;
    }
    const double reference = space.norm(frame[0]);
    for (std::size_t i = 0; i < frame.size(); ++i) {
      Vector w = frame[i];
      space.check(w);
      for (int pass = 0; pass < 2; ++pass) {
        for (const Vector& q : out) {
          w -= space.inner(q, w) * q;
        }
      }
      const double pivot = space.norm(w);
      if (!(pivot >= kRankDropTolerance * reference) || !(reference > 0.0)) {
        throw RankDeficiencyError(i, reference > 0.0 ? pivot / reference : 0.0);
      }
      out.push_back(w / pivot);
    }
    return out;
  }

}  // namespace chisd
