#include "chisd/manifold.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

namespace chisd {

  RetractionKind parse_retraction(std::string_view name) {
    if (name == "exponential") return RetractionKind::exponential;
    if (name == "normalization") return RetractionKind::normalization;
    throw Error("unknown retraction '" + std::string(name) + "' (expected exponential|normalization)");
  }

  TransportKind parse_transport(std::string_view name) {
    if (name == "parallel") return TransportKind::parallel;
    if (name == "differentiated") return TransportKind::differentiated;
    if (name == "projection") return TransportKind::projection;
    throw Error("unknown transport '" + std::string(name) + "' (expected parallel|differentiated|projection)");
  }

  std::string_view to_string(RetractionKind k) { return k == RetractionKind::exponential ? "exponential" : "normalization"; }

  std::string_view to_string(TransportKind k) {
    switch (k) {
      case TransportKind::parallel:
        return "parallel";
      case TransportKind::differentiated:
        return "differentiated";
      case TransportKind::projection:
        return "projection";
    }
    return "?";
  }

  Manifold::Manifold(RealSpace space, RetractionKind retraction, TransportKind transport)
      : space_(std::move(space)), retraction_(retraction), transport_(transport) {
    // Parallel translation is the transport of the exponential map, the differentiated form that of normalization.
    if ((transport == TransportKind::parallel && retraction != RetractionKind::exponential)
        || (transport == TransportKind::differentiated && retraction != RetractionKind::normalization)) {
      throw Error(std::string("transport '") + std::string(to_string(transport)) + "' is not associated with retraction '"
                  + std::string(to_string(retraction)) + "'");
    }
  }

  Vector Manifold::normal_components(const Vector& x, const Vector& u) const {
    const Matrix a = constraint_grads(x);
    Vector out(a.cols());
    for (Eigen::Index l = 0; l < a.cols(); ++l) {
      out[l] = space_.inner(Vector(a.col(l)), u);
    }
    return out;
  }

  Vector Manifold::dense_multipliers(const Vector& x, const Vector& u) const {
    const Matrix a = constraint_grads(x);
    const Eigen::Index m = a.cols();
    if (m == 0) {
      return Vector(0);
    }
    // Metric-aware Gram matrix.
    std::vector<Vector> cols;
    cols.reserve(static_cast<std::size_t>(m));
    for (Eigen::Index l = 0; l < m; ++l) {
      cols.emplace_back(a.col(l));
    }
    Matrix gram(m, m);
    Vector rhs(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      rhs[i] = space_.inner(cols[static_cast<std::size_t>(i)], u);
      for (Eigen::Index j = 0; j <= i; ++j) {
        gram(i, j) = gram(j, i) = space_.inner(cols[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);
      }
    }
    Eigen::LLT<Matrix> llt(gram);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (llt.info() != Eigen::Success || !(lo > 1e-14 * std::max(1.0, hi))) {
      throw LicqError("constraint gradients are linearly dependent", lo > 0 ? hi / lo : INFINITY);
    }
    return llt.solve(rhs);
  }

  Vector Manifold::multipliers(const Vector& x, const Vector& u) const { return dense_multipliers(x, u); }

  Vector Manifold::project_tangent(const Vector& x, const Vector& u) const {
    space_.check(u);
    if (constraint_count() == 0) {
      return u;
    }
    return u - constraint_grads(x) * multipliers(x, u);
  }

  Vector Manifold::curvature(const Vector& x, const Vector& eta, const Vector& xi) const {
    if (constraint_count() == 0) {
      return Vector::Zero(eta.size());
    }
    return constraint_hess_vec(x, eta) * xi;
  }

  double Manifold::feasibility(const Vector& x) const {
    if (constraint_count() == 0) {
      return 0.0;
    }
    return constraints(x).cwiseAbs().maxCoeff();
  }

  double Manifold::tangency(const Vector& x, const Vector& u) const {
    if (constraint_count() == 0) {
      return 0.0;
    }
    return normal_components(x, u).cwiseAbs().maxCoeff();
  }

  Frame Manifold::project_frame(const Vector& x, const Frame& frame) const {
    Frame out;
    for (const Vector& v : frame) {
      out.push_back(project_tangent(x, v));
    }
    return out;
  }

  Vector riemannian_grad(const Manifold& chart, const Vector& x, const Vector& egrad) { return chart.project_tangent(x, egrad); }

  Vector riemannian_hess_vec(const Manifold& chart, const Vector& x, const Vector& eta, const Vector& egrad, const Vector& hess_eta) {
    const double off = chart.tangency(x, eta);
    const double scale = std::max(1.0, chart.space().norm(eta));
    if (!(off <= kTangencyTolerance * scale)) {
      throw DomainError("riemannian_hess_vec: direction is not tangent (normal component " + std::to_string(off) + ")");
    }
    if (chart.constraint_count() == 0) {
      return hess_eta;
    }
    const Vector xi = chart.multipliers(x, egrad);
    return chart.project_tangent(x, hess_eta - chart.curvature(x, eta, xi));
  }

  ConstraintChart::ConstraintChart(RealSpace space, Callbacks callbacks, double retraction_tol, int retraction_max_iter)
      : Manifold(std::move(space), RetractionKind::normalization, TransportKind::projection),
        cb_(std::move(callbacks)),
        tol_(retraction_tol),
        max_iter_(retraction_max_iter) {
    if (!cb_.eval || !cb_.grads || !cb_.hess_vec) {
      throw Error("ConstraintChart: all three constraint callbacks are required");
    }
  }

  Vector ConstraintChart::retract(const Vector& x, const Vector& eta) const {
    Vector y = x + eta;
    if (cb_.count == 0) {
      return y;
    }
    // Minimum-norm Newton corrections y <- y - A (A^T A)^{-1} c(y).
    for (int it = 0; it < max_iter_; ++it) {
      const Vector c = cb_.eval(y);
      if (c.cwiseAbs().maxCoeff() <= tol_) {
        return y;
      }
      const Matrix a = cb_.grads(y);
      std::vector<Vector> cols;
      Matrix gram(a.cols(), a.cols());
      for (Eigen::Index l = 0; l < a.cols(); ++l) {
        cols.emplace_back(a.col(l));
      }
      for (Eigen::Index i = 0; i < a.cols(); ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
          gram(i, j) = gram(j, i) = space().inner(cols[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);
        }
      }
      Eigen::LLT<Matrix> llt(gram);
      if (llt.info() != Eigen::Success) {
        throw LicqError("ConstraintChart::retract: singular Gram matrix", INFINITY);
      }
      y -= a * llt.solve(c);
    }
    if (cb_.eval(y).cwiseAbs().maxCoeff() <= 100 * tol_) {
      return y;
    }
    throw ConvergenceError("ConstraintChart::retract: Newton projection did not converge");
  }

  Vector ConstraintChart::transport(const Vector& x, const Vector& eta, const Vector& xi) const {
    return project_tangent(retract(x, eta), xi);
  }

}  // namespace chisd
