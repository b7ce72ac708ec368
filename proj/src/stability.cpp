#include <algorithm>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "chisd/dynamics.hpp"

namespace chisd {

  namespace {

    // A (A^T A)^{-1} s for an m-vector s, with the Gram matrix taken in the metric of the chart.
    Vector normal_lift(const Manifold& chart, const Matrix& a, const Vector& s) {
      const RealSpace& space = chart.space();
      const Eigen::Index m = a.cols();
      Matrix gram(m, m);
      for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
          gram(i, j) = gram(j, i) = space.inner(a.col(i), a.col(j));
        }
      }
      Eigen::LLT<Matrix> llt(gram);
      if (llt.info() != Eigen::Success) {
        throw LicqError("stability: constraint Gram matrix is not positive definite", 0.0);
      }
      return a * llt.solve(s);
    }

    Vector ext_hess(const Problem& problem, const Manifold& chart, const Vector& x, const Vector& egrad, const Vector& v) {
      const Vector pv = chart.project_tangent(x, v);
      return riemannian_hess_vec(chart, x, pv, egrad, problem.hess_vec(x, pv));
    }

  }  // namespace

  Vector modified_dynamics_rhs(const Problem& problem, const Manifold& chart, std::size_t k, const Vector& z, double mu) {
    const RealSpace& space = chart.space();
    const auto d = static_cast<Eigen::Index>(chart.dim());
    if (z.size() != d * static_cast<Eigen::Index>(k + 1)) {
      throw DimensionError("modified_dynamics_rhs: augmented state has length " + std::to_string(z.size()) + ", expected " +
                           std::to_string(d * static_cast<Eigen::Index>(k + 1)));
    }
    if (!problem.has_hessian()) {
      throw DomainError("modified_dynamics_rhs: problem '" + problem.name() + "' has no analytic Hessian");
    }
    const Vector x = z.head(d);
    std::vector<Vector> v(k);
    for (std::size_t i = 0; i < k; ++i) {
      v[i] = z.segment(d * static_cast<Eigen::Index>(i + 1), d);
    }

    const Vector egrad = problem.gradient(x);
    const Vector rgrad = chart.project_tangent(x, egrad);
    const Matrix a = chart.constraint_grads(x);

    Vector xdot = -rgrad;
    for (const Vector& vi : v) {
      xdot += (2.0 * space.inner(vi, rgrad)) * vi;
    }
    if (a.cols() > 0) {
      xdot -= mu * (a * chart.constraints(x));
    }

    Vector out(z.size());
    out.head(d) = xdot;
    const Matrix hc = a.cols() > 0 ? chart.constraint_hess_vec(x, xdot) : Matrix(d, 0);
    for (std::size_t i = 0; i < k; ++i) {
      const Vector h = ext_hess(problem, chart, x, egrad, v[i]);
      Vector vdot = -h + space.inner(v[i], h) * v[i];
      for (std::size_t j = 0; j < i; ++j) {
        vdot += (2.0 * space.inner(v[j], h)) * v[j];
      }
      if (a.cols() > 0) {
        Vector s(a.cols());
        for (Eigen::Index l = 0; l < a.cols(); ++l) {
          s(l) = space.inner(hc.col(l), v[i]);
        }
        vdot -= normal_lift(chart, a, s);
      }
      out.segment(d * static_cast<Eigen::Index>(i + 1), d) = vdot;
    }
    return out;
  }

  std::vector<std::complex<double>> stability_spectrum(const Problem& problem, const Manifold& chart, std::size_t k,
                                                       const Vector& x, const Frame& frame, double mu,
                                                       const StabilityOptions& options) {
    const auto d = static_cast<Eigen::Index>(chart.dim());
    const Eigen::Index n = d * static_cast<Eigen::Index>(k + 1);
    if (frame.size() != k) {
      throw DomainError("stability_spectrum: frame has " + std::to_string(frame.size()) + " vectors, expected " + std::to_string(k));
    }
    if (static_cast<std::size_t>(n) > options.max_unknowns) {
      throw DomainError("stability_spectrum: " + std::to_string(n) + " unknowns exceed the limit of " +
                        std::to_string(options.max_unknowns));
    }
    if (!(mu > 0.0)) {
      throw DomainError("stability_spectrum: mu must be positive");
    }
    const double gnorm = chart.space().norm(riemannian_grad(chart, x, problem.gradient(x)));
    if (!(gnorm <= options.stationarity_tol)) {
      throw DomainError("stability_spectrum: x is not stationary (|grad E| = " + std::to_string(gnorm) + ")");
    }

    Vector z(n);
    z.head(d) = x;
    for (std::size_t i = 0; i < k; ++i) {
      z.segment(d * static_cast<Eigen::Index>(i + 1), d) = frame[i];
    }

    const double h = options.fd_step;
    const Vector f0 = options.central ? Vector() : modified_dynamics_rhs(problem, chart, k, z, mu);
    Matrix jac(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      Vector zp = z;
      zp(j) += h;
      if (options.central) {
        Vector zm = z;
        zm(j) -= h;
        jac.col(j) = (modified_dynamics_rhs(problem, chart, k, zp, mu) - modified_dynamics_rhs(problem, chart, k, zm, mu)) / (2.0 * h);
      } else {
        jac.col(j) = (modified_dynamics_rhs(problem, chart, k, zp, mu) - f0) / h;
      }
    }

    Eigen::EigenSolver<Matrix> es(jac, false);
    if (es.info() != Eigen::Success) {
      throw ConvergenceError("stability_spectrum: eigenvalue iteration failed");
    }
    std::vector<std::complex<double>> out(es.eigenvalues().data(), es.eigenvalues().data() + n);
    std::sort(out.begin(), out.end(), [](const auto& p, const auto& q) {
      return p.real() != q.real() ? p.real() < q.real() : p.imag() < q.imag();
    });
    return out;
  }

}  // namespace chisd
