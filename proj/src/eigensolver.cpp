#include "chisd/eigensolver.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "chisd/util.hpp"

namespace chisd {

  namespace {

    // Column-major block of tangent vectors with metric-aware orthonormalization.
    class Block {
    public:
      Block(const RealSpace& space) : space_(space) {
        if (!space.euclidean()) {
          sqrt_w_ = space.weights().cwiseSqrt();
        }
      }

      /// Orthonormal basis of span(y) in the metric; Householder QR never breaks down on dependent columns.
      Matrix orthonormalize(const Matrix& y) const {
        const Matrix yw = scale(y);
        Eigen::HouseholderQR<Matrix> qr(yw);
        Matrix q = qr.householderQ() * Matrix::Identity(y.rows(), y.cols());
        return unscale(q);
      }

      /// Y^T W Z.
      Matrix cross(const Matrix& y, const Matrix& z) const {
        Matrix out(y.cols(), z.cols());
        for (Eigen::Index i = 0; i < y.cols(); ++i) {
          for (Eigen::Index j = 0; j < z.cols(); ++j) {
            out(i, j) = space_.inner(y.col(i), z.col(j));
          }
        }
        return out;
      }

    private:
      Matrix scale(const Matrix& y) const { return sqrt_w_.size() ? Matrix(sqrt_w_.asDiagonal() * y) : y; }
      Matrix unscale(const Matrix& y) const { return sqrt_w_.size() ? Matrix(sqrt_w_.cwiseInverse().asDiagonal() * y) : y; }

      const RealSpace& space_;
      Vector sqrt_w_;
    };

    struct Applier {
      const TangentOperator& op;
      const Manifold& chart;
      const Vector& x;
      std::size_t threads;
      std::size_t count = 0;

      Vector one(const Vector& v) {
        ++count;
        return chart.project_tangent(x, op(v));
      }

      Matrix block(const Matrix& v) {
        Matrix out(v.rows(), v.cols());
        parallel_for(static_cast<std::size_t>(v.cols()), threads, [&](std::size_t j) {
          const auto c = static_cast<Eigen::Index>(j);
          out.col(c) = chart.project_tangent(x, op(v.col(c)));
        });
        count += static_cast<std::size_t>(v.cols());
        return out;
      }
    };

    Vector random_tangent(std::mt19937_64& rng, const Manifold& chart, const Vector& x) {
      std::normal_distribution<double> normal;
      Vector v(static_cast<Eigen::Index>(chart.dim()));
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        v[i] = normal(rng);
      }
      return chart.project_tangent(x, v);
    }

    // Upper bound on the spectrum: largest Ritz value of a short Lanczos run plus the last off-diagonal.
    double lanczos_upper_bound(Applier& apply, const RealSpace& space, Vector q, int steps, std::size_t tangent_dim) {
      const int n = std::min<int>(steps, static_cast<int>(tangent_dim));
      std::vector<double> alpha;
      std::vector<double> beta;
      q /= space.norm(q);
      Vector q_prev = Vector::Zero(q.size());
      double b = 0.0;
      for (int j = 0; j < n; ++j) {
        Vector w = apply.one(q);
        const double a = space.inner(q, w);
        w -= a * q + b * q_prev;
        alpha.push_back(a);
        b = space.norm(w);
        beta.push_back(b);
        if (b <= 1e-12 * std::max(1.0, std::abs(a))) {
          break;
        }
        q_prev = q;
        q = w / b;
      }
      const auto m = static_cast<Eigen::Index>(alpha.size());
      Matrix t = Matrix::Zero(m, m);
      for (Eigen::Index i = 0; i < m; ++i) {
        t(i, i) = alpha[static_cast<std::size_t>(i)];
        if (i + 1 < m) {
          t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
        }
      }
      Eigen::SelfAdjointEigenSolver<Matrix> es(t, Eigen::EigenvaluesOnly);
      return es.eigenvalues().maxCoeff() + beta.back();
    }

  }  // namespace

  SpectrumResult smallest_eigenpairs(const TangentOperator& op, const Manifold& chart, const Vector& x, std::size_t K,
                                     const EigenOptions& options) {
    const RealSpace& space = chart.space();
    const std::size_t nt = chart.tangent_dim();
    if (K == 0) {
      return {};
    }
    if (K > nt) {
      throw DomainError("smallest_eigenpairs: K = " + std::to_string(K) + " exceeds the tangent dimension " + std::to_string(nt));
    }
    const std::size_t guard = options.guard ? options.guard : std::max<std::size_t>(3, K / 2);
    const std::size_t p = std::min(nt, K + guard);
    const auto d = static_cast<Eigen::Index>(chart.dim());
    const auto pc = static_cast<Eigen::Index>(p);

    Applier apply{op, chart, x, std::max<std::size_t>(1, options.threads)};
    Block blk(space);
    std::mt19937_64 rng(options.seed);

    SpectrumResult out;
    out.spectral_scale = lanczos_upper_bound(apply, space, random_tangent(rng, chart, x), options.lanczos_steps, nt);
    const double upper = out.spectral_scale;

    Matrix v(d, pc);
    for (Eigen::Index j = 0; j < pc; ++j) {
      v.col(j) = random_tangent(rng, chart, x);
    }
    v = blk.orthonormalize(v);

    std::vector<double> best(K, std::numeric_limits<double>::infinity());
    for (;;) {
      // Rayleigh-Ritz on span(v).
      const Matrix hv = apply.block(v);
      Matrix t = blk.cross(v, hv);
      t = 0.5 * (t + t.transpose()).eval();
      Eigen::SelfAdjointEigenSolver<Matrix> es(t);
      const Matrix rot = es.eigenvectors();
      const Vector theta = es.eigenvalues();
      v = v * rot;
      const Matrix hx = hv * rot;

      bool done = true;
      for (std::size_t i = 0; i < K; ++i) {
        const auto c = static_cast<Eigen::Index>(i);
        const double r = space.norm(hx.col(c) - theta[c] * v.col(c));
        best[i] = r;
        done = done && r <= options.tol * std::max(1.0, std::abs(theta[c]));
      }
      if (done || p == nt) {
        // A full-space block is exact after one rotation; otherwise confirm with fresh products.
        out.eigenvalues.assign(theta.data(), theta.data() + K);
        Matrix vk = v.leftCols(static_cast<Eigen::Index>(K));
        vk = blk.orthonormalize(vk);
        bool ok = true;
        for (std::size_t i = 0; i < K; ++i) {
          const auto c = static_cast<Eigen::Index>(i);
          Vector vi = chart.project_tangent(x, vk.col(c));
          vi /= space.norm(vi);
          const double r = space.norm(apply.one(vi) - theta[c] * vi);
          out.residuals.push_back(r);
          out.eigenvectors.push_back(std::move(vi));
          ok = ok && r <= options.tol * std::max(1.0, std::abs(theta[c]));
        }
        out.matvecs = apply.count;
        if (ok || p == nt) {
          return out;
        }
        out.eigenvalues.clear();
        out.residuals.clear();
        out.eigenvectors = Frame();
      }
      if (apply.count >= options.max_matvecs) {
        throw EigenConvergenceError("smallest_eigenpairs: no convergence within " + std::to_string(options.max_matvecs)
                                        + " operator products (worst residual "
                                        + std::to_string(*std::max_element(best.begin(), best.end())) + ")",
                                    best);
      }

      // Chebyshev filter damping [a, upper], scaled so the lowest Ritz value maps to 1.
      const double a = theta[pc - 1];
      const double a0 = theta[0];
      const double e = 0.5 * (upper - a);
      const double c = 0.5 * (upper + a);
      if (!(e > 1e-12 * std::max(1.0, std::abs(upper))) || !(a0 < a)) {
        // The block already spans an invariant subspace of the spectrum top; fall back to one shifted power step.
        v = blk.orthonormalize(upper * v - apply.block(v));
        continue;
      }
      double sigma = e / (a0 - c);
      const double tau = 2.0 / sigma;
      Matrix x0 = v;
      Matrix y = (apply.block(v) - c * v) * (sigma / e);
      for (int deg = 2; deg <= options.degree; ++deg) {
        const double sigma2 = 1.0 / (tau - sigma);
        Matrix ynew = (apply.block(y) - c * y) * (2.0 * sigma2 / e) - (sigma * sigma2) * x0;
        x0 = std::move(y);
        y = std::move(ynew);
        sigma = sigma2;
      }
      for (Eigen::Index j = 0; j < pc; ++j) {
        y.col(j) = chart.project_tangent(x, y.col(j));
      }
      v = blk.orthonormalize(y);
    }
  }

  Matrix assemble_tangent_matrix(const TangentOperator& op, const Manifold& chart, const Vector& x, Frame* basis) {
    const RealSpace& space = chart.space();
    const auto d = static_cast<Eigen::Index>(chart.dim());
    const auto nt = static_cast<Eigen::Index>(chart.tangent_dim());
    Matrix p(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      p.col(i) = chart.project_tangent(x, Vector::Unit(d, i));
    }
    // Range of P in the metric: rank-revealing QR of W^{1/2} P.
    const Vector sw = space.weights().cwiseSqrt();
    Eigen::ColPivHouseholderQR<Matrix> qr(sw.asDiagonal() * p);
    const Matrix q = qr.householderQ() * Matrix::Identity(d, nt);
    Frame b;
    for (Eigen::Index j = 0; j < nt; ++j) {
      Vector v = chart.project_tangent(x, sw.cwiseInverse().asDiagonal() * q.col(j));
      b.push_back(v);
    }
    b = gram_schmidt(space, b);
    Matrix h(nt, nt);
    for (Eigen::Index j = 0; j < nt; ++j) {
      const Vector hb = chart.project_tangent(x, op(b[static_cast<std::size_t>(j)]));
      for (Eigen::Index i = 0; i < nt; ++i) {
        h(i, j) = space.inner(b[static_cast<std::size_t>(i)], hb);
      }
    }
    if (basis) {
      *basis = std::move(b);
    }
    return h;
  }

}  // namespace chisd
