#include "chisd/dynamics.hpp"

#include <cmath>
#include <string>

namespace chisd {

  HessianMode parse_hessian_mode(std::string_view name) {
    if (name == "dimer") return HessianMode::dimer;
    if (name == "analytic") return HessianMode::analytic;
    throw Error("unknown hessian mode '" + std::string(name) + "' (expected dimer|analytic)");
  }

  std::string_view to_string(HessianMode mode) { return mode == HessianMode::dimer ? "dimer" : "analytic"; }

  std::string_view to_string(SearchStatus status) {
    switch (status) {
      case SearchStatus::converged:
        return "converged";
      case SearchStatus::max_iter:
        return "max_iter";
      case SearchStatus::diverged:
        return "diverged";
      case SearchStatus::rank_loss:
        return "rank_loss";
    }
    return "?";
  }

  void SearchConfig::validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw Error(std::string("SearchConfig: ") + name + " must be a positive finite number");
      }
    };
    positive(alpha, "alpha");
    positive(beta, "beta");
    positive(dimer_length, "dimer_length");
    positive(grad_tol, "grad_tol");
    positive(divergence_energy, "divergence_energy");
    positive(feasibility_tol, "feasibility_tol");
    if (max_iter <= 0) throw Error("SearchConfig: max_iter must be positive");
    if (v_repeats <= 0) throw Error("SearchConfig: v_repeats must be positive");
    if (energy_check_every <= 0) throw Error("SearchConfig: energy_check_every must be positive");
    if (trace_every < 0) throw Error("SearchConfig: trace_every must be non-negative");
  }

  namespace {

    constexpr double kFeasibleTol = 1e-8;
    constexpr double kFrameTol = 1e-10;

    bool all_finite(const Vector& v) { return v.allFinite(); }

    // Ambient gradient of the next point, carried between iterations so each step evaluates it once.
    struct Workspace {
      Vector egrad;
    };

    SearchState step_impl(const Problem& problem, const Manifold& chart, const SearchConfig& cfg, const SearchState& state,
                          const Vector& rgrad, Workspace& ws) {
      const RealSpace& space = chart.space();

      Vector g = rgrad;
      for (const Vector& v : state.frame) {
        g -= (2.0 * space.inner(v, rgrad)) * v;
      }
      const Vector eta = -cfg.alpha * g;

      SearchState next;
      next.x = chart.retract(state.x, eta);
      next.iter = state.iter + 1;
      next.last_grad_norm = state.last_grad_norm;
      if (!all_finite(next.x)) {
        throw DomainError("non-finite iterate");
      }
      const double drift = chart.feasibility(next.x);
      if (!(drift <= cfg.feasibility_tol)) {
        throw DomainError("feasibility drift " + std::to_string(drift));
      }

      ws.egrad = problem.gradient(next.x);
      if (!all_finite(ws.egrad)) {
        throw DomainError("non-finite gradient");
      }
      if (state.frame.empty()) {
        return next;
      }

      // Transport, then clean the round-off normal component the closed forms carry along.
      Frame v;
      for (const Vector& vi : state.frame) {
        v.push_back(chart.project_tangent(next.x, chart.transport(state.x, eta, vi)));
      }

      const std::size_t k = v.size();
      for (int rep = 0; rep < cfg.v_repeats; ++rep) {
        Frame trial;
        for (std::size_t i = 0; i < k; ++i) {
          const Vector u = hessian_action(problem, chart, cfg.hessian, cfg.dimer_length, next.x, ws.egrad, v[i]);
          Vector d = -u + space.inner(u, v[i]) * v[i];
          for (std::size_t j = 0; j < i; ++j) {
            d += (2.0 * space.inner(u, v[j])) * v[j];
          }
          trial.push_back(v[i] + cfg.beta * d);
        }
        v = gram_schmidt(space, trial);
      }
      next.frame = std::move(v);
      return next;
    }

  }  // namespace

  void check_state(const Manifold& chart, const SearchState& state) {
    chart.space().check(state.x);
    const double drift = chart.feasibility(state.x);
    if (!(drift <= kFeasibleTol)) {
      throw DomainError("state: point is infeasible (|c| = " + std::to_string(drift) + ")");
    }
    for (std::size_t i = 0; i < state.frame.size(); ++i) {
      if (!(chart.tangency(state.x, state.frame[i]) <= kFrameTol)) {
        throw DomainError("state: frame vector " + std::to_string(i) + " is not tangent");
      }
    }
    if (!(orthonormality_defect(chart.space(), state.frame) <= kFrameTol)) {
      throw DomainError("state: frame is not orthonormal");
    }
  }

  SearchState make_state(const Manifold& chart, Vector x, const Frame& directions) {
    SearchState s;
    s.x = std::move(x);
    s.frame = gram_schmidt(chart.space(), chart.project_frame(s.x, directions));
    check_state(chart, s);
    return s;
  }

  Vector dimer_hess_vec(const Problem& problem, const Manifold& chart, const Vector& x, const Vector& v, double l) {
    const Vector xp = x + l * v;
    const Vector xm = x - l * v;
    const Vector gp = chart.project_tangent(xp, problem.gradient(xp));
    const Vector gm = chart.project_tangent(xm, problem.gradient(xm));
    return chart.project_tangent(x, (gp - gm) / (2.0 * l));
  }

  Vector hessian_action(const Problem& problem, const Manifold& chart, HessianMode mode, double l, const Vector& x,
                        const Vector& egrad, const Vector& v) {
    if (mode == HessianMode::analytic) {
      return riemannian_hess_vec(chart, x, v, egrad, problem.hess_vec(x, v));
    }
    return dimer_hess_vec(problem, chart, x, v, l);
  }

  SearchState step(const Problem& problem, const Manifold& chart, const SearchConfig& config, const SearchState& state) {
    config.validate();
    if (state.frame.size() != config.k) {
      throw DomainError("step: frame size " + std::to_string(state.frame.size()) + " differs from k = " + std::to_string(config.k));
    }
    Workspace ws;
    const Vector rgrad = riemannian_grad(chart, state.x, problem.gradient(state.x));
    SearchState next = step_impl(problem, chart, config, state, rgrad, ws);
    next.last_grad_norm = chart.space().norm(rgrad);
    return next;
  }

  SearchOutcome run(const Problem& problem, const Manifold& chart, const SearchConfig& config, const SearchState& init) {
    config.validate();
    if (init.frame.size() != config.k) {
      throw DomainError("run: frame size " + std::to_string(init.frame.size()) + " differs from k = " + std::to_string(config.k));
    }
    check_state(chart, init);

    SearchOutcome out;
    SearchState state = init;
    state.iter = 0;
    Workspace ws;
    long start_iter = 0;

    auto finish = [&](SearchStatus status, std::string message) {
      out.status = status;
      out.message = std::move(message);
      out.iterations = state.iter - start_iter;
      out.grad_norm = state.last_grad_norm;
      try {
        out.energy = problem.energy(state.x);
      } catch (const SingularityError& e) {
        out.status = SearchStatus::diverged;
        out.message = e.what();
      }
      if (status == SearchStatus::converged && !(out.grad_norm <= config.grad_tol)) {
        out.status = SearchStatus::diverged;
      }
      out.state = std::move(state);
      return out;
    };

    try {
      ws.egrad = problem.gradient(state.x);
    } catch (const SingularityError& e) {
      return finish(SearchStatus::diverged, e.what());
    }

    for (;;) {
      const Vector rgrad = riemannian_grad(chart, state.x, ws.egrad);
      state.last_grad_norm = chart.space().norm(rgrad);
      if (!std::isfinite(state.last_grad_norm)) {
        return finish(SearchStatus::diverged, "non-finite gradient norm");
      }
      if (config.trace_every > 0 && state.iter % config.trace_every == 0) {
        out.trace.push_back({state.iter, problem.energy(state.x), state.last_grad_norm});
      }
      if (state.last_grad_norm <= config.grad_tol) {
        return finish(SearchStatus::converged, {});
      }
      if (state.iter >= config.max_iter) {
        return finish(SearchStatus::max_iter, "iteration budget exhausted");
      }
      try {
        state = step_impl(problem, chart, config, state, rgrad, ws);
      } catch (const RankDeficiencyError& e) {
        return finish(SearchStatus::rank_loss, e.what());
      } catch (const DomainError& e) {
        return finish(SearchStatus::diverged, e.what());
      } catch (const SingularityError& e) {
        return finish(SearchStatus::diverged, e.what());
      }
      if (state.iter % config.energy_check_every == 0) {
        double e = 0.0;
        try {
          e = problem.energy(state.x);
        } catch (const SingularityError& err) {
          return finish(SearchStatus::diverged, err.what());
        }
        if (!std::isfinite(e) || e > config.divergence_energy) {
          return finish(SearchStatus::diverged, "energy " + std::to_string(e) + " above divergence bound");
        }
      }
    }
  }

}  // namespace chisd
