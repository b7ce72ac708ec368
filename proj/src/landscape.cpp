#include "chisd/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <sstream>
#include <string>

#include "chisd/util.hpp"

namespace chisd {

  TangentOperator hessian_operator(const Problem& problem, const Manifold& chart, const Vector& x, HessianMode mode, double l) {
    if (mode == HessianMode::analytic && !problem.has_hessian()) {
      throw DomainError("problem '" + problem.name() + "' has no analytic Hessian; use the dimer mode");
    }
    Vector egrad = problem.gradient(x);
    return [&problem, &chart, x, egrad = std::move(egrad), mode, l](const Vector& v) {
      return hessian_action(problem, chart, mode, l, x, egrad, chart.project_tangent(x, v));
    };
  }

  Classification classify(const Problem& problem, const Manifold& chart, const Vector& x, const ClassifyOptions& options) {
    const std::size_t nt = chart.tangent_dim();
    Classification out;
    if (nt == 0) {
      return out;
    }
    const TangentOperator op = hessian_operator(problem, chart, x, options.hessian, options.dimer_length);
    std::size_t K = std::clamp<std::size_t>(options.initial_K, 1, nt);
    SpectrumResult res;
    for (;;) {
      res = smallest_eigenpairs(op, chart, x, K, options.eigen);
      const double thr = options.zero_rel * std::max(1.0, res.spectral_scale);
      const auto nonpos = static_cast<std::size_t>(
          std::count_if(res.eigenvalues.begin(), res.eigenvalues.end(), [&](double l) { return l <= thr; }));
      out.zero_threshold = thr;
      if (nonpos + 2 <= K || K == nt) {
        break;
      }
      K = std::min(nt, std::max(2 * K, nonpos + 2));
    }
    for (double l : res.eigenvalues) {
      if (l < -out.zero_threshold) {
        ++out.index;
      } else if (l <= out.zero_threshold) {
        ++out.n_zero;
      }
    }
    out.spectrum = res.eigenvalues;
    out.eigenvectors = res.eigenvectors;
    out.residuals = res.residuals;
    out.spectral_scale = res.spectral_scale;
    return out;
  }

  const StationaryPoint& Landscape::at(long id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= solutions.size()) {
      throw DomainError("landscape: no solution with id " + std::to_string(id));
    }
    return solutions[static_cast<std::size_t>(id)];
  }

  bool Landscape::has_relation(long parent, long child) const {
    return std::find(relations.begin(), relations.end(), Relation{parent, child}) != relations.end();
  }

  bool Landscape::add_relation(long parent, long child) {
    if (has_relation(parent, child)) {
      return false;
    }
    relations.push_back({parent, child});
    return true;
  }

  std::pair<bool, long> dedup_insert(Landscape& landscape, StationaryPoint candidate, const Problem& problem, const DedupOptions& options) {
    const double scale = std::max(1.0, std::abs(candidate.energy));
    long near = -1;
    double near_d = INFINITY;
    for (const StationaryPoint& s : landscape.solutions) {
      if (s.index != candidate.index) continue;
      const double de = std::abs(s.energy - candidate.energy);
      if (de <= options.energy_rel * scale && problem.prefilter(s.x, candidate.x, options.distance)) {
        if (problem.aligned_distance(s.x, candidate.x) <= options.distance) {
          return {false, s.id};
        }
      }
      if (de <= options.near_miss_energy_rel * scale) {
        const double d = problem.aligned_distance(s.x, candidate.x);
        if (d <= options.near_miss_distance && d < near_d) {
          near = s.id;
          near_d = d;
        }
      }
    }
    candidate.id = static_cast<long>(landscape.solutions.size());
    if (near >= 0) {
      candidate.near_miss_of = near;
      candidate.near_miss_distance = near_d;
      log_warn("landscape: solution " + std::to_string(candidate.id) + " nearly matches " + std::to_string(near)
               + " (aligned distance " + std::to_string(near_d) + "); kept as distinct");
    }
    landscape.solutions.push_back(std::move(candidate));
    return {true, landscape.solutions.back().id};
  }

  StationaryPoint make_seed(const Problem& problem, const Manifold& chart, const Vector& x, const LandscapeConfig& config) {
    const double g = chart.space().norm(riemannian_grad(chart, x, problem.gradient(x)));
    if (!(g <= config.search.grad_tol)) {
      throw DomainError("seed is not stationary: |grad E| = " + std::to_string(g) + " > grad_tol = " + std::to_string(config.search.grad_tol));
    }
    const Classification c = classify(problem, chart, x, config.classify);
    StationaryPoint s;
    s.id = 0;
    s.x = x;
    s.energy = problem.energy(x);
    s.grad_norm = g;
    s.index = c.index;
    s.n_zero = c.n_zero;
    s.spectrum = c.spectrum;
    s.eigenvectors = c.eigenvectors;
    return s;
  }

  namespace {

    struct Launch {
      Vector x0;
      Frame frame;
      int direction;
      int sign;
    };

    struct Result {
      SearchOutcome outcome;
      std::optional<StationaryPoint> point;
      std::string note;
    };

    // Runs the CHiSD launch and classifies its end point; never throws.
    Result execute(const Problem& problem, const Manifold& chart, const LandscapeConfig& config, int target, const Launch& launch) {
      Result r;
      try {
        SearchState init = make_state(chart, launch.x0, launch.frame);
        SearchConfig cfg = config.search;
        cfg.k = static_cast<std::size_t>(target);
        r.outcome = run(problem, chart, cfg, init);
        if (!r.outcome.converged()) {
          r.note = std::string(to_string(r.outcome.status)) + (r.outcome.message.empty() ? "" : ": " + r.outcome.message);
          return r;
        }
        const Vector& x = r.outcome.state.x;
        const double g = chart.space().norm(riemannian_grad(chart, x, problem.gradient(x)));
        if (!(g <= config.search.grad_tol)) {
          r.note = "end point failed the stationarity re-check";
          return r;
        }
        const Classification c = classify(problem, chart, x, config.classify);
        StationaryPoint p;
        p.x = x;
        p.energy = problem.energy(x);
        p.grad_norm = g;
        p.index = c.index;
        p.n_zero = c.n_zero;
        p.spectrum = c.spectrum;
        p.eigenvectors = c.eigenvectors;
        r.point = std::move(p);
      } catch (const Error& e) {
        r.note = e.what();
        r.outcome.status = SearchStatus::diverged;
      }
      return r;
    }

    std::vector<Result> execute_all(const Problem& problem, const Manifold& chart, const LandscapeConfig& config, int target,
                                    const std::vector<Launch>& launches) {
      std::vector<Result> results(launches.size());
      parallel_for(launches.size(), config.threads,
                   [&](std::size_t i) { results[i] = execute(problem, chart, config, target, launches[i]); });
      return results;
    }

    LaunchRecord record_of(long source, int target, const Launch& l, const Result& r) {
      return {source, target, l.direction, l.sign, r.outcome.status, r.outcome.iterations, r.outcome.energy, -1, false, r.note};
    }

    void ensure_vectors(const Problem& problem, const Manifold& chart, const LandscapeConfig& config, StationaryPoint& p, std::size_t m) {
      if (p.eigenvectors.size() >= m) return;
      const TangentOperator op = hessian_operator(problem, chart, p.x, config.classify.hessian, config.classify.dimer_length);
      const SpectrumResult res = smallest_eigenpairs(op, chart, p.x, m, config.classify.eigen);
      p.eigenvectors = res.eigenvectors;
      if (res.eigenvalues.size() > p.spectrum.size()) {
        p.spectrum = res.eigenvalues;
      }
    }

  }  // namespace

  SearchReport downward_search(const Problem& problem, const Manifold& chart, const StationaryPoint& seed, const LandscapeConfig& config) {
    config.search.validate();
    SearchReport rep;
    Landscape& land = rep.landscape;
    StationaryPoint root = seed;
    root.id = 0;
    root.provenance = {};
    land.solutions.push_back(root);

    struct Job {
      long node;
      int m;
    };
    std::deque<Job> queue;
    auto within_cap = [&](int k, int m) { return m >= 0 && (config.depth_cap < 0 || k - m <= config.depth_cap); };
    auto enqueue_node = [&](long id) {
      const int k = land.at(id).index;
      if (k >= 1 && within_cap(k, k - 1)) {
        queue.push_back({id, k - 1});
      }
    };
    enqueue_node(0);

    while (!queue.empty() && land.solutions.size() < config.max_solutions) {
      const Job job = queue.front();
      queue.pop_front();
      const StationaryPoint node = land.at(job.node);
      const int k = node.index;
      if (job.m >= 1 && within_cap(k, job.m - 1)) {
        queue.push_back({job.node, job.m - 1});
      }
      if (node.eigenvectors.size() < static_cast<std::size_t>(k)) {
        log_warn("downward: node " + std::to_string(node.id) + " lacks unstable eigenvectors; skipped");
        continue;
      }

      std::vector<Launch> launches;
      for (int j = 1; j <= k; ++j) {
        Frame dirs;
        const int skip = std::min(j, job.m + 1);
        for (int i = 1; i <= job.m + 1; ++i) {
          if (i != skip) dirs.push_back(node.eigenvectors[static_cast<std::size_t>(i - 1)]);
        }
        for (int sign : {1, -1}) {
          const Vector eta = (sign * config.eps) * node.eigenvectors[static_cast<std::size_t>(j - 1)];
          launches.push_back({chart.retract(node.x, eta), dirs, j, sign});
        }
      }
      log_info("downward: node " + std::to_string(node.id) + " (index " + std::to_string(k) + "), " + std::to_string(launches.size())
               + " launches of " + std::to_string(job.m) + "-CHiSD");
      const std::vector<Result> results = execute_all(problem, chart, config, job.m, launches);

      for (std::size_t i = 0; i < launches.size(); ++i) {
        const Result& r = results[i];
        LaunchRecord rec = record_of(node.id, job.m, launches[i], r);
        if (r.point) {
          StationaryPoint cand = *r.point;
          if (cand.index >= k) {
            rec.note = "end point has index " + std::to_string(cand.index) + ", not below the source";
          } else if (land.solutions.size() >= config.max_solutions) {
            rec.note = "solution limit reached";
          } else {
            cand.provenance = {node.id, launches[i].direction, launches[i].sign, job.m};
            const auto [inserted, id] = dedup_insert(land, std::move(cand), problem, config.dedup);
            rec.result = id;
            rec.inserted = inserted;
            if (id != node.id) {
              land.add_relation(node.id, id);
            }
            if (inserted) {
              enqueue_node(id);
            }
          }
        }
        rep.launches.push_back(std::move(rec));
      }
    }
    return rep;
  }

  SearchReport upward_search(const Problem& problem, const Manifold& chart, const StationaryPoint& seed, const LandscapeConfig& config) {
    config.search.validate();
    SearchReport rep;
    Landscape& land = rep.landscape;
    StationaryPoint root = seed;
    root.id = 0;
    root.provenance = {};
    land.solutions.push_back(root);

    const int nt = static_cast<int>(chart.tangent_dim());
    auto first_target = [&](const StationaryPoint& p) {
      return std::max(p.index + 1, p.index + p.n_zero + 1 + config.up_offset);
    };
    struct Job {
      long node;
      int m;
      int last;
    };
    std::vector<Job> stack;
    auto push_node = [&](long id) {
      const StationaryPoint& p = land.at(id);
      if (p.index >= config.max_index) return;
      const int m = first_target(p);
      if (m <= nt) stack.push_back({id, m, std::min(nt, m + config.up_extra)});
    };
    push_node(0);

    while (!stack.empty() && land.solutions.size() < config.max_solutions) {
      const Job job = stack.back();
      stack.pop_back();
      if (job.m < job.last) {
        stack.push_back({job.node, job.m + 1, job.last});
      }
      StationaryPoint& stored = land.solutions[static_cast<std::size_t>(job.node)];
      try {
        ensure_vectors(problem, chart, config, stored, static_cast<std::size_t>(job.m));
      } catch (const Error& e) {
        log_warn(std::string("upward: eigenvectors for node ") + std::to_string(job.node) + " unavailable: " + e.what());
        continue;
      }
      const StationaryPoint node = stored;
      const Frame dirs = node.eigenvectors.head(static_cast<std::size_t>(job.m));
      std::vector<Launch> launches;
      for (int sign : {1, -1}) {
        const Vector eta = (sign * config.eps) * node.eigenvectors[static_cast<std::size_t>(job.m - 1)];
        launches.push_back({chart.retract(node.x, eta), dirs, job.m, sign});
      }
      log_info("upward: node " + std::to_string(node.id) + " (index " + std::to_string(node.index) + ", zero modes "
               + std::to_string(node.n_zero) + "), " + std::to_string(job.m) + "-CHiSD");
      const std::vector<Result> results = execute_all(problem, chart, config, job.m, launches);

      for (std::size_t i = 0; i < launches.size(); ++i) {
        const Result& r = results[i];
        LaunchRecord rec = record_of(node.id, job.m, launches[i], r);
        if (r.point) {
          StationaryPoint cand = *r.point;
          if (cand.index <= node.index) {
            rec.note = "end point has index " + std::to_string(cand.index) + ", not above the source";
          } else if (land.solutions.size() >= config.max_solutions) {
            rec.note = "solution limit reached";
          } else {
            cand.provenance = {node.id, launches[i].direction, launches[i].sign, job.m};
            const auto [inserted, id] = dedup_insert(land, std::move(cand), problem, config.dedup);
            rec.result = id;
            rec.inserted = inserted;
            land.add_relation(id, node.id);
            if (inserted) {
              push_node(id);
            }
          }
        }
        rep.launches.push_back(std::move(rec));
      }
    }
    return rep;
  }

}  // namespace chisd
