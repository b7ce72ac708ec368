#include "chisd/experiment/experiment.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "chisd/bec.hpp"
#include "chisd/sphere.hpp"
#include "chisd/thomson.hpp"
#include "chisd/util.hpp"
#include "json.hpp"

namespace chisd::experiment {

  namespace fs = std::filesystem;
  using json = nlohmann::ordered_json;

  namespace {

    std::string read_text(const fs::path& path) {
      std::ifstream in(path, std::ios::binary);
      if (!in) throw IoError("cannot open '" + path.string() + "'");
      std::stringstream ss;
      ss << in.rdbuf();
      return ss.str();
    }

    json parse_json(const std::string& text, const std::string& what) {
      try {
        return json::parse(text);
      } catch (const json::exception& e) {
        throw IoError(what + ": " + e.what());
      }
    }

    Vector thomson_from_file(const fs::path& path, std::size_t n) {
      const json doc = parse_json(read_text(path), path.string());
      const json& pts = doc.is_object() ? doc.at("coordinates") : doc;
      std::vector<double> flat;
      for (const json& p : pts) {
        if (p.is_array()) {
          for (const json& c : p) flat.push_back(c.get<double>());
        } else {
          flat.push_back(p.get<double>());
        }
      }
      if (flat.size() != 3 * n) {
        throw IoError("'" + path.string() + "': expected " + std::to_string(n) + " particles, found " + std::to_string(flat.size()) + " values");
      }
      return thomson::gauge_fix(Eigen::Map<Vector>(flat.data(), static_cast<Eigen::Index>(flat.size())));
    }

    json coords_json(const Vector& x, std::size_t stride) {
      json arr = json::array();
      for (Eigen::Index i = 0; i < x.size(); i += static_cast<Eigen::Index>(stride)) {
        if (stride == 1) {
          arr.push_back(x[i]);
        } else {
          json p = json::array();
          for (std::size_t c = 0; c < stride; ++c) p.push_back(x[i + static_cast<Eigen::Index>(c)]);
          arr.push_back(std::move(p));
        }
      }
      return arr;
    }

    json spectrum_json(const std::vector<double>& s) {
      json arr = json::array();
      for (double l : s) arr.push_back(l);
      return arr;
    }

    bec::Grid2D grid_of(const RunConfig& c) { return bec::Grid2D(c.bec.half_width, c.bec.nodes); }

    std::unique_ptr<chisd::Problem> sphere_problem(const SphereSettings& s) {
      const auto d = static_cast<Eigen::Index>(s.dim);
      Matrix m = Matrix::Zero(d, d);
      m(0, 0) = 2.0 * s.anisotropy;
      return std::make_unique<QuadraticProblem>(m, Vector::Unit(d, d - 1));
    }

    void write_solution_artifacts(const RunConfig& cfg, const Setup& setup, const Landscape& land, const fs::path& dir, json& report) {
      fs::create_directories(dir / "solutions");
      for (const StationaryPoint& s : land.solutions) {
        json j;
        j["problem"] = setup.problem->name() == "quadratic" ? "sphere" : setup.problem->name();
        j["id"] = s.id;
        j["energy"] = s.energy;
        j["index"] = s.index;
        j["n_zero"] = s.n_zero;
        j["grad_norm"] = s.grad_norm;
        j["spectrum"] = spectrum_json(s.spectrum);
        const std::string stem = std::to_string(s.id);
        switch (cfg.problem) {
          case ProblemKind::thomson:
            j["N"] = cfg.thomson.n;
            j["coordinates"] = coords_json(s.x, 3);
            break;
          case ProblemKind::sphere:
            j["dim"] = cfg.sphere.dim;
            j["anisotropy"] = cfg.sphere.anisotropy;
            j["coordinates"] = coords_json(s.x, 1);
            break;
          case ProblemKind::bec: {
            const auto& bp = static_cast<const bec::Problem&>(*setup.problem);
            const bec::Grid2D& g = bp.grid();
            bec::write_field(g, s.x, dir / "solutions" / (stem + ".field"));
            bec::export_density(g, s.x, dir / "solutions" / (stem + ".pgm"));
            const auto vortices = bec::find_vortices(g, s.x, cfg.bec.vortex_floor);
            json vs = json::array();
            for (const auto& v : vortices) vs.push_back({{"x", v.x}, {"y", v.y}, {"charge", v.charge}});
            const double mu = bp.chemical_potential(s.x);
            const double centre = bec::density_at(g, s.x, 0.0, 0.0) / bec::max_density(g, s.x);
            j["beta"] = bp.beta();
            j["M"] = g.half_width;
            j["N"] = g.nodes;
            j["chemical_potential"] = mu;
            j["central_density_ratio"] = centre;
            j["vortices"] = std::move(vs);
            j["field"] = stem + ".field";
            j["density"] = stem + ".pgm";
            json r = {{"id", s.id}, {"energy", s.energy}, {"chemical_potential", mu}, {"index", s.index}, {"n_zero", s.n_zero},
                      {"vortex_count", vortices.size()}, {"central_density_ratio", centre},
                      {"parent", s.provenance.parent}, {"target", s.provenance.target}};
            report["states"].push_back(std::move(r));
            break;
          }
        }
        write_file_atomic(dir / "solutions" / (stem + ".json"), j.dump(2) + "\n");
      }
    }

    Vector random_tangent(const Manifold& chart, const Vector& x, std::uint64_t seed) {
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> normal;
      Vector v(static_cast<Eigen::Index>(chart.dim()));
      for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
      v = chart.project_tangent(x, v);
      return v / chart.space().norm(v);
    }

    SearchReport run_single(const RunConfig& cfg, const Setup& setup) {
      const chisd::Problem& problem = *setup.problem;
      const Manifold& chart = *setup.chart;
      Vector x0 = setup.seed;
      if (cfg.single.perturb > 0.0) {
        x0 = chart.retract(x0, cfg.single.perturb * random_tangent(chart, x0, cfg.seed));
      }
      Frame frame;
      if (cfg.single.k > 0) {
        const TangentOperator op = hessian_operator(problem, chart, x0, cfg.landscape.classify.hessian, cfg.landscape.classify.dimer_length);
        frame = smallest_eigenpairs(op, chart, x0, cfg.single.k, cfg.landscape.classify.eigen).eigenvectors;
      }
      SearchConfig sc = cfg.landscape.search;
      sc.k = cfg.single.k;
      const SearchOutcome out = run(problem, chart, sc, make_state(chart, x0, frame));
      SearchReport rep;
      rep.launches.push_back({-1, static_cast<int>(sc.k), 0, 0, out.status, out.iterations, out.energy, -1, false, out.message});
      if (!out.converged()) {
        throw ConvergenceError("single search did not converge: " + std::string(to_string(out.status)) + " " + out.message);
      }
      StationaryPoint p = make_seed(problem, chart, out.state.x, cfg.landscape);
      p.provenance.target = static_cast<int>(sc.k);
      rep.landscape.solutions.push_back(std::move(p));
      rep.launches.back().result = 0;
      rep.launches.back().inserted = true;
      return rep;
    }

  }  // namespace

  Setup make_setup(const RunConfig& cfg) {
    Setup s;
    switch (cfg.problem) {
      case ProblemKind::thomson: {
        const std::size_t n = cfg.thomson.n;
        s.problem = std::make_unique<thomson::Problem>(n);
        s.chart = std::make_unique<thomson::Chart>(n, cfg.retraction, cfg.transport);
        s.seed = cfg.thomson.seed_config == "file" ? thomson_from_file(cfg.thomson.seed_file, n)
                                                   : thomson::reference_config(thomson::parse_reference(cfg.thomson.seed_config), n);
        break;
      }
      case ProblemKind::sphere: {
        s.problem = sphere_problem(cfg.sphere);
        s.chart = std::make_unique<SphereChart>(RealSpace(cfg.sphere.dim), cfg.retraction, cfg.transport);
        const Vector p = Eigen::Map<const Vector>(cfg.sphere.seed_point.data(), static_cast<Eigen::Index>(cfg.sphere.seed_point.size()));
        if (!(p.norm() > 0.0)) throw DomainError("sphere.seed_point must be nonzero");
        s.seed = p / p.norm();
        break;
      }
      case ProblemKind::bec: {
        const bec::Grid2D g = grid_of(cfg);
        auto problem = std::make_unique<bec::Problem>(g, cfg.bec.beta);
        s.chart = std::make_unique<SphereChart>(bec::make_chart(g, cfg.retraction, cfg.transport));
        const std::string& st = cfg.bec.seed_state;
        if (st == "file") {
          const bec::FieldFile f = bec::read_field(cfg.bec.seed_file);
          if (f.grid.nodes != g.nodes || f.grid.half_width != g.half_width) {
            throw DomainError("bec.seed_file grid (" + std::to_string(f.grid.nodes) + " nodes) does not match the configured grid");
          }
          s.seed = bec::normalized(g, f.phi);
        } else if (st == "gaussian") {
          s.seed = bec::gaussian(g);
        } else if (st == "vortex") {
          s.seed = bec::vortex(g, 1);
        } else {
          s.seed = bec::thomas_fermi(g, cfg.bec.beta);
        }
        if (st == "ground") {
          SearchConfig sc = cfg.landscape.search;
          sc.k = 0;
          sc.max_iter = cfg.bec.ground_max_iter;
          const SearchOutcome out = run(*problem, *s.chart, sc, make_state(*s.chart, s.seed, {}));
          if (!out.converged()) {
            throw ConvergenceError("ground-state descent did not converge (" + std::string(to_string(out.status)) + ", |grad E| = "
                                   + std::to_string(out.grad_norm) + " after " + std::to_string(out.iterations) + " steps)");
          }
          log_info("bec: ground state E = " + std::to_string(out.energy) + " after " + std::to_string(out.iterations) + " steps");
          s.seed = out.state.x;
        }
        s.problem = std::move(problem);
        break;
      }
    }
    return s;
  }

  ExperimentOutput execute(const RunConfig& cfg, const std::string& config_source) {
    const auto t0 = std::chrono::steady_clock::now();
    const Setup setup = make_setup(cfg);
    ExperimentOutput out;
    out.problem_name = cfg.problem == ProblemKind::sphere ? "sphere" : setup.problem->name();
    switch (cfg.mode) {
      case Mode::single:
        out.report = run_single(cfg, setup);
        break;
      case Mode::downward:
        out.report = downward_search(*setup.problem, *setup.chart, make_seed(*setup.problem, *setup.chart, setup.seed, cfg.landscape), cfg.landscape);
        break;
      case Mode::upward:
        out.report = upward_search(*setup.problem, *setup.chart, make_seed(*setup.problem, *setup.chart, setup.seed, cfg.landscape), cfg.landscape);
        break;
    }

    const fs::path& dir = cfg.output_dir;
    fs::create_directories(dir);
    JsonOptions jo;
    jo.embed_coordinates = cfg.problem != ProblemKind::bec;
    write_file_atomic(dir / "landscape.json", to_json(out.report.landscape, out.problem_name, jo));
    write_file_atomic(dir / "landscape.dot", to_dot(out.report.landscape));
    write_file_atomic(dir / "launches.json", launches_json(out.report.launches));
    json report;
    report["states"] = json::array();
    write_solution_artifacts(cfg, setup, out.report.landscape, dir, report);
    std::vector<std::string> artifacts = {"landscape.json", "landscape.dot", "launches.json", "solutions/"};
    if (cfg.problem == ProblemKind::bec) {
      write_file_atomic(dir / "report.json", report.dump(2) + "\n");
      artifacts.push_back("report.json");
    }
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json manifest;
    manifest["library"] = "chisd";
    manifest["version"] = CHISD_VERSION;
    manifest["config_source"] = config_source;
    json c;
    for (const auto& [k, v] : cfg.resolved) c[k] = v;
    c["seed"] = std::to_string(cfg.seed);
    c["parallelism"] = std::to_string(cfg.parallelism);
    c["output_dir"] = cfg.output_dir.string();
    manifest["config"] = std::move(c);
    manifest["seed"] = cfg.seed;
    manifest["parallelism"] = cfg.parallelism;
    manifest["wall_seconds"] = out.wall_seconds;
    manifest["solutions"] = out.report.landscape.solutions.size();
    manifest["relations"] = out.report.landscape.relations.size();
    manifest["artifacts"] = artifacts;
    write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
    return out;
  }

  int run_experiment(const fs::path& config_path, const Overrides& overrides, std::ostream& err) {
    RunConfig cfg;
    try {
      RawConfig raw = load_config(config_path);
      apply_env_overrides(raw, [](const char* name) { return std::getenv(name); });
      cfg = validate(raw);
      if (overrides.output) cfg.output_dir = *overrides.output;
      if (overrides.seed) cfg.seed = *overrides.seed;
      if (overrides.parallelism) {
        if (*overrides.parallelism < 1) throw ConfigError("parallelism", "must be at least 1");
        cfg.parallelism = *overrides.parallelism;
      }
      cfg.landscape.threads = cfg.parallelism;
      cfg.landscape.classify.eigen.seed = cfg.seed;
    } catch (const ConfigError& e) {
      err << "config error: " << e.what() << "\n";
      return kExitValidation;
    } catch (const Error& e) {
      err << "config error: " << e.what() << "\n";
      return kExitValidation;
    }
    try {
      const ExperimentOutput out = execute(cfg, config_path.string());
      log_info("run finished: " + std::to_string(out.report.landscape.solutions.size()) + " solutions, "
               + std::to_string(out.report.landscape.relations.size()) + " relations");
    } catch (const Error& e) {
      err << "solver error: " << e.what() << "\n";
      return kExitSolver;
    } catch (const std::filesystem::filesystem_error& e) {
      err << "solver error: " << e.what() << "\n";
      return kExitSolver;
    }
    return kExitOk;
  }

  int classify_solution(const fs::path& file, std::ostream& out, std::ostream& err) {
    json doc;
    try {
      doc = parse_json(read_text(file), file.string());
      if (!doc.is_object() || !doc.contains("problem")) throw ConfigError("problem", "solution file has no 'problem' entry");
    } catch (const Error& e) {
      err << "input error: " << e.what() << "\n";
      return kExitValidation;
    }
    try {
      RunConfig cfg;
      const std::string p = doc.at("problem").get<std::string>();
      Vector x;
      if (p == "thomson") {
        cfg.problem = ProblemKind::thomson;
        cfg.thomson.n = doc.at("N").get<std::size_t>();
        x = thomson_from_file(file, cfg.thomson.n);
      } else if (p == "sphere") {
        cfg.problem = ProblemKind::sphere;
        cfg.sphere.dim = doc.at("dim").get<std::size_t>();
        cfg.sphere.anisotropy = doc.at("anisotropy").get<double>();
        const auto c = doc.at("coordinates").get<std::vector<double>>();
        x = Eigen::Map<const Vector>(c.data(), static_cast<Eigen::Index>(c.size()));
      } else if (p == "bec") {
        cfg.problem = ProblemKind::bec;
        cfg.bec.beta = doc.at("beta").get<double>();
        cfg.bec.half_width = doc.at("M").get<double>();
        cfg.bec.nodes = doc.at("N").get<std::size_t>();
        x = bec::read_field(file.parent_path() / doc.at("field").get<std::string>()).phi;
      } else {
        err << "input error: problem '" << p << "' is not recognised\n";
        return kExitValidation;
      }
      std::unique_ptr<chisd::Problem> problem;
      std::unique_ptr<Manifold> chart;
      if (cfg.problem == ProblemKind::thomson) {
        problem = std::make_unique<thomson::Problem>(cfg.thomson.n);
        chart = std::make_unique<thomson::Chart>(cfg.thomson.n);
      } else if (cfg.problem == ProblemKind::sphere) {
        problem = sphere_problem(cfg.sphere);
        chart = std::make_unique<SphereChart>(RealSpace(cfg.sphere.dim));
      } else {
        const bec::Grid2D g = grid_of(cfg);
        problem = std::make_unique<bec::Problem>(g, cfg.bec.beta);
        chart = std::make_unique<SphereChart>(bec::make_chart(g));
      }
      const double g = chart->space().norm(riemannian_grad(*chart, x, problem->gradient(x)));
      const Classification c = classify(*problem, *chart, x, ClassifyOptions{});
      json r = {{"problem", p}, {"energy", problem->energy(x)}, {"grad_norm", g}, {"index", c.index}, {"n_zero", c.n_zero},
                {"zero_threshold", c.zero_threshold}, {"spectrum", spectrum_json(c.spectrum)}};
      out << r.dump(2) << "\n";
    } catch (const json::exception& e) {
      err << "input error: " << e.what() << "\n";
      return kExitValidation;
    } catch (const Error& e) {
      err << "solver error: " << e.what() << "\n";
      return kExitSolver;
    }
    return kExitOk;
  }

  int emit_graph(const fs::path& landscape_file, const std::optional<fs::path>& out_path, std::ostream& out, std::ostream& err) {
    Landscape land;
    try {
      land = landscape_from_json(read_text(landscape_file));
    } catch (const Error& e) {
      err << "input error: " << e.what() << "\n";
      return kExitValidation;
    }
    const std::string dot = to_dot(land);
    try {
      if (out_path) {
        write_file_atomic(*out_path, dot);
      } else {
        out << dot;
      }
    } catch (const Error& e) {
      err << "output error: " << e.what() << "\n";
      return kExitSolver;
    }
    return kExitOk;
  }

}  // namespace chisd::experiment
