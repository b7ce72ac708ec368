// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <random>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "chisd/bec.hpp"
#include "chisd/dynamics.hpp"
#include "chisd/experiment/experiment.hpp"
#include "chisd/landscape.hpp"
#include "chisd/sphere.hpp"
#include "chisd/thomson.hpp"
#include "chisd/util.hpp"

using namespace chisd;
namespace fs = std::filesystem;

namespace {

  struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
      detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [x]");
      pass = pass && ok;
    }
  };

  std::string fmt(double v) {
    std::ostringstream s;
    s << std::setprecision(4) << v;
    return s.str();
  }

  Vector normal_vector(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> d;
    Vector v(static_cast<Eigen::Index>(n));
    for (auto& c : v) c = d(rng);
    return v;
  }

  fs::path workdir() {
    const fs::path d = fs::temp_directory_path() / "chisd_acceptance";
    fs::create_directories(d);
    return d;
  }

  std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  Vector point_on(const Manifold& m, std::mt19937_64& rng) {
    const Vector y = normal_vector(rng, m.dim());
    if (const auto* s = dynamic_cast<const SphereChart*>(&m)) return s->normalize(y);
    return thomson::gauge_fix(y);
  }

  void ac1(Verdict& v) {
    std::mt19937_64 rng(101);
    const SphereChart s2(RealSpace(3)), s9(RealSpace(10));
    const thomson::Chart t7(7);
    const bec::Grid2D grid(8.0, 64);
    const SphereChart weighted = bec::make_chart(grid);
    const std::vector<std::pair<std::string, const Manifold*>> charts = {
        {"S2", &s2}, {"S9", &s9}, {"Thomson7", &t7}, {"BEC64", &weighted}};
    std::uniform_real_distribution<double> len(0.0, 3.0);
    for (const auto& [name, m] : charts) {
      double feas = 0, tang = 0, iso = 0, idem = 0;
      for (int i = 0; i < 1000; ++i) {
        const Vector x = point_on(*m, rng);
        Vector eta = m->project_tangent(x, normal_vector(rng, m->dim()));
        eta *= len(rng) / m->space().norm(eta);
        const Vector xi = m->project_tangent(x, normal_vector(rng, m->dim()));
        const Vector y = m->retract(x, eta);
        const Vector t = m->transport(x, eta, xi);
        const double nx = m->space().norm(xi);
        feas = std::max(feas, m->feasibility(y));
        tang = std::max(tang, m->tangency(y, t) / nx);
        iso = std::max(iso, std::abs(m->space().norm(t) - nx) / nx);
        const Vector u = normal_vector(rng, m->dim());
        const Vector p = m->project_tangent(x, u);
        idem = std::max(idem, m->space().norm(m->project_tangent(x, p) - p) / m->space().norm(u));
      }
      v.require(feas <= 1e-12 && tang <= 1e-10 && iso <= 1e-12 && idem <= 1e-13,
                name + " feas=" + fmt(feas) + " tang=" + fmt(tang) + " iso=" + fmt(iso) + " idem=" + fmt(idem));
    }
  }

  // Worst relative gradient error, Hessian asymmetry and dimer ratio range over a few random samples.
  void derivative_checks(Verdict& v, const std::string& name, const Problem& p, const Manifold& m,
                         const std::function<Vector(std::mt19937_64&)>& sample, double l) {
    std::mt19937_64 rng(202);
    double grad_err = 0, asym = 0, hess_err = 0, rmin = 1e300, rmax = 0;
    for (int i = 0; i < 5; ++i) {
      const Vector x = sample(rng);
      const Vector eta = sample(rng);
      const double t = 1e-5;
      const double fd = (p.energy(x + t * eta) - p.energy(x - t * eta)) / (2 * t);
      const double an = m.space().inner(p.gradient(x), eta);
      grad_err = std::max(grad_err, std::abs(an - fd) / std::max(1.0, std::abs(fd)));
      const Vector zeta = sample(rng);
      const double a = m.space().inner(p.hess_vec(x, eta), zeta);
      const double b = m.space().inner(p.hess_vec(x, zeta), eta);
      asym = std::max(asym, std::abs(a - b) / std::max(1.0, std::abs(a)));
      const Vector hfd = (p.gradient(x + t * eta) - p.gradient(x - t * eta)) / (2 * t);
      hess_err = std::max(hess_err, m.space().norm(p.hess_vec(x, eta) - hfd) / std::max(1.0, m.space().norm(hfd)));
      Vector dir = m.project_tangent(x, zeta);
      dir /= m.space().norm(dir);
      const Vector g = p.gradient(x);
      const Vector exact = hessian_action(p, m, HessianMode::analytic, 0.0, x, g, dir);
      const double e1 = m.space().norm(dimer_hess_vec(p, m, x, dir, l) - exact);
      const double e2 = m.space().norm(dimer_hess_vec(p, m, x, dir, l / 2) - exact);
      rmin = std::min(rmin, e1 / e2);
      rmax = std::max(rmax, e1 / e2);
    }
    v.require(grad_err <= 1e-6, name + " grad rel err=" + fmt(grad_err));
    v.require(asym <= 1e-8, name + " hess asym=" + fmt(asym));
    v.require(hess_err <= 1e-6, name + " hess-vs-FD=" + fmt(hess_err));
    v.require(rmin >= 3.2 && rmax <= 4.8, name + " dimer ratio in [" + fmt(rmin) + ", " + fmt(rmax) + "]");
  }

  Vector smooth_field(const bec::Grid2D& g, std::mt19937_64& rng) {
    const Vector c = normal_vector(rng, 6);
    Vector phi(static_cast<Eigen::Index>(g.dim()));
    for (std::size_t iy = 0; iy < g.nodes; ++iy)
      for (std::size_t ix = 0; ix < g.nodes; ++ix) {
        const double x = g.coord(ix), y = g.coord(iy), env = std::exp(-0.25 * (x * x + y * y));
        const auto p = static_cast<Eigen::Index>(g.pair(ix, iy));
        phi[2 * p] = env * (c[0] + c[1] * x + c[2] * y);
        phi[2 * p + 1] = env * (c[3] + c[4] * x * y + c[5] * y);
      }
    return bec::normalized(g, phi);
  }

  void ac2(Verdict& v) {
    for (std::size_t n : {5u, 7u}) {
      const thomson::Problem p(n);
      const thomson::Chart c(n);
      derivative_checks(v, "Thomson" + std::to_string(n), p, c,
                        [n](std::mt19937_64& r) { return thomson::gauge_fix(normal_vector(r, 3 * n)); }, 2e-2);
    }
    const bec::Grid2D grid(8.0, 64);
    const bec::Problem p(grid, 300.0);
    const SphereChart chart = bec::make_chart(grid);
    derivative_checks(v, "BEC64", p, chart, [&](std::mt19937_64& r) { return smooth_field(grid, r); }, 2e-2);
  }

  void ac3(Verdict& v) {
    const LinearProblem height = LinearProblem::height();
    const SphereChart s(RealSpace(3));
    const Vector pole = Vector::Unit(3, 2);
    const double mu = 2.5;
    // Eigenvalues within the finite-difference noise of zero are not counted as having a sign.
    const double floor = 1e-4;
    const auto full = stability_spectrum(height, s, 2, pole, Frame{Vector::Unit(3, 0), Vector::Unit(3, 1)}, mu);
    double worst = -1e300;
    for (const auto& z : full) worst = std::max(worst, z.real());
    v.require(worst < -floor, "k=2 max Re=" + fmt(worst));
    const auto one = stability_spectrum(height, s, 1, pole, Frame{Vector::Unit(3, 0)}, mu);
    double best = -1e300;
    for (const auto& z : one) best = std::max(best, z.real());
    v.require(best > floor, "k=1 max Re=" + fmt(best));
    double pen = 1e300;
    for (const auto& z : full) pen = std::min(pen, std::abs(z - std::complex<double>(-mu, 0.0)));
    v.require(pen <= 1e-6, "penalty |lambda+mu|=" + fmt(pen));
    // Not part of the verdict: the same check where the two unstable eigenvalues differ (E = z + x^2/4).
    Matrix m = Matrix::Zero(3, 3);
    m(0, 0) = 0.5;
    const QuadraticProblem split(m, Vector::Unit(3, 2));
    double split_worst = -1e300;
    for (const auto& z : stability_spectrum(split, s, 2, pole, Frame{Vector::Unit(3, 1), Vector::Unit(3, 0)}, mu)) {
      split_worst = std::max(split_worst, z.real());
    }
    v.detail << "; info: with distinct eigenvalues (z + x^2/4) k=2 max Re=" << fmt(split_worst);
  }

  double ring(int n) {
    double s = 0;
    for (int k = 1; k < n; ++k) s += 1.0 / std::sin(std::numbers::pi * k / n);
    return 0.25 * n * s;
  }

  void ac4(Verdict& v) {
    // Closed forms: n-gon on a great circle; two poles plus an equatorial (n-2)-gon.
    const auto rd = [](int n) { return 0.5 + 2.0 * (n - 2) / std::sqrt(2.0) + ring(n - 2); };
    const struct {
      const char* name;
      double expected;
      double oracle;
      double library;
    } rows[] = {
        {"PP(5)", 6.881910, ring(5), thomson::energy(thomson::planar_polygon(5))},
        {"RD(5)", 6.474692, rd(5), thomson::energy(thomson::dipyramid(5))},
        {"RD(7)", 14.452978, rd(7), thomson::energy(thomson::dipyramid(7))},
    };
    for (const auto& r : rows) {
      v.require(std::abs(r.library - r.expected) <= 1e-5 && std::abs(r.oracle - r.expected) <= 1e-5,
                std::string(r.name) + "=" + std::to_string(r.library));
    }
  }

  void ac5(Verdict& v) {
    for (int n : {5, 7, 9}) {
      const thomson::Problem p(n);
      const thomson::Chart c(n);
      const int idx = classify(p, c, thomson::planar_polygon(n)).index;
      v.require(idx == n - 3, "idx PP(" + std::to_string(n) + ")=" + std::to_string(idx));
    }
    const thomson::Problem p(9);
    const thomson::Chart c(9);
    const Vector rd = thomson::dipyramid(9);
    const Classification cl = classify(p, c, rd);
    v.require(cl.index == 4, "idx RD(9)=" + std::to_string(cl.index));
    // Gradient descent off the dipyramid along its softest unstable direction.
    SearchConfig sc;
    sc.k = 0;
    sc.alpha = 1e-2;
    sc.hessian = HessianMode::analytic;
    sc.grad_tol = 1e-8;
    sc.max_iter = 2'000'000;
    const SearchOutcome out = run(p, c, sc, make_state(c, c.retract(rd, 1e-2 * cl.eigenvectors[0]), {}));
    bool ok = out.converged();
    double e = out.energy;
    int idx = -1;
    if (ok) idx = classify(p, c, out.state.x).index;
    v.require(ok && idx == 0 && e < p.energy(rd),
              "minimum by search E=" + std::to_string(e) + " idx=" + std::to_string(idx) + " < E(RD9)=" + std::to_string(p.energy(rd)));
  }

  void ac6(Verdict& v) {
    const thomson::Problem p(5);
    const thomson::Chart c(5);
    LandscapeConfig cfg;
    cfg.search.alpha = 1e-4;
    cfg.search.beta = 1e-3;
    cfg.search.hessian = HessianMode::analytic;
    cfg.search.max_iter = 4'000'000;
    const StationaryPoint seed = make_seed(p, c, thomson::planar_polygon(5), cfg);
    const Landscape land = downward_search(p, c, seed, cfg).landscape;
    std::vector<int> idx;
    for (const auto& s : land.solutions) idx.push_back(s.index);
    const bool shape = idx == std::vector<int>{2, 1, 0};
    v.require(shape, std::to_string(land.solutions.size()) + " solutions");
    if (shape) {
      v.require(std::abs(land.solutions[1].energy - thomson::energy(thomson::pyramid(5))) < 1e-6, "RP E=" + std::to_string(land.solutions[1].energy));
      v.require(std::abs(land.solutions[2].energy - thomson::energy(thomson::dipyramid(5))) < 1e-6, "RD E=" + std::to_string(land.solutions[2].energy));
      v.require(land.has_relation(0, 1) && land.has_relation(1, 2), "PP->RP->RD present");
    }
    bool decreasing = true;
    for (const auto& r : land.relations) decreasing = decreasing && land.at(r.parent).index > land.at(r.child).index;
    v.require(decreasing, std::to_string(land.relations.size()) + " relations, index decreasing");
    LandscapeConfig capped = cfg;
    capped.depth_cap = 1;
    const Landscape one = downward_search(p, c, seed, capped).landscape;
    v.require(one.solutions.size() == 3 && one.relations.size() == 2 && one.has_relation(0, 1) && one.has_relation(1, 2),
              "depth_cap=1: " + std::to_string(one.solutions.size()) + " solutions, " + std::to_string(one.relations.size()) + " relations");
  }

  SearchOutcome bec_descent(const bec::Problem& p, const SphereChart& chart, const Vector& x0, std::size_t k, double alpha,
                            double tol, const Frame& frame = {}) {
    SearchConfig sc;
    sc.k = k;
    sc.alpha = alpha;
    sc.beta = alpha;
    sc.hessian = HessianMode::analytic;
    sc.grad_tol = tol;
    sc.max_iter = 400000;
    return run(p, chart, sc, make_state(chart, x0, frame));
  }

  void ac7(Verdict& v) {
    const bec::Grid2D grid(8.0, 128);
    const bec::Problem p(grid, 0.0);
    const SphereChart chart = bec::make_chart(grid);
    const SearchOutcome g = bec_descent(p, chart, bec::gaussian(grid), 0, 2e-3, 1e-6);
    v.require(g.converged() && std::abs(g.energy - 1.0) <= 2e-3, "ground E=" + std::to_string(g.energy));
    // The vortex is an index-2 point at beta=0: both phases of the ground state lie below it.
    const Vector vx = bec::vortex(grid, 1);
    const Vector ground = g.state.x;
    Vector ig(ground.size());
    for (Eigen::Index i = 0; i < ground.size(); i += 2) {
      ig[i] = -ground[i + 1];
      ig[i + 1] = ground[i];
    }
    const SearchOutcome w = bec_descent(p, chart, vx, 2, 2e-3, 1e-6, Frame{ground, ig});
    const auto vort = w.converged() ? bec::find_vortices(grid, w.state.x) : std::vector<bec::Vortex>{};
    v.require(w.converged() && std::abs(w.energy - 2.0) <= 5e-3 && vort.size() == 1,
              "vortex E=" + std::to_string(w.energy) + " vortices=" + std::to_string(vort.size()));
    v.require(std::abs(p.energy(vx) - 2.0) <= 5e-3, "vortex ansatz E=" + std::to_string(p.energy(vx)));
  }

  void ac8(Verdict& v) {
    const bec::Grid2D grid(8.0, 64);
    const double beta = 300.0;
    const bec::Problem p(grid, beta);
    const SphereChart chart = bec::make_chart(grid);
    const SearchOutcome g = bec_descent(p, chart, bec::thomas_fermi(grid, beta), 0, 2e-3, 1e-5);
    v.require(g.converged(), "0-CHiSD converged in " + std::to_string(g.iterations) + " steps, |grad|=" + fmt(g.grad_norm));
    const Vector& phi = g.state.x;
    double q = 0;
    for (Eigen::Index i = 0; i < phi.size(); i += 2) {
      const double r = phi[i] * phi[i] + phi[i + 1] * phi[i + 1];
      q += r * r;
    }
    q *= grid.h() * grid.h();
    const double mu = p.chemical_potential(phi);
    const double e = p.energy(phi);
    v.require(std::abs(mu - (e + 0.5 * beta * q)) <= 1e-8, "mu identity err=" + fmt(std::abs(mu - (e + 0.5 * beta * q))));
    const double tf = std::sqrt(beta / std::numbers::pi);
    v.require(std::abs(mu - tf) <= 0.05 * tf, "mu=" + std::to_string(mu) + " vs TF " + std::to_string(tf));
    const Classification c = classify(p, chart, phi);
    v.require(c.index == 0 && c.n_zero == 1, "index=" + std::to_string(c.index) + " n_zero=" + std::to_string(c.n_zero));
  }

  void ac9(Verdict& v) {
    const fs::path out = workdir() / "bec_upward";
    fs::remove_all(out);
    const fs::path conf = workdir() / "bec_upward.conf";
    std::ofstream(conf) << "problem = bec\nmode = upward\noutput_dir = " << out.string()
                        << "\nseed = 1\n\n[bec]\nN = 64\nM = 8\nbeta = 300\n\n[landscape]\nK_max = 4\n";
    std::ostringstream err;
    const int code = experiment::run_experiment(conf, {}, err);
    v.require(code == 0, "exit " + std::to_string(code) + (err.str().empty() ? "" : " " + err.str()));
    if (code != 0) return;
    const auto rep = nlohmann::json::parse(slurp(out / "report.json"));
    const auto land = nlohmann::json::parse(slurp(out / "landscape.json"));
    std::map<long, nlohmann::json> by_id;
    for (const auto& s : rep.at("states")) by_id[s.at("id").get<long>()] = s;
    std::set<std::pair<long, long>> rel;
    for (const auto& r : land.at("relations")) rel.insert({r.at(0).get<long>(), r.at(1).get<long>()});
    auto find = [&](int index, long child_of) -> long {
      for (const auto& [id, s] : by_id) {
        if (s.at("index").get<int>() == index && (child_of < 0 || rel.count({id, child_of}))) return id;
      }
      return -1;
    };
    const long g = find(0, -1);
    v.require(g >= 0 && by_id[g].at("n_zero").get<int>() == 1, "ground n_zero=1");
    if (g < 0) return;
    const long s2 = find(2, g);
    v.require(s2 >= 0, "0->2 link");
    if (s2 < 0) return;
    const auto& a = by_id[s2];
    v.require(a.at("n_zero").get<int>() == 1 && a.at("central_density_ratio").get<double>() < 0.01,
              "2-saddle n_zero=" + std::to_string(a.at("n_zero").get<int>()) + " centre ratio=" + fmt(a.at("central_density_ratio").get<double>()));
    const long s3 = find(3, s2);
    v.require(s3 >= 0, "2->3 link");
    if (s3 < 0) return;
    const auto& b = by_id[s3];
    v.require(b.at("n_zero").get<int>() == 2 && b.at("vortex_count").get<int>() == 2,
              "3-saddle n_zero=" + std::to_string(b.at("n_zero").get<int>()) + " vortices=" + std::to_string(b.at("vortex_count").get<int>()));
    const long s4 = find(4, s3);
    std::string found;
    for (const auto& [id, s] : by_id) {
      if (rel.count({id, s3})) {
        found += " " + std::to_string(s.at("index").get<int>()) + "-saddle/" + std::to_string(s.at("vortex_count").get<int>()) + "v";
      }
    }
    v.require(s4 >= 0, "3->4 link (parents of the 3-saddle:" + (found.empty() ? std::string(" none") : found) + ")");
  }

  void ac10(Verdict& v) {
    const fs::path conf = workdir() / "determinism.conf";
    std::ofstream(conf) << "problem = thomson\nmode = downward\nseed = 9\nparallelism = 1\n[thomson]\nN = 5\n";
    std::string first;
    for (int rep = 0; rep < 2; ++rep) {
      experiment::Overrides ov;
      ov.output = workdir() / ("det" + std::to_string(rep));
      std::ostringstream err;
      const int code = experiment::run_experiment(conf, ov, err);
      v.require(code == 0, "run " + std::to_string(rep) + " exit " + std::to_string(code));
      const std::string text = slurp(*ov.output / "landscape.json");
      if (rep == 0) first = text;
      else v.require(!text.empty() && text == first, "byte-identical landscape.json (" + std::to_string(text.size()) + " bytes)");
    }
  }

}  // namespace

int main(int argc, char** argv) {
  set_log_level(LogLevel::warn);
  const std::vector<std::pair<std::string, std::function<void(Verdict&)>>> criteria = {
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
      {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}, {"AC10", ac10}};
  std::set<std::string> only(argv + 1, argv + argc);
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    if (!only.empty() && !only.count(name)) continue;
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << name << " " << (v.pass ? "PASS" : "FAIL") << " (" << std::fixed << std::setprecision(1) << secs << " s) "
              << v.detail.str() << std::endl;
    std::cout.unsetf(std::ios::fixed);
    failed += v.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
