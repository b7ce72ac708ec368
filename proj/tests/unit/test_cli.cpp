#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"

#include "chisd/experiment/config.hpp"
#include "chisd/experiment/experiment.hpp"

using namespace chisd;
using namespace chisd::experiment;

namespace fs = std::filesystem;

namespace {

  fs::path workdir() {
    const fs::path d = fs::temp_directory_path() / "chisd_test_cli";
    fs::create_directories(d);
    return d;
  }

  fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path p = workdir() / name;
    std::ofstream(p) << text;
    return p;
  }

  std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  // E = x^2 + z on S^2: index 2 at (sqrt3/2, 0, 1/2), index 1 at the north pole, minimum at the south pole.
  std::string sphere_config(const fs::path& out) {
    return "problem = sphere\nmode = downward\noutput_dir = " + out.string()
           + "\nseed = 4\n\n[sphere]\nanisotropy = 1\nseed_point = 0.8660254037844386, 0, 0.5\n";
  }

  std::string key_of(const std::string& text) {
    try {
      (void)validate(parse_config(text));
    } catch (const ConfigError& e) {
      return e.key();
    }
    return "";
  }

}  // namespace

TEST_CASE("config parsing") {
  const RawConfig raw = parse_config("problem = thomson  # inline\n; comment\n[search]\nalpha=2e-4\n\n[thomson]\nN = 7\n");
  CHECK(raw.values.at("problem") == "thomson");
  CHECK(raw.values.at("search.alpha") == "2e-4");
  CHECK(raw.values.at("thomson.N") == "7");
  CHECK_THROWS_AS(parse_config("problem = a\nproblem = b\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("just words\n"), ConfigError);
  const RunConfig cfg = validate(raw);
  CHECK(cfg.problem == ProblemKind::thomson);
  CHECK(cfg.thomson.n == 7);
  CHECK(cfg.landscape.search.alpha == 2e-4);
  CHECK(cfg.landscape.search.beta == 1e-3);
  CHECK(cfg.mode == Mode::downward);
}

TEST_CASE("validation errors name the offending key") {
  CHECK(key_of("mode = downward\n") == "problem");
  CHECK(key_of("problem = thomson\n[search]\nalpah = 1\n") == "search.alpah");
  CHECK(key_of("problem = thomson\n[search]\nalpha = -1\n") == "search.alpha");
  CHECK(key_of("problem = thomson\n[bec]\nbeta = 3\n") == "bec.beta");
  CHECK(key_of("problem = cube\n") == "problem");
  CHECK(key_of("problem = thomson\n[thomson]\nN = two\n") == "thomson.N");
  CHECK(key_of("problem = thomson\n[search]\nretraction = normalization\ntransport = parallel\n") != "");
  CHECK(key_of("problem = thomson\n[thomson]\nseed_config = file\n") == "thomson.seed_file");
  CHECK(key_of("problem = bec\n") == "");
}

TEST_CASE("environment overrides replace schema keys") {
  RawConfig raw = parse_config("problem = thomson\n[search]\nalpha = 1e-4\n");
  apply_env_overrides(raw, [](const char* name) -> const char* {
    if (std::string(name) == "CHISD_SEARCH_ALPHA") return "5e-4";
    if (std::string(name) == "CHISD_THOMSON_N") return "9";
    return nullptr;
  });
  const RunConfig cfg = validate(raw);
  CHECK(cfg.landscape.search.alpha == 5e-4);
  CHECK(cfg.thomson.n == 9);
}

TEST_CASE("run_experiment exit codes") {
  std::ostringstream err;
  CHECK(run_experiment(workdir() / "missing.conf", {}, err) == kExitValidation);
  std::ostringstream err2;
  CHECK(run_experiment(write_config("noproblem.conf", "mode = downward\n"), {}, err2) == kExitValidation);
  CHECK(err2.str().find("problem") != std::string::npos);
  std::ostringstream err3;
  const std::string bad = "problem = sphere\noutput_dir = " + (workdir() / "bad").string() + "\n[sphere]\nseed_point = 1,1,1\n";
  CHECK(run_experiment(write_config("bad.conf", bad), {}, err3) == kExitSolver);
  CHECK_FALSE(err3.str().empty());
}

TEST_CASE("sphere downward run writes a reproducible artifact set") {
  const fs::path out = workdir() / "sphere";
  fs::remove_all(out);
  const fs::path conf = write_config("sphere.conf", sphere_config(out));
  std::ostringstream err;
  REQUIRE(run_experiment(conf, {}, err) == kExitOk);
  for (const char* f : {"landscape.json", "landscape.dot", "launches.json", "manifest.json", "solutions/0.json"}) {
    CHECK(fs::exists(out / f));
  }
  const auto land = nlohmann::json::parse(slurp(out / "landscape.json"));
  std::vector<int> idx;
  for (const auto& s : land.at("solutions")) idx.push_back(s.at("index").get<int>());
  CHECK(idx == std::vector<int>{2, 1, 0});
  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(manifest.at("seed").get<int>() == 4);
  CHECK(manifest.at("version").get<std::string>() == CHISD_VERSION);
  CHECK(manifest.at("config").at("problem") == "sphere");
  CHECK(manifest.contains("wall_seconds"));

  const std::string first = slurp(out / "landscape.json");
  Overrides ov;
  ov.output = workdir() / "sphere2";
  ov.parallelism = 2;
  REQUIRE(run_experiment(conf, ov, err) == kExitOk);
  CHECK(slurp(*ov.output / "landscape.json") == first);

  std::ostringstream cls, cerr;
  REQUIRE(classify_solution(out / "solutions/0.json", cls, cerr) == kExitOk);
  const auto c = nlohmann::json::parse(cls.str());
  CHECK(c.at("index").get<int>() == 2);

  std::ostringstream dot, gerr;
  REQUIRE(emit_graph(out / "landscape.json", std::nullopt, dot, gerr) == kExitOk);
  CHECK(dot.str() == slurp(out / "landscape.dot"));
  CHECK(emit_graph(workdir() / "nope.json", std::nullopt, dot, gerr) == kExitValidation);
}

TEST_CASE("single mode finds one saddle of the requested index") {
  const fs::path out = workdir() / "single";
  const std::string text = "problem = sphere\nmode = single\noutput_dir = " + out.string()
                           + "\n[single]\nk = 1\nperturb = 0.05\n[sphere]\nanisotropy = 1\nseed_point = 0.1, 0.05, 1\n";
  std::ostringstream err;
  REQUIRE(run_experiment(write_config("single.conf", text), {}, err) == kExitOk);
  const auto land = nlohmann::json::parse(slurp(out / "landscape.json"));
  REQUIRE(land.at("solutions").size() == 1);
  CHECK(land.at("solutions")[0].at("index").get<int>() == 1);
}
