#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chisd/landscape.hpp"

/**
 * \file config.hpp
 *
 * @brief key = value experiment files with [section] headers, schema validation and environment overrides.
 *
 * Keys inside a section are addressed as "section.key"; keys before the first header are top-level. Lines whose
 * first non-blank character is '#' or ';' are comments.
 */

namespace chisd::experiment {

  /// A validation failure; key() names the offending entry.
  class ConfigError : public Error {
  public:
    ConfigError(std::string key, const std::string& message) : Error(key + ": " + message), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

  private:
    std::string key_;
  };

  /// Raw entries in file order of first appearance; later duplicates are an error.
  struct RawConfig {
    std::map<std::string, std::string> values;
    std::string source;
  };

  RawConfig parse_config(const std::string& text, const std::string& source = "<string>");
  RawConfig load_config(const std::filesystem::path& path);

  /// Environment override prefix: CHISD_SECTION_KEY (upper case, '.' -> '_') replaces section.key.
  inline constexpr const char* kEnvPrefix = "CHISD_";

  /// Applies overrides for every schema key; getenv is injectable for tests.
  void apply_env_overrides(RawConfig& config, const std::function<const char*(const char*)>& getenv_fn);

  enum class ProblemKind { thomson, bec, sphere };
  enum class Mode { single, downward, upward };

  struct ThomsonSettings {
    std::size_t n = 5;
    /// pp | rd | rp | file
    std::string seed_config = "pp";
    std::string seed_file;
  };

  struct BecSettings {
    double beta = 300.0;
    double half_width = 8.0;
    std::size_t nodes = 64;
    /// ground | tf | gaussian | vortex | file
    std::string seed_state = "ground";
    std::string seed_file;
    /// Budget of the 0-CHiSD that prepares the ground state.
    long ground_max_iter = 200'000;
    double vortex_floor = 1e-2;
  };

  struct SphereSettings {
    std::size_t dim = 3;
    /// E = z + anisotropy * x^2 on the unit sphere.
    double anisotropy = 0.0;
    std::vector<double> seed_point = {0.0, 0.0, 1.0};
  };

  struct SingleSettings {
    std::size_t k = 1;
    /// Size of the random tangent kick applied to the seed before the run.
    double perturb = 0.0;
  };

  struct RunConfig {
    ProblemKind problem = ProblemKind::thomson;
    Mode mode = Mode::downward;
    std::filesystem::path output_dir = "chisd_out";
    std::uint64_t seed = 1;
    std::size_t parallelism = 1;
    RetractionKind retraction = RetractionKind::exponential;
    TransportKind transport = TransportKind::parallel;
    LandscapeConfig landscape;
    ThomsonSettings thomson;
    BecSettings bec;
    SphereSettings sphere;
    SingleSettings single;
    /// Every schema key with its resolved value, for the manifest.
    std::map<std::string, std::string> resolved;
  };

  /// Checks every key against the schema (unknown keys are errors) and fills defaults.
  RunConfig validate(const RawConfig& raw);

  /// Names of all schema keys.
  std::vector<std::string> schema_keys();

}  // namespace chisd::experiment
