#include "chisd/experiment/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace chisd::experiment {

  namespace {

    std::string trim(std::string_view s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string_view::npos) return {};
      const auto e = s.find_last_not_of(" \t\r");
      return std::string(s.substr(b, e - b + 1));
    }

    double to_double(const std::string& key, const std::string& v) {
      double out = 0.0;
      const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
      if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out)) {
        throw ConfigError(key, "expected a real number, got '" + v + "'");
      }
      return out;
    }

    long long to_int(const std::string& key, const std::string& v) {
      long long out = 0;
      const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
      if (ec != std::errc() || p != v.data() + v.size()) {
        // Accept integral values written in exponent form, e.g. 1e6.
        const double d = to_double(key, v);
        if (d != std::floor(d) || std::abs(d) > 9e15) {
          throw ConfigError(key, "expected an integer, got '" + v + "'");
        }
        return static_cast<long long>(d);
      }
      return out;
    }

    double positive(const std::string& key, const std::string& v) {
      const double d = to_double(key, v);
      if (!(d > 0.0)) throw ConfigError(key, "must be positive, got '" + v + "'");
      return d;
    }

    double non_negative(const std::string& key, const std::string& v) {
      const double d = to_double(key, v);
      if (!(d >= 0.0)) throw ConfigError(key, "must be non-negative, got '" + v + "'");
      return d;
    }

    long long at_least(const std::string& key, const std::string& v, long long lo) {
      const long long i = to_int(key, v);
      if (i < lo) throw ConfigError(key, "must be at least " + std::to_string(lo) + ", got '" + v + "'");
      return i;
    }

    std::string choice(const std::string& key, const std::string& v, std::initializer_list<const char*> options) {
      for (const char* o : options) {
        if (v == o) return v;
      }
      std::string list;
      for (const char* o : options) list += (list.empty() ? "" : "|") + std::string(o);
      throw ConfigError(key, "expected one of " + list + ", got '" + v + "'");
    }

    std::vector<double> to_list(const std::string& key, const std::string& v) {
      std::vector<double> out;
      std::stringstream ss(v);
      std::string item;
      while (std::getline(ss, item, ',')) {
        out.push_back(to_double(key, trim(item)));
      }
      if (out.empty()) throw ConfigError(key, "expected a comma-separated list of reals");
      return out;
    }

    using Setter = void (*)(RunConfig&, const std::string& key, const std::string& value);

    struct Entry {
      const char* key;
      Setter set;
    };

    // Problem-dependent defaults are filled in before the file's values are applied.
    const Entry kSchema[] = {
        {"mode", [](RunConfig& c, const std::string& k, const std::string& v) {
           const std::string m = choice(k, v, {"single", "downward", "upward"});
           c.mode = m == "single" ? Mode::single : m == "downward" ? Mode::downward : Mode::upward;
         }},
        {"output_dir", [](RunConfig& c, const std::string& k, const std::string& v) {
           if (v.empty()) throw ConfigError(k, "must not be empty");
           c.output_dir = v;
         }},
        {"seed", [](RunConfig& c, const std::string& k, const std::string& v) { c.seed = static_cast<std::uint64_t>(at_least(k, v, 0)); }},
        {"parallelism", [](RunConfig& c, const std::string& k, const std::string& v) { c.parallelism = static_cast<std::size_t>(at_least(k, v, 1)); }},

        {"search.alpha", [](RunConfig& c, const std::string& k, const std::string& v) { c.landscape.search.alpha = positive(k, v); }},
        {"search.beta", [](RunConfig& c, const std::string& k, const std::string& v) { c.landscape.search.beta = positive(k, v); }},
        {"search.dimer_length", [](RunConfig& c, const std::string& k, const std::string& v) {
           c.landscape.search.dimer_length = positive(k, v);
           c.landscape.classify.dimer_length = c.landscape.search.dimer_length;
         }},
        {"search.grad_tol", [](RunConfig& c, const std::string& k, const std::string& v) { c.landscape.search.grad_tol = positive(k, v); }},
        {"search.max_iter", [](RunConfig& c, const std::string& k, const std::string& v) { c.landscape.search.max_iter = static_cast<long>(at_least(k, v, 1)); }},
        {"search.hessian", [](RunConfig& c, const std::string& k, const std::string& v) {
           c.landscape.search.hessian = parse_hessian_mode(choice(k, v, {"dimer", "analytic"}));
         }},
        {"search.v_repeats", [](RunConfig& c, const std::string& k, const std::string& v) { c.landscape.search.v_repeats = static_cast<int>(at_least(k, v, 1)); }},
        {"search.retraction", [](RunConfig& c, const std::string& k, const std::string& v) {
           c.retraction = parse_retraction(choice(k, v, {"exponential", "normalization"}));
         }},
        {"search.transport", [](RunConfig& c, const std::string& k, const std::string& v) {
           c.transport = parse_transport(choice(k, v, {"parallel", "differentiated", "projection"}));
         }},
        {"search.divergence_energy", [](RunConfig& c, const std::string& k, const std::string& v) { c.landscape.search.divergence_energy = positive(k, v); }},
        {"search.trace_every", [](RunConfig& c, const std::string& k, const std::string& v) { c.landscape.search.trace_every = static_cast<long>(at_least(k, v, 0)); }},

        {"landscape.eps", [](RunConfig& c, const std::string& k, const std::string& v) { c.landscape.eps = positive(k, v); }},
        {"landscape.depth_cap", [](RunConfig& c, const std::string& k, const std::string& v) { c.landscape.depth_cap = static_cast<int>(at_least(k, v, -1)); }},
        {"landscape.K_max", [](RunConfig& c, const std::string& k, const std::string& v) { c.landscape.max_index = static_cast<int>(at_least(k, v, 0)); }},
        {"landscape.up_offset", [](RunConfig& c, const std::string& k, const std::string& v) { c.landscape.up_offset = static_cast<int>(to_int(k, v)); }},
        {"landscape.up_extra", [](RunConfig& c, const std::string& k, const std::string& v) { c.landscape.up_extra = static_cast<int>(at_least(k, v, 0)); }},
        {"landscape.max_solutions", [](RunConfig& c, const std::string& k, const std::string& v) { c.landscape.max_solutions = static_cast<std::size_t>(at_least(k, v, 1)); }},

        {"classify.hessian", [](RunConfig& c, const std::string& k, const std::string& v) {
           c.landscape.classify.hessian = parse_hessian_mode(choice(k, v, {"dimer", "analytic"}));
         }},
        {"classify.zero_rel", [](RunConfig& c, const std::string& k, const std::string& v) { c.landscape.classify.zero_rel = positive(k, v); }},
        {"classify.tol", [](RunConfig& c, const std::string& k, const std::string& v) { c.landscape.classify.eigen.tol = positive(k, v); }},
        {"classify.max_matvecs", [](RunConfig& c, const std::string& k, const std::string& v) { c.landscape.classify.eigen.max_matvecs = static_cast<std::size_t>(at_least(k, v, 1)); }},
        {"classify.degree", [](RunConfig& c, const std::string& k, const std::string& v) { c.landscape.classify.eigen.degree = static_cast<int>(at_least(k, v, 1)); }},
        {"classify.initial_K", [](RunConfig& c, const std::string& k, const std::string& v) { c.landscape.classify.initial_K = static_cast<std::size_t>(at_least(k, v, 1)); }},

        {"dedup.energy_rel", [](RunConfig& c, const std::string& k, const std::string& v) { c.landscape.dedup.energy_rel = non_negative(k, v); }},
        {"dedup.distance", [](RunConfig& c, const std::string& k, const std::string& v) { c.landscape.dedup.distance = non_negative(k, v); }},
        {"dedup.near_miss_distance", [](RunConfig& c, const std::string& k, const std::string& v) { c.landscape.dedup.near_miss_distance = non_negative(k, v); }},

        {"thomson.N", [](RunConfig& c, const std::string& k, const std::string& v) {
           const long long n = at_least(k, v, 3);
           if (n > 50) throw ConfigError(k, "N above 50 is not supported");
           c.thomson.n = static_cast<std::size_t>(n);
         }},
        {"thomson.seed_config", [](RunConfig& c, const std::string& k, const std::string& v) { c.thomson.seed_config = choice(k, v, {"pp", "rd", "rp", "file"}); }},
        {"thomson.seed_file", [](RunConfig& c, const std::string&, const std::string& v) { c.thomson.seed_file = v; }},

        {"bec.beta", [](RunConfig& c, const std::string& k, const std::string& v) { c.bec.beta = non_negative(k, v); }},
        {"bec.M", [](RunConfig& c, const std::string& k, const std::string& v) { c.bec.half_width = positive(k, v); }},
        {"bec.N", [](RunConfig& c, const std::string& k, const std::string& v) {
           const long long n = at_least(k, v, 4);
           if (n > 4096) throw ConfigError(k, "grid above 4096 nodes per side is not supported");
           c.bec.nodes = static_cast<std::size_t>(n);
         }},
        {"bec.seed_state", [](RunConfig& c, const std::string& k, const std::string& v) {
           c.bec.seed_state = choice(k, v, {"ground", "tf", "gaussian", "vortex", "file"});
         }},
        {"bec.seed_file", [](RunConfig& c, const std::string&, const std::string& v) { c.bec.seed_file = v; }},
        {"bec.ground_max_iter", [](RunConfig& c, const std::string& k, const std::string& v) { c.bec.ground_max_iter = static_cast<long>(at_least(k, v, 1)); }},
        {"bec.vortex_floor", [](RunConfig& c, const std::string& k, const std::string& v) { c.bec.vortex_floor = positive(k, v); }},

        {"sphere.dim", [](RunConfig& c, const std::string& k, const std::string& v) { c.sphere.dim = static_cast<std::size_t>(at_least(k, v, 2)); }},
        {"sphere.anisotropy", [](RunConfig& c, const std::string& k, const std::string& v) { c.sphere.anisotropy = to_double(k, v); }},
        {"sphere.seed_point", [](RunConfig& c, const std::string& k, const std::string& v) { c.sphere.seed_point = to_list(k, v); }},

        {"single.k", [](RunConfig& c, const std::string& k, const std::string& v) { c.single.k = static_cast<std::size_t>(at_least(k, v, 0)); }},
        {"single.perturb", [](RunConfig& c, const std::string& k, const std::string& v) { c.single.perturb = non_negative(k, v); }},
    };

    std::map<std::string, std::string> defaults_for(ProblemKind p) {
      std::map<std::string, std::string> d = {
          {"output_dir", "chisd_out"},
          {"seed", "1"},
          {"parallelism", "1"},
          {"search.max_iter", "1000000"},
          {"search.v_repeats", "1"},
          {"search.retraction", "exponential"},
          {"search.transport", "parallel"},
          {"search.divergence_energy", "1e8"},
          {"search.trace_every", "0"},
          {"landscape.depth_cap", "-1"},
          {"landscape.K_max", "4"},
          {"landscape.up_offset", "0"},
          {"landscape.up_extra", "0"},
          {"landscape.max_solutions", "500"},
          {"classify.zero_rel", "1e-4"},
          {"classify.tol", "1e-6"},
          {"classify.max_matvecs", "400000"},
          {"classify.degree", "10"},
          {"classify.initial_K", "4"},
          {"dedup.energy_rel", "1e-6"},
          {"dedup.distance", "1e-4"},
          {"dedup.near_miss_distance", "1e-2"},
          {"single.k", "1"},
          {"single.perturb", "0"},
      };
      switch (p) {
        case ProblemKind::thomson:
          d.insert({{"mode", "downward"}, {"search.alpha", "1e-4"}, {"search.beta", "1e-3"}, {"search.dimer_length", "1e-3"},
                    {"search.grad_tol", "1e-8"}, {"search.hessian", "analytic"}, {"classify.hessian", "analytic"},
                    {"landscape.eps", "1e-2"}, {"thomson.N", "5"}, {"thomson.seed_config", "pp"}, {"thomson.seed_file", ""}});
          // Slowest mode at the N=5 pyramid contracts by about 1.3e-5 per step at alpha=1e-4.
          d["search.max_iter"] = "4000000";
          break;
        case ProblemKind::bec:
          d.insert({{"mode", "upward"}, {"search.alpha", "5e-3"}, {"search.beta", "5e-3"}, {"search.dimer_length", "1e-4"},
                    {"search.grad_tol", "1e-5"}, {"search.hessian", "dimer"}, {"classify.hessian", "analytic"},
                    {"landscape.eps", "0.1"}, {"bec.beta", "300"}, {"bec.M", "8"}, {"bec.N", "64"}, {"bec.seed_state", "ground"},
                    {"bec.seed_file", ""}, {"bec.ground_max_iter", "200000"}, {"bec.vortex_floor", "1e-2"}});
          break;
        case ProblemKind::sphere:
          d.insert({{"mode", "downward"}, {"search.alpha", "1e-2"}, {"search.beta", "1e-2"}, {"search.dimer_length", "1e-3"},
                    {"search.grad_tol", "1e-8"}, {"search.hessian", "analytic"}, {"classify.hessian", "analytic"},
                    {"landscape.eps", "1e-2"}, {"sphere.dim", "3"}, {"sphere.anisotropy", "0"}, {"sphere.seed_point", "0,0,1"}});
          break;
      }
      return d;
    }

    std::string section_of(const std::string& key) {
      const auto dot = key.find('.');
      return dot == std::string::npos ? std::string() : key.substr(0, dot);
    }

  }  // namespace

  RawConfig parse_config(const std::string& text, const std::string& source) {
    RawConfig out;
    out.source = source;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::string t = trim(line);
      const std::string where = source + ":" + std::to_string(lineno);
      if (t.empty() || t[0] == '#' || t[0] == ';') continue;
      if (t.front() == '[') {
        if (t.back() != ']') throw ConfigError(where, "unterminated section header");
        section = trim(std::string_view(t).substr(1, t.size() - 2));
        if (section.empty()) throw ConfigError(where, "empty section name");
        continue;
      }
      const auto eq = t.find('=');
      if (eq == std::string::npos) throw ConfigError(where, "expected key = value");
      std::string key = trim(std::string_view(t).substr(0, eq));
      std::string value = trim(std::string_view(t).substr(eq + 1));
      const auto hash = value.find(" #");
      if (hash != std::string::npos) value = trim(value.substr(0, hash));
      if (key.empty()) throw ConfigError(where, "empty key");
      const std::string full = section.empty() ? key : section + "." + key;
      if (!out.values.emplace(full, value).second) throw ConfigError(full, "duplicate key (" + where + ")");
    }
    return out;
  }

  RawConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string());
  }

  std::vector<std::string> schema_keys() {
    std::vector<std::string> keys = {"problem"};
    for (const Entry& e : kSchema) keys.emplace_back(e.key);
    return keys;
  }

  void apply_env_overrides(RawConfig& config, const std::function<const char*(const char*)>& getenv_fn) {
    for (const std::string& key : schema_keys()) {
      std::string var = kEnvPrefix;
      for (char ch : key) var.push_back(ch == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
      if (const char* v = getenv_fn(var.c_str())) {
        config.values[key] = trim(v);
      }
    }
  }

  RunConfig validate(const RawConfig& raw) {
    const auto p = raw.values.find("problem");
    if (p == raw.values.end()) throw ConfigError("problem", "required key is missing");
    const std::string pk = choice("problem", p->second, {"thomson", "bec", "sphere"});
    RunConfig cfg;
    cfg.problem = pk == "thomson" ? ProblemKind::thomson : pk == "bec" ? ProblemKind::bec : ProblemKind::sphere;

    // Keys of another problem's section are rejected rather than ignored.
    const std::vector<std::string> foreign = cfg.problem == ProblemKind::thomson ? std::vector<std::string>{"bec", "sphere"}
                                             : cfg.problem == ProblemKind::bec   ? std::vector<std::string>{"thomson", "sphere"}
                                                                                 : std::vector<std::string>{"thomson", "bec"};
    std::map<std::string, std::string> merged = defaults_for(cfg.problem);
    for (const auto& [k, v] : raw.values) {
      if (k == "problem") continue;
      const bool known = std::any_of(std::begin(kSchema), std::end(kSchema), [&](const Entry& e) { return k == e.key; });
      if (!known) throw ConfigError(k, "unknown key");
      if (std::find(foreign.begin(), foreign.end(), section_of(k)) != foreign.end()) {
        throw ConfigError(k, "does not apply to problem '" + pk + "'");
      }
      merged[k] = v;
    }
    for (const Entry& e : kSchema) {
      const auto it = merged.find(e.key);
      if (it == merged.end()) continue;
      e.set(cfg, e.key, it->second);
    }
    if (cfg.transport == TransportKind::parallel && cfg.retraction != RetractionKind::exponential) {
      throw ConfigError("search.transport", "parallel transport requires the exponential retraction");
    }
    if (cfg.transport == TransportKind::differentiated && cfg.retraction != RetractionKind::normalization) {
      throw ConfigError("search.transport", "differentiated transport requires the normalization retraction");
    }
    if (cfg.problem == ProblemKind::thomson && cfg.thomson.seed_config == "file" && cfg.thomson.seed_file.empty()) {
      throw ConfigError("thomson.seed_file", "required when seed_config = file");
    }
    if (cfg.problem == ProblemKind::bec && cfg.bec.seed_state == "file" && cfg.bec.seed_file.empty()) {
      throw ConfigError("bec.seed_file", "required when seed_state = file");
    }
    if (cfg.problem == ProblemKind::sphere && cfg.sphere.seed_point.size() != cfg.sphere.dim) {
      throw ConfigError("sphere.seed_point", "needs " + std::to_string(cfg.sphere.dim) + " coordinates");
    }
    cfg.landscape.classify.eigen.seed = cfg.seed;
    cfg.landscape.threads = cfg.parallelism;
    cfg.landscape.search.validate();
    cfg.resolved = merged;
    cfg.resolved["problem"] = pk;
    return cfg;
  }

}  // namespace chisd::experiment
