#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "chisd/landscape.hpp"
#include "json.hpp"

namespace chisd {

  namespace {

    using json = nlohmann::ordered_json;

    json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

    std::string field_ref(const std::string& pattern, long id) {
      std::string out = pattern;
      const std::string key = "{id}";
      const auto pos = out.find(key);
      if (pos != std::string::npos) {
        out.replace(pos, key.size(), std::to_string(id));
      }
      return out;
    }

    std::string format_energy(double e) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.6f", e);
      return buf;
    }

  }  // namespace

  std::string to_json(const Landscape& landscape, const std::string& problem_name, const JsonOptions& options) {
    json doc;
    doc["problem"] = problem_name;
    json sols = json::array();
    for (const StationaryPoint& s : landscape.solutions) {
      json j;
      j["id"] = s.id;
      j["energy"] = number(s.energy);
      j["index"] = s.index;
      j["n_zero"] = s.n_zero;
      j["grad_norm"] = number(s.grad_norm);
      json spec = json::array();
      for (double l : s.spectrum) spec.push_back(number(l));
      j["spectrum"] = std::move(spec);
      j["provenance"] = {{"parent", s.provenance.parent},
                         {"direction", s.provenance.direction},
                         {"sign", s.provenance.sign},
                         {"target", s.provenance.target}};
      j["near_miss_of"] = s.near_miss_of >= 0 ? json(s.near_miss_of) : json(nullptr);
      if (options.embed_coordinates) {
        json c = json::array();
        for (Eigen::Index i = 0; i < s.x.size(); ++i) c.push_back(s.x[i]);
        j["coordinates"] = std::move(c);
      } else {
        j["field"] = field_ref(options.field_pattern, s.id);
      }
      sols.push_back(std::move(j));
    }
    doc["solutions"] = std::move(sols);
    json rel = json::array();
    for (const Relation& r : landscape.relations) rel.push_back(json::array({r.parent, r.child}));
    doc["relations"] = std::move(rel);
    return doc.dump(2) + "\n";
  }

  std::string launches_json(const std::vector<LaunchRecord>& launches) {
    json arr = json::array();
    for (const LaunchRecord& l : launches) {
      arr.push_back({{"source", l.source},
                     {"target", l.target},
                     {"direction", l.direction},
                     {"sign", l.sign},
                     {"status", std::string(to_string(l.status))},
                     {"iterations", l.iterations},
                     {"energy", number(l.energy)},
                     {"result", l.result >= 0 ? json(l.result) : json(nullptr)},
                     {"inserted", l.inserted},
                     {"note", l.note}});
    }
    return arr.dump(2) + "\n";
  }

  Landscape landscape_from_json(const std::string& text) {
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::exception& e) {
      throw IoError(std::string("landscape JSON: ") + e.what());
    }
    Landscape out;
    try {
      for (const json& j : doc.at("solutions")) {
        StationaryPoint s;
        s.id = j.at("id").get<long>();
        s.energy = j.at("energy").is_null() ? NAN : j.at("energy").get<double>();
        s.index = j.at("index").get<int>();
        s.n_zero = j.at("n_zero").get<int>();
        s.grad_norm = j.at("grad_norm").is_null() ? NAN : j.at("grad_norm").get<double>();
        for (const json& l : j.at("spectrum")) s.spectrum.push_back(l.is_null() ? NAN : l.get<double>());
        const json& p = j.at("provenance");
        s.provenance = {p.at("parent").get<long>(), p.at("direction").get<int>(), p.at("sign").get<int>(), p.at("target").get<int>()};
        if (!j.at("near_miss_of").is_null()) s.near_miss_of = j.at("near_miss_of").get<long>();
        if (j.contains("coordinates")) {
          const auto c = j.at("coordinates").get<std::vector<double>>();
          s.x = Eigen::Map<const Vector>(c.data(), static_cast<Eigen::Index>(c.size()));
        }
        if (s.id != static_cast<long>(out.solutions.size())) {
          throw IoError("landscape JSON: solution ids must be 0, 1, 2, ... in order");
        }
        out.solutions.push_back(std::move(s));
      }
      for (const json& r : doc.at("relations")) {
        const long p = r.at(0).get<long>();
        const long c = r.at(1).get<long>();
        out.at(p);
        out.at(c);
        out.relations.push_back({p, c});
      }
    } catch (const json::exception& e) {
      throw IoError(std::string("landscape JSON: ") + e.what());
    } catch (const DomainError& e) {
      throw IoError(std::string("landscape JSON: relation endpoint missing: ") + e.what());
    }
    return out;
  }

  std::string to_dot(const Landscape& landscape) {
    std::ostringstream os;
    os << "digraph landscape {\n  rankdir=TB;\n  node [shape=box];\n";
    std::map<int, std::vector<long>, std::greater<>> ranks;
    for (const StationaryPoint& s : landscape.solutions) {
      ranks[s.index].push_back(s.id);
    }
    for (const StationaryPoint& s : landscape.solutions) {
      os << "  n" << s.id << " [label=\"" << s.id << " idx=" << s.index << " E=" << format_energy(s.energy) << "\"];\n";
    }
    for (const auto& [index, ids] : ranks) {
      os << "  { rank=same;";
      for (long id : ids) os << " n" << id << ";";
      os << " }\n";
    }
    // Invisible spine between index levels so unconnected levels still stack by index.
    long prev = -1;
    for (const auto& [index, ids] : ranks) {
      if (prev >= 0) os << "  n" << prev << " -> n" << ids.front() << " [style=invis];\n";
      prev = ids.front();
    }
    for (const Relation& r : landscape.relations) {
      os << "  n" << r.parent << " -> n" << r.child << ";\n";
    }
    os << "}\n";
    return os.str();
  }

}  // namespace chisd
