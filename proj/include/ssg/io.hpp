#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssg/collapse.hpp"
#include "ssg/errors.hpp"
#include "ssg/graph.hpp"
#include "ssg/linalg.hpp"
#include "ssg/machine.hpp"

namespace ssg {

struct Bounds {
  int nucleus_states = 10000;
  int nucleus_depth = 12;
  int tight_depth = 8;
  int oracle_depth = 6;
};

struct PresentationOptions {
  std::vector<long long> fields{0, 2, 3, 5};
  Bounds bounds;
};

struct Presentation {
  GraphSpec graph;
  std::vector<GeneratorRule> generators;
  PresentationOptions options;
};

namespace io_detail {

using json = nlohmann::json;

inline std::string type_name(const json& j) {
  if (j.is_null()) return "null";
  if (j.is_boolean()) return "boolean";
  if (j.is_number()) return "number";
  if (j.is_string()) return "string";
  if (j.is_array()) return "array";
  if (j.is_object()) return "object";
  return "value";
}

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw input_error(path + ": " + what);
}

inline const json& member(const json& j, const std::string& path, const std::string& key) {
  if (!j.is_object()) fail(path, "expected an object, got " + type_name(j));
  auto it = j.find(key);
  if (it == j.end()) fail(path + "." + key, "missing required field");
  return *it;
}

inline std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string, got " + type_name(j));
  return j.get<std::string>();
}

inline const json& get_array(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array, got " + type_name(j));
  return j;
}

inline long long get_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer, got " + type_name(j));
  return j.get<long long>();
}

}  // namespace io_detail

inline Presentation parse_presentation(const nlohmann::json& root) {
  using namespace io_detail;
  Presentation pres;

  const json& graph = member(root, "$", "graph");
  const json& verts = get_array(member(graph, "$.graph", "vertices"), "$.graph.vertices");
  for (std::size_t i = 0; i < verts.size(); ++i) {
    pres.graph.vertices.push_back(
        get_string(verts[i], "$.graph.vertices[" + std::to_string(i) + "]"));
  }
  const json& edges = get_array(member(graph, "$.graph", "edges"), "$.graph.edges");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string path = "$.graph.edges[" + std::to_string(i) + "]";
    const json& e = edges[i];
    GraphSpec::EdgeSpec es;
    es.id = get_string(member(e, path, "id"), path + ".id");
    es.src = get_string(member(e, path, "src"), path + ".src");
    es.rng = get_string(member(e, path, "rng"), path + ".rng");
    pres.graph.edges.push_back(std::move(es));
  }

  const json& gens = get_array(member(root, "$", "generators"), "$.generators");
  for (std::size_t i = 0; i < gens.size(); ++i) {
    const std::string gpath = "$.generators[" + std::to_string(i) + "]";
    const json& g = gens[i];
    GeneratorRule rule;
    rule.name = get_string(member(g, gpath, "name"), gpath + ".name");
    rule.dom = get_string(member(g, gpath, "dom"), gpath + ".dom");
    rule.im = get_string(member(g, gpath, "im"), gpath + ".im");
    const json& rules = get_array(member(g, gpath, "rules"), gpath + ".rules");
    for (std::size_t r = 0; r < rules.size(); ++r) {
      const std::string rpath = gpath + ".rules[" + std::to_string(r) + "]";
      const json& rj = rules[r];
      GeneratorRule::Rule one;
      one.edge = get_string(member(rj, rpath, "edge"), rpath + ".edge");
      one.image = get_string(member(rj, rpath, "image"), rpath + ".image");
      const json& word = get_array(member(rj, rpath, "restriction"), rpath + ".restriction");
      for (std::size_t t = 0; t < word.size(); ++t) {
        one.restriction.push_back(
            get_string(word[t], rpath + ".restriction[" + std::to_string(t) + "]"));
      }
      rule.rules.push_back(std::move(one));
    }
    pres.generators.push_back(std::move(rule));
  }

  if (root.contains("options")) {
    const json& opt = root.at("options");
    if (!opt.is_object()) fail("$.options", "expected an object, got " + type_name(opt));
    if (opt.contains("fields")) {
      const json& fields = get_array(opt.at("fields"), "$.options.fields");
      pres.options.fields.clear();
      for (std::size_t i = 0; i < fields.size(); ++i) {
        const std::string fpath = "$.options.fields[" + std::to_string(i) + "]";
        long long p = get_int(fields[i], fpath);
        if (p != 0 && !is_prime(p)) fail(fpath, "characteristic must be 0 or a prime");
        pres.options.fields.push_back(p);
      }
      if (pres.options.fields.empty()) fail("$.options.fields", "at least one field is required");
    }
    if (opt.contains("bounds")) {
      const json& b = opt.at("bounds");
      if (!b.is_object()) fail("$.options.bounds", "expected an object, got " + type_name(b));
      auto read_bound = [&](const char* key, int& slot) {
        if (!b.contains(key)) return;
        long long value = get_int(b.at(key), std::string("$.options.bounds.") + key);
        if (value <= 0) fail(std::string("$.options.bounds.") + key, "must be positive");
        slot = static_cast<int>(value);
      };
      read_bound("nucleus_states", pres.options.bounds.nucleus_states);
      read_bound("nucleus_depth", pres.options.bounds.nucleus_depth);
      read_bound("tight_depth", pres.options.bounds.tight_depth);
      read_bound("oracle_depth", pres.options.bounds.oracle_depth);
    }
  }
  return pres;
}

inline Presentation parse_presentation_text(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& err) {
    throw input_error(std::string("presentation is not valid JSON: ") + err.what());
  }
  return parse_presentation(root);
}

inline Presentation load_presentation_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open presentation file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_presentation_text(buf.str());
}

inline nlohmann::ordered_json presentation_to_json(const Presentation& pres) {
  nlohmann::ordered_json root;
  root["graph"]["vertices"] = pres.graph.vertices;
  root["graph"]["edges"] = nlohmann::ordered_json::array();
  for (const auto& e : pres.graph.edges) {
    root["graph"]["edges"].push_back({{"id", e.id}, {"src", e.src}, {"rng", e.rng}});
  }
  root["generators"] = nlohmann::ordered_json::array();
  for (const auto& g : pres.generators) {
    nlohmann::ordered_json gj;
    gj["name"] = g.name;
    gj["dom"] = g.dom;
    gj["im"] = g.im;
    gj["rules"] = nlohmann::ordered_json::array();
    for (const auto& r : g.rules) {
      gj["rules"].push_back(
          {{"edge", r.edge}, {"image", r.image}, {"restriction", r.restriction}});
    }
    root["generators"].push_back(std::move(gj));
  }
  root["options"]["fields"] = pres.options.fields;
  root["options"]["bounds"] = {{"nucleus_states", pres.options.bounds.nucleus_states},
                               {"nucleus_depth", pres.options.bounds.nucleus_depth},
                               {"tight_depth", pres.options.bounds.tight_depth},
                               {"oracle_depth", pres.options.bounds.oracle_depth}};
  return root;
}

// The collapsed system serialized in the same schema as an input file, so
// it can be fed back through the pipeline (round-trip).
inline Presentation collapsed_to_presentation(const CollapsedSystem& cs,
                                              const PresentationOptions& options) {
  Presentation pres;
  const Graph& lambda = cs.lambda;
  for (int v = 0; v < lambda.vertex_count(); ++v) {
    pres.graph.vertices.push_back(lambda.vertex_name(v));
  }
  for (int e = 0; e < lambda.edge_count(); ++e) {
    pres.graph.edges.push_back({lambda.edge_name(e), lambda.vertex_name(lambda.edge_src(e)),
                                lambda.vertex_name(lambda.edge_rng(e))});
  }
  pres.generators = cs.collapsed_rules;
  pres.options = options;
  return pres;
}

}  // namespace ssg
