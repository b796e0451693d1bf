#pragma once

// Skeleton collapse. The working graph Λ keeps one representative
// vertex per orbit together with its out-edges, re-ranged to orbit
// representatives. Each generator g is replaced by its normalization
// n(g) = f_{im g} ∘ g ∘ f_{dom g}^-1, where f_v is the connector built
// from the orbit witness word. Because n is functorial (intermediate
// connectors cancel in products), the collapsed system is presented by
// honest wreath-recursion rules: restriction words are rewritten
// symbolically token by token, then re-normalized with witnesses at
// both ends. The result is therefore a plain presentation over Λ and
// loads into a fresh machine store.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ssg/errors.hpp"
#include "ssg/graph.hpp"
#include "ssg/machine.hpp"
#include "ssg/structure.hpp"

namespace ssg {

struct CollapseChoice {
  OrbitPartition partition;
};

inline CollapseChoice choose_collapse(const Graph& graph,
                                      const std::vector<GeneratorRule>& rules) {
  return CollapseChoice{orbit_partition(graph, rules)};
}

namespace detail {

inline std::vector<Token> invert_word(std::vector<Token> w) {
  std::reverse(w.begin(), w.end());
  for (auto& t : w) t.inv = !t.inv;
  return w;
}

inline std::string token_to_string(const std::vector<GeneratorRule>& rules, Token t) {
  return rules.at(t.gen).name + (t.inv ? "^-1" : "");
}

// Symbolic interpreter over the raw rules: computes the image edge and
// the restriction word of a token word along one edge, without ever
// touching a machine store.
class WordMachine {
 public:
  WordMachine(const Graph& graph, const std::vector<GeneratorRule>& rules) {
    std::map<std::string, int> by_name;
    for (std::size_t j = 0; j < rules.size(); ++j)
      by_name[rules[j].name] = static_cast<int>(j);
    fwd_.resize(rules.size());
    bwd_.resize(rules.size());
    for (std::size_t j = 0; j < rules.size(); ++j)
      for (const auto& r : rules[j].rules) {
        auto e = graph.find_edge(r.edge);
        auto img = graph.find_edge(r.image);
        if (!e || !img) throw input_error("rule references unknown edge");
        std::vector<Token> w;
        for (const auto& tok : r.restriction) {
          Token t;
          std::string base = tok;
          if (base.size() > 3 && base.substr(base.size() - 3) == "^-1") {
            t.inv = true;
            base = base.substr(0, base.size() - 3);
          }
          auto it = by_name.find(base);
          if (it == by_name.end())
            throw input_error("unknown restriction token '" + tok + "'");
          t.gen = it->second;
          w.push_back(t);
        }
        fwd_[j][*e] = {*img, w};
        bwd_[j][*img] = {*e, invert_word(w)};
      }
  }

  std::pair<int, std::vector<Token>> restrict_token(Token t, int e) const {
    const auto& table = t.inv ? bwd_[t.gen] : fwd_[t.gen];
    auto it = table.find(e);
    if (it == table.end())
      throw internal_error("token applied outside its domain during collapse");
    return it->second;
  }

  // w is in composition order (rightmost token acts first); returns
  // the image edge and the restriction word, also in composition order.
  std::pair<int, std::vector<Token>> restrict_word(const std::vector<Token>& w,
                                                   int e) const {
    std::vector<std::vector<Token>> pieces(w.size());
    int cur = e;
    for (std::size_t k = w.size(); k-- > 0;) {
      auto [img, piece] = restrict_token(w[k], cur);
      pieces[k] = std::move(piece);
      cur = img;
    }
    std::vector<Token> rest;
    for (auto& piece : pieces) rest.insert(rest.end(), piece.begin(), piece.end());
    return {cur, rest};
  }

 private:
  std::vector<std::map<int, std::pair<int, std::vector<Token>>>> fwd_, bwd_;
};

}  // namespace detail

struct CollapsedSystem {
  Graph lambda;
  MachineStore machine;  // loaded from collapsed_rules over lambda
  std::map<std::string, ElementRef> generators;
  CollapseChoice choice;
  std::vector<int> rep_vertex;  // lambda vertex -> original vertex
  std::vector<int> edge_orig;   // lambda edge -> original edge (same name)
  std::vector<GeneratorRule> collapsed_rules;
};

inline CollapsedSystem collapse(const Graph& graph, const std::vector<GeneratorRule>& rules,
                                const CollapseChoice& choice) {
  // Validates the presentation with the same checks a direct load runs.
  MachineStore::load_generators(graph, rules);
  const OrbitPartition& part = choice.partition;
  detail::WordMachine wm(graph, rules);

  GraphSpec lspec;
  for (std::size_t o = 0; o < part.orbits.size(); ++o)
    lspec.vertices.push_back(graph.vertex_name(part.rep[o]));
  for (std::size_t o = 0; o < part.orbits.size(); ++o) {
    int r = part.rep[o];
    for (int e : graph.out_edges(r)) {
      int target_rep = part.rep[part.orbit_of[graph.edge_rng(e)]];
      lspec.edges.push_back(
          {graph.edge_name(e), graph.vertex_name(r), graph.vertex_name(target_rep)});
    }
  }
  Graph lambda = validate_graph(lspec);

  auto renormalize = [&](const std::vector<Token>& w, int from_vertex,
                         int to_vertex) -> std::vector<Token> {
    // witness words are stored in action order; composition order is
    // their reverse, and connector inverses flip tokens in place.
    std::vector<Token> out;
    const auto& wit_to = part.witness_to_rep[to_vertex];
    out.insert(out.end(), wit_to.rbegin(), wit_to.rend());
    out.insert(out.end(), w.begin(), w.end());
    for (const Token& t : part.witness_to_rep[from_vertex])
      out.push_back(Token{t.gen, !t.inv});
    return out;
  };

  std::vector<GeneratorRule> collapsed;
  for (std::size_t j = 0; j < rules.size(); ++j) {
    int dv = *graph.find_vertex(rules[j].dom);
    int iv = *graph.find_vertex(rules[j].im);
    int dom_rep = part.rep[part.orbit_of[dv]];
    int im_rep = part.rep[part.orbit_of[iv]];
    std::vector<Token> total =
        renormalize({Token{static_cast<int>(j), false}}, dv, iv);
    GeneratorRule g;
    g.name = rules[j].name;
    g.dom = graph.vertex_name(dom_rep);
    g.im = graph.vertex_name(im_rep);
    for (int e : graph.out_edges(dom_rep)) {
      auto [img, rest] = wm.restrict_word(total, e);
      std::vector<Token> renorm =
          renormalize(rest, graph.edge_rng(e), graph.edge_rng(img));
      GeneratorRule::Rule rule;
      rule.edge = graph.edge_name(e);
      rule.image = graph.edge_name(img);
      for (const Token& t : renorm)
        rule.restriction.push_back(detail::token_to_string(rules, t));
      g.rules.push_back(std::move(rule));
    }
    collapsed.push_back(std::move(g));
  }

  auto [machine, gens] = MachineStore::load_generators(lambda, collapsed);
  CollapsedSystem cs{std::move(lambda), std::move(machine), std::move(gens),
                     choice,           {},                  {},
                     std::move(collapsed)};
  for (std::size_t o = 0; o < part.orbits.size(); ++o)
    cs.rep_vertex.push_back(part.rep[o]);
  cs.edge_orig.resize(cs.lambda.edge_count());
  for (int le = 0; le < cs.lambda.edge_count(); ++le)
    cs.edge_orig[le] = *graph.find_edge(cs.lambda.edge_name(le));
  return cs;
}

inline CollapsedSystem collapse(const Graph& graph,
                                const std::vector<GeneratorRule>& rules) {
  return collapse(graph, rules, choose_collapse(graph, rules));
}

// β sends a Γ-edge c with source u to the Λ-edge f_u(c). γ^-1 lifts a
// Λ-path back to the Γ-path from u obtained by pulling each step
// through the connector of the vertex reached so far.
inline Path lift_path(MachineStore& orig, const CollapseChoice& choice,
                      const CollapsedSystem& cs, int u, const Path& lambda_path) {
  Path out = anchor(u);
  int cur = u;
  for (int le : lambda_path.edges) {
    ElementRef f = connector_element(orig, choice.partition, cur);
    int d = orig.act_edge(orig.inverse(f), cs.edge_orig[le]).first;
    out.edges.push_back(d);
    cur = orig.graph().edge_rng(d);
  }
  return out;
}

inline Path project_path(MachineStore& orig, const CollapseChoice& choice,
                         const CollapsedSystem& cs, const Path& gamma_path) {
  const Graph& graph = orig.graph();
  int base_rep = choice.partition.rep[choice.partition.orbit_of[gamma_path.src()]];
  auto lv = cs.lambda.find_vertex(graph.vertex_name(base_rep));
  if (!lv) throw internal_error("orbit representative missing from collapsed graph");
  Path out = anchor(*lv);
  int cur = gamma_path.src();
  for (int d : gamma_path.edges) {
    ElementRef f = connector_element(orig, choice.partition, cur);
    int rep_edge = orig.act_edge(f, d).first;
    auto le = cs.lambda.find_edge(graph.edge_name(rep_edge));
    if (!le) throw internal_error("projected edge missing from collapsed graph");
    out.edges.push_back(*le);
    cur = graph.edge_rng(d);
  }
  return out;
}

struct CollapseMismatch {
  std::string generator;
  std::string path;      // the Λ-path that separates the two actions
  std::string expected;  // image computed through the original system
  std::string got;       // image computed by the collapsed machine
};

// Replays the collapsed machine against the original one: for every
// generator and every Λ-path up to the given length, the collapsed
// image must match lift -> act by f_{im g} ∘ g ∘ f_{dom g}^-1 ->
// project. Returns the first mismatch in (generator, length, path)
// order, or nothing if all checks pass.
inline std::optional<CollapseMismatch> verify_collapse(MachineStore& orig,
                                                       const CollapseChoice& choice,
                                                       CollapsedSystem& cs, int depth) {
  const Graph& graph = orig.graph();
  for (int gi = 0; gi < cs.machine.generator_count(); ++gi) {
    const std::string& name = cs.machine.generator_name(gi);
    ElementRef ng = cs.machine.generator(gi);
    auto og = orig.find_generator(name);
    if (!og) throw internal_error("collapsed generator missing from original store");
    int dv = orig.dom(*og), iv = orig.im(*og);
    ElementRef fd = connector_element(orig, choice.partition, dv);
    ElementRef fi = connector_element(orig, choice.partition, iv);
    auto inner = orig.multiply(*og, orig.inverse(fd));
    if (!inner) throw input_error("connector for '" + graph.vertex_name(dv) +
                                  "' does not end at dom of '" + name + "'");
    auto m = orig.multiply(fi, *inner);
    if (!m) throw input_error("connector for '" + graph.vertex_name(iv) +
                              "' does not start at im of '" + name + "'");
    int lam_dom = cs.machine.dom(ng);
    int rep_dom = cs.rep_vertex.at(lam_dom);
    for (int len = 1; len <= depth; ++len) {
      for (const Path& p : paths_from(cs.lambda, lam_dom, len)) {
        auto got = cs.machine.act_path(ng, p);
        if (!got) throw internal_error("collapsed action undefined on its own domain");
        Path gamma = lift_path(orig, choice, cs, rep_dom, p);
        auto acted = orig.act_path(*m, gamma);
        if (!acted)
          throw input_error("normalized generator '" + name +
                            "' is not based at the orbit representative");
        Path expected = project_path(orig, choice, cs, acted->first);
        if (!(expected == got->first))
          return CollapseMismatch{name, path_to_string(cs.lambda, p),
                                  path_to_string(cs.lambda, expected),
                                  path_to_string(cs.lambda, got->first)};
      }
    }
  }
  return std::nullopt;
}

}  // namespace ssg
