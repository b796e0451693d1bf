#pragma once

// Combinatorial structure of a presentation: the partition of vertices
// into groupoid orbits (connected components of the generator dom/im
// relation) with shortest witness words, and the congruence-freeness
// test on the underlying graph.

#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "ssg/errors.hpp"
#include "ssg/graph.hpp"
#include "ssg/machine.hpp"

namespace ssg {

struct OrbitPartition {
  std::vector<int> orbit_of;             // vertex -> orbit id
  std::vector<std::vector<int>> orbits;  // orbit id -> sorted members
  std::vector<int> rep;                  // orbit id -> least member vertex
  // Tokens in action order (first applied first) carrying v to its
  // orbit representative; empty at the representative itself. Each
  // witness is the inverse of the shortest word from the rep found by
  // BFS with a fixed token order, so it is shortest and deterministic.
  std::vector<std::vector<Token>> witness_to_rep;
};

namespace detail {

struct TokenMove {
  Token token;
  int from, to;
};

inline std::vector<TokenMove> token_moves(const Graph& graph,
                                          const std::vector<GeneratorRule>& rules) {
  std::vector<TokenMove> moves;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    auto d = graph.find_vertex(rules[i].dom);
    auto m = graph.find_vertex(rules[i].im);
    if (!d || !m) throw input_error("generator '" + rules[i].name + "': unknown endpoint");
    int gi = static_cast<int>(i);
    moves.push_back({Token{gi, false}, *d, *m});
    moves.push_back({Token{gi, true}, *m, *d});
  }
  return moves;
}

}  // namespace detail

inline OrbitPartition orbit_partition(const Graph& graph,
                                      const std::vector<GeneratorRule>& rules) {
  int n = graph.vertex_count();
  auto moves = detail::token_moves(graph, rules);
  OrbitPartition part;
  part.orbit_of.assign(n, -1);
  part.witness_to_rep.resize(n);
  for (int v = 0; v < n; ++v) {
    if (part.orbit_of[v] != -1) continue;
    // v is the least unassigned vertex, hence the representative.
    int orbit = static_cast<int>(part.orbits.size());
    std::vector<int> members;
    // BFS from the representative records, per reached vertex, the
    // shortest-lex word rep -> u; inverting it (reverse, flip each
    // token) gives a deterministic shortest witness u -> rep.
    std::vector<std::vector<Token>> from_rep(n);
    std::queue<int> bfs;
    part.orbit_of[v] = orbit;
    bfs.push(v);
    while (!bfs.empty()) {
      int u = bfs.front();
      bfs.pop();
      members.push_back(u);
      for (const auto& mv : moves) {
        if (mv.from != u || part.orbit_of[mv.to] != -1) continue;
        part.orbit_of[mv.to] = orbit;
        from_rep[mv.to] = from_rep[u];
        from_rep[mv.to].push_back(mv.token);
        bfs.push(mv.to);
      }
    }
    std::sort(members.begin(), members.end());
    for (int u : members) {
      std::vector<Token> w(from_rep[u].rbegin(), from_rep[u].rend());
      for (auto& t : w) t.inv = !t.inv;
      part.witness_to_rep[u] = std::move(w);
    }
    part.orbits.push_back(std::move(members));
    part.rep.push_back(v);
  }
  return part;
}

// f_v: the connector element in Iso(v, rep(orbit(v))), the identity at
// representatives. Generator indices in the witness must match the
// store's load order.
inline ElementRef connector_element(MachineStore& store, const OrbitPartition& part,
                                    int v) {
  const auto& action_order = part.witness_to_rep.at(v);
  std::vector<Token> composition(action_order.rbegin(), action_order.rend());
  return store.eval_word(composition, v);
}

struct CfReport {
  bool holds = false;
  std::vector<int> outdegree_failures;                // vertices with out-degree < 2
  std::vector<std::pair<int, int>> reach_failures;    // ordered (v, w): orbit(v) unreachable from w
  std::vector<std::string> problems;                  // human-readable lines
};

// Congruence-freeness test: (1) every vertex emits at least two edges;
// (2) for every ordered vertex pair (v, w), some vertex in the orbit
// of v is reachable in the graph from w.
inline CfReport type_cf_check(const Graph& graph,
                              const std::vector<GeneratorRule>& rules) {
  CfReport report;
  for (int v = 0; v < graph.vertex_count(); ++v)
    if (graph.out_degree(v) < 2) {
      report.outdegree_failures.push_back(v);
      report.problems.push_back("vertex '" + graph.vertex_name(v) + "' has out-degree " +
                                std::to_string(graph.out_degree(v)) +
                                " (condition 1 needs at least 2)");
    }
  OrbitPartition part = orbit_partition(graph, rules);
  std::vector<std::vector<bool>> reach(graph.vertex_count(),
                                       std::vector<bool>(graph.vertex_count(), false));
  for (int w = 0; w < graph.vertex_count(); ++w) {
    std::queue<int> bfs;
    bfs.push(w);
    reach[w][w] = true;
    while (!bfs.empty()) {
      int u = bfs.front();
      bfs.pop();
      for (int e : graph.out_edges(u)) {
        int t = graph.edge_rng(e);
        if (!reach[w][t]) {
          reach[w][t] = true;
          bfs.push(t);
        }
      }
    }
  }
  for (int v = 0; v < graph.vertex_count(); ++v)
    for (int w = 0; w < graph.vertex_count(); ++w) {
      bool ok = false;
      for (int u : part.orbits[part.orbit_of[v]])
        if (reach[w][u]) {
          ok = true;
          break;
        }
      if (!ok) {
        report.reach_failures.push_back({v, w});
        report.problems.push_back("no vertex in the orbit of '" + graph.vertex_name(v) +
                                  "' is reachable from '" + graph.vertex_name(w) +
                                  "' (condition 2 fails for the ordered pair (" +
                                  graph.vertex_name(v) + ", " + graph.vertex_name(w) +
                                  "))");
      }
    }
  report.holds = report.problems.empty();
  return report;
}

}  // namespace ssg
