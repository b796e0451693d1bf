#pragma once

// Finite directed multigraphs, paths, reachability and strongly
// connected components. Vertices and edges are referred to by dense
// integer indices after validation; all orderings derive from the
// declared string identifiers so downstream output is reproducible.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ssg/errors.hpp"

namespace ssg {

struct GraphSpec {
  struct EdgeSpec {
    std::string id;
    std::string src;
    std::string rng;
  };
  std::vector<std::string> vertices;
  std::vector<EdgeSpec> edges;
};

class Graph {
 public:
  // Checks every invariant and reports all violations at once.
  static Graph validate(const GraphSpec& spec) {
    std::vector<std::string> problems;
    if (spec.vertices.empty()) problems.push_back("empty vertex set");
    Graph g;
    for (const auto& v : spec.vertices) {
      if (g.vertex_index_.count(v))
        problems.push_back("duplicate identifier '" + v + "'");
      else {
        g.vertex_index_[v] = static_cast<int>(g.vertex_names_.size());
        g.vertex_names_.push_back(v);
      }
    }
    for (const auto& e : spec.edges) {
      if (g.edge_index_.count(e.id) || g.vertex_index_.count(e.id)) {
        problems.push_back("duplicate identifier '" + e.id + "'");
        continue;
      }
      auto s = g.find_vertex(e.src);
      auto r = g.find_vertex(e.rng);
      if (!s) problems.push_back("dangling endpoint: edge '" + e.id +
                                 "' has unknown src '" + e.src + "'");
      if (!r) problems.push_back("dangling endpoint: edge '" + e.id +
                                 "' has unknown rng '" + e.rng + "'");
      if (!s || !r) continue;
      g.edge_index_[e.id] = static_cast<int>(g.edge_names_.size());
      g.edge_names_.push_back(e.id);
      g.edge_src_.push_back(*s);
      g.edge_rng_.push_back(*r);
    }
    if (!problems.empty()) {
      std::string msg = "invalid graph:";
      for (const auto& p : problems) msg += "\n  " + p;
      throw input_error(msg);
    }
    g.out_.assign(g.vertex_names_.size(), {});
    g.in_.assign(g.vertex_names_.size(), {});
    for (int e = 0; e < g.edge_count(); ++e) {
      g.out_[g.edge_src_[e]].push_back(e);
      g.in_[g.edge_rng_[e]].push_back(e);
    }
    auto by_name = [&g](int a, int b) {
      return g.edge_names_[a] < g.edge_names_[b];
    };
    for (auto& v : g.out_) std::sort(v.begin(), v.end(), by_name);
    for (auto& v : g.in_) std::sort(v.begin(), v.end(), by_name);
    return g;
  }

  int vertex_count() const { return static_cast<int>(vertex_names_.size()); }
  int edge_count() const { return static_cast<int>(edge_names_.size()); }
  const std::string& vertex_name(int v) const { return vertex_names_.at(v); }
  const std::string& edge_name(int e) const { return edge_names_.at(e); }
  int edge_src(int e) const { return edge_src_.at(e); }
  int edge_rng(int e) const { return edge_rng_.at(e); }

  std::optional<int> find_vertex(const std::string& name) const {
    auto it = vertex_index_.find(name);
    if (it == vertex_index_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<int> find_edge(const std::string& name) const {
    auto it = edge_index_.find(name);
    if (it == edge_index_.end()) return std::nullopt;
    return it->second;
  }

  // Out-/in-edge lists, sorted by edge name.
  const std::vector<int>& out_edges(int v) const { return out_.at(v); }
  const std::vector<int>& in_edges(int v) const { return in_.at(v); }
  int out_degree(int v) const { return static_cast<int>(out_.at(v).size()); }

 private:
  std::vector<std::string> vertex_names_;
  std::vector<std::string> edge_names_;
  std::vector<int> edge_src_, edge_rng_;
  std::map<std::string, int> vertex_index_, edge_index_;
  std::vector<std::vector<int>> out_, in_;
};

inline Graph validate_graph(const GraphSpec& spec) { return Graph::validate(spec); }

// A path is a composable edge sequence; the empty path is anchored at
// a vertex (base). base always equals the source vertex.
struct Path {
  int base = -1;
  std::vector<int> edges;

  int src() const { return base; }
  int rng(const Graph& g) const {
    return edges.empty() ? base : g.edge_rng(edges.back());
  }
  int length() const { return static_cast<int>(edges.size()); }
  bool empty() const { return edges.empty(); }
  bool operator==(const Path&) const = default;
  auto operator<=>(const Path&) const = default;
};

inline Path anchor(int v) { return Path{v, {}}; }

inline Path edge_path(const Graph& g, int e) { return Path{g.edge_src(e), {e}}; }

inline bool is_valid_path(const Graph& g, const Path& p) {
  if (p.base < 0 || p.base >= g.vertex_count()) return false;
  int at = p.base;
  for (int e : p.edges) {
    if (e < 0 || e >= g.edge_count() || g.edge_src(e) != at) return false;
    at = g.edge_rng(e);
  }
  return true;
}

// Concatenation; nullopt is the Zero of the path arithmetic.
inline std::optional<Path> concat(const Graph& g, const Path& p, const Path& q) {
  if (p.rng(g) != q.src()) return std::nullopt;
  Path r = p;
  r.edges.insert(r.edges.end(), q.edges.begin(), q.edges.end());
  return r;
}

// True iff p is a prefix of w (same anchor vertex).
inline bool is_prefix(const Path& p, const Path& w) {
  if (p.base != w.base || p.edges.size() > w.edges.size()) return false;
  return std::equal(p.edges.begin(), p.edges.end(), w.edges.begin());
}

// For w = p·m returns m; callers must have checked is_prefix.
inline Path suffix_after(const Graph& g, const Path& w, const Path& p) {
  Path m;
  m.base = p.rng(g);
  m.edges.assign(w.edges.begin() + p.edges.size(), w.edges.end());
  return m;
}

inline std::string path_to_string(const Graph& g, const Path& p) {
  if (p.edges.empty()) return "(" + g.vertex_name(p.base) + ")";
  std::string s;
  for (int e : p.edges) s += g.edge_name(e);
  return s;
}

// All length-n paths with source v, ordered lexicographically by the
// edge-name sequence (out-edge lists are already name-sorted).
inline std::vector<Path> paths_from(const Graph& g, int v, int n) {
  if (v < 0 || v >= g.vertex_count()) throw input_error("unknown vertex");
  std::vector<Path> cur{anchor(v)};
  for (int k = 0; k < n; ++k) {
    std::vector<Path> next;
    for (const auto& p : cur)
      for (int e : g.out_edges(p.rng(g))) {
        Path q = p;
        q.edges.push_back(e);
        next.push_back(std::move(q));
      }
    cur = std::move(next);
  }
  return cur;
}

// Strongly connected components of an adjacency structure, components
// listed in topological order (a component precedes everything it
// reaches). Iterative Tarjan; deterministic given the adjacency order.
struct SccResult {
  std::vector<int> component;               // node -> component id
  std::vector<std::vector<int>> members;    // component id -> nodes
  std::vector<bool> has_cycle;              // component contains an edge
};

inline SccResult scc_adjacency(const std::vector<std::vector<int>>& adj) {
  int n = static_cast<int>(adj.size());
  SccResult res;
  res.component.assign(n, -1);
  std::vector<int> index(n, -1), low(n, 0), stack;
  std::vector<bool> on_stack(n, false);
  int counter = 0;
  struct Frame { int v; std::size_t edge; };
  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    std::vector<Frame> call{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      auto& fr = call.back();
      if (fr.edge < adj[fr.v].size()) {
        int w = adj[fr.v][fr.edge++];
        if (index[w] == -1) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[fr.v] = std::min(low[fr.v], index[w]);
        }
      } else {
        int v = fr.v;
        call.pop_back();
        if (!call.empty())
          low[call.back().v] = std::min(low[call.back().v], low[v]);
        if (low[v] == index[v]) {
          std::vector<int> comp;
          while (true) {
            int w = stack.back();
            stack.pop_back();
            on_stack[w] = false;
            comp.push_back(w);
            if (w == v) break;
          }
          std::sort(comp.begin(), comp.end());
          int id = static_cast<int>(res.members.size());
          for (int w : comp) res.component[w] = id;
          res.members.push_back(std::move(comp));
        }
      }
    }
  }
  // Tarjan pops components in reverse topological order.
  std::reverse(res.members.begin(), res.members.end());
  int m = static_cast<int>(res.members.size());
  for (int id = 0; id < m; ++id)
    for (int w : res.members[id]) res.component[w] = id;
  res.has_cycle.assign(m, false);
  for (int v = 0; v < n; ++v)
    for (int w : adj[v])
      if (res.component[v] == res.component[w]) res.has_cycle[res.component[v]] = true;
  return res;
}

inline SccResult scc(const Graph& g) {
  std::vector<std::vector<int>> adj(g.vertex_count());
  for (int e = 0; e < g.edge_count(); ++e)
    adj[g.edge_src(e)].push_back(g.edge_rng(e));
  return scc_adjacency(adj);
}

inline bool is_strongly_connected(const Graph& g) {
  return scc(g).members.size() == 1;
}

}  // namespace ssg
