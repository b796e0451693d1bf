#pragma once

// The synchronizing-coset machinery that decides simplicity. Δ is the
// graph whose vertices are sets Y of cycle states over a common base
// vertex, with an arrow labelled e from Y (based at r(e)) to
// e·Y = {g fixing e with g|_e ∈ Y} (based at s(e)). BFS from the
// identity singletons reaches every vertex that matters; the
// synchronized vertices form the unique sink component. A recurrent
// subgroup H_p consists of the states fixed by the restriction map
// along a closed path p; its interaction with the synchronized sets is
// captured by the 0/1 coset-indicator matrix whose Smith normal form
// decides, characteristic by characteristic, whether a kernel exists.

#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "ssg/errors.hpp"
#include "ssg/graph.hpp"
#include "ssg/linalg.hpp"
#include "ssg/machine.hpp"
#include "ssg/nucleus.hpp"

namespace ssg {

struct DeltaGraph {
  struct Vertex {
    int base;                           // graph vertex
    std::vector<std::int32_t> members;  // ascending canonical handles
    bool operator==(const Vertex&) const = default;
  };
  struct Arrow {
    int from, to;  // indices into vertices
    int edge;      // graph edge label; from is based at r(edge), to at s(edge)
  };
  std::vector<Vertex> vertices;
  std::vector<Arrow> arrows;
  std::vector<int> initial;  // indices of the identity singletons, by base
};

namespace detail {

// g must fix e and restrict into y for membership in e·y.
inline std::vector<std::int32_t> delta_step(MachineStore& store,
                                            const std::vector<ElementRef>& cycle_states,
                                            const std::set<std::int32_t>& y, int e) {
  std::set<std::int32_t> next;
  int s = store.graph().edge_src(e);
  for (ElementRef g : cycle_states) {
    if (store.dom(g) != s || store.im(g) != s) continue;
    auto [img, rest] = store.act_edge(g, e);
    if (img != e) continue;
    if (y.count(store.canon(rest).idx)) next.insert(store.canon(g).idx);
  }
  return {next.begin(), next.end()};
}

}  // namespace detail

inline DeltaGraph build_delta(MachineStore& store,
                              const std::vector<ElementRef>& cycle_states) {
  const Graph& graph = store.graph();
  DeltaGraph delta;
  std::map<std::pair<int, std::vector<std::int32_t>>, int> index;
  std::queue<int> work;
  auto intern_vertex = [&](int base, std::vector<std::int32_t> members) {
    auto key = std::make_pair(base, members);
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    int id = static_cast<int>(delta.vertices.size());
    delta.vertices.push_back({base, std::move(members)});
    index.emplace(std::move(key), id);
    work.push(id);
    return id;
  };
  for (int v = 0; v < graph.vertex_count(); ++v)
    delta.initial.push_back(
        intern_vertex(v, {store.canon(store.identity(v)).idx}));
  while (!work.empty()) {
    int yi = work.front();
    work.pop();
    // Copy: intern_vertex may grow the vertex vector.
    const DeltaGraph::Vertex y = delta.vertices[yi];
    std::set<std::int32_t> yset(y.members.begin(), y.members.end());
    for (int e : graph.in_edges(y.base)) {
      int ti = intern_vertex(graph.edge_src(e),
                             detail::delta_step(store, cycle_states, yset, e));
      delta.arrows.push_back({yi, ti, e});
    }
  }
  return delta;
}

// The unique sink strongly connected component of Δ. Requires the
// working graph to be strongly connected; otherwise the synchronizing
// theory does not apply to the presentation as given.
inline std::vector<int> synchronized_vertices(MachineStore& store,
                                              const DeltaGraph& delta) {
  if (!is_strongly_connected(store.graph()))
    throw inapplicable_error(
        "the graph is not strongly connected; collapse the presentation first "
        "and analyze the collapsed system");
  std::vector<std::vector<int>> adj(delta.vertices.size());
  for (const auto& a : delta.arrows) adj[a.from].push_back(a.to);
  SccResult sccs = scc_adjacency(adj);
  int ncomp = static_cast<int>(sccs.members.size());
  std::vector<bool> is_sink(ncomp, true);
  for (const auto& a : delta.arrows)
    if (sccs.component[a.from] != sccs.component[a.to])
      is_sink[sccs.component[a.from]] = false;
  std::optional<int> sink;
  for (int c = 0; c < ncomp; ++c)
    if (is_sink[c]) {
      if (sink) throw internal_error("expected a unique sink component in Δ");
      sink = c;
    }
  if (!sink) throw internal_error("Δ has no sink component");
  std::vector<int> out;
  for (std::size_t i = 0; i < delta.vertices.size(); ++i)
    if (sccs.component[i] == *sink) out.push_back(static_cast<int>(i));
  return out;
}

struct RecurrentSubgroup {
  int base = -1;
  std::vector<std::int32_t> elements;  // ascending canonical handles, id included
  Path witness;                        // shortest closed path with this fixed set
};

namespace detail {

inline void check_subgroup(MachineStore& store, int base,
                           const std::vector<std::int32_t>& elements) {
  std::set<std::int32_t> s(elements.begin(), elements.end());
  if (!s.count(store.canon(store.identity(base)).idx))
    throw internal_error("recurrent set is missing the identity");
  for (std::int32_t x : elements) {
    if (!s.count(store.canon(store.inverse(ElementRef{x})).idx))
      throw internal_error("recurrent set is not closed under inversion");
    for (std::int32_t y : elements) {
      auto p = store.multiply(ElementRef{x}, ElementRef{y});
      if (!p || !s.count(store.canon(*p).idx))
        throw internal_error("recurrent set is not closed under products");
    }
  }
}

}  // namespace detail

// Enumerates H_p = {g : g(p) = p and g|_p = g} over all closed paths p
// by a BFS over the partial restriction maps R_p on the cycle states.
// Deterministic: paths are explored in length-then-lex order, and each
// distinct subgroup keeps its first (shortest) witness.
inline std::vector<RecurrentSubgroup> recurrent_subgroups(
    MachineStore& store, const std::vector<ElementRef>& cycle_states,
    std::size_t state_budget = 100000) {
  const Graph& graph = store.graph();
  struct State {
    int src, cur;
    std::vector<std::pair<std::int32_t, std::int32_t>> table;  // sorted by first
    auto operator<=>(const State&) const = default;
  };
  std::map<State, Path> seen;
  std::queue<State> work;
  std::map<std::pair<int, std::vector<std::int32_t>>, RecurrentSubgroup> found;

  auto diagonal = [](const State& st) {
    std::vector<std::int32_t> d;
    for (auto [g, r] : st.table)
      if (g == r) d.push_back(g);
    return d;
  };
  auto record = [&](const State& st, const Path& witness) {
    if (st.src != st.cur) return;   // only closed walks define a subgroup
    if (witness.empty()) return;    // the empty path fixes everything vacuously
    std::vector<std::int32_t> d = diagonal(st);
    auto key = std::make_pair(st.src, d);
    if (found.count(key)) return;  // BFS order: first witness is shortest
    detail::check_subgroup(store, st.src, d);
    found.emplace(std::move(key), RecurrentSubgroup{st.src, std::move(d), witness});
  };

  for (int v = 0; v < graph.vertex_count(); ++v) {
    State st{v, v, {}};
    for (ElementRef g : cycle_states)
      if (store.dom(g) == v && store.im(g) == v) {
        std::int32_t c = store.canon(g).idx;
        st.table.push_back({c, c});
      }
    std::sort(st.table.begin(), st.table.end());
    seen.emplace(st, anchor(v));
    work.push(st);
  }
  std::set<std::int32_t> cycle_set;
  for (ElementRef g : cycle_states) cycle_set.insert(store.canon(g).idx);
  while (!work.empty()) {
    State st = work.front();
    work.pop();
    Path here = seen.at(st);
    record(st, here);
    for (int e : graph.out_edges(st.cur)) {
      State next{st.src, graph.edge_rng(e), {}};
      for (auto [g, r] : st.table) {
        auto [img, rest] = store.act_edge(ElementRef{r}, e);
        if (img != e) continue;
        std::int32_t c = store.canon(rest).idx;
        if (!cycle_set.count(c)) continue;
        next.table.push_back({g, c});
      }
      if (next.table.empty()) continue;
      Path ext = here;
      ext.edges.push_back(e);
      auto prev = seen.find(next);
      if (prev != seen.end()) {
        // A closed walk back to a start state is the only revisit whose
        // diagonal was never recorded (start states carry the empty
        // witness, which fixes everything vacuously). Record it now.
        if (prev->second.empty()) record(next, ext);
        continue;
      }
      if (seen.size() >= state_budget)
        throw inapplicable_error(
            "recurrent subgroup search exceeded its state budget");
      seen.emplace(next, ext);
      work.push(next);
    }
  }
  std::vector<RecurrentSubgroup> out;
  for (auto& [key, sub] : found) out.push_back(std::move(sub));
  return out;
}

// H ∩ Y as a set of canonical handles when the bases agree (verified
// to be a subgroup), empty otherwise.
inline std::vector<std::int32_t> intersect_with_vertex(MachineStore& store,
                                                       const RecurrentSubgroup& h,
                                                       const DeltaGraph::Vertex& y) {
  if (h.base != y.base) return {};
  std::set<std::int32_t> ys(y.members.begin(), y.members.end());
  std::vector<std::int32_t> out;
  for (std::int32_t x : h.elements)
    if (ys.count(x)) out.push_back(x);
  detail::check_subgroup(store, h.base, out);
  return out;
}

struct KernelReport {
  RecurrentSubgroup subgroup;
  IntMat matrix;  // one coset-indicator row per (synchronized Y, coset)
  SnfResult snf;
  int cols = 0;  // |H|, columns ordered by ascending canonical handle

  int nullity(long long p) const { return nullity_from_snf(snf, cols, p); }
  bool trivial_over(long long p) const { return nullity(p) == 0; }
};

// For each synchronized vertex Y based at base(H): the left cosets of
// H ∩ Y in H each contribute a 0/1 indicator row over the elements of
// H. A nonzero nullspace of the stacked matrix over a field K is
// exactly a nonzero kernel class, the obstruction to simplicity.
inline KernelReport kernel_report(MachineStore& store, const RecurrentSubgroup& h,
                                  const DeltaGraph& delta,
                                  const std::vector<int>& synchronized) {
  KernelReport report;
  report.subgroup = h;
  report.cols = static_cast<int>(h.elements.size());
  std::map<std::int32_t, int> col;
  for (int j = 0; j < report.cols; ++j) col[h.elements[j]] = j;
  for (int yi : synchronized) {
    const DeltaGraph::Vertex& y = delta.vertices[yi];
    if (y.base != h.base) continue;
    std::vector<std::int32_t> k = intersect_with_vertex(store, h, y);
    std::set<std::vector<std::int32_t>> cosets;
    for (std::int32_t g : h.elements) {
      std::vector<std::int32_t> coset;
      for (std::int32_t x : k) {
        auto p = store.multiply(ElementRef{g}, ElementRef{x});
        if (!p) throw internal_error("subgroup elements failed to compose");
        coset.push_back(store.canon(*p).idx);
      }
      std::sort(coset.begin(), coset.end());
      if (!cosets.insert(coset).second) continue;
      std::vector<Int> row(report.cols, 0);
      for (std::int32_t x : coset) {
        auto it = col.find(x);
        if (it == col.end())
          throw internal_error("coset left the subgroup it partitions");
        row[it->second] = 1;
      }
      report.matrix.push_back(std::move(row));
    }
  }
  report.snf = smith_normal_form(report.matrix);
  return report;
}

struct SimplicityVerdict {
  std::vector<std::pair<long long, bool>> by_field;  // (characteristic, simple?)
  bool simple_all_characteristics = false;
  std::vector<long long> bad_primes;  // defined when every matrix has full rank over Q
  bool rank_deficient = false;        // some kernel already nonzero over Q
};

namespace detail {

inline void collect_prime_factors(Int d, std::set<long long>& primes) {
  if (d < 0) d = -d;
  for (Int f = 2; f * f <= d; ++f)
    while (d % f == 0) {
      primes.insert(static_cast<long long>(f));
      d /= f;
    }
  if (d > 1) primes.insert(static_cast<long long>(d));
}

}  // namespace detail

inline SimplicityVerdict simplicity_verdict(const std::vector<KernelReport>& kernels,
                                            const std::vector<long long>& fields) {
  SimplicityVerdict v;
  std::set<long long> primes;
  for (const auto& k : kernels) {
    if (!k.trivial_over(0)) v.rank_deficient = true;
    for (const Int& d : k.snf.divisors)
      if (d != 0) detail::collect_prime_factors(d, primes);
  }
  v.bad_primes.assign(primes.begin(), primes.end());
  for (long long p : fields) {
    bool simple = true;
    for (const auto& k : kernels)
      if (!k.trivial_over(p)) simple = false;
    v.by_field.push_back({p, simple});
  }
  v.simple_all_characteristics = !v.rank_deficient && primes.empty();
  return v;
}

}  // namespace ssg
