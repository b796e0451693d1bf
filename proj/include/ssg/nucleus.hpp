#pragma once

// Nucleus computation. Starting from the generators, their inverses,
// and the identities, the candidate set is closed under restriction;
// E(·) then prunes it to the states that lie on or after a cycle of
// the restriction graph (transients can never recur). The loop
// N <- N ∪ E(closure(N·N)) runs until a fixpoint: at the fixpoint all
// products of nucleus states fall back into the nucleus after finitely
// many restrictions, and the certificate depth records the worst case.
// Every bound here is a budget, not a proof device: when a budget is
// exhausted the outcome says "not shown contracting within limits" and
// never claims non-contraction.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ssg/errors.hpp"
#include "ssg/graph.hpp"
#include "ssg/machine.hpp"

namespace ssg {

struct NucleusLimits {
  std::size_t max_states = 10000;  // new machine states allowed during the run
  int depth = 12;                  // certificate search depth
  int rounds = 64;                 // closure iterations
};

struct NucleusOutcome {
  bool contracting_shown = false;
  std::vector<ElementRef> nucleus;  // canonical handles, ascending; valid iff shown
  int certificate_depth = -1;       // max restrictions before products re-enter N
  std::vector<ElementRef> forced_identities;  // identities E(·) alone would have dropped
  std::string diagnostic;           // empty, or "not shown contracting within limits"
};

namespace detail {

inline std::set<std::int32_t> restriction_closure(MachineStore& store,
                                                  std::set<std::int32_t> seed) {
  std::vector<std::int32_t> queue(seed.begin(), seed.end());
  while (!queue.empty()) {
    std::int32_t x = queue.back();
    queue.pop_back();
    ElementRef g{x};
    for (int e : store.graph().out_edges(store.dom(g))) {
      std::int32_t r = store.canon(store.act_edge(g, e).second).idx;
      if (seed.insert(r).second) queue.push_back(r);
    }
  }
  return seed;
}

// States of C lying on a cycle of the restriction graph of C, or
// reachable from one. C must be restriction-closed.
inline std::set<std::int32_t> eventual_states(MachineStore& store,
                                              const std::set<std::int32_t>& c) {
  std::vector<std::int32_t> idx(c.begin(), c.end());
  std::map<std::int32_t, int> pos;
  for (std::size_t i = 0; i < idx.size(); ++i) pos[idx[i]] = static_cast<int>(i);
  std::vector<std::vector<int>> adj(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    ElementRef g{idx[i]};
    for (int e : store.graph().out_edges(store.dom(g))) {
      std::int32_t r = store.canon(store.act_edge(g, e).second).idx;
      auto it = pos.find(r);
      if (it == pos.end()) throw internal_error("restriction left a closed set");
      adj[i].push_back(it->second);
    }
  }
  SccResult sccs = scc_adjacency(adj);
  std::vector<bool> keep(idx.size(), false);
  std::vector<int> queue;
  for (std::size_t i = 0; i < idx.size(); ++i)
    if (sccs.has_cycle[sccs.component[i]] && !keep[i]) {
      keep[i] = true;
      queue.push_back(static_cast<int>(i));
    }
  while (!queue.empty()) {
    int u = queue.back();
    queue.pop_back();
    for (int w : adj[u])
      if (!keep[w]) {
        keep[w] = true;
        queue.push_back(w);
      }
  }
  std::set<std::int32_t> out;
  for (std::size_t i = 0; i < idx.size(); ++i)
    if (keep[i]) out.insert(idx[i]);
  return out;
}

class StateBudget {
 public:
  StateBudget(MachineStore& store, std::size_t allowance)
      : store_(store), saved_(store.state_cap()) {
    std::size_t target = store.state_count() + allowance;
    if (target < saved_) store.set_state_cap(target);
  }
  ~StateBudget() { store_.set_state_cap(saved_); }
  StateBudget(const StateBudget&) = delete;
  StateBudget& operator=(const StateBudget&) = delete;

 private:
  MachineStore& store_;
  std::size_t saved_;
};

}  // namespace detail

inline NucleusOutcome compute_nucleus(MachineStore& store,
                                      const NucleusLimits& limits = {}) {
  NucleusOutcome out;
  detail::StateBudget budget(store, limits.max_states);
  try {
    std::set<std::int32_t> seed;
    std::vector<std::int32_t> ids;
    for (int v = 0; v < store.graph().vertex_count(); ++v) {
      std::int32_t id = store.canon(store.identity(v)).idx;
      ids.push_back(id);
      seed.insert(id);
    }
    for (int i = 0; i < store.generator_count(); ++i) {
      seed.insert(store.canon(store.generator(i)).idx);
      seed.insert(store.canon(store.inverse(store.generator(i))).idx);
    }
    std::set<std::int32_t> n = detail::eventual_states(
        store, detail::restriction_closure(store, std::move(seed)));
    for (std::int32_t id : ids)
      if (n.insert(id).second) out.forced_identities.push_back(ElementRef{id});

    bool settled = false;
    for (int round = 0; round < limits.rounds && !settled; ++round) {
      std::set<std::int32_t> products = n;
      for (std::int32_t x : n)
        for (std::int32_t y : n) {
          auto p = store.multiply(ElementRef{x}, ElementRef{y});
          if (p) products.insert(store.canon(*p).idx);
        }
      std::set<std::int32_t> grown = detail::eventual_states(
          store, detail::restriction_closure(store, std::move(products)));
      grown.insert(n.begin(), n.end());
      settled = (grown == n);
      n = std::move(grown);
    }
    if (!settled) {
      out.diagnostic = "not shown contracting within limits";
      return out;
    }

    // Certificate: for every composable product of nucleus states,
    // repeatedly restrict the states not yet in N; record the first
    // depth at which the frontier is inside N.
    int worst = 0;
    for (std::int32_t x : n)
      for (std::int32_t y : n) {
        auto p = store.multiply(ElementRef{x}, ElementRef{y});
        if (!p) continue;
        std::set<std::int32_t> frontier{store.canon(*p).idx};
        int depth = 0;
        while (true) {
          std::set<std::int32_t> outside;
          for (std::int32_t s : frontier)
            if (!n.count(s)) outside.insert(s);
          if (outside.empty()) break;
          if (depth >= limits.depth) {
            out.diagnostic = "not shown contracting within limits";
            return out;
          }
          std::set<std::int32_t> next;
          for (std::int32_t s : frontier) {
            if (n.count(s)) continue;  // nucleus states stay put
            ElementRef g{s};
            for (int e : store.graph().out_edges(store.dom(g)))
              next.insert(store.canon(store.act_edge(g, e).second).idx);
          }
          frontier = std::move(next);
          ++depth;
        }
        worst = std::max(worst, depth);
      }
    out.contracting_shown = true;
    out.certificate_depth = worst;
    for (std::int32_t s : n) out.nucleus.push_back(ElementRef{s});
  } catch (const state_cap_error&) {
    out.contracting_shown = false;
    out.nucleus.clear();
    out.diagnostic = "not shown contracting within limits";
  }
  return out;
}

// Moore diagram of a restriction-closed state set: one node per state,
// one arrow per out-edge of its domain, labelled (e, g(e)).
struct MooreDiagram {
  std::vector<ElementRef> states;  // ascending canonical handles
  struct Arrow {
    int from, to;    // indices into states
    int edge, image;  // e and g(e), as graph edge ids
  };
  std::vector<Arrow> arrows;
};

inline MooreDiagram moore_diagram(MachineStore& store,
                                  const std::vector<ElementRef>& states) {
  MooreDiagram md;
  md.states = states;
  std::sort(md.states.begin(), md.states.end());
  std::map<std::int32_t, int> pos;
  for (std::size_t i = 0; i < md.states.size(); ++i) pos[md.states[i].idx] = static_cast<int>(i);
  for (std::size_t i = 0; i < md.states.size(); ++i) {
    ElementRef g = md.states[i];
    for (int e : store.graph().out_edges(store.dom(g))) {
      auto [img, rest] = store.act_edge(g, e);
      auto it = pos.find(store.canon(rest).idx);
      if (it == pos.end())
        throw input_error("moore_diagram: set is not restriction-closed");
      md.arrows.push_back({static_cast<int>(i), it->second, e, img});
    }
  }
  return md;
}

// ℋ: the subdiagram of arrows with g(e) = e, each kept arrow labelled
// by its edge alone.
inline MooreDiagram h_subgraph(const MooreDiagram& md) {
  MooreDiagram h;
  h.states = md.states;
  for (const auto& a : md.arrows)
    if (a.edge == a.image) h.arrows.push_back(a);
  return h;
}

// 𝒞: states in a strongly connected component of ℋ that contains an
// arrow (equivalently, states on an ℋ-cycle).
inline std::vector<ElementRef> cycle_vertices(const MooreDiagram& h) {
  std::vector<std::vector<int>> adj(h.states.size());
  for (const auto& a : h.arrows) adj[a.from].push_back(a.to);
  SccResult sccs = scc_adjacency(adj);
  std::vector<ElementRef> out;
  for (std::size_t i = 0; i < h.states.size(); ++i)
    if (sccs.has_cycle[sccs.component[i]]) out.push_back(h.states[i]);
  return out;
}

}  // namespace ssg
