#pragma once

// Inverse semigroup of partial path transformations in canonical form
// p g q*: the element maps paths q·m to p·g(m), where g is a machine
// element with dom(g) = r(q) and im(g) = r(p). Zero is represented by
// an empty optional throughout; it is a value, not an error.

#include <optional>
#include <string>
#include <utility>

#include "ssg/errors.hpp"
#include "ssg/graph.hpp"
#include "ssg/machine.hpp"

namespace ssg {

struct SisElement {
  Path p;
  ElementRef g;  // canonical handle
  Path q;
};

inline SisElement make_element(MachineStore& store, const Path& p, ElementRef g,
                               const Path& q) {
  const Graph& graph = store.graph();
  if (!is_valid_path(graph, p) || !is_valid_path(graph, q))
    throw input_error("make_element: invalid path component");
  if (store.dom(g) != q.rng(graph) || store.im(g) != p.rng(graph))
    throw input_error("make_element: middle part must lie in Iso(r(q), r(p))");
  return SisElement{p, store.canon(g), q};
}

inline SisElement vertex_idempotent(MachineStore& store, int v) {
  return make_element(store, anchor(v), store.identity(v), anchor(v));
}

inline SisElement path_idempotent(MachineStore& store, const Path& p) {
  return make_element(store, p, store.identity(p.rng(store.graph())), p);
}

// s* = (q, g^-1, p); s·s*·s = s and s*·s = q-side projection.
inline SisElement star(MachineStore& store, const SisElement& s) {
  return SisElement{s.q, store.canon(store.inverse(s.g)), s.p};
}

// s·t, where t acts first. Zero when the inner parts do not overlap.
inline std::optional<SisElement> multiply(MachineStore& store, const SisElement& s,
                                          const SisElement& t) {
  const Graph& graph = store.graph();
  if (is_prefix(s.q, t.p)) {
    Path m = suffix_after(graph, t.p, s.q);
    auto acted = store.act_path(s.g, m);
    if (!acted) throw internal_error("composable overlap failed to act");
    auto [gm, rest] = *acted;
    auto middle = store.multiply(rest, t.g);
    if (!middle) throw internal_error("restriction chain mismatch in product");
    auto newp = concat(graph, s.p, gm);
    if (!newp) throw internal_error("image path failed to concatenate");
    return make_element(store, *newp, *middle, t.q);
  }
  if (is_prefix(t.p, s.q)) {
    Path m = suffix_after(graph, s.q, t.p);
    auto pulled = store.act_path(store.inverse(t.g), m);
    if (!pulled) throw internal_error("composable overlap failed to act");
    auto [mpre, inv_rest] = *pulled;
    auto middle = store.multiply(s.g, store.inverse(inv_rest));
    if (!middle) throw internal_error("restriction chain mismatch in product");
    auto newq = concat(graph, t.q, mpre);
    if (!newq) throw internal_error("preimage path failed to concatenate");
    return make_element(store, s.p, *middle, *newq);
  }
  return std::nullopt;
}

// s(w) = p·g(m) when w = q·m, else Zero.
inline std::optional<Path> act_on_path(MachineStore& store, const SisElement& s,
                                       const Path& w) {
  const Graph& graph = store.graph();
  if (!is_prefix(s.q, w)) return std::nullopt;
  Path m = suffix_after(graph, w, s.q);
  auto acted = store.act_path(s.g, m);
  if (!acted) return std::nullopt;
  return concat(graph, s.p, acted->first);
}

inline bool equal_elements(MachineStore& store, const SisElement& a, const SisElement& b) {
  return a.p == b.p && a.q == b.q && store.equals(a.g, b.g);
}

inline bool is_idempotent(MachineStore& store, const SisElement& s) {
  return s.p == s.q && store.equals(s.g, store.identity(store.dom(s.g)));
}

// For path projections qq* and pp*: qq* <= pp* iff p is a prefix of q.
inline bool projection_leq(const SisElement& lo, const SisElement& hi) {
  return is_prefix(hi.p, lo.p);
}

inline std::string element_to_string(MachineStore& store, const SisElement& s) {
  const Graph& graph = store.graph();
  return path_to_string(graph, s.p) + " [" + store.name(s.g) + "] " +
         path_to_string(graph, s.q) + "*";
}

}  // namespace ssg
