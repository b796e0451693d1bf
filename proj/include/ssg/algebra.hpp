#pragma once

// The path-groupoid convolution algebra over a chosen coefficient
// field: finite linear combinations of canonical triples [p g q*] with
// the bilinear product induced by the inverse semigroup. Includes the
// per-vertex Cuntz–Krieger-style generators of the tight ideal and a
// bounded, certificate-producing membership test: "in the ideal" is
// established by exhibiting a depth at which right multiplication by
// every path projection kills the element, "not in" by exhibiting a
// known complement span containing it, and anything else is reported
// Unknown rather than guessed.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ssg/errors.hpp"
#include "ssg/graph.hpp"
#include "ssg/linalg.hpp"
#include "ssg/machine.hpp"
#include "ssg/semigroup.hpp"

namespace ssg {

struct Field {
  long long p = 0;  // 0 means the rationals
  Field() = default;
  explicit Field(long long c) : p(c) {
    if (c != 0 && !is_prime(c)) throw input_error("characteristic must be 0 or a prime");
  }
  bool operator==(const Field&) const = default;
};

struct Scalar {
  Field field;
  Rat value;  // in characteristic p: an integer residue in [0, p)

  static Scalar of(Field f, const Rat& v) {
    Scalar s{f, v};
    s.normalize();
    return s;
  }
  static Scalar zero(Field f) { return {f, 0}; }
  static Scalar one(Field f) { return of(f, 1); }

  void normalize() {
    if (field.p == 0) return;
    Int num = boost::multiprecision::numerator(value);
    Int den = boost::multiprecision::denominator(value);
    long long d = mod_reduce(den, field.p);
    if (d == 0) throw input_error("denominator divisible by the characteristic");
    long long n = mod_reduce(num, field.p);
    value = Rat(Int(n) * mod_inverse(d, field.p) % field.p);
  }
  bool is_zero() const { return value == 0; }
  bool operator==(const Scalar&) const = default;

  friend Scalar operator+(const Scalar& a, const Scalar& b) {
    if (a.field != b.field) throw internal_error("mixed-field scalar arithmetic");
    return of(a.field, a.value + b.value);
  }
  friend Scalar operator*(const Scalar& a, const Scalar& b) {
    if (a.field != b.field) throw internal_error("mixed-field scalar arithmetic");
    return of(a.field, a.value * b.value);
  }
  friend Scalar operator-(const Scalar& a) { return of(a.field, -a.value); }
  friend Scalar operator-(const Scalar& a, const Scalar& b) { return a + (-b); }
};

struct TripleKey {
  Path p;
  std::int32_t g = -1;  // canonical handle
  Path q;
  auto operator<=>(const TripleKey&) const = default;
};

struct AlgebraElement {
  Field field;
  std::map<TripleKey, Scalar> terms;  // zero coefficients are never stored
  bool is_zero() const { return terms.empty(); }
  bool operator==(const AlgebraElement&) const = default;
};

inline AlgebraElement algebra_zero(Field f) { return AlgebraElement{f, {}}; }

inline void accumulate(AlgebraElement& a, const TripleKey& key, const Scalar& c) {
  if (c.is_zero()) return;
  auto it = a.terms.find(key);
  if (it == a.terms.end()) {
    a.terms.emplace(key, c);
    return;
  }
  it->second = it->second + c;
  if (it->second.is_zero()) a.terms.erase(it);
}

inline AlgebraElement algebra_term(MachineStore& store, Field f, const Rat& coeff,
                                   const SisElement& s) {
  AlgebraElement a = algebra_zero(f);
  SisElement canon = make_element(store, s.p, s.g, s.q);  // revalidates and canonizes
  accumulate(a, TripleKey{canon.p, canon.g.idx, canon.q}, Scalar::of(f, coeff));
  return a;
}

inline AlgebraElement add(const AlgebraElement& a, const AlgebraElement& b) {
  if (a.field != b.field) throw internal_error("mixed-field algebra arithmetic");
  AlgebraElement out = a;
  for (const auto& [key, c] : b.terms) accumulate(out, key, c);
  return out;
}

inline AlgebraElement scale(const AlgebraElement& a, const Rat& c) {
  AlgebraElement out = algebra_zero(a.field);
  Scalar s = Scalar::of(a.field, c);
  for (const auto& [key, v] : a.terms) accumulate(out, key, v * s);
  return out;
}

inline AlgebraElement negate(const AlgebraElement& a) { return scale(a, -1); }

inline AlgebraElement subtract(const AlgebraElement& a, const AlgebraElement& b) {
  return add(a, negate(b));
}

inline AlgebraElement multiply(MachineStore& store, const AlgebraElement& a,
                               const AlgebraElement& b) {
  if (a.field != b.field) throw internal_error("mixed-field algebra arithmetic");
  AlgebraElement out = algebra_zero(a.field);
  for (const auto& [ka, ca] : a.terms)
    for (const auto& [kb, cb] : b.terms) {
      SisElement s{ka.p, ElementRef{ka.g}, ka.q};
      SisElement t{kb.p, ElementRef{kb.g}, kb.q};
      auto prod = multiply(store, s, t);
      if (!prod) continue;  // the semigroup zero contributes nothing
      accumulate(out, TripleKey{prod->p, prod->g.idx, prod->q}, ca * cb);
    }
  return out;
}

inline AlgebraElement star(MachineStore& store, const AlgebraElement& a) {
  AlgebraElement out = algebra_zero(a.field);
  for (const auto& [key, c] : a.terms) {
    SisElement s{key.p, ElementRef{key.g}, key.q};
    SisElement st = star(store, s);
    accumulate(out, TripleKey{st.p, st.g.idx, st.q}, c);
  }
  return out;
}

inline AlgebraElement path_projection(MachineStore& store, Field f, const Path& p) {
  return algebra_term(store, f, 1, path_idempotent(store, p));
}

// One generator of the tight ideal per vertex: the vertex projection
// minus the sum of its out-edge range projections.
inline std::vector<AlgebraElement> ck_generators(MachineStore& store, Field f) {
  std::vector<AlgebraElement> out;
  const Graph& graph = store.graph();
  for (int v = 0; v < graph.vertex_count(); ++v) {
    AlgebraElement a = algebra_term(store, f, 1, vertex_idempotent(store, v));
    for (int e : graph.out_edges(v))
      a = subtract(a, path_projection(store, f, edge_path(graph, e)));
    out.push_back(std::move(a));
  }
  return out;
}

// Does a lie in the linear span of the given elements (all same field)?
inline bool in_span(const AlgebraElement& a, const std::vector<AlgebraElement>& basis) {
  if (basis.empty()) return a.is_zero();
  std::set<TripleKey> keys;
  for (const auto& b : basis) {
    if (b.field != a.field) throw internal_error("mixed-field span test");
    for (const auto& [k, c] : b.terms) keys.insert(k);
  }
  for (const auto& [k, c] : a.terms) keys.insert(k);
  std::vector<TripleKey> rows(keys.begin(), keys.end());
  auto coeff = [&](const AlgebraElement& x, const TripleKey& k) -> Rat {
    auto it = x.terms.find(k);
    return it == x.terms.end() ? Rat(0) : it->second.value;
  };
  if (a.field.p == 0) {
    RatMat plain(rows.size()), augmented(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (const auto& b : basis) plain[i].push_back(coeff(b, rows[i]));
      augmented[i] = plain[i];
      augmented[i].push_back(coeff(a, rows[i]));
    }
    RatMat p2 = plain, a2 = augmented;
    return rref_q(p2).size() == rref_q(a2).size();
  }
  IntMat plain(rows.size()), augmented(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& b : basis)
      plain[i].push_back(Int(boost::multiprecision::numerator(coeff(b, rows[i]))));
    augmented[i] = plain[i];
    augmented[i].push_back(Int(boost::multiprecision::numerator(coeff(a, rows[i]))));
  }
  std::size_t n1 = basis.size(), n2 = basis.size() + 1;
  std::size_t rank1 = n1 - nullspace_p(plain, a.field.p).size();
  std::size_t rank2 = n2 - nullspace_p(augmented, a.field.p).size();
  return rank1 == rank2;
}

enum class TightStatus { InTight, NotInTight, Unknown };

struct TightResult {
  TightStatus status = TightStatus::Unknown;
  int depth = -1;  // certificate depth for InTight; the bound for Unknown
};

// Bounded membership test for the tight ideal. Soundness: if right
// multiplication by every length-n path projection from v kills the
// v-supported part of a, that part equals a combination of ideal
// generators expanded to depth n; if a lies in a span known to meet
// the ideal only at zero and a is nonzero, it cannot be a member.
inline TightResult tight_membership(MachineStore& store, const AlgebraElement& a,
                                    int bound,
                                    const std::vector<AlgebraElement>* known_nontight =
                                        nullptr) {
  if (a.is_zero()) return {TightStatus::InTight, 0};
  if (known_nontight && in_span(a, *known_nontight))
    return {TightStatus::NotInTight, -1};
  const Graph& graph = store.graph();
  int worst = 0;
  for (int v = 0; v < graph.vertex_count(); ++v) {
    AlgebraElement av = algebra_zero(a.field);
    for (const auto& [key, c] : a.terms)
      if (key.q.src() == v) accumulate(av, key, c);
    if (av.is_zero()) continue;
    std::optional<int> nv;
    for (int n = 0; n <= bound && !nv; ++n) {
      bool all_zero = true;
      for (const Path& p : paths_from(graph, v, n))
        if (!multiply(store, av, path_projection(store, a.field, p)).is_zero()) {
          all_zero = false;
          break;
        }
      if (all_zero) nv = n;
    }
    if (!nv) return {TightStatus::Unknown, bound};
    worst = std::max(worst, *nv);
  }
  return {TightStatus::InTight, worst};
}

// Splits an element whose terms all have trivial q-part into its
// p-path components; errors if any q-part is a genuine path.
inline std::map<Path, std::vector<std::pair<std::int32_t, Scalar>>> decompose_in_M(
    const AlgebraElement& a) {
  std::map<Path, std::vector<std::pair<std::int32_t, Scalar>>> out;
  for (const auto& [key, c] : a.terms) {
    if (key.q.length() > 0)
      throw input_error("decompose_in_M: term has a nontrivial q-part");
    out[key.p].push_back({key.g, c});
  }
  return out;
}

struct SingularProbe {
  struct Sample {
    Path p;
    std::optional<Path> extension;  // shortest q with a·[pq id pq*] = 0
  };
  std::vector<Sample> samples;
  bool all_found = true;
};

// For every path of the sample depth, searches for an extension whose
// projection annihilates a from the right — evidence that a vanishes
// on a dense set of rays.
inline SingularProbe singular_probe(MachineStore& store, const AlgebraElement& a,
                                    int sample_depth, int ext_bound) {
  const Graph& graph = store.graph();
  SingularProbe probe;
  for (int v = 0; v < graph.vertex_count(); ++v)
    for (const Path& p : paths_from(graph, v, sample_depth)) {
      SingularProbe::Sample sample{p, std::nullopt};
      for (int n = 0; n <= ext_bound && !sample.extension; ++n)
        for (const Path& q : paths_from(graph, p.rng(graph), n)) {
          auto pq = concat(graph, p, q);
          if (!pq) throw internal_error("extension failed to concatenate");
          if (multiply(store, a, path_projection(store, a.field, *pq)).is_zero()) {
            sample.extension = q;
            break;
          }
        }
      if (!sample.extension) probe.all_found = false;
      probe.samples.push_back(std::move(sample));
    }
  return probe;
}

// Builds sum_j coeff_j [v h_j v*] over a subgroup based at v.
inline AlgebraElement span_element(MachineStore& store, Field f, int base,
                                   const std::vector<std::int32_t>& h_elements,
                                   const std::vector<Rat>& coeffs) {
  if (h_elements.size() != coeffs.size())
    throw input_error("span_element: one coefficient per subgroup element");
  AlgebraElement out = algebra_zero(f);
  for (std::size_t j = 0; j < h_elements.size(); ++j) {
    SisElement s = make_element(store, anchor(base), ElementRef{h_elements[j]},
                                anchor(base));
    out = add(out, algebra_term(store, f, coeffs[j], s));
  }
  return out;
}

// Checks that a is supported on {[v h v*] : h in the subgroup} and that
// its coefficient vector is killed by the coset-indicator matrix over
// the element's own field.
inline bool essential_membership_on_span(const AlgebraElement& a, int base,
                                         const std::vector<std::int32_t>& h_elements,
                                         const IntMat& m) {
  std::vector<Scalar> x;
  std::map<std::int32_t, std::size_t> col;
  for (std::size_t j = 0; j < h_elements.size(); ++j) {
    col[h_elements[j]] = j;
    x.push_back(Scalar::zero(a.field));
  }
  for (const auto& [key, c] : a.terms) {
    auto it = (key.p == anchor(base) && key.q == anchor(base)) ? col.find(key.g)
                                                               : col.end();
    if (it == col.end())
      throw input_error("element is not supported on the subgroup span");
    x[it->second] = c;
  }
  for (const auto& row : m) {
    if (row.size() != x.size()) throw input_error("matrix does not match the subgroup");
    Scalar acc = Scalar::zero(a.field);
    for (std::size_t j = 0; j < row.size(); ++j)
      acc = acc + Scalar::of(a.field, Rat(row[j])) * x[j];
    if (!acc.is_zero()) return false;
  }
  return true;
}

}  // namespace ssg
