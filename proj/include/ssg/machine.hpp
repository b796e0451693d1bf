#pragma once

// Groupoid elements as states of a partial deterministic transducer
// over the edge alphabet. States are hash-consed terms (identities,
// generators, formal inverses, binary products) with lazily computed
// transition rows. Equality is decided coinductively: two states are
// equal iff no finite word separates them, which the pair-closure
// search below detects by assuming candidate pairs equal until a
// disagreement in output edges or dom/im surfaces. Decided-equal pairs
// are merged in a union-find whose root is the oldest handle, so
// canonical representatives are stable for the life of the store.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "ssg/errors.hpp"
#include "ssg/graph.hpp"

namespace ssg {

struct ElementRef {
  std::int32_t idx = -1;
  bool valid() const { return idx >= 0; }
  auto operator<=>(const ElementRef&) const = default;
};

// One generator token of a word; inv marks a formal inverse.
struct Token {
  int gen = -1;
  bool inv = false;
  auto operator<=>(const Token&) const = default;
};

// Wreath-recursion rule set for one generator, pre-resolution. Each
// restriction word is a list of tokens "name" or "name^-1", applied
// right to left (the rightmost token acts first).
struct GeneratorRule {
  struct Rule {
    std::string edge;
    std::string image;
    std::vector<std::string> restriction;
  };
  std::string name;
  std::string dom;
  std::string im;
  std::vector<Rule> rules;
};

class MachineStore {
 public:
  explicit MachineStore(Graph graph) : graph_(std::move(graph)) {
    for (int v = 0; v < graph_.vertex_count(); ++v)
      identity_.push_back(intern(Kind::Id, v, -1, v, v));
  }

  static std::pair<MachineStore, std::map<std::string, ElementRef>> load_generators(
      const Graph& graph, const std::vector<GeneratorRule>& specs) {
    MachineStore store(graph);
    store.load(specs);
    std::map<std::string, ElementRef> by_name;
    for (int i = 0; i < store.generator_count(); ++i)
      by_name[store.generator_name(i)] = store.generator(i);
    return {std::move(store), std::move(by_name)};
  }

  const Graph& graph() const { return graph_; }

  ElementRef identity(int v) const { return ElementRef{identity_.at(v)}; }
  int generator_count() const { return static_cast<int>(generators_.size()); }
  ElementRef generator(int i) const { return ElementRef{generators_.at(i)}; }
  const std::string& generator_name(int i) const { return gen_names_.at(i); }
  std::optional<ElementRef> find_generator(const std::string& name) const {
    for (int i = 0; i < generator_count(); ++i)
      if (gen_names_[i] == name) return generator(i);
    return std::nullopt;
  }

  int dom(ElementRef g) const { return node(g).dom; }
  int im(ElementRef g) const { return node(g).im; }

  std::size_t state_count() const { return nodes_.size(); }
  std::size_t state_cap() const { return cap_; }
  void set_state_cap(std::size_t cap) { cap_ = cap; }

  // g^-1, with dom/im swapped; g^-1|_w = (g|_{g^-1(w)})^-1.
  ElementRef inverse(ElementRef g) {
    std::int32_t r = find(check(g).idx);
    const Node& n = nodes_[r];
    if (n.kind == Kind::Id) return ElementRef{r};
    if (n.kind == Kind::Inv) return ElementRef{find(n.a)};
    return ElementRef{intern(Kind::Inv, r, -1, n.im, n.dom)};
  }

  // h∘g (g acts first); nullopt is the Zero of the groupoid.
  std::optional<ElementRef> multiply(ElementRef h, ElementRef g) {
    std::int32_t hr = find(check(h).idx), gr = find(check(g).idx);
    const Node& hn = nodes_[hr];
    const Node& gn = nodes_[gr];
    if (gn.im != hn.dom) return std::nullopt;
    if (hn.kind == Kind::Id) return ElementRef{gr};
    if (gn.kind == Kind::Id) return ElementRef{hr};
    return ElementRef{intern(Kind::Prod, hr, gr, gn.dom, hn.im)};
  }

  // (g(e), g|_e); e must be an out-edge of dom(g).
  std::pair<int, ElementRef> act_edge(ElementRef g, int e) {
    std::int32_t r = find(check(g).idx);
    const auto& out = graph_.out_edges(nodes_[r].dom);
    for (std::size_t k = 0; k < out.size(); ++k)
      if (out[k] == e) {
        const auto& entry = row(r)[k];
        return {entry.first, ElementRef{find(entry.second)}};
      }
    throw input_error("edge '" + graph_.edge_name(e) + "' outside domain of " +
                      name(ElementRef{r}));
  }

  // (g(p), g|_p) when s(p) = dom(g), else Zero.
  std::optional<std::pair<Path, ElementRef>> act_path(ElementRef g, const Path& p) {
    std::int32_t r = find(check(g).idx);
    if (p.src() != nodes_[r].dom) return std::nullopt;
    Path image = anchor(nodes_[r].im);
    ElementRef state{r};
    for (int e : p.edges) {
      auto [fe, next] = act_edge(state, e);
      image.edges.push_back(fe);
      state = next;
    }
    return std::make_pair(image, state);
  }

  // Exact equality in G: identical dom/im and identical action on all
  // paths. Coinductive pair-closure; decided-equal pairs are merged.
  bool equals(ElementRef a, ElementRef b) {
    std::int32_t x = find(check(a).idx), y = find(check(b).idx);
    if (x == y) return true;
    auto key = ordered(x, y);
    if (neq_.count(key)) return false;
    std::set<std::pair<std::int32_t, std::int32_t>> seen;
    std::vector<std::pair<std::int32_t, std::int32_t>> queue{{x, y}};
    seen.insert(ordered(x, y));
    bool ok = true;
    for (std::size_t head = 0; ok && head < queue.size(); ++head) {
      auto [p, q] = queue[head];
      p = find(p);
      q = find(q);
      if (p == q) continue;
      if (nodes_[p].dom != nodes_[q].dom || nodes_[p].im != nodes_[q].im) {
        ok = false;
        neq_.insert(ordered(p, q));
        break;
      }
      const Row& rp = row(p);
      const Row& rq = row(q);
      for (std::size_t k = 0; k < rp.size(); ++k) {
        if (rp[k].first != rq[k].first) {
          ok = false;
          neq_.insert(ordered(p, q));
          break;
        }
        std::int32_t cp = find(rp[k].second), cq = find(rq[k].second);
        if (cp != cq && seen.insert(ordered(cp, cq)).second)
          queue.push_back({cp, cq});
      }
    }
    if (!ok) {
      neq_.insert(key);
      return false;
    }
    // The visited pair set is closed under restriction with matching
    // output edges, i.e. a bisimulation: every pair in it is equal.
    for (auto [p, q] : seen) unite(p, q);
    return true;
  }

  // Canonical representative of the equality class of g. The first
  // handle canonicalized in a class stays its representative forever.
  ElementRef canon(ElementRef g) {
    std::int32_t r = find(check(g).idx);
    auto rep = root2rep_.find(r);
    if (rep != root2rep_.end()) return ElementRef{rep->second};
    Signature sig = signature(r);
    auto& bucket = buckets_[sig];
    for (std::int32_t y : bucket) {
      if (equals(ElementRef{r}, ElementRef{y})) {
        // equals() united the classes; y's registration survived.
        return ElementRef{root2rep_.at(find(r))};
      }
    }
    bucket.push_back(r);
    root2rep_[r] = r;
    return ElementRef{r};
  }

  // Evaluates a token word (composition order; rightmost acts first).
  // The empty word is the identity at anchor_vertex.
  ElementRef eval_word(const std::vector<Token>& word, int anchor_vertex) {
    if (word.empty()) return identity(anchor_vertex);
    ElementRef cur = token_element(word.back());
    for (auto it = word.rbegin() + 1; it != word.rend(); ++it) {
      auto next = multiply(token_element(*it), cur);
      if (!next)
        throw input_error("word has mismatched dom/im chain at token '" +
                          gen_names_.at(it->gen) + (it->inv ? "^-1'" : "'"));
      cur = *next;
    }
    return cur;
  }

  ElementRef token_element(const Token& t) {
    ElementRef g = generator(t.gen);
    return t.inv ? inverse(g) : g;
  }

  // Structural display name (of the handle as given).
  std::string name(ElementRef g) const {
    const Node& n = node(g);
    switch (n.kind) {
      case Kind::Id:
        return "id_" + graph_.vertex_name(n.a);
      case Kind::Gen:
        return gen_names_[n.a];
      case Kind::Inv: {
        std::string base = name(ElementRef{n.a});
        if (nodes_[n.a].kind == Kind::Prod) base = "(" + base + ")";
        return base + "^-1";
      }
      case Kind::Prod:
        return name(ElementRef{n.a}) + "*" + name(ElementRef{n.b});
    }
    throw internal_error("corrupt node kind");
  }

 private:
  enum class Kind : std::uint8_t { Id, Gen, Inv, Prod };
  struct Node {
    Kind kind;
    std::int32_t a, b;  // Id: vertex; Gen: generator index; Inv: child; Prod: (h, g)
    std::int32_t dom, im;
  };
  using Row = std::vector<std::pair<int, std::int32_t>>;  // aligned with out_edges(dom)
  using Signature = std::tuple<std::int32_t, std::int32_t, std::vector<int>>;

  const Node& node(ElementRef g) const { return nodes_.at(check(g).idx); }

  static ElementRef check(ElementRef g) {
    if (!g.valid()) throw internal_error("invalid element handle");
    return g;
  }

  static std::pair<std::int32_t, std::int32_t> ordered(std::int32_t a, std::int32_t b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  }

  std::int32_t intern(Kind kind, std::int32_t a, std::int32_t b, int dom, int im) {
    auto key = std::make_tuple(static_cast<std::uint8_t>(kind), a, b);
    auto it = intern_.find(key);
    if (it != intern_.end()) return it->second;
    if (nodes_.size() >= cap_) throw state_cap_error(cap_);
    std::int32_t idx = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(Node{kind, a, b, dom, im});
    trans_.emplace_back();
    uf_.push_back(idx);
    intern_.emplace(key, idx);
    return idx;
  }

  std::int32_t find(std::int32_t x) {
    while (uf_[x] != x) {
      uf_[x] = uf_[uf_[x]];
      x = uf_[x];
    }
    return x;
  }

  void unite(std::int32_t a, std::int32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    std::int32_t root = std::min(a, b), other = std::max(a, b);
    uf_[other] = root;
    auto ra = root2rep_.find(root), rb = root2rep_.find(other);
    if (ra != root2rep_.end() && rb != root2rep_.end())
      throw internal_error("two canonical representatives in one class");
    if (rb != root2rep_.end()) {
      root2rep_[root] = rb->second;
      root2rep_.erase(other);
    }
  }

  const Row& row(std::int32_t idx) {
    if (trans_[idx]) return *trans_[idx];
    const Node n = nodes_[idx];
    const auto& out = graph_.out_edges(n.dom);
    Row r(out.size(), {-1, -1});
    switch (n.kind) {
      case Kind::Id:
        for (std::size_t k = 0; k < out.size(); ++k)
          r[k] = {out[k], identity_[graph_.edge_rng(out[k])]};
        break;
      case Kind::Gen:
        r = gen_rows_.at(n.a);
        break;
      case Kind::Inv: {
        std::int32_t h = find(n.a);
        const Row hrow = row(h);  // copy: row() below may reallocate trans_
        const auto& hout = graph_.out_edges(nodes_[h].dom);
        const auto& myout = graph_.out_edges(n.dom);
        std::vector<bool> filled(myout.size(), false);
        for (std::size_t k = 0; k < hrow.size(); ++k) {
          int image = hrow[k].first;
          std::size_t pos = edge_position(myout, image);
          if (filled[pos]) throw internal_error("non-bijective edge action");
          filled[pos] = true;
          r[pos] = {hout[k], inverse(ElementRef{hrow[k].second}).idx};
        }
        for (bool f : filled)
          if (!f) throw internal_error("non-bijective edge action");
        break;
      }
      case Kind::Prod: {
        std::int32_t h = n.a, g = n.b;
        const Row grow = row(find(g));
        for (std::size_t k = 0; k < grow.size(); ++k) {
          auto [e2, r2] = act_edge(ElementRef{h}, grow[k].first);
          auto prod = multiply(r2, ElementRef{grow[k].second});
          if (!prod) throw internal_error("restriction chain mismatch");
          r[k] = {e2, prod->idx};
        }
        break;
      }
    }
    trans_[idx] = std::move(r);
    return *trans_[idx];
  }

  static std::size_t edge_position(const std::vector<int>& edges, int e) {
    for (std::size_t k = 0; k < edges.size(); ++k)
      if (edges[k] == e) return k;
    throw internal_error("edge not in expected out-list");
  }

  Signature signature(std::int32_t r) {
    const Row& rw = row(r);
    std::vector<int> images;
    images.reserve(rw.size());
    for (const auto& [img, rest] : rw) images.push_back(img);
    return {nodes_[r].dom, nodes_[r].im, std::move(images)};
  }

  void load(const std::vector<GeneratorRule>& specs) {
    for (const auto& s : specs) {
      if (s.name.empty() ||
          (s.name.size() >= 3 && s.name.substr(s.name.size() - 3) == "^-1"))
        throw input_error("bad generator name '" + s.name + "'");
      for (const auto& other : gen_names_)
        if (other == s.name) throw input_error("duplicate generator '" + s.name + "'");
      auto dv = graph_.find_vertex(s.dom);
      auto iv = graph_.find_vertex(s.im);
      if (!dv) throw input_error("generator '" + s.name + "': unknown dom '" + s.dom + "'");
      if (!iv) throw input_error("generator '" + s.name + "': unknown im '" + s.im + "'");
      int i = static_cast<int>(generators_.size());
      generators_.push_back(intern(Kind::Gen, i, -1, *dv, *iv));
      gen_names_.push_back(s.name);
    }
    for (std::int32_t g : generators_) inverse(ElementRef{g});
    gen_rows_.resize(generators_.size());
    for (std::size_t i = 0; i < specs.size(); ++i) resolve_rules(static_cast<int>(i), specs[i]);
  }

  void resolve_rules(int i, const GeneratorRule& s) {
    const Node& gn = nodes_[generators_[i]];
    const auto& out_dom = graph_.out_edges(gn.dom);
    const auto& out_im = graph_.out_edges(gn.im);
    Row r(out_dom.size(), {-1, -1});
    std::vector<bool> edge_seen(out_dom.size(), false), image_seen(out_im.size(), false);
    for (const auto& rule : s.rules) {
      auto e = graph_.find_edge(rule.edge);
      if (!e || graph_.edge_src(*e) != gn.dom)
        throw input_error("generator '" + s.name + "': rule edge '" + rule.edge +
                          "' is not an out-edge of dom");
      auto img = graph_.find_edge(rule.image);
      if (!img || graph_.edge_src(*img) != gn.im)
        throw input_error("generator '" + s.name + "': image '" + rule.image +
                          "' is not an out-edge of im");
      std::size_t pe = edge_position(out_dom, *e);
      std::size_t pi = edge_position(out_im, *img);
      if (edge_seen[pe])
        throw input_error("generator '" + s.name + "': duplicate rule for edge '" +
                          rule.edge + "'");
      if (image_seen[pi])
        throw input_error("generator '" + s.name + "': image '" + rule.image +
                          "' used twice (edge action must be a bijection)");
      edge_seen[pe] = true;
      image_seen[pi] = true;
      ElementRef rest = eval_word(parse_word(s.name, rule.restriction),
                                  graph_.edge_rng(*e));
      if (nodes_[rest.idx].dom != graph_.edge_rng(*e) ||
          nodes_[rest.idx].im != graph_.edge_rng(*img))
        throw input_error("generator '" + s.name + "': restriction at '" + rule.edge +
                          "' has mismatched dom/im chain");
      r[pe] = {*img, rest.idx};
    }
    for (std::size_t k = 0; k < edge_seen.size(); ++k)
      if (!edge_seen[k])
        throw input_error("generator '" + s.name + "': no rule for out-edge '" +
                          graph_.edge_name(out_dom[k]) + "'");
    gen_rows_[i] = std::move(r);
  }

  std::vector<Token> parse_word(const std::string& who,
                                const std::vector<std::string>& tokens) const {
    std::vector<Token> word;
    for (const auto& t : tokens) {
      Token tok;
      std::string base = t;
      if (base.size() > 3 && base.substr(base.size() - 3) == "^-1") {
        tok.inv = true;
        base = base.substr(0, base.size() - 3);
      }
      bool found = false;
      for (std::size_t i = 0; i < gen_names_.size(); ++i)
        if (gen_names_[i] == base) {
          tok.gen = static_cast<int>(i);
          found = true;
          break;
        }
      if (!found)
        throw input_error("generator '" + who + "': unknown restriction token '" + t + "'");
      word.push_back(tok);
    }
    return word;
  }

  Graph graph_;
  std::vector<Node> nodes_;
  std::vector<std::optional<Row>> trans_;
  std::map<std::tuple<std::uint8_t, std::int32_t, std::int32_t>, std::int32_t> intern_;
  std::vector<std::int32_t> uf_;
  std::map<std::int32_t, std::int32_t> root2rep_;
  std::map<Signature, std::vector<std::int32_t>> buckets_;
  std::set<std::pair<std::int32_t, std::int32_t>> neq_;
  std::vector<std::int32_t> identity_;
  std::vector<std::int32_t> generators_;
  std::vector<std::string> gen_names_;
  std::vector<Row> gen_rows_;
  std::size_t cap_ = 2000000;
};

}  // namespace ssg
