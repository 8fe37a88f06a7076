#pragma once

// Topological representatives on the Bass-Serre tree of the standard graph of groups.
//
// The standard graph has a free base vertex v0, one vertex v_i per abelian factor (stabilizer A_i),
// an edge E_i from v0 to v_i for each factor and a loop L_l at v0 for each free letter. In the tree
// an edge is g.E_i (from g v0 to g v_i) or g.L_l (from g v0 to g x_l v0); edges have trivial
// stabilizers, so the pair (g, edge) names a tree edge uniquely.

#include <fpaut/automorphism.hpp>
#include <fpaut/perron.hpp>
#include <fpaut/words.hpp>

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fpaut {

class StandardGraph {
 public:
  explicit StandardGraph(PresentationPtr pres, std::vector<Rational> lengths = {}) : pres_(std::move(pres)) {
    const int n = edge_count();
    if (lengths.empty()) lengths.assign(static_cast<std::size_t>(n), Rational(1));
    if (static_cast<int>(lengths.size()) != n) throw DimensionMismatch("one length per edge required");
    for (const auto& l : lengths)
      if (l <= 0) throw InvalidPresentation("edge lengths must be positive");
    lengths_ = std::move(lengths);
  }

  const PresentationPtr& presentation_ptr() const noexcept { return pres_; }
  const Presentation& presentation() const noexcept { return *pres_; }
  int factor_count() const noexcept { return pres_->factor_count(); }
  int free_rank() const noexcept { return pres_->free_rank(); }
  int edge_count() const noexcept { return factor_count() + free_rank(); }

  bool is_loop(int e) const { return e >= factor_count(); }
  int letter_of(int e) const { return e - factor_count(); }
  int loop_edge(int letter) const { return factor_count() + letter; }
  const Rational& length(int e) const { return lengths_.at(static_cast<std::size_t>(e)); }
  const std::vector<Rational>& lengths() const noexcept { return lengths_; }

  std::string edge_name(int e) const {
    return is_loop(e) ? "L" + std::to_string(letter_of(e) + 1) : "E" + std::to_string(e + 1);
  }

  /// Directions at v0: E_i (code i), L_l (p + l), reversed L_l (p + k + l).
  int direction_count() const noexcept { return factor_count() + 2 * free_rank(); }

  std::string direction_name(int code) const {
    if (code < factor_count()) return edge_name(code);
    if (code < factor_count() + free_rank()) return edge_name(code);
    return edge_name(code - free_rank()) + "-";
  }

 private:
  PresentationPtr pres_;
  std::vector<Rational> lengths_;
};

/// factor < 0 for a free vertex g v0, otherwise g v_factor with g free of trailing A_factor syllables.
struct TreeVertex {
  int factor = -1;
  Word element;

  static TreeVertex free_vertex(Word g) { return {-1, std::move(g)}; }
  static TreeVertex factor_vertex(int i, const Word& g) { return {i, strip_trailing(g, i)}; }

  bool is_free() const noexcept { return factor < 0; }

  friend bool operator==(const TreeVertex& a, const TreeVertex& b) {
    return a.factor == b.factor && a.element == b.element;
  }
  friend bool operator<(const TreeVertex& a, const TreeVertex& b) {
    if (a.factor != b.factor) return a.factor < b.factor;
    return a.element < b.element;
  }
};

/// The tree edge origin.(standard edge), traversed from its v0-end when forward.
struct TreeEdge {
  Word origin;
  int edge = 0;
  bool forward = true;

  TreeEdge reversed() const { return {origin, edge, !forward}; }

  friend bool operator==(const TreeEdge& a, const TreeEdge& b) {
    return a.edge == b.edge && a.forward == b.forward && a.origin == b.origin;
  }
  friend bool operator<(const TreeEdge& a, const TreeEdge& b) {
    if (a.edge != b.edge) return a.edge < b.edge;
    if (a.forward != b.forward) return a.forward < b.forward;
    return a.origin < b.origin;
  }
};

inline TreeVertex edge_tail(const StandardGraph& g, const TreeEdge& e) {
  const auto& pres = g.presentation_ptr();
  if (g.is_loop(e.edge)) {
    if (e.forward) return TreeVertex::free_vertex(e.origin);
    return TreeVertex::free_vertex(e.origin * generator_word(pres, pres->free_generator_index(g.letter_of(e.edge))));
  }
  if (e.forward) return TreeVertex::free_vertex(e.origin);
  return TreeVertex::factor_vertex(e.edge, e.origin);
}

inline TreeVertex edge_head(const StandardGraph& g, const TreeEdge& e) { return edge_tail(g, e.reversed()); }

/// A path in the tree: a start vertex and consecutive edges (not necessarily reduced).
struct EdgePath {
  TreeVertex start;
  std::vector<TreeEdge> edges;

  bool empty() const noexcept { return edges.empty(); }
  std::size_t size() const noexcept { return edges.size(); }

  friend bool operator==(const EdgePath& a, const EdgePath& b) { return a.start == b.start && a.edges == b.edges; }
  friend bool operator<(const EdgePath& a, const EdgePath& b) {
    if (!(a.start == b.start)) return a.start < b.start;
    return a.edges < b.edges;
  }
};

inline TreeVertex path_end(const StandardGraph& g, const EdgePath& p) {
  return p.edges.empty() ? p.start : edge_head(g, p.edges.back());
}

inline Rational path_length(const StandardGraph& g, const EdgePath& p) {
  Rational total = 0;
  for (const auto& e : p.edges) total += g.length(e.edge);
  return total;
}

inline EdgePath reversed(const StandardGraph& g, const EdgePath& p) {
  EdgePath r{path_end(g, p), {}};
  for (auto it = p.edges.rbegin(); it != p.edges.rend(); ++it) r.edges.push_back(it->reversed());
  return r;
}

inline TreeVertex translate(const Word& t, const TreeVertex& v) {
  return v.is_free() ? TreeVertex::free_vertex(t * v.element) : TreeVertex::factor_vertex(v.factor, t * v.element);
}

/// Left translation by t.
inline EdgePath translate(const Word& t, const EdgePath& p) {
  EdgePath out{translate(t, p.start), {}};
  for (const auto& e : p.edges) out.edges.push_back({t * e.origin, e.edge, e.forward});
  return out;
}

/// Removes back-tracks.
inline EdgePath tighten(const EdgePath& p) {
  EdgePath out{p.start, {}};
  for (const auto& e : p.edges) {
    if (!out.edges.empty() && out.edges.back() == e.reversed()) out.edges.pop_back();
    else out.edges.push_back(e);
  }
  return out;
}

inline bool is_reduced(const EdgePath& p) {
  for (std::size_t i = 1; i < p.edges.size(); ++i)
    if (p.edges[i] == p.edges[i - 1].reversed()) return false;
  return true;
}

/// Appends q to p; q must start where p ends.
inline EdgePath concatenate(const StandardGraph& g, const EdgePath& p, const EdgePath& q) {
  if (!(path_end(g, p) == q.start)) throw InvalidPresentation("paths do not concatenate");
  EdgePath out = p;
  out.edges.insert(out.edges.end(), q.edges.begin(), q.edges.end());
  return out;
}

/// The path from h v0 to h w v0 spelled by the syllables of w.
inline EdgePath spelled_path(const StandardGraph& g, const Word& h, const Word& w) {
  const auto& pres = g.presentation_ptr();
  EdgePath p{TreeVertex::free_vertex(h), {}};
  Word at = h;
  for (const auto& s : w.syllables()) {
    if (s.is_factor()) {
      p.edges.push_back({at, s.index, true});
      at = at * single(pres, s);
      p.edges.push_back({at, s.index, false});
      continue;
    }
    const int e = g.loop_edge(s.index);
    const Word x = generator_word(pres, pres->free_generator_index(s.index));
    const Word xi = invert(x);
    const auto reps = abs(s.exponents[0]).convert_to<long>();
    for (long r = 0; r < reps; ++r) {
      if (s.exponents[0] > 0) {
        p.edges.push_back({at, e, true});
        at = at * x;
      } else {
        at = at * xi;
        p.edges.push_back({at, e, false});
      }
    }
  }
  return p;
}

namespace detail {

/// w = a m b with a the leading A_i syllable (if any) and b the trailing A_j syllable of the rest.
struct CosetSplit {
  Word lead, middle, trail;
};

inline CosetSplit coset_split(int i, const Word& w, int j) {
  std::size_t lo = 0, hi = w.size();
  if (i >= 0 && lo < hi && w[lo].is_factor(i)) ++lo;
  if (j >= 0 && lo < hi && w[hi - 1].is_factor(j)) --hi;
  return {slice(w, 0, lo), slice(w, lo, hi), slice(w, hi, w.size())};
}

}  // namespace detail

/// The reduced path between two vertices.
inline EdgePath geodesic(const StandardGraph& g, const TreeVertex& u, const TreeVertex& v) {
  const Word k = invert(u.element) * v.element;
  const int i = u.factor, j = v.factor;
  const auto split = detail::coset_split(i, k, j);
  EdgePath rel{u.is_free() ? TreeVertex::free_vertex(Word(k.presentation_ptr()))
                           : TreeVertex::factor_vertex(i, Word(k.presentation_ptr())),
               {}};
  if (!u.is_free() && !v.is_free() && i == j && split.middle.empty() && split.trail.empty()) {
    return translate(u.element, rel);  // v = u
  }
  Word at = split.lead;
  if (!u.is_free()) rel.edges.push_back({at, i, false});
  EdgePath body = spelled_path(g, at, split.middle);
  rel.edges.insert(rel.edges.end(), body.edges.begin(), body.edges.end());
  if (!v.is_free()) rel.edges.push_back({at * split.middle, j, true});
  return translate(u.element, rel);
}

/// Vertex code at v0 (see StandardGraph::direction_count) of an edge leaving a free vertex.
inline int direction_code(const StandardGraph& g, const TreeEdge& e) {
  if (!g.is_loop(e.edge)) {
    if (!e.forward) throw UnknownDirection("reversed E-edge does not leave a free vertex");
    return e.edge;
  }
  return e.forward ? e.edge : e.edge + g.free_rank();
}

/// Decoration of a direction g.E_i (reversed) leaving the factor vertex u: u.element^-1 g, in A_i.
inline IntVector direction_decoration(const TreeVertex& u, const TreeEdge& e) {
  const Word d = invert(u.element) * e.origin;
  if (d.empty()) return IntVector(static_cast<std::size_t>(d.presentation().rank(u.factor)), 0);
  if (d.size() != 1 || !d[0].is_factor(u.factor)) throw DifferentVertices("direction does not leave this vertex");
  return d[0].exponents;
}

/// The edge leaving v0 in the direction with the given code.
inline TreeEdge standard_direction(const StandardGraph& g, int code) {
  const auto& pres = g.presentation_ptr();
  const Word eps(pres);
  if (code < 0 || code >= g.direction_count()) throw UnknownDirection("direction code " + std::to_string(code));
  if (code < g.factor_count() + g.free_rank()) return {eps, code, true};
  const int e = code - g.free_rank();
  return {invert(generator_word(pres, pres->free_generator_index(g.letter_of(e)))), e, false};
}

/// Nonzero vectors of the given rank with entries in [-bound, bound].
inline std::vector<IntVector> bounded_decorations(int rank, int bound) {
  std::vector<IntVector> ds;
  const std::size_t r = static_cast<std::size_t>(rank);
  IntVector cur(r, -bound);
  for (;;) {
    if (!is_zero(cur)) ds.push_back(cur);
    std::size_t pos = 0;
    while (pos < r && cur[pos] == bound) cur[pos++] = -bound;
    if (pos == r) break;
    ++cur[pos];
  }
  return ds;
}

/// Calls visit on every reduced extension of `prefix` (including prefix itself when nonempty) with at most
/// max_len edges whose new decorations have entries in [-dec_bound, dec_bound].
template <class Visit>
void for_each_reduced_extension(const StandardGraph& g, EdgePath prefix, int max_len, int dec_bound, Visit&& visit) {
  const auto& pres = g.presentation_ptr();
  std::vector<std::vector<IntVector>> decos;
  for (int i = 0; i < g.factor_count(); ++i) decos.push_back(bounded_decorations(pres->rank(i), dec_bound));
  std::function<void()> extend = [&]() {
    if (!prefix.empty()) visit(static_cast<const EdgePath&>(prefix));
    if (static_cast<int>(prefix.size()) >= max_len) return;
    const TreeVertex at = path_end(g, prefix);
    auto step = [&](const TreeEdge& e) {
      if (!prefix.empty() && prefix.edges.back() == e.reversed()) return;
      prefix.edges.push_back(e);
      extend();
      prefix.edges.pop_back();
    };
    if (at.is_free()) {
      for (int c = 0; c < g.direction_count(); ++c) {
        const TreeEdge s = standard_direction(g, c);
        step({at.element * s.origin, s.edge, s.forward});
      }
      return;
    }
    step({at.element, at.factor, false});
    for (const auto& d : decos[static_cast<std::size_t>(at.factor)])
      step({at.element * single(pres, Syllable::factor(at.factor, d)), at.factor, false});
  };
  extend();
}

class GraphMap {
 public:
  explicit GraphMap(Automorphism phi, std::vector<Rational> lengths = {})
      : phi_(std::move(phi)), graph_(phi_.presentation_ptr(), std::move(lengths)) {
    phi_.require_factors_fixed("build_standard_map");
    const auto& pres = graph_.presentation_ptr();
    const Word eps(pres);
    for (int e = 0; e < graph_.edge_count(); ++e) {
      if (graph_.is_loop(e)) {
        images_.push_back(spelled_path(graph_, eps, phi_.image(pres->free_generator_index(graph_.letter_of(e)))));
      } else {
        EdgePath p = spelled_path(graph_, eps, phi_.conjugator(e));
        p.edges.push_back({phi_.conjugator(e), e, true});
        images_.push_back(std::move(p));
      }
    }
  }

  const Automorphism& automorphism() const noexcept { return phi_; }
  const StandardGraph& graph() const noexcept { return graph_; }
  const std::vector<EdgePath>& edge_images() const noexcept { return images_; }
  const EdgePath& edge_image(int e) const { return images_.at(static_cast<std::size_t>(e)); }

  /// Replaces the image of a standard edge by another path with the same endpoints (e.g. an untightened one).
  GraphMap with_edge_image(int e, EdgePath image) const {
    const TreeEdge std_edge{Word(graph_.presentation_ptr()), e, true};
    if (!(image.start == vertex_image(edge_tail(graph_, std_edge))) ||
        !(path_end(graph_, image) == vertex_image(edge_head(graph_, std_edge))))
      throw InvalidPresentation("edge image endpoints disagree with the vertex map");
    for (std::size_t i = 1; i < image.edges.size(); ++i)
      if (!(edge_head(graph_, image.edges[i - 1]) == edge_tail(graph_, image.edges[i])))
        throw InvalidPresentation("edge image is not a path");
    GraphMap m = *this;
    m.images_.at(static_cast<std::size_t>(e)) = std::move(image);
    return m;
  }

  TreeVertex vertex_image(const TreeVertex& v) const {
    const Word h = phi_.apply(v.element);
    if (v.is_free()) return TreeVertex::free_vertex(h);
    return TreeVertex::factor_vertex(v.factor, h * phi_.conjugator(v.factor));
  }

  /// Image of one tree edge, as stored (untightened if overridden).
  EdgePath image(const TreeEdge& e) const {
    const EdgePath p = translate(phi_.apply(e.origin), edge_image(e.edge));
    return e.forward ? p : reversed(graph_, p);
  }

  /// f(p) edge by edge, before tightening.
  EdgePath raw_image(const EdgePath& p) const {
    EdgePath out{vertex_image(p.start), {}};
    for (const auto& e : p.edges) {
      const EdgePath q = image(e);
      out.edges.insert(out.edges.end(), q.edges.begin(), q.edges.end());
    }
    return out;
  }

  /// [f(p)].
  EdgePath tight_image(const EdgePath& p) const { return tighten(raw_image(p)); }

  Rational lipschitz() const {
    Rational best = 0;
    for (int e = 0; e < graph_.edge_count(); ++e)
      best = std::max(best, path_length(graph_, edge_image(e)) / graph_.length(e));
    return best;
  }

  /// Image under Df of the direction with the given code at v0.
  int direction_image(int code) const {
    const EdgePath p = image(standard_direction(code));
    if (p.empty()) throw InvalidPresentation("edge collapsed by the map");
    return direction_code(graph_, p.edges.front());
  }

  TreeEdge standard_direction(int code) const { return fpaut::standard_direction(graph_, code); }

 private:
  Automorphism phi_;
  StandardGraph graph_;
  std::vector<EdgePath> images_;
};

inline GraphMap build_standard_map(const Automorphism& phi) { return GraphMap(phi); }

/// Entry (e, e') counts occurrences of edge orbit e' in the image of e.
inline IntegerMatrix transition_matrix(const GraphMap& m) {
  const int n = m.graph().edge_count();
  IntegerMatrix t(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
  for (int e = 0; e < n; ++e)
    for (const auto& x : m.edge_image(e).edges) t(static_cast<std::size_t>(e), static_cast<std::size_t>(x.edge)) += 1;
  return t;
}

// --- gates -----------------------------------------------------------------

/// Gates at v0 (all directions there are encountered); directions at factor vertices are singleton gates.
struct GateStructure {
  PresentationPtr presentation;
  int depth = 0;
  bool stable = false;
  std::vector<int> direction_map;  // Df on codes at v0
  std::vector<int> gate;           // gate id per code, ids numbered by first code

  int free_gate_count() const { return gate.empty() ? 0 : *std::max_element(gate.begin(), gate.end()) + 1; }

  std::vector<std::vector<int>> free_gates() const {
    std::vector<std::vector<int>> out(static_cast<std::size_t>(free_gate_count()));
    for (std::size_t c = 0; c < gate.size(); ++c) out[static_cast<std::size_t>(gate[c])].push_back(static_cast<int>(c));
    return out;
  }

  int gate_of(int code) const {
    if (code < 0 || code >= static_cast<int>(gate.size())) throw UnknownDirection("direction code " + std::to_string(code));
    return gate[static_cast<std::size_t>(code)];
  }
};

namespace detail {

inline std::vector<int> gates_at_depth(const std::vector<int>& df, int depth) {
  const std::size_t n = df.size();
  std::vector<int> cur(n);
  for (std::size_t c = 0; c < n; ++c) cur[c] = static_cast<int>(c);
  std::vector<int> parent(n);
  for (std::size_t c = 0; c < n; ++c) parent[c] = static_cast<int>(c);
  std::function<int(int)> find = [&](int x) {
    int& up = parent[static_cast<std::size_t>(x)];
    if (up != x) up = find(up);
    return up;
  };
  for (int d = 1; d <= depth; ++d) {
    for (auto& x : cur) x = df[static_cast<std::size_t>(x)];
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b)
        if (cur[a] == cur[b]) parent[static_cast<std::size_t>(find(static_cast<int>(a)))] = find(static_cast<int>(b));
  }
  std::vector<int> gate(n, -1);
  std::map<int, int> ids;
  for (std::size_t c = 0; c < n; ++c) {
    const int root = find(static_cast<int>(c));
    auto it = ids.try_emplace(root, static_cast<int>(ids.size())).first;
    gate[c] = it->second;
  }
  return gate;
}

}  // namespace detail

inline GateStructure gate_structure(const GraphMap& m, int depth) {
  if (depth < 1) throw ConfigError("gate depth must be at least 1");
  GateStructure gs;
  gs.presentation = m.graph().presentation_ptr();
  gs.depth = depth;
  const int n = m.graph().direction_count();
  for (int c = 0; c < n; ++c) gs.direction_map.push_back(m.direction_image(c));
  gs.gate = detail::gates_at_depth(gs.direction_map, depth);
  // Eventual equality of Df-orbits is decided within n steps.
  gs.stable = detail::gates_at_depth(gs.direction_map, depth + n) == gs.gate;
  return gs;
}

inline int default_gate_depth(const Presentation& pres) { return 2 * (pres.factor_count() + pres.free_rank()) + 4; }

/// The turn between consecutive edges a (arriving) and b (leaving) is legal.
inline bool is_legal_turn(const StandardGraph& g, const TreeEdge& a, const TreeEdge& b, const GateStructure& gates) {
  if (gates.presentation && !(*gates.presentation == g.presentation())) throw PresentationMismatch("gate structure");
  const TreeEdge back = a.reversed();
  const TreeVertex at = edge_tail(g, b);
  if (!(edge_tail(g, back) == at)) throw DifferentVertices("edges do not form a turn");
  if (at.is_free()) return gates.gate_of(direction_code(g, back)) != gates.gate_of(direction_code(g, b));
  return direction_decoration(at, back) != direction_decoration(at, b);
}

/// Indices t such that the turn between edges t and t+1 is illegal.
inline std::vector<std::size_t> illegal_turns(const StandardGraph& g, const EdgePath& p, const GateStructure& gates) {
  std::vector<std::size_t> out;
  for (std::size_t t = 0; t + 1 < p.edges.size(); ++t)
    if (!is_legal_turn(g, p.edges[t], p.edges[t + 1], gates)) out.push_back(t);
  return out;
}

inline std::size_t count_illegal_turns(const StandardGraph& g, const EdgePath& p, const GateStructure& gates) {
  return illegal_turns(g, p, gates).size();
}

inline bool is_legal_path(const StandardGraph& g, const EdgePath& p, const GateStructure& gates) {
  return count_illegal_turns(g, p, gates) == 0;
}

/// Share of the length of p in maximal legal segments longer than c.
inline Rational legality_ratio(const StandardGraph& g, const EdgePath& p, const Rational& c, const GateStructure& gates) {
  const Rational total = path_length(g, p);
  if (total == 0) return 0;
  Rational legal = 0, segment = 0;
  for (std::size_t t = 0; t < p.edges.size(); ++t) {
    segment += g.length(p.edges[t].edge);
    const bool cut = t + 1 == p.edges.size() || !is_legal_turn(g, p.edges[t], p.edges[t + 1], gates);
    if (cut) {
      if (segment > c) legal += segment;
      segment = 0;
    }
  }
  return legal / total;
}

struct TrainTrackReport {
  enum class Verdict { holds, violated, undecided };
  Verdict verdict = Verdict::undecided;
  int depth = 0;
  std::optional<int> edge;        // witness: an edge whose image is illegal
  std::optional<std::size_t> turn;  // index of the illegal turn in that image
};

inline const char* to_string(TrainTrackReport::Verdict v) {
  switch (v) {
    case TrainTrackReport::Verdict::holds: return "holds";
    case TrainTrackReport::Verdict::violated: return "violated";
    default: return "undecided";
  }
}

/// Edges map to legal paths; Df carries legal turns to legal turns by construction of the gates
/// at v0 and by injectivity of the factor matrices at the factor vertices.
inline TrainTrackReport check_train_track(const GraphMap& m, int depth) {
  const GateStructure gates = gate_structure(m, depth);
  TrainTrackReport r;
  r.depth = depth;
  for (int e = 0; e < m.graph().edge_count(); ++e) {
    const auto bad = illegal_turns(m.graph(), m.edge_image(e), gates);
    if (!bad.empty()) {
      r.verdict = TrainTrackReport::Verdict::violated;
      r.edge = e;
      r.turn = bad.front();
      return r;
    }
  }
  r.verdict = gates.stable ? TrainTrackReport::Verdict::holds : TrainTrackReport::Verdict::undecided;
  return r;
}

// --- constants ---------------------------------------------------------------

namespace detail {

inline Rational common_prefix_length(const StandardGraph& g, const EdgePath& a, const EdgePath& b) {
  Rational len = 0;
  for (std::size_t t = 0; t < std::min(a.size(), b.size()) && a.edges[t] == b.edges[t]; ++t) len += g.length(a.edges[t].edge);
  return len;
}

}  // namespace detail

/// Longest common prefix of the images of two distinct same-gate directions at v0.
inline Rational prefix_cancellation_constant(const GraphMap& m, int depth) {
  const GateStructure gates = gate_structure(m, depth);
  const int n = m.graph().direction_count();
  const TreeVertex base = TreeVertex::free_vertex(Word(m.graph().presentation_ptr()));
  Rational best = 0;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      if (gates.gate_of(a) != gates.gate_of(b)) continue;
      const EdgePath ia = m.tight_image({base, {m.standard_direction(a)}});
      const EdgePath ib = m.tight_image({base, {m.standard_direction(b)}});
      best = std::max(best, detail::common_prefix_length(m.graph(), ia, ib));
    }
  return best;
}

/// Largest overlap of [f(a)] and [f(b)] over reduced paths a, b leaving a common vertex in distinct
/// directions, with at most `horizon` edges and decorations bounded by `dec_bound`. Junctions are v0
/// and each v_i; at v_i one direction is normalized to the trivial decoration.
inline Rational searched_cancellation(const GraphMap& m, int horizon, int dec_bound) {
  const StandardGraph& g = m.graph();
  const auto& pres = g.presentation_ptr();
  const Word eps(pres);

  // Tight images of all extensions of one first edge, stored with all their prefixes.
  auto images_from = [&](const TreeVertex& at, const TreeEdge& first) {
    std::vector<EdgePath> out;
    for_each_reduced_extension(g, EdgePath{at, {first}}, horizon, dec_bound,
                               [&](const EdgePath& p) { out.push_back(m.tight_image(p)); });
    return out;
  };
  auto prefix_set = [](const std::vector<EdgePath>& images) {
    std::set<std::vector<TreeEdge>> s;
    for (const auto& p : images)
      for (std::size_t len = 1; len <= p.size(); ++len) s.emplace(p.edges.begin(), p.edges.begin() + static_cast<long>(len));
    return s;
  };
  auto overlap = [&](const std::set<std::vector<TreeEdge>>& left, const std::vector<EdgePath>& right) {
    Rational best = 0;
    for (const auto& p : right) {
      Rational len = 0;
      std::vector<TreeEdge> pre;
      for (const auto& e : p.edges) {
        pre.push_back(e);
        if (!left.count(pre)) break;
        len += g.length(e.edge);
      }
      best = std::max(best, len);
    }
    return best;
  };

  Rational best = 0;
  const TreeVertex v0 = TreeVertex::free_vertex(eps);
  std::vector<std::vector<EdgePath>> at_base;
  for (int c = 0; c < g.direction_count(); ++c) at_base.push_back(images_from(v0, standard_direction(g, c)));
  for (int a = 0; a < g.direction_count(); ++a) {
    const auto left = prefix_set(at_base[static_cast<std::size_t>(a)]);
    for (int b = a + 1; b < g.direction_count(); ++b) best = std::max(best, overlap(left, at_base[static_cast<std::size_t>(b)]));
  }
  for (int i = 0; i < g.factor_count(); ++i) {
    const TreeVertex vi = TreeVertex::factor_vertex(i, eps);
    const auto left = prefix_set(images_from(vi, {eps, i, false}));
    for (const auto& d : bounded_decorations(pres->rank(i), dec_bound))
      best = std::max(best, overlap(left, images_from(vi, {single(pres, Syllable::factor(i, d)), i, false})));
  }
  return best;
}

/// A cancellation bound valid for every reduced concatenation: with h the standard map of phi^-1,
/// D = sup d(hf x, x) and D' = sup d(fh x, x), the overlap never exceeds Lip(f) D + D'.
inline Rational cancellation_upper_bound(const GraphMap& m) {
  const GraphMap h(m.automorphism().inverse(), m.graph().lengths());
  auto displacement = [](const GraphMap& first, const GraphMap& second) {
    // Both composites fix every vertex, so a point of an edge e moves at most (|second(first(e))| + |e|) / 2.
    const StandardGraph& g = first.graph();
    Rational worst = 0;
    for (int e = 0; e < g.edge_count(); ++e) {
      const EdgePath std_edge{TreeVertex::free_vertex(Word(g.presentation_ptr())), {{Word(g.presentation_ptr()), e, true}}};
      const EdgePath there_and_back = second.raw_image(first.raw_image(std_edge));
      worst = std::max(worst, Rational((path_length(g, there_and_back) + g.length(e)) / 2));
    }
    return worst;
  };
  return m.lipschitz() * displacement(m, h) + displacement(h, m);
}

/// C_f: the larger of the single-step prefix constant (gates at `depth`) and the searched overlap.
inline Rational bounded_cancellation_constant(const GraphMap& m, int depth, int horizon = 4, int dec_bound = 2) {
  return std::max(prefix_cancellation_constant(m, depth), searched_cancellation(m, horizon, dec_bound));
}

struct ConstantsReport {
  GrowthRate lambda;
  Rational lipschitz;
  Rational bounded_cancellation;  // C_f
  Rational prefix_cancellation;
  Rational cancellation_upper_bound;
  int cancellation_horizon = 0;
  Rational transversality = 1;
  std::optional<double> critical_constant;  // 2 C_f / (lambda / A - 1) when lambda / A > 1
  bool irreducible = false;
  TrainTrackReport train_track;
};

inline ConstantsReport compute_constants(const GraphMap& m, int depth, const Rational& transversality = 1,
                                         int cancellation_horizon = 4) {
  if (transversality <= 0) throw ConfigError("transversality constant must be positive");
  ConstantsReport r;
  const IntegerMatrix t = transition_matrix(m);
  r.lambda = pf_growth_rate(t);
  r.irreducible = is_irreducible_matrix(t);
  r.lipschitz = m.lipschitz();
  r.prefix_cancellation = prefix_cancellation_constant(m, depth);
  r.cancellation_horizon = cancellation_horizon;
  r.bounded_cancellation = bounded_cancellation_constant(m, depth, cancellation_horizon);
  r.cancellation_upper_bound = cancellation_upper_bound(m);
  r.transversality = transversality;
  r.train_track = check_train_track(m, depth);
  const double ratio = r.lambda.lower / transversality.convert_to<double>();
  if (ratio > 1) r.critical_constant = 2 * r.bounded_cancellation.convert_to<double>() / (ratio - 1);
  return r;
}

// --- Nielsen paths -------------------------------------------------------------

struct NielsenWitness {
  EdgePath path;
  int exponent = 0;
  Word element;
};

namespace detail {

/// Some g with g.u = u2 and g.v = v2, given reduced path data from u to v.
inline std::optional<Word> matching_translation(const TreeVertex& u, const TreeVertex& v, const TreeVertex& u2,
                                                const TreeVertex& v2) {
  if (u.factor != u2.factor || v.factor != v2.factor) return std::nullopt;
  std::optional<Word> g;
  if (u.is_free()) {
    g = u2.element * invert(u.element);
  } else {
    // g = u2.e * c * u.e^-1 with c in A_i; c is forced by the other endpoint.
    const int i = u.factor;
    const Word k = invert(u.element) * v.element;
    const Word x = invert(u2.element) * v2.element;
    const auto sk = coset_split(i, k, v.factor);
    const auto sx = coset_split(i, x, v.factor);
    if (!(sk.middle == sx.middle)) return std::nullopt;
    g = u2.element * sx.lead * invert(sk.lead) * invert(u.element);
  }
  if (!(translate(*g, u) == u2) || !(translate(*g, v) == v2)) return std::nullopt;
  return g;
}

}  // namespace detail

/// Reduced paths with at most len_bound edges, starting at v0 or at some v_i (first decoration trivial),
/// decorations with entries in [-len_bound, len_bound], and [f^n(rho)] = g rho for some n <= exp_bound.
inline std::vector<NielsenWitness> nielsen_search(const GraphMap& m, int len_bound, int exp_bound) {
  if (len_bound < 1 || exp_bound < 1) throw ConfigError("nielsen_search bounds must be positive");
  const StandardGraph& g = m.graph();
  const auto& pres = g.presentation_ptr();
  const Word eps(pres);
  std::vector<NielsenWitness> out;

  auto examine = [&](const EdgePath& rho) {
    const TreeVertex u = rho.start, v = path_end(g, rho);
    TreeVertex fu = u, fv = v;
    for (int n = 1; n <= exp_bound; ++n) {
      fu = m.vertex_image(fu);
      fv = m.vertex_image(fv);
      const auto t = detail::matching_translation(u, v, fu, fv);
      if (!t) continue;
      // Independent check by iterating the path map itself.
      EdgePath it = rho;
      for (int r = 0; r < n; ++r) it = m.tight_image(it);
      if (!(it == translate(*t, rho))) continue;
      out.push_back({rho, n, *t});
      return;
    }
  };

  for_each_reduced_extension(g, EdgePath{TreeVertex::free_vertex(eps), {}}, len_bound, len_bound, examine);
  for (int i = 0; i < g.factor_count(); ++i) {
    // Up to the stabilizer A_i the first edge from v_i is E_i reversed with trivial decoration.
    const EdgePath first{TreeVertex::factor_vertex(i, eps), {{eps, i, false}}};
    for_each_reduced_extension(g, first, len_bound, len_bound, examine);
  }
  std::sort(out.begin(), out.end(), [](const NielsenWitness& a, const NielsenWitness& b) {
    if (a.path.size() != b.path.size()) return a.path.size() < b.path.size();
    return a.path < b.path;
  });
  return out;
}

// --- angles --------------------------------------------------------------------

/// L1 length of the A_i element carrying one direction at a factor vertex to the other; 0 at free vertices.
inline Integer angle(const StandardGraph& g, const TreeVertex& v, const TreeEdge& d1, const TreeEdge& d2) {
  if (!(edge_tail(g, d1) == v) || !(edge_tail(g, d2) == v)) throw DifferentVertices("directions do not leave the vertex");
  if (v.is_free()) return 0;
  const IntVector a = direction_decoration(v, d1), b = direction_decoration(v, d2);
  Integer total = 0;
  for (std::size_t t = 0; t < a.size(); ++t) total += abs(a[t] - b[t]);
  return total;
}

inline bool is_theta_straight(const StandardGraph& g, const EdgePath& p, const Integer& theta) {
  for (std::size_t t = 0; t + 1 < p.edges.size(); ++t) {
    const TreeVertex at = edge_tail(g, p.edges[t + 1]);
    if (angle(g, at, p.edges[t].reversed(), p.edges[t + 1]) > theta) return false;
  }
  return true;
}

// --- text ------------------------------------------------------------------------

inline std::string render_vertex(const TreeVertex& v) {
  std::string base = v.is_free() ? "v0" : "v" + std::to_string(v.factor + 1);
  if (v.element.empty()) return base;
  return render(v.element) + " " + base;
}

/// Edges separated by spaces: "E1", "L2", "L2-"; a reversed E-edge carries its decoration, "[a1.1]E1-".
inline std::string render_path(const StandardGraph& g, const EdgePath& p) {
  std::ostringstream os;
  for (std::size_t t = 0; t < p.edges.size(); ++t) {
    const TreeEdge& e = p.edges[t];
    if (t) os << ' ';
    if (!g.is_loop(e.edge) && !e.forward) {
      const TreeVertex at = edge_tail(g, e);
      const IntVector d = direction_decoration(at, e);
      if (!is_zero(d)) os << '[' << render(single(g.presentation_ptr(), Syllable::factor(e.edge, d))) << ']';
    }
    os << g.edge_name(e.edge) << (e.forward ? "" : "-");
  }
  return os.str();
}

}  // namespace fpaut
