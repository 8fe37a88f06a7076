#pragma once

// Abelianized actions, abelianization of the mapping torus, the block-triangular orbit problem, and a
// bounded conjugacy test for automorphisms.

#include <fpaut/automorphism.hpp>
#include <fpaut/enumerate.hpp>
#include <fpaut/smith.hpp>

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fpaut {

/// Exponent-sum vector of w in G_ab = Z^(n_1 + ... + n_p) + Z^k.
inline IntVector abelianize(const Word& w) {
  const Presentation& pres = w.presentation();
  IntVector v(static_cast<std::size_t>(pres.generator_count()), 0);
  for (const auto& s : w.syllables()) {
    if (s.is_free()) {
      v[static_cast<std::size_t>(pres.free_generator_index(s.index))] += s.exponents[0];
      continue;
    }
    for (std::size_t c = 0; c < s.exponents.size(); ++c)
      v[static_cast<std::size_t>(pres.generator_index(s.index, static_cast<int>(c)))] += s.exponents[c];
  }
  return v;
}

/// Column g is the exponent-sum vector of phi(generator g).
inline IntegerMatrix abelianized_action(const Automorphism& phi) {
  const auto n = static_cast<std::size_t>(phi.presentation().generator_count());
  IntegerMatrix m(n, n);
  for (std::size_t g = 0; g < n; ++g) m.set_column(g, abelianize(phi.images()[g]));
  return m;
}

// --- mapping torus abelianization ----------------------------------------------------

/// coker(Phi - I) + Z<t>. Coordinates are the nontrivial summands of the cokernel in Smith order, then t.
struct AbelianizationReport {
  IntegerMatrix action;
  SmithForm smith;                          // of action - I
  IntVector invariant_factors;              // d > 1 first (divisibility chain), then 0 per free summand
  int free_rank = 0;                        // includes t
  std::vector<IntegerMatrix> factor_images; // column j: image of a_{i,j}
  IntVector t_image;

  /// "Z^3 + Z/2", "0" for the trivial group.
  std::string group_string() const {
    std::string s;
    if (free_rank > 0) s = free_rank == 1 ? "Z" : "Z^" + std::to_string(free_rank);
    for (const auto& d : invariant_factors) {
      if (d == 0) continue;
      if (!s.empty()) s += " + ";
      s += "Z/" + d.str();
    }
    return s.empty() ? "0" : s;
  }
};

inline AbelianizationReport mapping_torus_abelianization(const Automorphism& phi) {
  AbelianizationReport r;
  r.action = abelianized_action(phi);
  const std::size_t n = r.action.rows();
  r.smith = smith_normal_form(r.action - IntegerMatrix::identity(n));
  // Summand k of Z^n / im(D) has order d_k (0 = infinite); x maps to U x.
  std::vector<std::size_t> kept;
  for (std::size_t k = 0; k < n; ++k) {
    const Integer d = r.smith.D(k, k);
    if (d == 1) continue;
    kept.push_back(k);
    if (d > 1) r.invariant_factors.push_back(d);
  }
  for (std::size_t k : kept)
    if (r.smith.D(k, k) == 0) r.invariant_factors.push_back(0);
  r.invariant_factors.push_back(0);
  r.free_rank = static_cast<int>(std::count(r.invariant_factors.begin(), r.invariant_factors.end(), Integer(0)));

  // Rows in the order of invariant_factors: torsion summands, then free ones, then t.
  std::vector<std::size_t> order;
  for (std::size_t k : kept)
    if (r.smith.D(k, k) != 0) order.push_back(k);
  for (std::size_t k : kept)
    if (r.smith.D(k, k) == 0) order.push_back(k);
  auto image_of = [&](std::size_t g) {
    IntVector v(order.size() + 1, 0);
    for (std::size_t row = 0; row < order.size(); ++row) {
      const std::size_t k = order[row];
      Integer x = r.smith.U(k, g);
      const Integer d = r.smith.D(k, k);
      if (d != 0) x = ((x % d) + d) % d;
      v[row] = x;
    }
    return v;
  };
  const Presentation& pres = phi.presentation();
  for (int i = 0; i < pres.factor_count(); ++i) {
    IntegerMatrix b(order.size() + 1, static_cast<std::size_t>(pres.rank(i)));
    for (int c = 0; c < pres.rank(i); ++c)
      b.set_column(static_cast<std::size_t>(c), image_of(static_cast<std::size_t>(pres.generator_index(i, c))));
    r.factor_images.push_back(std::move(b));
  }
  r.t_image.assign(order.size() + 1, 0);
  r.t_image.back() = 1;
  return r;
}

// --- block-triangular orbit problem ------------------------------------------------------

/// rho = [[I_n, B], [0, U]] with U in GL_m(Z) must send each input into its target: exactly, or into
/// target + (column span of lattice) when the lattice has columns.
struct BlockConstraint {
  IntVector input;
  IntVector target;
  IntegerMatrix lattice;
};

struct BlockOrbitInstance {
  int n = 0, m = 0;
  std::vector<BlockConstraint> constraints;
  int entry_bound = 4;  // for the search over U when no closed form applies
};

struct BlockOrbitResult {
  enum class Status { witness, no_solution, undecided };
  Status status = Status::undecided;
  IntegerMatrix rho;
  std::string reason;
  bool exhaustive = false;  // the search over U covered all of GL_m(Z)
};

inline const char* to_string(BlockOrbitResult::Status s) {
  switch (s) {
    case BlockOrbitResult::Status::witness: return "witness";
    case BlockOrbitResult::Status::no_solution: return "no_solution";
    default: return "undecided";
  }
}

namespace detail {

inline IntVector sub_vector(const IntVector& v, std::size_t from, std::size_t len) {
  return IntVector(v.begin() + static_cast<std::ptrdiff_t>(from), v.begin() + static_cast<std::ptrdiff_t>(from + len));
}

inline IntegerMatrix assemble_rho(int n, int m, const IntegerMatrix& b, const IntegerMatrix& u) {
  const auto nn = static_cast<std::size_t>(n), mm = static_cast<std::size_t>(m);
  IntegerMatrix rho = IntegerMatrix::identity(nn + mm);
  for (std::size_t r = 0; r < nn; ++r)
    for (std::size_t c = 0; c < mm; ++c) rho(r, nn + c) = b(r, c);
  for (std::size_t r = 0; r < mm; ++r)
    for (std::size_t c = 0; c < mm; ++c) rho(nn + r, nn + c) = u(r, c);
  return rho;
}

inline bool in_lattice(const IntVector& x, const IntegerMatrix& lattice) {
  if (lattice.cols() == 0) return is_zero(x);
  return solve_integer(lattice, x).has_value();
}

inline bool satisfies(const BlockOrbitInstance& inst, const IntegerMatrix& rho) {
  const auto nn = static_cast<std::size_t>(inst.n), mm = static_cast<std::size_t>(inst.m);
  for (std::size_t r = 0; r < nn + mm; ++r)
    for (std::size_t c = 0; c < nn + mm; ++c) {
      if (r < nn && c < nn && rho(r, c) != (r == c ? 1 : 0)) return false;
      if (r >= nn && c < nn && rho(r, c) != 0) return false;
    }
  IntegerMatrix u(mm, mm);
  for (std::size_t r = 0; r < mm; ++r)
    for (std::size_t c = 0; c < mm; ++c) u(r, c) = rho(nn + r, nn + c);
  if (mm > 0 && abs(determinant(u)) != 1) return false;
  for (const auto& k : inst.constraints) {
    IntVector diff = rho * k.input;
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= k.target[i];
    if (!in_lattice(diff, k.lattice)) return false;
  }
  return true;
}

/// Unimodular P and sign s with P v = s content(v) e_1.
inline std::pair<IntegerMatrix, Integer> column_reducer(const IntVector& v) {
  IntegerMatrix col(v.size(), 1);
  col.set_column(0, v);
  const SmithForm s = smith_normal_form(col);
  return {s.U, s.V(0, 0)};
}

/// Given U, finds B with every constraint met, by one integer linear system in (B, lattice coefficients).
inline std::optional<IntegerMatrix> solve_for_b(const BlockOrbitInstance& inst, const IntegerMatrix& u) {
  const auto nn = static_cast<std::size_t>(inst.n), mm = static_cast<std::size_t>(inst.m);
  std::size_t extra = 0;
  for (const auto& k : inst.constraints) extra += k.lattice.cols();
  const std::size_t unknowns = nn * mm + extra;
  const std::size_t equations = inst.constraints.size() * (nn + mm);
  IntegerMatrix a(equations, unknowns);
  IntVector rhs(equations, 0);
  std::size_t row = 0, lat = nn * mm;
  for (const auto& k : inst.constraints) {
    const IntVector v1 = sub_vector(k.input, 0, nn), v2 = sub_vector(k.input, nn, mm);
    const IntVector uv2 = u * v2;
    // Top block: v1 + B v2 - w1 = L_top lambda; bottom: U v2 - w2 = L_bottom lambda.
    for (std::size_t r = 0; r < nn + mm; ++r, ++row) {
      if (r < nn) {
        for (std::size_t c = 0; c < mm; ++c) a(row, r * mm + c) = v2[c];
        rhs[row] = k.target[r] - v1[r];
      } else {
        rhs[row] = k.target[r] - uv2[r - nn];
      }
      for (std::size_t c = 0; c < k.lattice.cols(); ++c) a(row, lat + c) = -k.lattice(r, c);
    }
    lat += k.lattice.cols();
  }
  if (unknowns == 0) {
    if (!is_zero(rhs)) return std::nullopt;
    return IntegerMatrix(nn, mm);
  }
  const auto z = solve_integer(a, rhs);
  if (!z) return std::nullopt;
  IntegerMatrix b(nn, mm);
  for (std::size_t r = 0; r < nn; ++r)
    for (std::size_t c = 0; c < mm; ++c) b(r, c) = (*z)[r * mm + c];
  return b;
}

/// Calls visit on every U in GL_m(Z) with entries in [-bound, bound] until it returns true.
inline bool for_each_bounded_unimodular(std::size_t m, int bound, const std::function<bool(const IntegerMatrix&)>& visit) {
  IntegerMatrix u(m, m);
  const std::size_t cells = m * m;
  std::vector<int> digits(cells, -bound);
  for (;;) {
    for (std::size_t i = 0; i < cells; ++i) u(i / m, i % m) = digits[i];
    if (abs(determinant(u)) == 1 && visit(u)) return true;
    std::size_t pos = 0;
    while (pos < cells && digits[pos] == bound) digits[pos++] = -bound;
    if (pos == cells) return false;
    ++digits[pos];
  }
}

}  // namespace detail

inline BlockOrbitResult block_orbit_solve(const BlockOrbitInstance& inst) {
  using Status = BlockOrbitResult::Status;
  if (inst.n < 0 || inst.m < 0) throw DimensionMismatch("negative block size");
  const auto nn = static_cast<std::size_t>(inst.n), mm = static_cast<std::size_t>(inst.m);
  for (const auto& k : inst.constraints) {
    if (k.input.size() != nn + mm || k.target.size() != nn + mm)
      throw DimensionMismatch("constraint vectors must have length n + m");
    if (k.lattice.cols() > 0 && k.lattice.rows() != nn + mm) throw DimensionMismatch("lattice generators must have length n + m");
  }
  BlockOrbitResult r;
  auto accept = [&](const IntegerMatrix& rho) {
    if (!detail::satisfies(inst, rho)) throw std::logic_error("block_orbit_solve witness failed re-verification");
    r.status = Status::witness;
    r.rho = rho;
    return r;
  };

  // Necessary conditions of exact constraints: U preserves content, and v_2 = 0 forces w_1 = v_1.
  for (const auto& k : inst.constraints) {
    if (k.lattice.cols() > 0) continue;
    const IntVector v1 = detail::sub_vector(k.input, 0, nn), v2 = detail::sub_vector(k.input, nn, mm);
    const IntVector w1 = detail::sub_vector(k.target, 0, nn), w2 = detail::sub_vector(k.target, nn, mm);
    if (content(v2) != content(w2)) {
      r.status = Status::no_solution;
      r.reason = "content " + content(v2).str() + " != " + content(w2).str();
      return r;
    }
    const Integer c = content(v2);
    for (std::size_t i = 0; i < nn; ++i) {
      const Integer d = w1[i] - v1[i];
      if (c == 0 ? d != 0 : d % c != 0) {
        r.status = Status::no_solution;
        r.reason = c == 0 ? "lower block is zero but the upper blocks differ"
                          : "content " + c.str() + " does not divide w_1 - v_1";
        return r;
      }
    }
  }

  // One exact constraint: closed form.
  if (inst.constraints.size() == 1 && inst.constraints[0].lattice.cols() == 0) {
    const auto& k = inst.constraints[0];
    const IntVector v2 = detail::sub_vector(k.input, nn, mm), w2 = detail::sub_vector(k.target, nn, mm);
    IntegerMatrix u = IntegerMatrix::identity(mm);
    if (!is_zero(v2)) {
      const auto [pv, sv] = detail::column_reducer(v2);
      const auto [pw, sw] = detail::column_reducer(w2);
      IntegerMatrix sgn = IntegerMatrix::identity(mm);
      sgn(0, 0) = sv * sw;
      u = unimodular_inverse(pw) * sgn * pv;
    }
    const auto b = detail::solve_for_b(inst, u);
    if (!b) throw std::logic_error("block_orbit_solve closed form produced no B");
    r.exhaustive = true;
    return accept(detail::assemble_rho(inst.n, inst.m, *b, u));
  }

  // General case: search U, solving exactly for B. For m <= 1 the search covers GL_m(Z).
  r.exhaustive = mm <= 1;
  std::optional<IntegerMatrix> found;
  detail::for_each_bounded_unimodular(mm, mm <= 1 ? 1 : inst.entry_bound, [&](const IntegerMatrix& u) {
    const auto b = detail::solve_for_b(inst, u);
    if (!b) return false;
    found = detail::assemble_rho(inst.n, inst.m, *b, u);
    return true;
  });
  if (found) return accept(*found);
  r.status = r.exhaustive ? Status::no_solution : Status::undecided;
  r.reason = r.exhaustive ? "no U in GL_" + std::to_string(inst.m) + "(Z) admits a B"
                          : "no U with entries in [-" + std::to_string(inst.entry_bound) + ", " +
                                std::to_string(inst.entry_bound) + "] admits a B";
  return r;
}

// --- conjugacy ---------------------------------------------------------------------------

/// w with alpha = ad_w, if alpha is inner.
inline std::optional<Word> find_inner(const Automorphism& alpha) {
  const auto& pres = alpha.presentation_ptr();
  const Presentation& p = *pres;
  if (p.factor_count() == 0 && p.free_rank() == 0) return Word(pres);
  for (int i = 0; i < p.factor_count(); ++i) {
    if (alpha.factor_permutation()[static_cast<std::size_t>(i)] != i) return std::nullopt;
    const IntegerMatrix& m = alpha.factor_matrix(i);
    if (!(m == IntegerMatrix::identity(m.rows()))) return std::nullopt;
  }
  // Anchor: alpha(anchor subgroup) = h (anchor) h^-1, so w = h a with a in the anchor subgroup.
  Word h(pres);
  int anchor_generator = 0;
  std::function<bool(const Syllable&)> in_anchor;
  if (p.factor_count() > 0) {
    h = alpha.conjugator(0);
    in_anchor = [](const Syllable& s) { return s.is_factor(0); };
  } else {
    const Word x = generator_word(pres, p.free_generator_index(0));
    const auto c = conjugator_between(x, alpha.images()[static_cast<std::size_t>(p.free_generator_index(0))]);
    if (!c) return std::nullopt;
    h = *c;
    anchor_generator = p.free_generator_index(0);
    in_anchor = [](const Syllable& s) { return s.is_free() && s.index == 0; };
  }
  Word w = h;
  for (int g = 0; g < p.generator_count(); ++g) {
    const Word y = generator_word(pres, g);
    if (g == anchor_generator || (!y.empty() && in_anchor(y.front()))) continue;
    const Word c = invert(h) * alpha.images()[static_cast<std::size_t>(g)] * h;
    if (!c.empty() && in_anchor(c.front())) w = h * slice(c, 0, 1);
    break;
  }
  for (int g = 0; g < p.generator_count(); ++g) {
    const Word y = generator_word(pres, g);
    if (!(alpha.images()[static_cast<std::size_t>(g)] == w * y * invert(w))) return std::nullopt;
  }
  return w;
}

struct ConjugacyWitness {
  Automorphism chi;  // chi phi_1 chi^-1 = ad_inner phi_2
  Word inner;
};

struct ConjugacyReport {
  enum class Verdict { conjugate, distinguished, undecided };
  Verdict verdict = Verdict::undecided;
  std::string invariant;  // the distinguishing invariant
  std::string value1, value2;
  std::optional<ConjugacyWitness> witness;
  std::size_t candidates = 0;
  std::vector<std::string> warnings;
};

inline const char* to_string(ConjugacyReport::Verdict v) {
  switch (v) {
    case ConjugacyReport::Verdict::conjugate: return "conjugate";
    case ConjugacyReport::Verdict::distinguished: return "distinguished";
    default: return "undecided";
  }
}

namespace detail {

inline std::string vector_string(const IntVector& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i].str();
  return s + "]";
}

/// Named conjugacy invariants of the outer class, each recomputed from scratch.
inline std::vector<std::pair<std::string, std::string>> outer_invariants(const Automorphism& phi) {
  std::vector<std::pair<std::string, std::string>> out;
  const IntegerMatrix a = abelianized_action(phi);
  out.emplace_back("mapping torus abelianization", vector_string(mapping_torus_abelianization(phi).invariant_factors));
  out.emplace_back("characteristic polynomial", vector_string(characteristic_polynomial(a)));
  for (int c = -2; c <= 2; ++c)
    out.emplace_back("smith(Phi - " + std::to_string(c) + "I)", vector_string(smith_normal_form(scalar_shift(a, c)).diagonal()));
  // Each non-cyclic factor goes to a conjugate of a factor of the same rank; compare the multiset of
  // factor characteristic polynomials.
  const Presentation& p = phi.presentation();
  bool non_cyclic = p.factor_count() > 0;
  for (int i = 0; i < p.factor_count(); ++i) non_cyclic = non_cyclic && p.rank(i) >= 2;
  if (non_cyclic) {
    std::vector<std::string> polys;
    for (int i = 0; i < p.factor_count(); ++i) polys.push_back(vector_string(characteristic_polynomial(phi.factor_matrix(i))));
    std::sort(polys.begin(), polys.end());
    std::string s;
    for (const auto& x : polys) s += x;
    out.emplace_back("factor characteristic polynomials", s);
  }
  return out;
}

/// Unimodular X with entries in [-bound, bound] and X a = b X, at most `limit` of them, the identity first.
inline std::vector<IntegerMatrix> intertwiners(const IntegerMatrix& a, const IntegerMatrix& b, int bound, std::size_t limit) {
  std::vector<IntegerMatrix> out;
  const IntegerMatrix id = IntegerMatrix::identity(a.rows());
  if (a == b) out.push_back(id);
  for_each_bounded_unimodular(a.rows(), bound, [&](const IntegerMatrix& x) {
    if (x * a == b * x && !(x == id)) out.push_back(x);
    return out.size() >= limit;
  });
  return out;
}

}  // namespace detail

struct ConjugacyOptions {
  int conj_len = 1;              // partial conjugations by words of at most this length
  int intertwiner_bound = 1;     // entry bound for factor matrix intertwiners
  std::size_t intertwiner_limit = 4;
  std::size_t max_candidates = 20000;
};

/// Sound but incomplete: `distinguished` cites an invariant differing between the two, `conjugate`
/// ships a witness chi with chi phi_1 chi^-1 = ad_w phi_2 checked on every generator.
inline ConjugacyReport conjugacy_pipeline(const Automorphism& phi1, const Automorphism& phi2, const ConjugacyOptions& opt = {}) {
  require_same_presentation(phi1, phi2);
  phi1.require_factors_fixed("conjugacy_pipeline");
  phi2.require_factors_fixed("conjugacy_pipeline");
  using Verdict = ConjugacyReport::Verdict;
  ConjugacyReport r;
  const auto& pres = phi1.presentation_ptr();
  const Presentation& p = *pres;
  if (!is_toral(phi1).toral || !is_toral(phi2).toral) r.warnings.push_back("automorphism is not toral");
  for (int i = 0; i < p.factor_count(); ++i)
    if (p.rank(i) < 2) {
      r.warnings.push_back("factor A_" + std::to_string(i + 1) + " is cyclic");
      break;
    }

  const auto inv1 = detail::outer_invariants(phi1), inv2 = detail::outer_invariants(phi2);
  for (std::size_t k = 0; k < inv1.size(); ++k)
    if (inv1[k].second != inv2[k].second) {
      r.verdict = Verdict::distinguished;
      r.invariant = inv1[k].first;
      r.value1 = inv1[k].second;
      r.value2 = inv2[k].second;
      return r;
    }

  // Candidates chi: factor-wise intertwiners of the factor matrices, optionally followed by one
  // partial conjugation A_i -> u A_i u^-1.
  std::vector<Automorphism> base;
  {
    std::vector<std::vector<IntegerMatrix>> choices;
    for (int i = 0; i < p.factor_count(); ++i) {
      auto xs = detail::intertwiners(phi1.factor_matrix(i), phi2.factor_matrix(i), opt.intertwiner_bound, opt.intertwiner_limit);
      if (xs.empty()) xs.push_back(IntegerMatrix::identity(static_cast<std::size_t>(p.rank(i))));
      choices.push_back(std::move(xs));
    }
    std::vector<IntegerMatrix> pick;
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
      if (i == choices.size()) {
        base.push_back(factor_matrix_automorphism(pres, pick));
        return;
      }
      for (const auto& x : choices[i]) {
        pick.push_back(x);
        rec(i + 1);
        pick.pop_back();
      }
    };
    rec(0);
  }
  std::vector<std::pair<int, Word>> twists{{-1, Word(pres)}};
  for (int i = 0; i < p.factor_count(); ++i)
    for (const Word& u : enumerate_words(pres, {opt.conj_len, 1}))
      if (!u.empty() && !u.back().is_factor(i)) twists.emplace_back(i, u);

  const Automorphism phi2_inv = phi2.inverse();
  for (const auto& [factor, u] : twists) {
    for (const auto& b : base) {
      if (r.candidates >= opt.max_candidates) break;
      ++r.candidates;
      Automorphism chi = b;
      if (factor >= 0) {
        try {
          chi = compose(partial_conjugation(factor, u), b);
        } catch (const NotAnAutomorphism&) {
          continue;
        }
      }
      const Automorphism theta = compose(compose(chi, phi1), chi.inverse());
      const auto w = find_inner(compose(theta, phi2_inv));
      if (!w) continue;
      if (!(theta == compose(ad(*w), phi2))) throw std::logic_error("conjugacy witness failed re-verification");
      r.verdict = Verdict::conjugate;
      r.witness = ConjugacyWitness{chi, *w};
      return r;
    }
  }
  return r;
}

}  // namespace fpaut
