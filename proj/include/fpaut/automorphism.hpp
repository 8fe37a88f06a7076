#pragma once

// Automorphisms of G preserving the free factor system {[A_1], ..., [A_p]}.
//
// An automorphism is given by the images of all generators together with the
// images under its inverse. Validation certifies the pair and extracts, for
// each factor i, the permutation sigma, the canonical conjugator g_i and the
// integer matrix M_i with
//
//     phi(a) = g_i * (M_i a) * g_i^-1,   M_i a in A_sigma(i),
//
// where g_i carries no trailing A_sigma(i) syllable.

#include <fpaut/errors.hpp>
#include <fpaut/matrix.hpp>
#include <fpaut/smith.hpp>
#include <fpaut/words.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fpaut {

class Automorphism {
 public:
  /// Certifies (images, inverse_images) as mutually inverse and factor-preserving.
  static Automorphism validate(std::vector<Word> images, std::vector<Word> inverse_images) {
    if (images.empty()) throw NotAnAutomorphism("empty image table");
    const PresentationPtr pres = images.front().presentation_ptr();
    const auto n = static_cast<std::size_t>(pres->generator_count());
    if (images.size() != n || inverse_images.size() != n)
      throw NotAnAutomorphism("image tables must list every generator");
    for (const auto& w : images) require_same_presentation(images.front(), w);
    for (const auto& w : inverse_images) require_same_presentation(images.front(), w);

    Automorphism phi;
    phi.pres_ = pres;
    phi.fwd_ = extract(std::move(images));
    phi.inv_ = extract(std::move(inverse_images));
    for (int g = 0; g < pres->generator_count(); ++g) {
      const Word s = generator_word(pres, g);
      if (!(apply_side(phi.fwd_, *pres, phi.inv_.images[static_cast<std::size_t>(g)]) == s) ||
          !(apply_side(phi.inv_, *pres, phi.fwd_.images[static_cast<std::size_t>(g)]) == s))
        throw NotAnAutomorphism("inverse table does not invert on generator " + pres->generator_name(g));
    }
    return phi;
  }

  static Automorphism identity(const PresentationPtr& pres) {
    std::vector<Word> gens;
    for (int g = 0; g < pres->generator_count(); ++g) gens.push_back(generator_word(pres, g));
    return validate(gens, gens);
  }

  const PresentationPtr& presentation_ptr() const noexcept { return pres_; }
  const Presentation& presentation() const noexcept { return *pres_; }

  const std::vector<Word>& images() const noexcept { return fwd_.images; }
  const std::vector<Word>& inverse_images() const noexcept { return inv_.images; }
  const Word& image(int generator) const { return fwd_.images.at(static_cast<std::size_t>(generator)); }

  /// sigma: phi(A_i) is conjugate to A_sigma(i).
  const std::vector<int>& factor_permutation() const noexcept { return fwd_.sigma; }
  const std::vector<Word>& conjugators() const noexcept { return fwd_.conj; }
  const Word& conjugator(int factor) const { return fwd_.conj.at(static_cast<std::size_t>(factor)); }
  /// Column j is the exponent vector of g_i^-1 phi(a_{i,j}) g_i in A_sigma(i).
  const IntegerMatrix& factor_matrix(int factor) const { return fwd_.mats.at(static_cast<std::size_t>(factor)); }

  /// True when every factor is sent to a conjugate of itself.
  bool fixes_factors() const noexcept {
    for (std::size_t i = 0; i < fwd_.sigma.size(); ++i)
      if (fwd_.sigma[i] != static_cast<int>(i)) return false;
    return true;
  }

  void require_factors_fixed(const char* what) const {
    if (!fixes_factors()) throw FactorsPermuted(std::string(what) + " needs an automorphism fixing every factor class");
  }

  Word apply(const Word& w) const {
    require_same_presentation(w, fwd_.images.front());
    return apply_side(fwd_, *pres_, w);
  }

  Word apply_inverse(const Word& w) const {
    require_same_presentation(w, fwd_.images.front());
    return apply_side(inv_, *pres_, w);
  }

  Automorphism inverse() const {
    Automorphism r = *this;
    std::swap(r.fwd_, r.inv_);
    return r;
  }

  friend bool operator==(const Automorphism& a, const Automorphism& b) {
    return a.fwd_.images == b.fwd_.images;
  }

 private:
  struct Side {
    std::vector<Word> images;
    std::vector<int> sigma;
    std::vector<Word> conj;
    std::vector<IntegerMatrix> mats;
  };

  Automorphism() = default;

  static Side extract(std::vector<Word> images) {
    const PresentationPtr pres = images.front().presentation_ptr();
    Side side;
    side.images = std::move(images);
    const int p = pres->factor_count();
    std::vector<bool> hit(static_cast<std::size_t>(p), false);
    for (int i = 0; i < p; ++i) {
      const auto ni = static_cast<std::size_t>(pres->rank(i));
      IntegerMatrix mat(ni, ni);
      std::optional<int> target;
      std::optional<Word> conj;
      for (std::size_t j = 0; j < ni; ++j) {
        const Word& w = side.images[static_cast<std::size_t>(pres->generator_index(i, static_cast<int>(j)))];
        const std::string name = pres->generator_name(pres->generator_index(i, static_cast<int>(j)));
        if (w.empty()) throw NotAnAutomorphism("generator " + name + " maps to the identity");
        const CyclicWord cw = cyclic_normal_form(w);
        if (cw.cyclic.size() != 1 || !cw.cyclic.front().is_factor())
          throw NotFactorPreserving("image of " + name + " is not conjugate into a factor");
        const int f = cw.cyclic.front().index;
        const Word u = strip_trailing(cw.conjugator, f);
        if (target && *target != f)
          throw NotFactorPreserving("images of factor " + std::to_string(i + 1) + " land in distinct factors");
        if (conj && !(*conj == u))
          throw NotFactorPreserving("no common conjugator for factor " + std::to_string(i + 1));
        if (pres->rank(f) != static_cast<int>(ni))
          throw NotFactorPreserving("factor " + std::to_string(i + 1) + " mapped into a factor of another rank");
        target = f;
        conj = u;
        mat.set_column(j, cw.cyclic.front().exponents);
      }
      if (hit[static_cast<std::size_t>(*target)])
        throw NotFactorPreserving("two factors map into the class of factor " + std::to_string(*target + 1));
      hit[static_cast<std::size_t>(*target)] = true;
      if (abs(determinant(mat)) != 1)
        throw NotAnAutomorphism("restriction to factor " + std::to_string(i + 1) + " is not invertible");
      side.sigma.push_back(*target);
      side.conj.push_back(*conj);
      side.mats.push_back(std::move(mat));
    }
    return side;
  }

  static Word apply_side(const Side& side, const Presentation& pres, const Word& w) {
    std::vector<Syllable> stack;
    auto append = [&](const Word& x) {
      for (const auto& t : x.syllables()) detail::push_reduced(stack, t);
    };
    for (const auto& s : w.syllables()) {
      if (s.is_factor()) {
        const auto i = static_cast<std::size_t>(s.index);
        IntVector v = side.mats[i] * std::span<const Integer>(s.exponents);
        append(side.conj[i]);
        detail::push_reduced(stack, Syllable::factor(side.sigma[i], std::move(v)));
        append(invert(side.conj[i]));
      } else {
        const auto g = static_cast<std::size_t>(pres.free_generator_index(s.index));
        append(s.exponents[0] == 1 ? side.images[g] : power(side.images[g], s.exponents[0]));
      }
    }
    return reduce(stack, w.presentation_ptr());
  }

  PresentationPtr pres_;
  Side fwd_;
  Side inv_;
};

inline Word apply(const Automorphism& phi, const Word& w) { return phi.apply(w); }

/// phi^n(w), reducing after every application; negative n uses the inverse table.
inline Word apply_power(const Automorphism& phi, long n, Word w) {
  for (long k = 0; k < n; ++k) w = phi.apply(w);
  for (long k = 0; k > n; --k) w = phi.apply_inverse(w);
  return w;
}

inline void require_same_presentation(const Automorphism& a, const Automorphism& b) {
  if (!(a.presentation() == b.presentation())) throw PresentationMismatch("automorphisms over different groups");
}

/// phi o psi (psi applied first).
inline Automorphism compose(const Automorphism& phi, const Automorphism& psi) {
  require_same_presentation(phi, psi);
  std::vector<Word> img, inv;
  const auto n = static_cast<std::size_t>(phi.presentation().generator_count());
  img.reserve(n);
  inv.reserve(n);
  for (std::size_t g = 0; g < n; ++g) {
    img.push_back(phi.apply(psi.images()[g]));
    inv.push_back(psi.apply_inverse(phi.inverse_images()[g]));
  }
  return Automorphism::validate(std::move(img), std::move(inv));
}

inline Automorphism power(const Automorphism& phi, long n) {
  Automorphism base = n < 0 ? phi.inverse() : phi;
  unsigned long e = n < 0 ? static_cast<unsigned long>(-n) : static_cast<unsigned long>(n);
  Automorphism acc = Automorphism::identity(phi.presentation_ptr());
  while (e) {
    if (e & 1UL) acc = compose(acc, base);
    e >>= 1;
    if (e) base = compose(base, base);
  }
  return acc;
}

/// Inner automorphism s -> g s g^-1.
inline Automorphism ad(const Word& g) {
  const PresentationPtr& pres = g.presentation_ptr();
  const Word gi = invert(g);
  std::vector<Word> img, inv;
  for (int s = 0; s < pres->generator_count(); ++s) {
    const Word w = generator_word(pres, s);
    img.push_back(g * w * gi);
    inv.push_back(gi * w * g);
  }
  return Automorphism::validate(std::move(img), std::move(inv));
}

struct ToralReport {
  bool toral = false;
  std::vector<Word> witnesses;  // g_i with ad_{g_i^-1} o phi |A_i = id when toral
};

/// Whether ad_{g_i^-1} o phi restricts to the identity on every factor.
inline ToralReport is_toral(const Automorphism& phi) {
  phi.require_factors_fixed("is_toral");
  ToralReport r;
  r.toral = true;
  for (int i = 0; i < phi.presentation().factor_count(); ++i) {
    const IntegerMatrix& m = phi.factor_matrix(i);
    if (!(m == IntegerMatrix::identity(m.rows()))) r.toral = false;
  }
  r.witnesses = phi.conjugators();
  return r;
}

/// Per factor: does M_i fix a nonzero vector (a central element of the factor mapping torus)?
inline std::vector<bool> check_central_condition(const Automorphism& phi) {
  phi.require_factors_fixed("check_central_condition");
  std::vector<bool> out;
  for (int i = 0; i < phi.presentation().factor_count(); ++i) {
    const IntegerMatrix& m = phi.factor_matrix(i);
    out.push_back(determinant(m - IntegerMatrix::identity(m.rows())) == 0);
  }
  return out;
}

// --- elementary automorphisms ---------------------------------------------

/// Acts on each factor A_i by mats[i] (column convention) and fixes the free letters.
inline Automorphism factor_matrix_automorphism(const PresentationPtr& pres, const std::vector<IntegerMatrix>& mats) {
  if (static_cast<int>(mats.size()) != pres->factor_count()) throw DimensionMismatch("one matrix per factor");
  std::vector<Word> img, inv;
  for (int g = 0; g < pres->generator_count(); ++g) {
    img.push_back(generator_word(pres, g));
    inv.push_back(generator_word(pres, g));
  }
  for (int i = 0; i < pres->factor_count(); ++i) {
    const IntegerMatrix& m = mats[static_cast<std::size_t>(i)];
    if (m.rows() != static_cast<std::size_t>(pres->rank(i)) || !m.square())
      throw DimensionMismatch("factor matrix size");
    const IntegerMatrix mi = unimodular_inverse(m);
    for (int j = 0; j < pres->rank(i); ++j) {
      const auto g = static_cast<std::size_t>(pres->generator_index(i, j));
      img[g] = single(pres, Syllable::factor(i, m.column(static_cast<std::size_t>(j))));
      inv[g] = single(pres, Syllable::factor(i, mi.column(static_cast<std::size_t>(j))));
    }
  }
  return Automorphism::validate(std::move(img), std::move(inv));
}

/// A_i -> w A_i w^-1, everything else fixed. A trailing A_i syllable of w is dropped; w must not otherwise involve A_i.
inline Automorphism partial_conjugation(int factor, const Word& conj) {
  const PresentationPtr& pres = conj.presentation_ptr();
  std::vector<Word> img, inv;
  const Word w = strip_trailing(conj, factor);
  const Word wi = invert(w);
  for (int g = 0; g < pres->generator_count(); ++g) {
    const Word s = generator_word(pres, g);
    const bool in_factor = g < pres->factor_generator_count() && g >= pres->factor_offset(factor) &&
                           g < pres->factor_offset(factor) + pres->rank(factor);
    img.push_back(in_factor ? w * s * wi : s);
    inv.push_back(in_factor ? wi * s * w : s);
  }
  return Automorphism::validate(std::move(img), std::move(inv));
}

/// x_l -> x_l w (right) or w x_l (left); w must not involve x_l.
inline Automorphism free_transvection(int letter, const Word& w, bool right = true) {
  const PresentationPtr& pres = w.presentation_ptr();
  std::vector<Word> img, inv;
  const Word wi = invert(w);
  for (int g = 0; g < pres->generator_count(); ++g) {
    const Word s = generator_word(pres, g);
    if (g == pres->free_generator_index(letter)) {
      img.push_back(right ? s * w : w * s);
      inv.push_back(right ? s * wi : wi * s);
    } else {
      img.push_back(s);
      inv.push_back(s);
    }
  }
  return Automorphism::validate(std::move(img), std::move(inv));
}

}  // namespace fpaut
