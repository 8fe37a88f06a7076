#pragma once

// Shared random generators and fixed automorphisms for the test suites.

#include <fpaut/automorphism.hpp>
#include <fpaut/word_io.hpp>
#include <fpaut/words.hpp>

#include <map>
#include <random>
#include <string>
#include <vector>

namespace fpaut::testing {

inline Syllable random_syllable(const Presentation& pres, std::mt19937& rng, int max_exp) {
  std::uniform_int_distribution<int> e(-max_exp, max_exp);
  const int slots = pres.factor_count() + pres.free_rank();
  std::uniform_int_distribution<int> slot(0, slots - 1);
  const int s = slot(rng);
  if (s < pres.factor_count()) {
    IntVector v(static_cast<std::size_t>(pres.rank(s)));
    do {
      for (auto& x : v) x = e(rng);
    } while (is_zero(v));
    return Syllable::factor(s, v);
  }
  int k = 0;
  while (k == 0) k = e(rng);
  return Syllable::free(s - pres.factor_count(), k);
}

/// Raw product of up to max_syllables random syllables, reduced.
inline Word random_word(const PresentationPtr& pres, std::mt19937& rng, int max_syllables, int max_exp = 2) {
  std::uniform_int_distribution<int> len(0, max_syllables);
  std::vector<Syllable> raw;
  const int n = len(rng);
  for (int i = 0; i < n; ++i) raw.push_back(random_syllable(*pres, rng, max_exp));
  return reduce(raw, pres);
}

inline Word random_nonempty_word(const PresentationPtr& pres, std::mt19937& rng, int max_syllables, int max_exp = 2) {
  for (;;) {
    Word w = random_word(pres, rng, max_syllables, max_exp);
    if (!w.empty()) return w;
  }
}

/// Builds an automorphism from generator-name -> word-text maps; unnamed generators are fixed.
inline Automorphism make_aut(const PresentationPtr& pres, const std::map<std::string, std::string>& images,
                             const std::map<std::string, std::string>& inverse_images) {
  std::vector<Word> img, inv;
  for (int g = 0; g < pres->generator_count(); ++g) {
    const std::string name = pres->generator_name(g);
    auto it = images.find(name);
    img.push_back(it == images.end() ? generator_word(pres, g) : parse_word(it->second, pres));
    auto jt = inverse_images.find(name);
    inv.push_back(jt == inverse_images.end() ? generator_word(pres, g) : parse_word(jt->second, pres));
  }
  return Automorphism::validate(img, inv);
}

inline PresentationPtr free_group(int k) { return make_presentation({}, k); }

/// F_2, x -> xy, y -> x.
inline Automorphism fibonacci() {
  return make_aut(free_group(2), {{"x1", "x1 x2"}, {"x2", "x1"}}, {{"x1", "x2"}, {"x2", "x2^-1 x1"}});
}

/// Z^2 * Z^2, identity on A_1, A_2 -> a1.1 A_2 a1.1^-1.
inline Automorphism toral_twist() {
  const auto pres = make_presentation({2, 2}, 0);
  return make_aut(pres, {{"a2.1", "a1.1 a2.1 a1.1^-1"}, {"a2.2", "a1.1 a2.2 a1.1^-1"}},
                  {{"a2.1", "a1.1^-1 a2.1 a1.1"}, {"a2.2", "a1.1^-1 a2.2 a1.1"}});
}

/// Z^2 * Z^3 preserving both factors, acting by Anosov-type matrices.
inline Automorphism intro_z2z3() {
  const auto pres = make_presentation({2, 3}, 0);
  return factor_matrix_automorphism(pres, {IntegerMatrix{{2, 1}, {1, 1}},
                                           IntegerMatrix{{1, 1, 0}, {0, 1, 1}, {1, 1, 1}}});
}

/// Z^2 * F_1: Anosov matrix on A_1, x -> x a1.1.
inline Automorphism anosov_with_twist() {
  const auto pres = make_presentation({2}, 1);
  return compose(factor_matrix_automorphism(pres, {IntegerMatrix{{2, 1}, {1, 1}}}),
                 free_transvection(0, parse_word("a1.1", pres)));
}

/// Z^2 * Z^2 * F_1 mixing both factors with the free letter.
inline Automorphism mixed_z2z2f1() {
  const auto pres = make_presentation({2, 2}, 1);
  return compose(partial_conjugation(1, parse_word("x1", pres)),
                 compose(free_transvection(0, parse_word("a1.1", pres)),
                         free_transvection(0, parse_word("a2.1", pres), false)));
}

inline Automorphism rank3_free() {
  return make_aut(free_group(3), {{"x1", "x2"}, {"x2", "x3"}, {"x3", "x1 x2"}},
                  {{"x1", "x3 x1^-1"}, {"x2", "x1"}, {"x3", "x2"}});
}

}  // namespace fpaut::testing
