#pragma once

// Brute-force oracles that avoid the library's search code: raw letter strings, letter-by-letter
// substitution, and conjugacy by comparing all syllable rotations.

#include <fpaut/automorphism.hpp>
#include <fpaut/graph_map.hpp>
#include <fpaut/words.hpp>

#include <ostream>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace fpaut::oracle {

/// A letter is (generator, +1 or -1).
using Letter = std::pair<int, int>;

inline std::vector<Letter> letters_of(const Word& w) {
  const Presentation& pres = w.presentation();
  std::vector<Letter> out;
  for (const auto& s : w.syllables()) {
    if (s.is_free()) {
      const int e = s.exponents[0].convert_to<int>();
      for (int r = 0; r < std::abs(e); ++r) out.emplace_back(pres.free_generator_index(s.index), e > 0 ? 1 : -1);
      continue;
    }
    for (std::size_t c = 0; c < s.exponents.size(); ++c) {
      const int e = s.exponents[c].convert_to<int>();
      for (int r = 0; r < std::abs(e); ++r) out.emplace_back(pres.generator_index(s.index, static_cast<int>(c)), e > 0 ? 1 : -1);
    }
  }
  return out;
}

inline Word word_of(const PresentationPtr& pres, const std::vector<Letter>& letters) {
  std::vector<Syllable> raw;
  for (auto [g, e] : letters) {
    const Word one = generator_word(pres, g, e);
    raw.push_back(one.front());
  }
  return reduce(raw, pres);
}

/// phi applied by substituting the image letters of each letter.
inline Word substitute(const Automorphism& phi, const Word& w) {
  std::vector<Letter> out;
  for (auto [g, e] : letters_of(w)) {
    auto img = letters_of(phi.image(g));
    if (e < 0) {
      std::reverse(img.begin(), img.end());
      for (auto& l : img) l.second = -l.second;
    }
    out.insert(out.end(), img.begin(), img.end());
  }
  return word_of(w.presentation_ptr(), out);
}

inline Word substitute_power(const Automorphism& phi, int n, Word w) {
  for (int r = 0; r < n; ++r) w = substitute(phi, w);
  return w;
}

/// Cyclic reduction by repeated conjugation with the last syllable.
inline Word cyclically_reduce(Word w) {
  while (w.size() >= 2 && w.front().same_slot(w.back())) {
    const Word last = slice(w, w.size() - 1, w.size());
    w = last * w * invert(last);
  }
  return w;
}

/// The smallest rendering among all syllable rotations of the cyclic reduction.
inline std::string class_name(const Word& w) {
  const Word c = cyclically_reduce(w);
  std::string best;
  for (std::size_t k = 0; k < std::max<std::size_t>(c.size(), 1); ++k) {
    std::vector<Syllable> rot;
    for (std::size_t j = 0; j < c.size(); ++j) rot.push_back(c[(k + j) % c.size()]);
    const std::string s = render(reduce(rot, c.presentation_ptr()));
    if (k == 0 || s < best) best = s;
  }
  return best;
}

inline bool hyperbolic(const Word& w) {
  const Word c = cyclically_reduce(w);
  return c.size() >= 2 || (c.size() == 1 && c.front().is_free());
}

inline bool within_bounds(const Word& w, int max_len, int max_l1) {
  if (syllable_length(w) > static_cast<std::size_t>(max_len)) return false;
  for (const auto& s : w.syllables())
    if (s.is_factor() && l1_norm(s.exponents) > max_l1) return false;
  return true;
}

/// All reduced words from raw letter strings of length <= len.
inline std::vector<Word> raw_words(const PresentationPtr& pres, int len) {
  std::set<Word> seen;
  std::vector<Word> out;
  std::vector<Letter> cur;
  std::function<void()> rec = [&]() {
    const Word w = word_of(pres, cur);
    if (seen.insert(w).second) out.push_back(w);
    if (static_cast<int>(cur.size()) == len) return;
    for (int g = 0; g < pres->generator_count(); ++g)
      for (int e : {1, -1}) {
        cur.emplace_back(g, e);
        rec();
        cur.pop_back();
      }
  };
  rec();
  return out;
}

/// Classes [g] (by class_name) of hyperbolic g within the bounds with [phi^n g] = [g] for some n <= N.
inline std::set<std::string> periodic_classes(const Automorphism& phi, int max_len, int max_exp, int max_l1) {
  std::set<std::string> classes, out;
  for (const Word& w : raw_words(phi.presentation_ptr(), max_len)) {
    if (w.empty() || !hyperbolic(w)) continue;
    const Word c = cyclically_reduce(w);
    if (!within_bounds(c, max_len, max_l1)) continue;
    const std::string name = class_name(c);
    if (!classes.insert(name).second) continue;
    Word cur = c;
    for (int n = 1; n <= max_exp; ++n) {
      cur = substitute(phi, cur);
      if (class_name(cur) == name) {
        out.insert(name);
        break;
      }
    }
  }
  return out;
}

struct TwinKey {
  int m;
  std::string u;
  int i;
  std::string v;
  int j;
  auto operator<=>(const TwinKey&) const = default;
};

/// The two cosets in a fixed order, so keys from different enumerations compare.
inline TwinKey twin_key(int m, std::string u, int i, std::string v, int j) {
  if (std::tie(v, j) < std::tie(u, i)) {
    std::swap(u, v);
    std::swap(i, j);
  }
  return {m, std::move(u), i, std::move(v), j};
}

inline std::ostream& operator<<(std::ostream& os, const TwinKey& k) {
  return os << "m=" << k.m << " (" << (k.u.empty() ? "1" : k.u) << ", " << k.i << ") (" << (k.v.empty() ? "1" : k.v) << ", "
            << k.j << ")";
}

/// Twinned pairs found by matching the fixed vertices u v_i, v v_j of the two subgroups in the Bass-Serre
/// tree with their images, the images read off from substituted conjugates u s u^-1.
inline std::set<TwinKey> twinned_pairs(const Automorphism& phi, int max_exp, int max_len, int max_l1) {
  const auto& pres = phi.presentation_ptr();
  struct Coset {
    Word u;
    int i;
  };
  std::vector<Coset> cosets;
  for (const Word& u : raw_words(pres, max_len)) {
    if (!within_bounds(u, max_len, max_l1)) continue;
    for (int i = 0; i < pres->factor_count(); ++i)
      if (u.empty() || !u.back().is_factor(i)) cosets.push_back({u, i});
  }
  std::set<TwinKey> out;
  for (int m = 1; m <= max_exp; ++m) {
    // phi^m(u A_i u^-1) = X A_i X^-1: X is the part of phi^m(u s u^-1) before its middle syllable.
    std::vector<TreeVertex> images;
    for (const auto& c : cosets) {
      const Word s = generator_word(pres, pres->generator_index(c.i, 0));
      const Word img = substitute_power(phi, m, c.u * s * invert(c.u));
      const std::size_t r = img.size() / 2;
      images.push_back(TreeVertex::factor_vertex(c.i, slice(img, 0, r)));
    }
    for (std::size_t a = 0; a < cosets.size(); ++a)
      for (std::size_t b = a + 1; b < cosets.size(); ++b) {
        const TreeVertex va = TreeVertex::factor_vertex(cosets[a].i, cosets[a].u);
        const TreeVertex vb = TreeVertex::factor_vertex(cosets[b].i, cosets[b].u);
        if (va == vb) continue;
        const auto g = detail::matching_translation(va, vb, images[a], images[b]);
        if (!g) continue;
        out.insert(twin_key(m, render(cosets[a].u), cosets[a].i, render(cosets[b].u), cosets[b].i));
      }
  }
  return out;
}

}  // namespace fpaut::oracle
