#pragma once

// Normal forms for elements of G = A_1 * ... * A_p * F_k where every A_i is
// free abelian of rank n_i. An element is stored as its reduced syllable
// sequence; all indices are 0-based internally and 1-based in text.

#include <fpaut/errors.hpp>
#include <fpaut/integer.hpp>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <memory>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace fpaut {

class Presentation {
 public:
  Presentation(std::vector<int> abelian_ranks, int free_rank)
      : ranks_(std::move(abelian_ranks)), free_rank_(free_rank) {
    if (free_rank_ < 0) throw InvalidPresentation("negative free rank");
    if (ranks_.empty() && free_rank_ == 0)
      throw InvalidPresentation("trivial group: no factors and free rank 0");
    for (int n : ranks_)
      if (n < 1) throw InvalidPresentation("factor rank must be positive");
    offsets_.reserve(ranks_.size() + 1);
    int acc = 0;
    for (int n : ranks_) {
      offsets_.push_back(acc);
      acc += n;
    }
    offsets_.push_back(acc);
  }

  int factor_count() const noexcept { return static_cast<int>(ranks_.size()); }
  int free_rank() const noexcept { return free_rank_; }
  int rank(int factor) const { return ranks_.at(static_cast<std::size_t>(factor)); }
  const std::vector<int>& abelian_ranks() const noexcept { return ranks_; }

  /// (free rank, number of factors).
  std::pair<int, int> scott_complexity() const noexcept { return {free_rank_, factor_count()}; }

  // Generators are numbered factor by factor, then the free letters.
  int factor_generator_count() const noexcept { return offsets_.back(); }
  int generator_count() const noexcept { return offsets_.back() + free_rank_; }
  int generator_index(int factor, int coordinate) const {
    return offsets_[static_cast<std::size_t>(factor)] + coordinate;
  }
  int free_generator_index(int letter) const { return offsets_.back() + letter; }
  int factor_offset(int factor) const { return offsets_[static_cast<std::size_t>(factor)]; }

  std::string generator_name(int g) const {
    if (g >= factor_generator_count())
      return "x" + std::to_string(g - factor_generator_count() + 1);
    int i = 0;
    while (offsets_[static_cast<std::size_t>(i) + 1] <= g) ++i;
    return "a" + std::to_string(i + 1) + "." + std::to_string(g - offsets_[static_cast<std::size_t>(i)] + 1);
  }

  friend bool operator==(const Presentation& a, const Presentation& b) {
    return a.ranks_ == b.ranks_ && a.free_rank_ == b.free_rank_;
  }

 private:
  std::vector<int> ranks_;
  int free_rank_;
  std::vector<int> offsets_;
};

using PresentationPtr = std::shared_ptr<const Presentation>;

inline PresentationPtr make_presentation(std::vector<int> abelian_ranks, int free_rank) {
  return std::make_shared<const Presentation>(std::move(abelian_ranks), free_rank);
}

struct Syllable {
  enum class Kind : std::uint8_t { Factor, Free };

  Kind kind = Kind::Factor;
  int index = 0;
  IntVector exponents;  // length n_i for a factor syllable, length 1 for a free one

  static Syllable factor(int i, IntVector v) { return {Kind::Factor, i, std::move(v)}; }
  static Syllable free(int letter, Integer e) { return {Kind::Free, letter, IntVector{std::move(e)}}; }

  bool is_factor() const noexcept { return kind == Kind::Factor; }
  bool is_free() const noexcept { return kind == Kind::Free; }
  bool is_factor(int i) const noexcept { return kind == Kind::Factor && index == i; }
  bool same_slot(const Syllable& o) const noexcept { return kind == o.kind && index == o.index; }
  bool is_trivial() const { return is_zero(exponents); }

  Syllable inverse() const {
    Syllable s = *this;
    for (auto& x : s.exponents) x = -x;
    return s;
  }

  void absorb(const Syllable& o) {
    for (std::size_t j = 0; j < exponents.size(); ++j) exponents[j] += o.exponents[j];
  }

  friend bool operator==(const Syllable& a, const Syllable& b) {
    return a.kind == b.kind && a.index == b.index && a.exponents == b.exponents;
  }
  friend bool operator<(const Syllable& a, const Syllable& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.index != b.index) return a.index < b.index;
    return std::lexicographical_compare(a.exponents.begin(), a.exponents.end(),
                                        b.exponents.begin(), b.exponents.end());
  }
};

namespace detail {

inline void check_syllable(const Syllable& s, const Presentation& pres) {
  if (s.is_factor()) {
    if (s.index < 0 || s.index >= pres.factor_count())
      throw IndexOutOfRange("factor " + std::to_string(s.index + 1) + " does not exist");
    if (static_cast<int>(s.exponents.size()) != pres.rank(s.index))
      throw IndexOutOfRange("exponent vector of length " + std::to_string(s.exponents.size()) +
                            " for factor " + std::to_string(s.index + 1) + " of rank " +
                            std::to_string(pres.rank(s.index)));
  } else {
    if (s.index < 0 || s.index >= pres.free_rank())
      throw IndexOutOfRange("free letter " + std::to_string(s.index + 1) + " does not exist");
    if (s.exponents.size() != 1) throw IndexOutOfRange("free syllable needs one exponent");
  }
}

// Pushes s onto a reduced stack, merging with the top and cascading.
inline void push_reduced(std::vector<Syllable>& stack, Syllable s) {
  if (s.is_trivial()) return;
  if (!stack.empty() && stack.back().same_slot(s)) {
    stack.back().absorb(s);
    if (stack.back().is_trivial()) stack.pop_back();
    return;
  }
  stack.push_back(std::move(s));
}

}  // namespace detail

class Word {
 public:
  explicit Word(PresentationPtr pres) : pres_(std::move(pres)) {}

  const Presentation& presentation() const noexcept { return *pres_; }
  const PresentationPtr& presentation_ptr() const noexcept { return pres_; }

  std::span<const Syllable> syllables() const noexcept { return syllables_; }
  std::size_t size() const noexcept { return syllables_.size(); }
  bool empty() const noexcept { return syllables_.empty(); }
  const Syllable& front() const { return syllables_.front(); }
  const Syllable& back() const { return syllables_.back(); }
  const Syllable& operator[](std::size_t i) const { return syllables_[i]; }

  friend bool operator==(const Word& a, const Word& b) {
    return a.syllables_ == b.syllables_ && (a.pres_ == b.pres_ || *a.pres_ == *b.pres_);
  }
  friend bool operator<(const Word& a, const Word& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return std::lexicographical_compare(a.syllables_.begin(), a.syllables_.end(),
                                        b.syllables_.begin(), b.syllables_.end());
  }

 private:
  Word(PresentationPtr pres, std::vector<Syllable> reduced)
      : pres_(std::move(pres)), syllables_(std::move(reduced)) {}

  friend Word reduce(std::span<const Syllable>, const PresentationPtr&);
  friend Word multiply(const Word&, const Word&);
  friend Word invert(const Word&);
  friend Word slice(const Word&, std::size_t, std::size_t);

  PresentationPtr pres_;
  std::vector<Syllable> syllables_;
};

/// Free-product normal form of a raw syllable sequence (zero syllables allowed).
inline Word reduce(std::span<const Syllable> raw, const PresentationPtr& pres) {
  std::vector<Syllable> stack;
  stack.reserve(raw.size());
  for (const auto& s : raw) {
    detail::check_syllable(s, *pres);
    detail::push_reduced(stack, s);
  }
  return Word(pres, std::move(stack));
}

inline Word reduce(std::initializer_list<Syllable> raw, const PresentationPtr& pres) {
  return reduce(std::span<const Syllable>(raw.begin(), raw.size()), pres);
}

inline void require_same_presentation(const Word& u, const Word& v) {
  if (u.presentation_ptr() != v.presentation_ptr() && !(u.presentation() == v.presentation()))
    throw PresentationMismatch("words over different presentations");
}

inline Word multiply(const Word& u, const Word& v) {
  require_same_presentation(u, v);
  std::vector<Syllable> stack(u.syllables_);
  stack.reserve(u.size() + v.size());
  for (const auto& s : v.syllables_) detail::push_reduced(stack, s);
  return Word(u.pres_, std::move(stack));
}

inline Word operator*(const Word& u, const Word& v) { return multiply(u, v); }

inline Word invert(const Word& u) {
  std::vector<Syllable> out;
  out.reserve(u.size());
  for (auto it = u.syllables_.rbegin(); it != u.syllables_.rend(); ++it) out.push_back(it->inverse());
  return Word(u.pres_, std::move(out));
}

/// Contiguous sub-word [begin, end); any contiguous piece of a normal form is normal.
inline Word slice(const Word& w, std::size_t begin, std::size_t end) {
  return Word(w.pres_, std::vector<Syllable>(w.syllables_.begin() + static_cast<std::ptrdiff_t>(begin),
                                             w.syllables_.begin() + static_cast<std::ptrdiff_t>(end)));
}

inline Word single(const PresentationPtr& pres, Syllable s) { return reduce({std::move(s)}, pres); }

/// Generator g (factor generators first, then free letters) as a word.
inline Word generator_word(const PresentationPtr& pres, int g, Integer e = 1) {
  if (g < 0 || g >= pres->generator_count()) throw IndexOutOfRange("generator " + std::to_string(g));
  if (g >= pres->factor_generator_count())
    return single(pres, Syllable::free(g - pres->factor_generator_count(), std::move(e)));
  int i = 0;
  while (i + 1 < pres->factor_count() && pres->factor_offset(i + 1) <= g) ++i;
  IntVector v(static_cast<std::size_t>(pres->rank(i)), 0);
  v[static_cast<std::size_t>(g - pres->factor_offset(i))] = std::move(e);
  return single(pres, Syllable::factor(i, std::move(v)));
}

struct CyclicWord {
  Word cyclic;      // cyclically reduced
  Word conjugator;  // original = conjugator * cyclic * conjugator^-1
};

inline CyclicWord cyclic_normal_form(const Word& w) {
  if (w.empty()) throw EmptyWord("cyclic normal form of the identity");
  const auto syl = w.syllables();
  std::size_t lo = 0, hi = syl.size();  // live range [lo, hi)
  Syllable head = syl[0];
  std::vector<Syllable> conj;
  bool head_live = true;
  while (hi - lo >= 2 && head_live && head.same_slot(syl[hi - 1])) {
    // w ~ s_n w s_n^-1: fold the last syllable into the first.
    const Syllable& last = syl[hi - 1];
    conj.push_back(last.inverse());
    head.absorb(last);
    --hi;
    if (head.is_trivial()) {
      ++lo;
      if (lo < hi) head = syl[lo];
      else head_live = false;
    } else {
      break;
    }
  }
  std::vector<Syllable> core;
  if (head_live && lo < hi) {
    core.reserve(hi - lo);
    core.push_back(head);
    for (std::size_t i = lo + 1; i < hi; ++i) core.push_back(syl[i]);
  }
  const auto& pres = w.presentation_ptr();
  return {reduce(core, pres), reduce(conj, pres)};
}

inline bool is_hyperbolic(const Word& w) {
  if (w.empty()) return false;
  const Word c = cyclic_normal_form(w).cyclic;
  return c.size() >= 2 || (c.size() == 1 && c.front().is_free());
}

inline bool is_elliptic(const Word& w) { return !is_hyperbolic(w); }

/// Lexicographically least rotation of a cyclic word; identifies its conjugacy class.
inline Word least_rotation(const Word& cyclic) {
  const std::size_t n = cyclic.size();
  if (n <= 1) return cyclic;
  const auto s = cyclic.syllables();
  // Two candidate starts i, j; a mismatch at offset k rules out every start in the losing window.
  std::size_t i = 0, j = 1, k = 0;
  while (i < n && j < n && k < n) {
    const Syllable& a = s[(i + k) % n];
    const Syllable& b = s[(j + k) % n];
    if (a == b) {
      ++k;
      continue;
    }
    if (b < a) i += k + 1;
    else j += k + 1;
    if (i == j) ++j;
    k = 0;
  }
  const std::size_t best = std::min(i, j);
  std::vector<Syllable> rot;
  rot.reserve(n);
  for (std::size_t j = 0; j < n; ++j) rot.push_back(s[(best + j) % n]);
  return reduce(rot, cyclic.presentation_ptr());
}

/// Canonical representative of the conjugacy class [w].
inline Word conjugacy_class_key(const Word& w) {
  if (w.empty()) return w;
  return least_rotation(cyclic_normal_form(w).cyclic);
}

inline bool conjugate_test(const Word& u, const Word& v) {
  require_same_presentation(u, v);
  return conjugacy_class_key(u) == conjugacy_class_key(v);
}

/// Some h with v = h u h^-1, or nullopt when u and v are not conjugate.
inline std::optional<Word> conjugator_between(const Word& u, const Word& v) {
  require_same_presentation(u, v);
  if (u.empty() || v.empty()) {
    if (u.empty() && v.empty()) return Word(u.presentation_ptr());
    return std::nullopt;
  }
  const CyclicWord cu = cyclic_normal_form(u), cv = cyclic_normal_form(v);
  const std::size_t n = cu.cyclic.size();
  if (n != cv.cyclic.size()) return std::nullopt;
  for (std::size_t k = 0; k < n; ++k) {
    // Rotating by k syllables conjugates by the prefix P: S P = P^-1 (P S) P.
    bool match = true;
    for (std::size_t j = 0; j < n && match; ++j) match = cu.cyclic[(k + j) % n] == cv.cyclic[j];
    if (!match) continue;
    const Word prefix = slice(cu.cyclic, 0, k);
    return cv.conjugator * invert(prefix) * invert(cu.conjugator);
  }
  return std::nullopt;
}

/// |w|_H: one per factor syllable plus one per free letter occurrence.
inline std::size_t syllable_length(const Word& w) {
  Integer total = 0;
  for (const auto& s : w.syllables()) total += s.is_free() ? Integer(abs(s.exponents[0])) : Integer(1);
  if (total > std::numeric_limits<std::size_t>::max()) throw std::overflow_error("word length overflow");
  return total.convert_to<std::size_t>();
}

inline std::size_t cyclic_syllable_length(const Word& w) {
  if (w.empty()) return 0;
  return syllable_length(cyclic_normal_form(w).cyclic);
}

/// Sum of L1 norms of the factor syllables.
inline Integer factor_mass(const Word& w) {
  Integer m = 0;
  for (const auto& s : w.syllables())
    if (s.is_factor()) m += l1_norm(s.exponents);
  return m;
}

/// Canonical representative of the double coset A_i w A_j.
inline Word double_coset_rep(int i, const Word& w, int j) {
  const auto& pres = w.presentation();
  if (i < 0 || i >= pres.factor_count() || j < 0 || j >= pres.factor_count())
    throw IndexOutOfRange("double coset factor index");
  std::size_t lo = 0, hi = w.size();
  if (lo < hi && w[lo].is_factor(i)) ++lo;
  if (lo < hi && w[hi - 1].is_factor(j)) --hi;
  return slice(w, lo, hi);
}

/// Drops a trailing syllable in factor i: canonical representative of w A_i.
inline Word strip_trailing(const Word& w, int factor) {
  if (!w.empty() && w.back().is_factor(factor)) return slice(w, 0, w.size() - 1);
  return w;
}

/// w^e via the cyclic decomposition, linear in |e|.
inline Word power(const Word& w, const Integer& e) {
  if (e == 0 || w.empty()) return Word(w.presentation_ptr());
  if (e == 1) return w;
  const CyclicWord cw = cyclic_normal_form(w);
  const auto& pres = w.presentation_ptr();
  Word core(pres);
  if (cw.cyclic.size() == 1) {
    Syllable s = cw.cyclic.front();
    for (auto& x : s.exponents) x *= e;
    core = single(pres, std::move(s));
  } else {
    const Word unit = e > 0 ? cw.cyclic : invert(cw.cyclic);
    const Integer reps = abs(e);
    if (reps > 100000000) throw std::overflow_error("word power too large");
    std::vector<Syllable> raw;
    const auto count = reps.convert_to<std::size_t>();
    raw.reserve(count * unit.size());
    for (std::size_t r = 0; r < count; ++r)
      for (const auto& s : unit.syllables()) raw.push_back(s);
    core = reduce(raw, pres);
  }
  return cw.conjugator * core * invert(cw.conjugator);
}

// --- text form -----------------------------------------------------------

inline void render_syllable(std::ostream& os, const Syllable& s, bool& first) {
  auto emit = [&](const std::string& name, const Integer& e) {
    if (e == 0) return;
    if (!first) os << ' ';
    first = false;
    os << name;
    if (e != 1) os << '^' << e;
  };
  if (s.is_free()) {
    emit("x" + std::to_string(s.index + 1), s.exponents[0]);
  } else {
    for (std::size_t j = 0; j < s.exponents.size(); ++j)
      emit("a" + std::to_string(s.index + 1) + "." + std::to_string(j + 1), s.exponents[j]);
  }
}

/// Word grammar text: `a1.1^2 x1^-1 a2.3`; the identity renders as the empty string.
inline std::string render(const Word& w) {
  std::ostringstream os;
  bool first = true;
  for (const auto& s : w.syllables()) render_syllable(os, s, first);
  return os.str();
}

inline std::ostream& operator<<(std::ostream& os, const Word& w) {
  return os << (w.empty() ? std::string("1") : render(w));
}

}  // namespace fpaut
