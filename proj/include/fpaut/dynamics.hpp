#pragma once

// Orbits of conjugacy classes: growth, periodic classes, twinned factor conjugates, flaring.

#include <fpaut/automorphism.hpp>
#include <fpaut/enumerate.hpp>

#include <array>
#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <type_traits>
#include <string>
#include <vector>

namespace fpaut {

// --- orbits and growth ---------------------------------------------------------

struct OrbitProfile {
  std::vector<std::size_t> cyclic_lengths;  // cyclic |phi^n(g)|_H, n = 0..n_max
  std::vector<std::size_t> free_lengths;    // free letters in the cyclic form
  std::vector<Integer> factor_masses;       // L1 mass of the factor syllables of the cyclic form
  std::optional<int> class_preperiod;       // [phi^(p+q) g] = [phi^p g] detected exactly
  std::optional<int> class_period;
};

namespace detail {

inline std::size_t free_letter_count(const Word& w) {
  Integer n = 0;
  for (const auto& s : w.syllables())
    if (s.is_free()) n += abs(s.exponents[0]);
  return n.convert_to<std::size_t>();
}

}  // namespace detail

inline OrbitProfile orbit_lengths(const Automorphism& phi, const Word& g, int n_max) {
  phi.require_factors_fixed("orbit_lengths");
  if (g.empty()) throw EmptyWord("orbit of the identity");
  if (n_max < 0) throw ConfigError("n_max must be nonnegative");
  OrbitProfile p;
  std::map<Word, int> seen;
  Word cur = g;
  for (int n = 0; n <= n_max; ++n) {
    if (n > 0) cur = phi.apply(cur);
    const Word key = conjugacy_class_key(cur);
    const Word cyc = cyclic_normal_form(cur).cyclic;
    p.cyclic_lengths.push_back(syllable_length(cyc));
    p.free_lengths.push_back(detail::free_letter_count(cyc));
    p.factor_masses.push_back(factor_mass(cyc));
    if (!p.class_period) {
      auto [it, fresh] = seen.emplace(key, n);
      if (!fresh) {
        p.class_preperiod = it->second;
        p.class_period = n - it->second;
      }
    }
  }
  return p;
}

struct GrowthVerdict {
  enum class Kind { bounded, polynomial, exponential };
  Kind kind = Kind::bounded;
  bool heuristic = true;
  int degree = 0;     // polynomial
  double rate = 1.0;  // exponential
  double log_slope = 0, log_r2 = 0, loglog_slope = 0, loglog_r2 = 0;
};

inline const char* to_string(GrowthVerdict::Kind k) {
  switch (k) {
    case GrowthVerdict::Kind::bounded: return "bounded";
    case GrowthVerdict::Kind::polynomial: return "polynomial";
    default: return "exponential";
  }
}

namespace detail {

struct Fit {
  double slope = 0, r2 = 0;
};

inline Fit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  const double vx = sxx - sx * sx / n, vy = syy - sy * sy / n, cxy = sxy - sx * sy / n;
  Fit f;
  f.slope = vx > 0 ? cxy / vx : 0;
  f.r2 = (vx > 0 && vy > 0) ? cxy * cxy / (vx * vy) : 1.0;
  return f;
}

/// Smallest p <= len/4 such that the last half of seq is p-periodic.
inline std::optional<int> periodic_tail(const std::vector<double>& seq) {
  const std::size_t n = seq.size(), start = n / 2;
  for (std::size_t p = 1; p <= n / 4; ++p) {
    bool ok = true;
    for (std::size_t i = start + p; i < n && ok; ++i) ok = seq[i] == seq[i - p];
    if (ok) return static_cast<int>(p);
  }
  return std::nullopt;
}

}  // namespace detail

/// Bounded when an exact class period is supplied or (heuristically) the tail is periodic; otherwise
/// exponential when log(l_n) is linear in n over the last half (R^2 >= 0.999, no worse than the
/// log-log fit), else polynomial of degree round(log-log slope).
template <class T>
GrowthVerdict classify_growth(const std::vector<T>& seq, std::optional<int> exact_period = std::nullopt) {
  if (seq.size() < 8) throw TooShort("classify_growth needs at least 8 terms, got " + std::to_string(seq.size()));
  std::vector<double> v;
  for (const auto& x : seq) {
    if constexpr (std::is_same_v<T, Integer>) v.push_back(x.template convert_to<double>());
    else v.push_back(static_cast<double>(x));
  }
  GrowthVerdict g;
  if (exact_period) {
    g.kind = GrowthVerdict::Kind::bounded;
    g.heuristic = false;
    return g;
  }
  if (detail::periodic_tail(v)) {
    g.kind = GrowthVerdict::Kind::bounded;
    return g;
  }
  const std::size_t start = v.size() / 2;
  std::vector<double> n, logn, logl;
  for (std::size_t i = start; i < v.size(); ++i) {
    n.push_back(static_cast<double>(i));
    logn.push_back(std::log(static_cast<double>(i) + 1));
    logl.push_back(std::log(std::max(v[i], 1.0)));
  }
  const detail::Fit lin = detail::least_squares(n, logl), ll = detail::least_squares(logn, logl);
  g.log_slope = lin.slope;
  g.log_r2 = lin.r2;
  g.loglog_slope = ll.slope;
  g.loglog_r2 = ll.r2;
  if (lin.r2 >= 0.999 && lin.r2 >= ll.r2 && lin.slope > 0) {
    g.kind = GrowthVerdict::Kind::exponential;
    g.rate = std::exp(lin.slope);
  } else {
    g.kind = GrowthVerdict::Kind::polynomial;
    g.degree = static_cast<int>(std::lround(std::max(0.0, ll.slope)));
    if (g.degree == 0) g.kind = GrowthVerdict::Kind::bounded;
  }
  return g;
}

// --- searches --------------------------------------------------------------------

struct SearchStats {
  enum class Verdict { witness, exhausted, undecided };
  Verdict verdict = Verdict::exhausted;
  std::size_t candidates = 0;  // enumerated up to the stopping point
  double seconds = 0;
};

inline const char* to_string(SearchStats::Verdict v) {
  switch (v) {
    case SearchStats::Verdict::witness: return "witness";
    case SearchStats::Verdict::exhausted: return "exhausted";
    default: return "undecided";
  }
}

struct SearchOptions {
  int jobs = 1;
  bool collect_all = false;
  std::size_t batch = 4096;
  std::size_t max_candidates = 0;  // 0 = unlimited; hitting the limit yields `undecided`
};

namespace detail {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// Feeds enumerated candidates through parallel_scan in batches, preserving enumeration order.
template <class Hit>
struct BatchedScan {
  const SearchOptions& opt;
  std::function<std::optional<Hit>(const Word&)> test;
  std::vector<Word> batch;
  std::vector<Hit> hits;
  std::size_t seen = 0;
  bool limit_hit = false;

  bool flush() {
    const auto found = parallel_scan<Hit>(batch.size(), opt.jobs, !opt.collect_all,
                                          [&](std::size_t i) { return test(batch[i]); });
    if (!found.empty() && !opt.collect_all) seen -= batch.size() - found.front().first - 1;
    for (const auto& [i, h] : found) hits.push_back(h);
    batch.clear();
    return opt.collect_all || hits.empty();
  }

  bool push(const Word& w) {
    if (opt.max_candidates && seen >= opt.max_candidates) {
      limit_hit = true;
      return false;
    }
    batch.push_back(w);
    ++seen;
    if (batch.size() >= opt.batch) return flush();
    return true;
  }

  void finish() {
    if (!batch.empty()) flush();
  }
};

}  // namespace detail

struct AtoroidalWitness {
  Word element;    // canonical cyclic word
  int exponent;    // [phi^n g] = [g]
  Word conjugator; // phi^n(g) = h g h^-1
};

struct AtoroidalReport {
  SearchStats stats;
  int max_len = 0, max_exp = 0, max_l1 = 0;
  std::vector<AtoroidalWitness> witnesses;
};

/// Hyperbolic classes [g], |g|_H <= L, factor syllables of L1 norm <= max_l1, tested for
/// [phi^n g] = [g] with 1 <= n <= N. Witnesses are re-verified by conjugation.
inline AtoroidalReport atoroidal_search(const Automorphism& phi, int max_len, int max_exp, int max_l1 = -1,
                                        const SearchOptions& opt = {}) {
  phi.require_factors_fixed("atoroidal_search");
  if (max_len < 1 || max_exp < 1) throw ConfigError("atoroidal_search bounds must be positive");
  if (max_l1 < 0) max_l1 = max_len;
  detail::Stopwatch clock;
  AtoroidalReport r;
  r.max_len = max_len;
  r.max_exp = max_exp;
  r.max_l1 = max_l1;

  detail::BatchedScan<AtoroidalWitness> scan{opt, [&](const Word& g) -> std::optional<AtoroidalWitness> {
    Word cur = g;
    for (int n = 1; n <= max_exp; ++n) {
      cur = phi.apply(cur);
      if (conjugacy_class_key(cur) != g) continue;
      auto h = conjugator_between(g, cur);
      if (!h || !(*h * g * invert(*h) == cur)) throw std::logic_error("atoroidal witness failed re-verification");
      return AtoroidalWitness{g, n, *h};
    }
    return std::nullopt;
  }, {}, {}, 0, false};
  for_each_hyperbolic_class(phi.presentation_ptr(), 1, {max_len, max_l1}, [&](const Word& g) { return scan.push(g); });
  scan.finish();
  r.witnesses = std::move(scan.hits);
  r.stats.candidates = scan.seen;
  r.stats.verdict = !r.witnesses.empty() ? SearchStats::Verdict::witness
                    : scan.limit_hit     ? SearchStats::Verdict::undecided
                                         : SearchStats::Verdict::exhausted;
  r.stats.seconds = clock.seconds();
  return r;
}

// --- twinned subgroups --------------------------------------------------------------

struct TwinWitness {
  int exponent;  // m
  Word u;
  int i;
  Word v;
  int j;
  Word g;  // phi^m(u A_i u^-1) = g u A_i u^-1 g^-1, same for (v, j)
};

struct TwinReport {
  SearchStats stats;
  int max_exp = 0, max_len = 0, max_l1 = 0;
  std::vector<TwinWitness> witnesses;
};

namespace detail {

/// w = a m b with a the leading A_i syllable and b the trailing A_j syllable of the remainder.
inline std::array<Word, 3> split_double_coset(int i, const Word& w, int j) {
  std::size_t lo = 0, hi = w.size();
  if (lo < hi && w[lo].is_factor(i)) ++lo;
  if (lo < hi && w[hi - 1].is_factor(j)) --hi;
  return {slice(w, 0, lo), slice(w, lo, hi), slice(w, hi, w.size())};
}

/// psi(u A_i u^-1) = g u A_i u^-1 g^-1, checked on generators, with the induced map onto A_i invertible.
inline bool conjugates_factor(const Automorphism& psi, const Word& g, const Word& u, int i) {
  const auto& pres = psi.presentation_ptr();
  IntegerMatrix m(static_cast<std::size_t>(pres->rank(i)), static_cast<std::size_t>(pres->rank(i)));
  const Word back = invert(g * u);
  for (int c = 0; c < pres->rank(i); ++c) {
    const Word s = generator_word(pres, pres->generator_index(i, c));
    const Word x = back * psi.apply(u * s * invert(u)) * (g * u);
    if (x.size() != 1 || !x[0].is_factor(i)) return false;
    m.set_column(static_cast<std::size_t>(c), x[0].exponents);
  }
  return abs(determinant(m)) == 1;
}

}  // namespace detail

/// Pairs (u, i) != (v, j) with u, v right-coset representatives (no trailing A_i / A_j syllable),
/// |u|_H, |v|_H <= L; for m = 1..M tests whether phi^m conjugates both u A_i u^-1 and v A_j v^-1
/// back by one element, via double coset representatives.
inline TwinReport twin_search(const Automorphism& phi, int max_exp, int max_len, int max_l1 = -1,
                              const SearchOptions& opt = {}) {
  phi.require_factors_fixed("twin_search");
  if (max_exp < 1 || max_len < 0) throw ConfigError("twin_search bounds must be positive");
  if (max_l1 < 0) max_l1 = std::max(max_len, 1);
  detail::Stopwatch clock;
  const auto& pres = phi.presentation_ptr();
  TwinReport r;
  r.max_exp = max_exp;
  r.max_len = max_len;
  r.max_l1 = max_l1;

  struct Coset {
    Word u;
    int i;
  };
  std::vector<Coset> cosets;
  for (const Word& u : enumerate_words(pres, {max_len, max_l1}))
    for (int i = 0; i < pres->factor_count(); ++i)
      if (u.empty() || !u.back().is_factor(i)) cosets.push_back({u, i});

  bool limit_hit = false;
  for (int m = 1; m <= max_exp && (r.witnesses.empty() || opt.collect_all) && !limit_hit; ++m) {
    const Automorphism pm = power(phi, m);
    std::vector<Word> images;
    for (const auto& c : cosets) images.push_back(pm.apply(c.u));
    const std::size_t n = cosets.size();
    const std::size_t pairs = n * (n - 1) / 2;
    std::size_t total = pairs;
    if (opt.max_candidates && r.stats.candidates + pairs > opt.max_candidates) {
      total = opt.max_candidates - std::min(opt.max_candidates, r.stats.candidates);
      limit_hit = true;
    }
    // Pair index p -> (a, b), a < b, enumerated row by row.
    std::vector<std::size_t> row_start(n + 1, 0);
    for (std::size_t a = 0; a < n; ++a) row_start[a + 1] = row_start[a] + (n - 1 - a);
    auto test = [&](std::size_t p) -> std::optional<TwinWitness> {
      const std::size_t a = static_cast<std::size_t>(std::upper_bound(row_start.begin(), row_start.end(), p) - row_start.begin()) - 1;
      const std::size_t b = a + 1 + (p - row_start[a]);
      const Coset& ca = cosets[a];
      const Coset& cb = cosets[b];
      const Word k = invert(ca.u) * cb.u;
      if (ca.i == cb.i && (k.empty() || (k.size() == 1 && k[0].is_factor(ca.i)))) return std::nullopt;  // H = K
      const Word c = invert(pm.conjugator(ca.i)) * invert(images[a]) * images[b] * pm.conjugator(cb.i);
      const auto sk = detail::split_double_coset(ca.i, k, cb.i);
      const auto sc = detail::split_double_coset(ca.i, c, cb.i);
      if (!(sk[1] == sc[1])) return std::nullopt;
      const Word g = images[a] * pm.conjugator(ca.i) * sc[0] * invert(sk[0]) * invert(ca.u);
      if (!detail::conjugates_factor(pm, g, ca.u, ca.i) || !detail::conjugates_factor(pm, g, cb.u, cb.i))
        throw std::logic_error("twin witness failed re-verification");
      return TwinWitness{m, ca.u, ca.i, cb.u, cb.i, g};
    };
    const auto found = parallel_scan<TwinWitness>(total, opt.jobs, !opt.collect_all, test);
    r.stats.candidates += found.empty() || opt.collect_all ? total : found.front().first + 1;
    for (const auto& [p, w] : found) r.witnesses.push_back(w);
  }
  r.stats.verdict = !r.witnesses.empty() ? SearchStats::Verdict::witness
                    : limit_hit          ? SearchStats::Verdict::undecided
                                         : SearchStats::Verdict::exhausted;
  r.stats.seconds = clock.seconds();
  return r;
}

// --- flaring -------------------------------------------------------------------------

struct FlareFailure {
  Word element;
  std::size_t length, forward, backward;  // |g|, |phi^N g|, |phi^-N g| at N = n_max
};

struct FlareReport {
  bool certified = false;
  Rational lambda;
  int exponent = 0;  // N of the certificate
  int min_len = 0, max_len = 0, max_l1 = 0, n_max = 0;
  std::size_t enumerated = 0;
  std::size_t failure_count = 0;
  std::vector<FlareFailure> counterexamples;  // first few, at N = n_max
  double seconds = 0;
};

namespace detail {

struct FlareOrbit {
  Word element;
  std::size_t length;
  Word forward, backward;  // canonical classes of phi^n g, phi^-n g at the current n
};

inline bool flares(const FlareOrbit& o, const Rational& lambda) {
  const std::size_t best = std::max(cyclic_syllable_length(o.forward), cyclic_syllable_length(o.backward));
  return lambda * Rational(o.length) <= Rational(best);
}

}  // namespace detail

/// Empirical evidence only: every enumerated hyperbolic class with min_len <= |g|_H <= max_len must satisfy
/// lambda |g| <= max(|phi^N g|, |phi^-N g|) (cyclic lengths) for one N <= n_max.
inline FlareReport flare_certify(const Automorphism& phi, int min_len, int max_len, int n_max, const Rational& lambda,
                                 int max_l1 = -1, std::size_t keep_counterexamples = 20) {
  phi.require_factors_fixed("flare_certify");
  if (lambda <= 1) throw ConfigError("flare_certify needs lambda > 1");
  if (min_len < 1 || max_len < min_len || n_max < 1) throw ConfigError("flare_certify bounds");
  if (max_l1 < 0) max_l1 = max_len;
  detail::Stopwatch clock;
  const Automorphism inv = phi.inverse();
  FlareReport r;
  r.lambda = lambda;
  r.min_len = min_len;
  r.max_len = max_len;
  r.max_l1 = max_l1;
  r.n_max = n_max;

  std::vector<detail::FlareOrbit> orbits;
  for_each_hyperbolic_class(phi.presentation_ptr(), min_len, {max_len, max_l1}, [&](const Word& g) {
    orbits.push_back({g, cyclic_syllable_length(g), g, g});
    return true;
  });
  r.enumerated = orbits.size();
  for (int n = 1; n <= n_max && !orbits.empty(); ++n) {
    bool all = true;
    for (auto& o : orbits) {
      o.forward = conjugacy_class_key(phi.apply(o.forward));
      o.backward = conjugacy_class_key(inv.apply(o.backward));
      all = all && detail::flares(o, lambda);
    }
    if (all) {
      r.certified = true;
      r.exponent = n;
      break;
    }
  }
  if (r.certified) {
    // Re-run the inequality from scratch on every enumerated word.
    const Automorphism fwd = power(phi, r.exponent), bwd = power(inv, r.exponent);
    for (const auto& o : orbits) {
      const std::size_t best = std::max(cyclic_syllable_length(fwd.apply(o.element)), cyclic_syllable_length(bwd.apply(o.element)));
      if (lambda * Rational(o.length) > Rational(best)) throw std::logic_error("flare certificate failed re-verification");
    }
  } else {
    for (const auto& o : orbits) {
      if (detail::flares(o, lambda)) continue;
      ++r.failure_count;
      if (r.counterexamples.size() < keep_counterexamples)
        r.counterexamples.push_back({o.element, o.length, cyclic_syllable_length(o.forward), cyclic_syllable_length(o.backward)});
    }
  }
  r.seconds = clock.seconds();
  return r;
}

// --- consistency check -----------------------------------------------------------------

struct NoTwinImplicationReport {
  std::vector<bool> central;
  AtoroidalReport atoroidal;
  TwinReport twins;
  bool applies = false;   // central and atoroidal up to bounds
  bool violated = false;  // applies and a twin witness was found: a library bug
};

/// Central condition and atoroidality (up to bounds) must exclude twinned subgroups.
inline NoTwinImplicationReport no_twin_implication_check(const Automorphism& phi, int max_len, int max_exp,
                                                         int twin_exp, int twin_len, const SearchOptions& opt = {}) {
  NoTwinImplicationReport r;
  r.central = check_central_condition(phi);
  r.atoroidal = atoroidal_search(phi, max_len, max_exp, -1, opt);
  r.twins = twin_search(phi, twin_exp, twin_len, -1, opt);
  bool all_central = true;
  for (bool b : r.central) all_central = all_central && b;
  r.applies = all_central && r.atoroidal.stats.verdict == SearchStats::Verdict::exhausted;
  r.violated = r.applies && r.twins.stats.verdict == SearchStats::Verdict::witness;
  return r;
}

}  // namespace fpaut
