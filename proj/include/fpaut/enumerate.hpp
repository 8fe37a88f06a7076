#pragma once

// Bounded enumeration of normal-form words in graded order, and a small deterministic parallel scan.

#include <fpaut/words.hpp>

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

namespace fpaut {

struct EnumerationBounds {
  int max_len = 1;  // |w|_H
  int max_l1 = 1;   // per factor syllable
};

/// Nonzero vectors of the given rank with L1 norm at most `bound`, ordered by norm and then
/// lexicographically descending (so a_{i,1} comes first).
inline std::vector<IntVector> l1_ball_vectors(int rank, int bound) {
  std::vector<IntVector> out;
  const std::size_t r = static_cast<std::size_t>(rank);
  IntVector cur(r, -bound);
  for (;;) {
    if (!is_zero(cur) && l1_norm(cur) <= bound) out.push_back(cur);
    std::size_t pos = 0;
    while (pos < r && cur[pos] == bound) cur[pos++] = -bound;
    if (pos == r) break;
    ++cur[pos];
  }
  std::stable_sort(out.begin(), out.end(), [](const IntVector& a, const IntVector& b) {
    const Integer na = l1_norm(a), nb = l1_norm(b);
    if (na != nb) return na < nb;
    return b < a;
  });
  return out;
}

namespace detail {

/// Candidate syllables in enumeration order, with their |.|_H cost.
inline std::vector<std::pair<Syllable, int>> syllable_menu(const Presentation& pres, const EnumerationBounds& b) {
  std::vector<std::pair<Syllable, int>> menu;
  for (int i = 0; i < pres.factor_count(); ++i)
    for (auto& v : l1_ball_vectors(pres.rank(i), b.max_l1)) menu.emplace_back(Syllable::factor(i, std::move(v)), 1);
  for (int l = 0; l < pres.free_rank(); ++l)
    for (int e = 1; e <= b.max_len; ++e) {
      menu.emplace_back(Syllable::free(l, e), e);
      menu.emplace_back(Syllable::free(l, -e), e);
    }
  return menu;
}

}  // namespace detail

/// Visits every reduced word with |w|_H = len exactly; visit returns false to stop. Returns false if stopped.
inline bool for_each_word_of_length(const PresentationPtr& pres, int len, const EnumerationBounds& b,
                                    const std::function<bool(const Word&)>& visit) {
  const auto menu = detail::syllable_menu(*pres, b);
  std::vector<Syllable> cur;
  std::function<bool(int)> dfs = [&](int budget) -> bool {
    if (budget == 0) return visit(reduce(cur, pres));
    for (const auto& [s, cost] : menu) {
      if (cost > budget) continue;
      if (!cur.empty() && cur.back().same_slot(s)) continue;
      cur.push_back(s);
      const bool go_on = dfs(budget - cost);
      cur.pop_back();
      if (!go_on) return false;
    }
    return true;
  };
  return dfs(len);
}

/// All reduced words with |w|_H <= max_len, graded by length.
inline std::vector<Word> enumerate_words(const PresentationPtr& pres, const EnumerationBounds& b) {
  std::vector<Word> out;
  for (int len = 0; len <= b.max_len; ++len)
    for_each_word_of_length(pres, len, b, [&](const Word& w) {
      out.push_back(w);
      return true;
    });
  return out;
}

/// w is a hyperbolic cyclic word and the canonical representative of its conjugacy class.
inline bool is_canonical_hyperbolic(const Word& w) {
  if (w.empty()) return false;
  if (w.size() == 1) return w.front().is_free();
  if (w.front().same_slot(w.back())) return false;
  return least_rotation(w) == w;
}

/// Visits one canonical representative of each hyperbolic conjugacy class whose cyclic form has
/// min_len <= |g|_H <= max_len and factor syllables within the L1 bound.
inline bool for_each_hyperbolic_class(const PresentationPtr& pres, int min_len, const EnumerationBounds& b,
                                      const std::function<bool(const Word&)>& visit) {
  for (int len = std::max(min_len, 1); len <= b.max_len; ++len) {
    const bool go_on = for_each_word_of_length(pres, len, b, [&](const Word& w) {
      return is_canonical_hyperbolic(w) ? visit(w) : true;
    });
    if (!go_on) return false;
  }
  return true;
}

/// Runs test(i) for i in [0, n) on `jobs` threads. With stop_at_first the result holds the hit with the
/// smallest index (and possibly others below the scan horizon are skipped); the outcome does not depend on jobs.
template <class Hit>
std::vector<std::pair<std::size_t, Hit>> parallel_scan(std::size_t n, int jobs, bool stop_at_first,
                                                      const std::function<std::optional<Hit>(std::size_t)>& test) {
  std::vector<std::optional<Hit>> results(n);
  std::atomic<std::size_t> first_hit{n};
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      if (stop_at_first && i > first_hit.load()) return;
      try {
        results[i] = test(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n);
        return;
      }
      if (results[i]) {
        std::size_t cur = first_hit.load();
        while (i < cur && !first_hit.compare_exchange_weak(cur, i)) {
        }
      }
    }
  };
  const int threads = std::max(1, jobs);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<std::pair<std::size_t, Hit>> hits;
  for (std::size_t i = 0; i < n; ++i) {
    if (!results[i]) continue;
    hits.emplace_back(i, std::move(*results[i]));
    if (stop_at_first) break;
  }
  return hits;
}

}  // namespace fpaut
