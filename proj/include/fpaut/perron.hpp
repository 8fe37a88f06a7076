#pragma once

// Spectral radius of nonnegative integer matrices.

#include <fpaut/matrix.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace fpaut {

/// Spectral radius enclosed in [lower, upper].
struct GrowthRate {
  double value = 0;
  double lower = 0;
  double upper = 0;
  std::vector<double> left_eigenvector;  // normalized to sum 1; empty when not computed

  double error() const { return std::max(value - lower, upper - value); }
};

namespace detail {

inline void require_nonnegative_square(const IntegerMatrix& m) {
  if (!m.square()) throw DimensionMismatch("growth rate of a non-square matrix");
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      if (m(r, c) < 0) throw NegativeEntry("matrix entry (" + std::to_string(r) + "," + std::to_string(c) + ")");
}

/// Strongly connected components of the support digraph (Tarjan).
inline std::vector<std::vector<std::size_t>> support_components(const IntegerMatrix& m) {
  const std::size_t n = m.rows();
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> comps;
  int counter = 0;
  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (std::size_t w = 0; w < n; ++w) {
      if (m(v, w) == 0) continue;
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::size_t> comp;
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp.push_back(w);
      } while (w != v);
      std::sort(comp.begin(), comp.end());
      comps.push_back(std::move(comp));
    }
  };
  for (std::size_t v = 0; v < n; ++v)
    if (index[v] < 0) visit(v);
  return comps;
}

/// Power iteration on B = A + I for an irreducible block; Collatz-Wielandt bounds give the enclosure.
inline GrowthRate irreducible_radius(const std::vector<std::vector<double>>& a) {
  const std::size_t n = a.size();
  std::vector<double> x(n, 1.0), y(n);
  GrowthRate g;
  for (int iter = 0; iter < 100000; ++iter) {
    double lo = INFINITY, hi = 0;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = x[i];
      for (std::size_t j = 0; j < n; ++j) y[i] += a[i][j] * x[j];
      const double q = y[i] / x[i];
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    double norm = 0;
    for (double v : y) norm = std::max(norm, v);
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / norm;
    g.lower = lo - 1;
    g.upper = hi - 1;
    if (hi - lo <= 1e-13 * hi) break;
  }
  g.value = (g.lower + g.upper) / 2;
  return g;
}

}  // namespace detail

/// Strong connectivity of the support digraph (a 1x1 matrix counts as irreducible).
inline bool is_irreducible_matrix(const IntegerMatrix& m) {
  detail::require_nonnegative_square(m);
  return m.rows() > 0 && detail::support_components(m).size() == 1;
}

inline GrowthRate pf_growth_rate(const IntegerMatrix& m) {
  detail::require_nonnegative_square(m);
  if (m.is_zero()) throw ZeroMatrix("growth rate of the zero matrix");
  const std::size_t n = m.rows();
  GrowthRate best;
  bool first = true;
  for (const auto& comp : detail::support_components(m)) {
    std::vector<std::vector<double>> block(comp.size(), std::vector<double>(comp.size()));
    for (std::size_t i = 0; i < comp.size(); ++i)
      for (std::size_t j = 0; j < comp.size(); ++j) block[i][j] = m(comp[i], comp[j]).convert_to<double>();
    const GrowthRate g = detail::irreducible_radius(block);
    if (first || g.value > best.value) {
      best.value = g.value;
      first = false;
    }
    best.lower = std::max(best.lower, g.lower);
    best.upper = std::max(best.upper, g.upper);
  }
  best.value = std::clamp(best.value, best.lower, best.upper);

  // Left eigenvector of the whole matrix by power iteration on (M + I)^T, informational.
  std::vector<double> x(n, 1.0), y(n);
  for (int iter = 0; iter < 2000; ++iter) {
    double total = 0;
    for (std::size_t j = 0; j < n; ++j) {
      y[j] = x[j];
      for (std::size_t i = 0; i < n; ++i) y[j] += m(i, j).convert_to<double>() * x[i];
      total += y[j];
    }
    for (std::size_t j = 0; j < n; ++j) x[j] = y[j] / total;
  }
  best.left_eigenvector = x;
  return best;
}

}  // namespace fpaut
