#pragma once

// Smith normal form over the integers and the integer linear algebra built on it.

#include <fpaut/matrix.hpp>

#include <optional>
#include <stdexcept>
#include <vector>

namespace fpaut {

/// U * M * V = D with U, V unimodular and D diagonal, d_1 | d_2 | ... (zeros last).
struct SmithForm {
  IntegerMatrix U, D, V;

  std::size_t rank() const {
    std::size_t r = 0;
    while (r < std::min(D.rows(), D.cols()) && D(r, r) != 0) ++r;
    return r;
  }

  IntVector diagonal() const {
    IntVector d;
    for (std::size_t i = 0; i < std::min(D.rows(), D.cols()); ++i) d.push_back(D(i, i));
    return d;
  }
};

namespace detail {

inline bool smith_shape_ok(const IntegerMatrix& d) {
  const std::size_t k = std::min(d.rows(), d.cols());
  for (std::size_t r = 0; r < d.rows(); ++r)
    for (std::size_t c = 0; c < d.cols(); ++c)
      if (r != c && d(r, c) != 0) return false;
  for (std::size_t i = 0; i < k; ++i) {
    if (d(i, i) < 0) return false;
    if (i + 1 < k) {
      if (d(i, i) == 0 && d(i + 1, i + 1) != 0) return false;
      if (d(i, i) != 0 && d(i + 1, i + 1) % d(i, i) != 0) return false;
    }
  }
  return true;
}

}  // namespace detail

/// Checks every SmithForm postcondition by direct computation.
inline bool verify_smith(const IntegerMatrix& m, const SmithForm& s) {
  if (s.U.rows() != m.rows() || s.V.cols() != m.cols()) return false;
  if (!(s.U * m * s.V == s.D)) return false;
  if (abs(determinant(s.U)) != 1 || abs(determinant(s.V)) != 1) return false;
  return detail::smith_shape_ok(s.D);
}

inline SmithForm smith_normal_form(const IntegerMatrix& m) {
  const std::size_t rows = m.rows(), cols = m.cols();
  SmithForm s{IntegerMatrix::identity(rows), m, IntegerMatrix::identity(cols)};
  IntegerMatrix& D = s.D;
  IntegerMatrix& U = s.U;
  IntegerMatrix& V = s.V;

  auto swap_rows = [&](std::size_t a, std::size_t b) {
    D.swap_rows(a, b);
    U.swap_rows(a, b);
  };
  auto swap_cols = [&](std::size_t a, std::size_t b) {
    D.swap_cols(a, b);
    V.swap_cols(a, b);
  };
  auto add_row = [&](std::size_t dst, std::size_t src, const Integer& k) {
    D.add_row(dst, src, k);
    U.add_row(dst, src, k);
  };
  auto add_col = [&](std::size_t dst, std::size_t src, const Integer& k) {
    D.add_col(dst, src, k);
    V.add_col(dst, src, k);
  };

  const std::size_t k = std::min(rows, cols);
  for (std::size_t t = 0; t < k; ++t) {
    // Smallest nonzero entry of the trailing block becomes the pivot.
    auto place_pivot = [&]() -> bool {
      std::size_t br = rows, bc = cols;
      Integer best = 0;
      for (std::size_t r = t; r < rows; ++r)
        for (std::size_t c = t; c < cols; ++c)
          if (D(r, c) != 0 && (best == 0 || abs(D(r, c)) < best)) {
            best = abs(D(r, c));
            br = r;
            bc = c;
          }
      if (best == 0) return false;
      swap_rows(t, br);
      swap_cols(t, bc);
      return true;
    };
    if (!place_pivot()) break;

    for (;;) {
      bool dirty = false;
      for (std::size_t r = t + 1; r < rows; ++r) {
        if (D(r, t) == 0) continue;
        add_row(r, t, -(D(r, t) / D(t, t)));
        if (D(r, t) != 0) dirty = true;
      }
      for (std::size_t c = t + 1; c < cols; ++c) {
        if (D(t, c) == 0) continue;
        add_col(c, t, -(D(t, c) / D(t, t)));
        if (D(t, c) != 0) dirty = true;
      }
      if (dirty) {
        place_pivot();
        continue;
      }
      // Row and column are clear; enforce divisibility of the remaining block.
      std::size_t bad_row = rows;
      for (std::size_t r = t + 1; r < rows && bad_row == rows; ++r)
        for (std::size_t c = t + 1; c < cols; ++c)
          if (D(r, c) % D(t, t) != 0) {
            bad_row = r;
            break;
          }
      if (bad_row == rows) break;
      add_row(t, bad_row, 1);
    }
    if (D(t, t) < 0) {
      D.negate_row(t);
      U.negate_row(t);
    }
  }
  if (!verify_smith(m, s)) throw std::logic_error("smith_normal_form failed self-verification");
  return s;
}

/// Some integer solution z of A z = b, or nullopt when none exists.
inline std::optional<IntVector> solve_integer(const IntegerMatrix& a, std::span<const Integer> b) {
  if (a.rows() != b.size()) throw DimensionMismatch("solve_integer right-hand side");
  const SmithForm s = smith_normal_form(a);
  const IntVector ub = s.U * b;
  const std::size_t r = s.rank();
  IntVector y(a.cols(), 0);
  for (std::size_t i = 0; i < ub.size(); ++i) {
    if (i < r) {
      if (ub[i] % s.D(i, i) != 0) return std::nullopt;
      y[i] = ub[i] / s.D(i, i);
    } else if (ub[i] != 0) {
      return std::nullopt;
    }
  }
  return s.V * y;
}

/// Basis of the integer kernel {z : A z = 0}, as columns.
inline IntegerMatrix integer_kernel(const IntegerMatrix& a) {
  const SmithForm s = smith_normal_form(a);
  const std::size_t r = s.rank();
  IntegerMatrix k(a.cols(), a.cols() - r);
  for (std::size_t j = r; j < a.cols(); ++j) k.set_column(j - r, s.V.column(j));
  return k;
}

inline std::size_t matrix_rank(const IntegerMatrix& a) { return smith_normal_form(a).rank(); }

/// Inverse of a unimodular matrix.
inline IntegerMatrix unimodular_inverse(const IntegerMatrix& m) {
  if (!m.square() || abs(determinant(m)) != 1) throw DimensionMismatch("matrix is not unimodular");
  const std::size_t n = m.rows();
  IntegerMatrix inv(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    IntVector e(n, 0);
    e[j] = 1;
    inv.set_column(j, *solve_integer(m, e));
  }
  return inv;
}

}  // namespace fpaut
