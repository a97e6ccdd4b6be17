#ifndef CARNOT_LINALG_HPP
#define CARNOT_LINALG_HPP

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "carnot/errors.hpp"
#include "carnot/rational.hpp"

namespace carnot {

// Dense matrix over an exact field F (Rat or GaussRat). Everything here is
// exact; there is deliberately no floating-point path in this header.
template <class F>
struct Mat {
  std::size_t rows = 0, cols = 0;
  std::vector<F> a;

  Mat() = default;
  Mat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, F(0)) {}

  F& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  const F& operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = F(1);
    return m;
  }

  void swap_rows(std::size_t i, std::size_t j) {
    if (i == j) return;
    for (std::size_t c = 0; c < cols; ++c) std::swap((*this)(i, c), (*this)(j, c));
  }

  std::vector<F> row(std::size_t i) const {
    return std::vector<F>(a.begin() + i * cols, a.begin() + (i + 1) * cols);
  }

  std::vector<F> mul(const std::vector<F>& x) const {
    if (x.size() != cols) throw DimensionMismatch("matrix-vector size mismatch");
    std::vector<F> y(rows, F(0));
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j)
        if (!is_zero((*this)(i, j))) y[i] += (*this)(i, j) * x[j];
    return y;
  }

  Mat mul(const Mat& o) const {
    if (cols != o.rows) throw DimensionMismatch("matrix-matrix size mismatch");
    Mat r(rows, o.cols);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t k = 0; k < cols; ++k) {
        const F& v = (*this)(i, k);
        if (is_zero(v)) continue;
        for (std::size_t j = 0; j < o.cols; ++j) r(i, j) += v * o(k, j);
      }
    return r;
  }

  friend bool operator==(const Mat& x, const Mat& y) {
    return x.rows == y.rows && x.cols == y.cols && x.a == y.a;
  }
};

using MatQ = Mat<Rat>;
using MatC = Mat<GaussRat>;

template <class F>
Mat<F> from_rows(const std::vector<std::vector<F>>& rows) {
  if (rows.empty()) return Mat<F>(0, 0);
  Mat<F> m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols) throw DimensionMismatch("ragged row list");
    for (std::size_t j = 0; j < m.cols; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

template <class F>
Mat<F> from_cols(const std::vector<std::vector<F>>& cols) {
  if (cols.empty()) return Mat<F>(0, 0);
  Mat<F> m(cols[0].size(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j].size() != m.rows) throw DimensionMismatch("ragged column list");
    for (std::size_t i = 0; i < m.rows; ++i) m(i, j) = cols[j][i];
  }
  return m;
}

// In-place reduced row echelon form. Returns pivot column indices in order;
// rank = pivots.size(). Pivot choice is the first nonzero entry in column
// order, so the result is canonical for a given row space.
template <class F>
std::vector<std::size_t> rref_in_place(Mat<F>& m) {
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < m.cols && r < m.rows; ++c) {
    std::size_t p = r;
    while (p < m.rows && is_zero(m(p, c))) ++p;
    if (p == m.rows) continue;
    m.swap_rows(r, p);
    F inv = F(1) / m(r, c);
    for (std::size_t j = c; j < m.cols; ++j) m(r, j) = m(r, j) * inv;
    for (std::size_t i = 0; i < m.rows; ++i) {
      if (i == r || is_zero(m(i, c))) continue;
      F f = m(i, c);
      for (std::size_t j = c; j < m.cols; ++j) m(i, j) -= f * m(r, j);
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

template <class F>
std::size_t rank(Mat<F> m) {
  return rref_in_place(m).size();
}

// Canonical kernel basis from the RREF: one vector per free column, with a 1
// in the free coordinate.
template <class F>
std::vector<std::vector<F>> kernel_basis(Mat<F> m) {
  std::vector<std::size_t> pivots = rref_in_place(m);
  std::vector<bool> is_pivot(m.cols, false);
  for (std::size_t c : pivots) is_pivot[c] = true;
  std::vector<std::vector<F>> basis;
  for (std::size_t c = 0; c < m.cols; ++c) {
    if (is_pivot[c]) continue;
    std::vector<F> v(m.cols, F(0));
    v[c] = F(1);
    for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -m(r, c);
    basis.push_back(std::move(v));
  }
  return basis;
}

// Solves m x = rhs; nullopt when inconsistent. Free coordinates are set to 0,
// so the particular solution is canonical.
template <class F>
std::optional<std::vector<F>> solve(Mat<F> m, const std::vector<F>& rhs) {
  if (rhs.size() != m.rows) throw DimensionMismatch("rhs size mismatch");
  Mat<F> aug(m.rows, m.cols + 1);
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) aug(i, j) = m(i, j);
    aug(i, m.cols) = rhs[i];
  }
  std::vector<std::size_t> pivots = rref_in_place(aug);
  if (!pivots.empty() && pivots.back() == m.cols) return std::nullopt;
  std::vector<F> x(m.cols, F(0));
  for (std::size_t r = 0; r < pivots.size(); ++r) x[pivots[r]] = aug(r, m.cols);
  return x;
}

template <class F>
std::optional<Mat<F>> inverse(const Mat<F>& m) {
  if (m.rows != m.cols) throw DimensionMismatch("inverse of non-square matrix");
  std::size_t n = m.rows;
  Mat<F> aug(n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug(i, j) = m(i, j);
    aug(i, n + i) = F(1);
  }
  std::vector<std::size_t> pivots = rref_in_place(aug);
  if (pivots.size() != n || pivots.back() != n - 1) return std::nullopt;
  Mat<F> inv(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) inv(i, j) = aug(i, n + j);
  return inv;
}

template <class F>
F determinant(Mat<F> m) {
  if (m.rows != m.cols) throw DimensionMismatch("determinant of non-square matrix");
  F det = F(1);
  for (std::size_t c = 0; c < m.cols; ++c) {
    std::size_t p = c;
    while (p < m.rows && is_zero(m(p, c))) ++p;
    if (p == m.rows) return F(0);
    if (p != c) {
      m.swap_rows(c, p);
      det = -det;
    }
    det = det * m(c, c);
    F inv = F(1) / m(c, c);
    for (std::size_t i = c + 1; i < m.rows; ++i) {
      if (is_zero(m(i, c))) continue;
      F f = m(i, c) * inv;
      for (std::size_t j = c; j < m.cols; ++j) m(i, j) -= f * m(c, j);
    }
  }
  return det;
}

// Fraction-free rank: clear denominators row by row, then run Bareiss
// elimination over Z. Intermediate entries stay integral (every division in
// the Bareiss step is exact), which keeps coefficient growth polynomial.
inline std::size_t rank_fraction_free(const MatQ& q) {
  std::size_t rows = q.rows, cols = q.cols;
  std::vector<Int> m(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    Int l = 1;
    for (std::size_t j = 0; j < cols; ++j) l = lcm(l, q(i, j).get_den());
    for (std::size_t j = 0; j < cols; ++j) {
      Rat scaled = q(i, j) * Rat(l);
      m[i * cols + j] = scaled.get_num();
    }
  }
  auto at = [&](std::size_t i, std::size_t j) -> Int& { return m[i * cols + j]; };

  Int prev = 1;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && sgn(at(p, c)) == 0) ++p;
    if (p == rows) continue;
    if (p != r)
      for (std::size_t j = 0; j < cols; ++j) std::swap(at(r, j), at(p, j));
    for (std::size_t i = r + 1; i < rows; ++i) {
      for (std::size_t j = c + 1; j < cols; ++j) {
        Int t = at(i, j) * at(r, c) - at(i, c) * at(r, j);
        mpz_divexact(t.get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
        at(i, j) = t;
      }
      at(i, c) = 0;
    }
    prev = at(r, c);
    ++r;
  }
  return r;
}

// ---- vector helpers ---------------------------------------------------------

template <class F>
bool vec_is_zero(const std::vector<F>& v) {
  for (const F& x : v)
    if (!is_zero(x)) return false;
  return true;
}

template <class F>
std::vector<F> vec_add(const std::vector<F>& x, const std::vector<F>& y) {
  if (x.size() != y.size()) throw DimensionMismatch("vector size mismatch");
  std::vector<F> r = x;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += y[i];
  return r;
}

template <class F>
std::vector<F> vec_sub(const std::vector<F>& x, const std::vector<F>& y) {
  if (x.size() != y.size()) throw DimensionMismatch("vector size mismatch");
  std::vector<F> r = x;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= y[i];
  return r;
}

template <class F>
std::vector<F> vec_neg(const std::vector<F>& x) {
  std::vector<F> r = x;
  for (F& v : r) v = -v;
  return r;
}

template <class F, class S>
std::vector<F> vec_scale(const S& c, const std::vector<F>& x) {
  std::vector<F> r = x;
  for (F& v : r) v = v * F(c);
  return r;
}

template <class F>
void vec_axpy(std::vector<F>& acc, const F& c, const std::vector<F>& x) {
  if (acc.size() != x.size()) throw DimensionMismatch("vector size mismatch");
  if (is_zero(c)) return;
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += c * x[i];
}

// True iff v lies in the span of the given vectors.
template <class F>
bool in_span(const std::vector<std::vector<F>>& basis, const std::vector<F>& v) {
  if (vec_is_zero(v)) return true;
  if (basis.empty()) return false;
  Mat<F> m = from_cols(basis);
  return solve(m, v).has_value();
}

// Canonical reduced-echelon basis of the span of the given vectors.
template <class F>
std::vector<std::vector<F>> echelon_span(const std::vector<std::vector<F>>& vectors) {
  if (vectors.empty()) return {};
  Mat<F> m = from_rows(vectors);
  std::vector<std::size_t> pivots = rref_in_place(m);
  std::vector<std::vector<F>> basis;
  for (std::size_t r = 0; r < pivots.size(); ++r) basis.push_back(m.row(r));
  return basis;
}

template <class F>
std::size_t span_dim(const std::vector<std::vector<F>>& vectors) {
  if (vectors.empty()) return 0;
  return rank(from_rows(vectors));
}

// Dimension of the intersection of two spans (via dim U + dim W - dim(U+W)).
template <class F>
std::size_t intersection_dim(const std::vector<std::vector<F>>& u, const std::vector<std::vector<F>>& w) {
  std::vector<std::vector<F>> all = u;
  all.insert(all.end(), w.begin(), w.end());
  return span_dim(u) + span_dim(w) - span_dim(all);
}

// Basis of the intersection of two spans, computed from the kernel of [U | -W].
template <class F>
std::vector<std::vector<F>> intersection_basis(const std::vector<std::vector<F>>& u,
                                               const std::vector<std::vector<F>>& w) {
  if (u.empty() || w.empty()) return {};
  std::size_t n = u[0].size();
  Mat<F> m(n, u.size() + w.size());
  for (std::size_t j = 0; j < u.size(); ++j)
    for (std::size_t i = 0; i < n; ++i) m(i, j) = u[j][i];
  for (std::size_t j = 0; j < w.size(); ++j)
    for (std::size_t i = 0; i < n; ++i) m(i, u.size() + j) = -w[j][i];
  std::vector<std::vector<F>> ker = kernel_basis(m);
  std::vector<std::vector<F>> vecs;
  for (const auto& k : ker) {
    std::vector<F> v(n, F(0));
    for (std::size_t j = 0; j < u.size(); ++j) vec_axpy(v, k[j], u[j]);
    if (!vec_is_zero(v)) vecs.push_back(std::move(v));
  }
  return echelon_span(vecs);
}

}  // namespace carnot

#endif
