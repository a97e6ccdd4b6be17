#ifndef CARNOT_BCH_HPP
#define CARNOT_BCH_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "carnot/algebra.hpp"
#include "carnot/catalog.hpp"
#include "carnot/errors.hpp"

namespace carnot {

// The group law on a stratified nilpotent algebra in exponential coordinates,
// evaluated through the commutator form of the product series: the product is
// a finite rational combination of nested bracket words in the two arguments,
// truncated at word length = step (longer brackets vanish by nilpotency).
//
// A word is stored as (bits, len): letter t of the word is y when bit t is
// set, x otherwise. The word w_1..w_m denotes the nested bracket
// (ad w_1)(ad w_2)..(ad w_{m-1}) w_m.
struct BchTerm {
  std::uint32_t word;
  std::uint8_t len;
  Rat coeff;
};

namespace detail {

// Universal coefficients for all words up to the given length. Enumerates
// block sequences (p_1,q_1)..(p_n,q_n), p_i+q_i >= 1, and accumulates
//   (-1)^{n+1}/n * 1/m * prod 1/(p_i! q_i!)         (m = total length)
// onto the word x^{p_1} y^{q_1} .. x^{p_n} y^{q_n}. Sequences whose trailing
// block has q_n >= 2, or q_n = 0 with p_n >= 2, contribute zero (their nested
// bracket ends in [y,y] or [x,x]) and are skipped.
inline std::vector<BchTerm> bch_terms(std::size_t max_len) {
  // Block-sequence count grows like (2+sqrt(2))^len; 12 is already ~1.5M.
  if (max_len > 12) throw DomainError("bch series capped at step 12");
  std::vector<Rat> fact(max_len + 1);
  fact[0] = 1;
  for (std::size_t i = 1; i <= max_len; ++i) fact[i] = fact[i - 1] * Rat(static_cast<long>(i));

  std::vector<std::vector<Rat>> coeff(max_len + 1);
  for (std::size_t m = 0; m <= max_len; ++m) coeff[m].assign(std::size_t(1) << m, Rat(0));

  struct Frame {
    std::uint32_t word;
    std::size_t len;
    std::size_t nblocks;
    Rat inv_fact;
  };
  std::vector<Frame> stack;
  stack.push_back({0u, 0, 0, Rat(1)});
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    for (std::size_t p = 0; p + f.len <= max_len; ++p) {
      for (std::size_t q = 0; p + q + f.len <= max_len; ++q) {
        if (p + q == 0) continue;
        std::uint32_t word = f.word;
        for (std::size_t t = 0; t < q; ++t) word |= (1u << (f.len + p + t));
        std::size_t len = f.len + p + q;
        std::size_t n = f.nblocks + 1;
        Rat inv_fact = f.inv_fact / (fact[p] * fact[q]);
        bool trailing_zero = (q >= 2) || (q == 0 && p >= 2);
        if (!trailing_zero) {
          Rat sign = (n % 2 == 1) ? Rat(1) : Rat(-1);
          coeff[len][word] += sign / Rat(static_cast<long>(n)) / Rat(static_cast<long>(len)) * inv_fact;
        }
        if (len < max_len) stack.push_back({word, len, n, inv_fact});
      }
    }
  }

  std::vector<BchTerm> terms;
  for (std::size_t m = 1; m <= max_len; ++m) {
    for (std::uint32_t w = 0; w < (std::uint32_t(1) << m); ++w) {
      if (is_zero(coeff[m][w])) continue;
      // Words whose last two letters agree evaluate to zero.
      if (m >= 2 && ((w >> (m - 1)) & 1u) == ((w >> (m - 2)) & 1u)) continue;
      terms.push_back({w, static_cast<std::uint8_t>(m), coeff[m][w]});
    }
  }
  return terms;
}

inline Vec eval_word(const CarnotAlgebra& a, std::uint32_t word, std::size_t len, const Vec& x, const Vec& y) {
  Vec v = ((word >> (len - 1)) & 1u) ? y : x;
  for (std::size_t t = len - 1; t-- > 0;) {
    const Vec& letter = ((word >> t) & 1u) ? y : x;
    v = a.bracket(letter, v);
    if (vec_is_zero(v)) break;
  }
  return v;
}

}  // namespace detail

// Universal constants c_j with x*y = x + y + sum_{j>=1} c_j (ad x)^j y
// whenever [y, V_i] = 0 for all i >= 2. Derived by evaluating the product of
// e_1 and e_2 in the model Filiform algebra of the requested step, where
// (ad e_1)^j e_2 = e_{j+2} reads the coefficients off directly. c_1 must come
// out as 1/2; anything else is an internal error.
inline std::vector<Rat> ad_series_constants(std::size_t max_step) {
  if (max_step < 2) throw DomainError("ad_series_constants requires max_step >= 2");
  CarnotAlgebra f = filiform(max_step);
  std::vector<BchTerm> terms = detail::bch_terms(max_step);
  Vec x = f.basis_vector(0), y = f.basis_vector(1);
  Vec prod = vec_add(x, y);
  for (const BchTerm& t : terms) {
    if (t.len < 2) continue;
    Vec w = detail::eval_word(f, t.word, t.len, x, y);
    vec_axpy(prod, t.coeff, w);
  }
  std::vector<Rat> c;
  for (std::size_t j = 1; j + 1 <= max_step; ++j) c.push_back(prod[j + 1]);
  if (c[0] != Rat(1, 2)) throw InternalInconsistency("first series constant is not 1/2");
  return c;
}

class BchEngine {
 public:
  // Word enumeration grows fast with step; raising the cap past the default 8
  // is supported but increasingly expensive.
  explicit BchEngine(CarnotAlgebra a, std::size_t max_step_cap = 8)
      : algebra_(std::move(a)) {
    if (algebra_.step() > max_step_cap)
      throw DomainError("algebra step " + std::to_string(algebra_.step()) +
                        " exceeds the configured cap " + std::to_string(max_step_cap));
    terms_ = detail::bch_terms(algebra_.step());
    if (algebra_.step() >= 2) constants_ = ad_series_constants(algebra_.step());
  }

  const CarnotAlgebra& algebra() const { return algebra_; }
  const std::vector<Rat>& series_constants() const { return constants_; }

  // x * y, exact.
  Vec product(const Vec& x, const Vec& y) const {
    algebra_.check_dim(x);
    algebra_.check_dim(y);
    Vec out = vec_add(x, y);
    for (const BchTerm& t : terms_) {
      if (t.len < 2) continue;
      Vec w = detail::eval_word(algebra_, t.word, t.len, x, y);
      vec_axpy(out, t.coeff, w);
    }
    return out;
  }

  Vec product(const Vec& x, const Vec& y, const Vec& z) const { return product(product(x, y), z); }

 private:
  CarnotAlgebra algebra_;
  std::vector<BchTerm> terms_;
  std::vector<Rat> constants_;  // c_1 .. c_{step-1} for step >= 2
};

// The group inverse of x is -x.
inline Vec group_inverse(const Vec& x) { return vec_neg(x); }

// True iff [y, V_i] = 0 for every layer i >= 2.
inline bool commutes_with_higher_layers(const CarnotAlgebra& a, const Vec& y) {
  for (std::size_t j = 0; j < a.dim(); ++j) {
    if (a.layer_of(j) < 2) continue;
    if (!vec_is_zero(a.bracket(y, a.basis_vector(j)))) return false;
  }
  return true;
}

// Closed form x*y = x + y + sum c_j (ad x)^j y, valid when y commutes with
// all layers >= 2 (checked). With cross_check set, the result is compared
// against the full series product.
inline Vec ad_series_product(const BchEngine& e, const Vec& x, const Vec& y, bool cross_check = false) {
  const CarnotAlgebra& a = e.algebra();
  a.check_dim(x);
  a.check_dim(y);
  if (!commutes_with_higher_layers(a, y)) {
    for (std::size_t j = 0; j < a.dim(); ++j) {
      if (a.layer_of(j) < 2) continue;
      if (!vec_is_zero(a.bracket(y, a.basis_vector(j))))
        throw PreconditionViolation("argument does not commute with layer " + std::to_string(a.layer_of(j)));
    }
  }
  Vec out = vec_add(x, y);
  Vec pw = y;
  const std::vector<Rat>& c = e.series_constants();
  for (std::size_t j = 1; j <= c.size(); ++j) {
    pw = a.bracket(x, pw);
    if (vec_is_zero(pw)) break;
    vec_axpy(out, c[j - 1], pw);
  }
  if (cross_check && out != e.product(x, y))
    throw TheoremViolation("closed-form product disagrees with series product");
  return out;
}

// Exact check of (ad x)^i u = (ad t)^i u for i = 1..max_i, where t is the
// component of x in the chosen first-layer complement of W. Requires
// [W, W] = 0 and [W, V_i] = 0 for i >= 2, with u in span(W). The identity is
// a theorem under these hypotheses, so a mismatch raises TheoremViolation.
inline bool ad_power_reduction_check(const CarnotAlgebra& a, const std::vector<Vec>& w_basis, const Vec& x,
                                     const Vec& u, std::size_t max_i) {
  a.check_dim(x);
  a.check_dim(u);
  if (w_basis.empty()) throw PreconditionViolation("empty subspace basis");
  for (const Vec& w : w_basis) {
    a.check_dim(w);
    if (!a.in_layer_span(w, 1)) throw PreconditionViolation("subspace basis vector not in the first layer");
    if (!commutes_with_higher_layers(a, w))
      throw PreconditionViolation("subspace does not commute with layers >= 2");
  }
  for (std::size_t p = 0; p < w_basis.size(); ++p)
    for (std::size_t q = p + 1; q < w_basis.size(); ++q)
      if (!vec_is_zero(a.bracket(w_basis[p], w_basis[q])))
        throw PreconditionViolation("subspace is not abelian");
  if (!in_span(w_basis, u)) throw PreconditionViolation("vector is not in the span of the subspace");

  // Split the first-layer part of x as (component in W) + (component in the
  // complement spanned by the non-pivot standard directions).
  std::size_t d1 = a.layer_dims()[0];
  std::vector<std::vector<Rat>> w_rows;
  for (const Vec& w : w_basis) w_rows.push_back(std::vector<Rat>(w.begin(), w.begin() + d1));
  MatQ wm = from_rows(w_rows);
  std::vector<std::size_t> pivots = rref_in_place(wm);
  std::vector<bool> is_pivot(d1, false);
  for (std::size_t c : pivots) is_pivot[c] = true;

  std::vector<std::vector<Rat>> cols;
  for (std::size_t r = 0; r < pivots.size(); ++r) cols.push_back(wm.row(r));
  std::size_t w_count = cols.size();
  for (std::size_t cidx = 0; cidx < d1; ++cidx) {
    if (is_pivot[cidx]) continue;
    std::vector<Rat> e(d1, Rat(0));
    e[cidx] = 1;
    cols.push_back(std::move(e));
  }
  std::vector<Rat> x1(x.begin(), x.begin() + d1);
  auto sol = solve(from_cols(cols), x1);
  if (!sol) throw InternalInconsistency("first-layer decomposition failed");
  Vec t = a.zero();
  for (std::size_t cidx = 0, k = 0; cidx < d1; ++cidx) {
    if (is_pivot[cidx]) continue;
    t[cidx] = (*sol)[w_count + k];
    ++k;
  }

  Vec px = u, pt = u;
  for (std::size_t i = 1; i <= max_i; ++i) {
    px = a.bracket(x, px);
    pt = a.bracket(t, pt);
    if (px != pt) throw TheoremViolation("ad-power reduction identity failed at power " + std::to_string(i));
  }
  return true;
}

}  // namespace carnot

#endif
