#ifndef CARNOT_RATIONAL_HPP
#define CARNOT_RATIONAL_HPP

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "carnot/errors.hpp"

namespace carnot {

// All structure theory is exact: scalars are arbitrary-precision rationals.
using Rat = mpq_class;
using Int = mpz_class;

inline bool is_zero(const Rat& q) { return sgn(q) == 0; }

// mpq_class(p, q) does not canonicalize; GMP comparisons require canonical
// form. Every two-argument rational literal goes through here.
inline Rat frac(long p, long q) {
  Rat r(p, q);
  r.canonicalize();
  return r;
}

inline double to_double(const Rat& q) { return q.get_d(); }

// Formats in lowest terms as "p" or "p/q" (the wire format used everywhere).
inline std::string rat_to_string(const Rat& q) { return q.get_str(); }

// Accepts "p" or "p/q" with optional sign, base 10. Rejects zero denominators
// before GMP sees them (mpq_canonicalize aborts the process on q = 0).
inline Rat rat_from_string(std::string_view s) {
  if (s.empty()) throw ParseError("empty rational literal");
  std::size_t pos = 0;
  auto scan_int = [&](bool allow_sign) {
    std::size_t start = pos;
    if (allow_sign && pos < s.size() && (s[pos] == '+' || s[pos] == '-')) ++pos;
    std::size_t digits = 0;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') { ++pos; ++digits; }
    if (digits == 0) throw ParseError("bad rational literal '" + std::string(s) + "'");
    return std::string(s.substr(start, pos - start));
  };
  std::string num = scan_int(true);
  if (!num.empty() && num[0] == '+') num.erase(0, 1);  // mpz rejects a leading '+'
  std::string den = "1";
  if (pos < s.size() && s[pos] == '/') {
    ++pos;
    den = scan_int(false);
  }
  if (pos != s.size()) throw ParseError("bad rational literal '" + std::string(s) + "'");
  Int d(den);
  if (sgn(d) == 0) throw ParseError("zero denominator in '" + std::string(s) + "'");
  Rat q(Int(num), d);
  q.canonicalize();
  return q;
}

// t^e for integer e; e < 0 requires t != 0.
inline Rat rat_pow(const Rat& t, long e) {
  if (e < 0) {
    if (is_zero(t)) throw DomainError("zero raised to a negative power");
    Rat inv = 1 / t;
    return rat_pow(inv, -e);
  }
  Rat acc = 1, base = t;
  while (e > 0) {
    if (e & 1) acc *= base;
    base *= base;
    e >>= 1;
  }
  return acc;
}

// Best rational approximation of x with denominator <= max_den, by the
// continued-fraction convergent walk. Returns nullopt for non-finite input.
inline std::optional<Rat> rationalize(double x, const Int& max_den) {
  if (!std::isfinite(x)) return std::nullopt;
  bool neg = x < 0;
  double v = neg ? -x : x;

  Int h0 = 0, h1 = 1;  // numerators
  Int k0 = 1, k1 = 0;  // denominators
  double frac = v;
  for (int iter = 0; iter < 64; ++iter) {
    double fl = std::floor(frac);
    if (fl > 9.0e18) break;
    Int a(static_cast<unsigned long>(fl));
    Int h2 = a * h1 + h0;
    Int k2 = a * k1 + k0;
    if (k2 > max_den) {
      // Best semiconvergent with denominator within budget.
      Int t = (max_den - k0) / k1;
      Int hs = t * h1 + h0;
      Int ks = t * k1 + k0;
      if (sgn(ks) > 0) {
        Rat cand(hs, ks);
        cand.canonicalize();
        Rat prev(h1, k1 == 0 ? Int(1) : k1);
        prev.canonicalize();
        if (k1 != 0 && std::fabs(prev.get_d() - v) <= std::fabs(cand.get_d() - v)) {
          return neg ? Rat(-prev) : prev;
        }
        return neg ? Rat(-cand) : cand;
      }
      break;
    }
    h0 = h1; h1 = h2;
    k0 = k1; k1 = k2;
    double rem = frac - fl;
    if (rem < 1e-18) break;
    frac = 1.0 / rem;
    if (!std::isfinite(frac)) break;
  }
  if (k1 == 0) return std::nullopt;
  Rat q(h1, k1);
  q.canonicalize();
  return neg ? Rat(-q) : q;
}

// ---- Gaussian rationals -----------------------------------------------------
//
// Exact arithmetic in Q(i), used wherever genuinely complex-linear algebra is
// required (equivalence classes over C, complex Darboux bases). Rank of
// complexified adjoints goes through the real block embedding instead.

struct GaussRat {
  Rat re, im;

  GaussRat() : re(0), im(0) {}
  GaussRat(Rat r) : re(std::move(r)), im(0) {}
  GaussRat(int r) : re(r), im(0) {}
  GaussRat(Rat r, Rat i) : re(std::move(r)), im(std::move(i)) {}

  bool is_zero() const { return sgn(re) == 0 && sgn(im) == 0; }
  GaussRat conj() const { return {re, Rat(-im)}; }
  Rat norm2() const { return re * re + im * im; }

  GaussRat operator-() const { return {Rat(-re), Rat(-im)}; }
  GaussRat& operator+=(const GaussRat& o) { re += o.re; im += o.im; return *this; }
  GaussRat& operator-=(const GaussRat& o) { re -= o.re; im -= o.im; return *this; }
  GaussRat& operator*=(const GaussRat& o) {
    Rat r = re * o.re - im * o.im;
    Rat i = re * o.im + im * o.re;
    re = r; im = i;
    return *this;
  }
  GaussRat& operator/=(const GaussRat& o) {
    Rat n2 = o.norm2();
    if (sgn(n2) == 0) throw DomainError("division by zero in Q(i)");
    Rat r = (re * o.re + im * o.im) / n2;
    Rat i = (im * o.re - re * o.im) / n2;
    re = r; im = i;
    return *this;
  }

  friend GaussRat operator+(GaussRat a, const GaussRat& b) { return a += b; }
  friend GaussRat operator-(GaussRat a, const GaussRat& b) { return a -= b; }
  friend GaussRat operator*(GaussRat a, const GaussRat& b) { return a *= b; }
  friend GaussRat operator/(GaussRat a, const GaussRat& b) { return a /= b; }
  friend bool operator==(const GaussRat& a, const GaussRat& b) { return a.re == b.re && a.im == b.im; }
  friend bool operator!=(const GaussRat& a, const GaussRat& b) { return !(a == b); }
};

inline bool is_zero(const GaussRat& z) { return z.is_zero(); }

inline std::string gauss_to_string(const GaussRat& z) {
  if (sgn(z.im) == 0) return rat_to_string(z.re);
  std::string s = rat_to_string(z.re);
  s += (sgn(z.im) < 0) ? " - " : " + ";
  s += rat_to_string(Rat(abs(z.im)));
  s += "i";
  return s;
}

}  // namespace carnot

#endif
