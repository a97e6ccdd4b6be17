#ifndef CARNOT_CATALOG_HPP
#define CARNOT_CATALOG_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "carnot/algebra.hpp"

namespace carnot {

// Named algebra families used as fixtures and CLI-accessible examples.
//
// Basis ordering conventions (fixed; the file format depends on them):
//   heisenberg(m):          X_1..X_m, Y_1..Y_m, Z           with [X_i, Y_i] = Z
//   complex_heisenberg(m):  X_1, Xt_1, .., X_m, Xt_m, Y_1, Yt_1, .., Y_m, Yt_m, Z, Zt
//   filiform(n):            e_1, e_2, .., e_{n+1}           with [e_1, e_j] = e_{j+1}
//   star_graph(k):          X_1..X_k, Y, Z_1..Z_k           with [X_i, Y] = Z_i
//   euclidean(k):           e_1..e_k, abelian

inline CarnotAlgebra euclidean(std::size_t k) {
  if (k < 1) throw DomainError("euclidean(k) requires k >= 1");
  return build_algebra({k}, {});
}

inline CarnotAlgebra heisenberg(std::size_t m) {
  if (m < 1) throw DomainError("heisenberg(m) requires m >= 1");
  std::vector<BracketRelation> table;
  std::size_t z = 2 * m + 1;
  for (std::size_t i = 1; i <= m; ++i) table.push_back({i, m + i, {{z, Rat(1)}}});
  return build_algebra({2 * m, 1}, table);
}

// Realification of the m-th complex Heisenberg algebra: layer dims [4m, 2].
// For each s, the quadruple (X_s, Xt_s, Y_s, Yt_s) satisfies
//   [X_s, Y_s] = Z,   [X_s, Yt_s] = [Xt_s, Y_s] = Zt,   [Xt_s, Yt_s] = -Z,
// with all other first-layer brackets zero.
inline CarnotAlgebra complex_heisenberg(std::size_t m) {
  if (m < 1) throw DomainError("complex_heisenberg(m) requires m >= 1");
  std::vector<BracketRelation> table;
  std::size_t z = 4 * m + 1, zt = 4 * m + 2;
  for (std::size_t s = 0; s < m; ++s) {
    std::size_t x = 2 * s + 1, xt = 2 * s + 2;
    std::size_t y = 2 * m + 2 * s + 1, yt = 2 * m + 2 * s + 2;
    table.push_back({x, y, {{z, Rat(1)}}});
    table.push_back({x, yt, {{zt, Rat(1)}}});
    table.push_back({xt, y, {{zt, Rat(1)}}});
    table.push_back({xt, yt, {{z, Rat(-1)}}});
  }
  return build_algebra({4 * m, 2}, table);
}

// n-step model Filiform algebra, dimension n+1.
inline CarnotAlgebra filiform(std::size_t n) {
  if (n < 2) throw DomainError("filiform(n) requires n >= 2");
  std::vector<std::size_t> dims(n, 1);
  dims[0] = 2;
  std::vector<BracketRelation> table;
  for (std::size_t j = 2; j <= n; ++j) table.push_back({1, j, {{j + 1, Rat(1)}}});
  return build_algebra(dims, table);
}

inline bool is_model_filiform(const CarnotAlgebra& a) {
  if (a.step() < 2 || a.dim() != a.step() + 1) return false;
  if (a.layer_dims()[0] != 2) return false;
  for (std::size_t l = 1; l < a.step(); ++l)
    if (a.layer_dims()[l] != 1) return false;
  std::size_t expected = a.step() - 1;
  if (a.structure().size() != expected) return false;
  for (const auto& [key, value] : a.structure()) {
    if (key.first != 0) return false;
    if (value.size() != 1) return false;
    if (value[0].first != key.second + 1 || value[0].second != Rat(1)) return false;
  }
  return true;
}

// 2-step algebra with V1 = <X_1..X_k, Y>, V2 = <Z_1..Z_k>, [X_i, Y] = Z_i.
// Its rank-one first-layer elements are exactly the nonzero X-combinations.
inline CarnotAlgebra star_graph(std::size_t k) {
  if (k < 2) throw DomainError("star_graph(k) requires k >= 2");
  std::vector<BracketRelation> table;
  for (std::size_t i = 1; i <= k; ++i) table.push_back({i, k + 1, {{k + 1 + i, Rat(1)}}});
  return build_algebra({k + 1, k}, table);
}

// Free 2-step nilpotent algebra on g generators: V2 = Lambda^2 V1 with
// [x_i, x_j] = z_ij for i < j. For g >= 3 every nonzero first-layer element
// has rank g - 1 >= 2, already over the complexification.
inline CarnotAlgebra free_two_step(std::size_t g) {
  if (g < 2) throw DomainError("free_two_step(g) requires g >= 2");
  std::vector<BracketRelation> table;
  std::size_t z = g;
  for (std::size_t i = 1; i <= g; ++i)
    for (std::size_t j = i + 1; j <= g; ++j) table.push_back({i, j, {{++z, Rat(1)}}});
  return build_algebra({g, g * (g - 1) / 2}, table);
}

// Direct sum of n copies of a, with embeddings of each factor.
inline CarnotAlgebra direct_power(const CarnotAlgebra& a, std::size_t n) {
  if (n < 1) throw DomainError("direct power requires n >= 1");
  CarnotAlgebra sum = a;
  for (std::size_t i = 1; i < n; ++i) sum = direct_sum(sum, a);
  return sum;
}

// Quotient of the direct sum of n copies of heisenberg(m) by a second-layer
// subspace; conditions (1) and (2) of the product definition are checked
// exactly before taking the quotient.
struct ConditionFailure : DomainError {
  int condition;
  explicit ConditionFailure(int c)
      : DomainError("heisenberg product condition (" + std::to_string(c) + ") fails"), condition(c) {}
};

inline QuotientResult heisenberg_product(std::size_t m, std::size_t n, const std::vector<Vec>& v_basis) {
  CarnotAlgebra sum = direct_power(heisenberg(m), n);
  // Second-layer lines of the factors, in sum coordinates.
  std::vector<std::vector<Vec>> lines(n);
  for (std::size_t f = 0; f < n; ++f) lines[f] = {sum.basis_vector(sum.layer_begin(2) + f)};
  std::vector<Vec> v = v_basis;
  for (const Vec& x : v) {
    sum.check_dim(x);
    if (!sum.in_layer_span(x, 2)) throw NotCentral("subspace vector has support outside the second layer");
  }
  for (std::size_t f = 0; f < n; ++f)
    if (intersection_dim(lines[f], v) != 0) throw ConditionFailure(1);
  for (std::size_t f = 0; f < n; ++f)
    for (std::size_t g = f + 1; g < n; ++g) {
      std::vector<Vec> vf = v, vg = v;
      vf.push_back(lines[f][0]);
      vg.push_back(lines[g][0]);
      if (intersection_dim(vf, vg) != span_dim(v)) throw ConditionFailure(2);
    }
  return central_quotient(sum, v);
}

}  // namespace carnot

#endif
