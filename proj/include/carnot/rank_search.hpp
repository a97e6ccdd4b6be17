#ifndef CARNOT_RANK_SEARCH_HPP
#define CARNOT_RANK_SEARCH_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "carnot/algebra.hpp"
#include "carnot/io.hpp"
#include "carnot/rng.hpp"

namespace carnot {

enum class Field { real, complex_field };

inline const char* field_name(Field f) { return f == Field::real ? "real" : "complex"; }

// Result of the minimum-rank search over nonzero first-layer elements.
// status == exact means the witness is rational and its exact rank equals
// min_rank; numerical means only floating-point evidence at the reported
// residual exists.
struct RankReport {
  Field field = Field::real;
  std::size_t min_rank = 0;
  enum class Status { exact, numerical } status = Status::exact;
  ComplexVec witness;  // imaginary part zero over the reals
  double residual = 0.0;
};

struct SearchParams {
  std::size_t restarts = 64;
  std::uint64_t seed = 0;
  Int rationalize_budget = Int(1000000);
  double residual_tol = 1e-18;
  std::size_t max_iters = 400;
};

namespace detail {

// ---- numeric minor minimization ---------------------------------------------
//
// The set {x in V1 : rank(ad x) <= k} is the zero locus of all (k+1)x(k+1)
// minors of ad(x), whose entries are linear in x. Feasibility for k >= 1 is
// probed by minimizing the sum of squared minors over the unit sphere with
// multi-start projected gradient descent; certification is exact and happens
// afterwards, so none of the float tolerances here affect soundness.

inline void subsets_of_size(std::size_t n, std::size_t k, std::vector<std::vector<std::size_t>>& out) {
  std::vector<std::size_t> cur(k);
  for (std::size_t i = 0; i < k; ++i) cur[i] = i;
  while (true) {
    out.push_back(cur);
    std::size_t i = k;
    while (i-- > 0) {
      if (cur[i] != i + n - k) {
        ++cur[i];
        for (std::size_t j = i + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
        break;
      }
      if (i == 0) return;
    }
  }
}

template <class T>
T minor_det(const std::vector<T>& sub, std::size_t n) {
  if (n == 1) return sub[0];
  if (n == 2) return sub[0] * sub[3] - sub[1] * sub[2];
  if (n == 3)
    return sub[0] * (sub[4] * sub[8] - sub[5] * sub[7]) - sub[1] * (sub[3] * sub[8] - sub[5] * sub[6]) +
           sub[2] * (sub[3] * sub[7] - sub[4] * sub[6]);
  // n == 4 by expansion along the first row
  T det(0);
  std::vector<T> m(9);
  for (std::size_t c = 0; c < 4; ++c) {
    std::size_t t = 0;
    for (std::size_t i = 1; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j)
        if (j != c) m[t++] = sub[i * 4 + j];
    T cof = minor_det(m, 3);
    det += ((c % 2 == 0) ? sub[c] : -sub[c]) * cof;
  }
  return det;
}

// Cofactor matrix (transposed adjugate): cof[i][j] = d det / d sub[i][j].
template <class T>
void cofactor_matrix(const std::vector<T>& sub, std::size_t n, std::vector<T>& cof) {
  cof.assign(n * n, T(0));
  if (n == 1) {
    cof[0] = T(1);
    return;
  }
  std::vector<T> m((n - 1) * (n - 1));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t t = 0;
      for (std::size_t r = 0; r < n; ++r) {
        if (r == i) continue;
        for (std::size_t c = 0; c < n; ++c) {
          if (c == j) continue;
          m[t++] = sub[r * n + c];
        }
      }
      T d = minor_det(m, n - 1);
      cof[i * n + j] = (((i + j) % 2) == 0) ? d : -d;
    }
}

struct MinorObjective {
  std::size_t dim;     // ambient algebra dimension
  std::size_t params;  // real parameter count
  std::size_t k1;      // minor size = k + 1
  bool complex_field;
  std::vector<std::vector<double>> ad;  // per first-layer direction, dim*dim
  std::vector<std::vector<std::size_t>> rows, cols;

  MinorObjective(const CarnotAlgebra& a, std::size_t k, bool cf) {
    dim = a.dim();
    k1 = k + 1;
    complex_field = cf;
    std::size_t d1 = a.layer_dims()[0];
    params = cf ? 2 * d1 : d1;
    for (std::size_t p = 0; p < d1; ++p) {
      MatQ m = a.ad_matrix(a.basis_vector(p));
      std::vector<double> md(dim * dim);
      for (std::size_t i = 0; i < dim * dim; ++i) md[i] = to_double(m.a[i]);
      ad.push_back(std::move(md));
    }
    subsets_of_size(dim, k1, rows);
    cols = rows;
  }

  std::size_t d1() const { return ad.size(); }

  // Assembles ad(x) (or ad(u) + i ad(v)) as doubles.
  void assemble(const std::vector<double>& theta, std::vector<std::complex<double>>& m) const {
    m.assign(dim * dim, {0.0, 0.0});
    for (std::size_t p = 0; p < d1(); ++p) {
      double re = theta[p];
      double im = complex_field ? theta[d1() + p] : 0.0;
      if (re == 0.0 && im == 0.0) continue;
      const std::vector<double>& mp = ad[p];
      for (std::size_t i = 0; i < dim * dim; ++i)
        if (mp[i] != 0.0) m[i] += std::complex<double>(re * mp[i], im * mp[i]);
    }
  }

  double value(const std::vector<double>& theta) const {
    std::vector<std::complex<double>> m;
    assemble(theta, m);
    std::vector<std::complex<double>> sub(k1 * k1);
    double f = 0.0;
    for (const auto& r : rows)
      for (const auto& c : cols) {
        for (std::size_t i = 0; i < k1; ++i)
          for (std::size_t j = 0; j < k1; ++j) sub[i * k1 + j] = m[r[i] * dim + c[j]];
        f += std::norm(minor_det(sub, k1));
      }
    return f;
  }

  double value_and_gradient(const std::vector<double>& theta, std::vector<double>& grad) const {
    std::vector<std::complex<double>> m;
    assemble(theta, m);
    grad.assign(params, 0.0);
    std::vector<std::complex<double>> sub(k1 * k1), cof;
    double f = 0.0;
    for (const auto& r : rows)
      for (const auto& c : cols) {
        for (std::size_t i = 0; i < k1; ++i)
          for (std::size_t j = 0; j < k1; ++j) sub[i * k1 + j] = m[r[i] * dim + c[j]];
        std::complex<double> det = minor_det(sub, k1);
        double nd = std::norm(det);
        if (nd == 0.0) continue;
        f += nd;
        cofactor_matrix(sub, k1, cof);
        for (std::size_t p = 0; p < d1(); ++p) {
          std::complex<double> dd(0.0, 0.0);
          const std::vector<double>& mp = ad[p];
          for (std::size_t i = 0; i < k1; ++i)
            for (std::size_t j = 0; j < k1; ++j) {
              double entry = mp[r[i] * dim + c[j]];
              if (entry != 0.0) dd += cof[i * k1 + j] * entry;
            }
          // d|det|^2 = 2 Re(conj(det) d det)
          grad[p] += 2.0 * (std::conj(det) * dd).real();
          if (complex_field) grad[d1() + p] += 2.0 * (std::conj(det) * (std::complex<double>(0, 1) * dd)).real();
        }
      }
    return f;
  }
};

inline void normalize_sphere(std::vector<double>& x) {
  double n2 = 0.0;
  for (double v : x) n2 += v * v;
  double n = std::sqrt(n2);
  if (n == 0.0) return;
  for (double& v : x) v /= n;
}

struct DescentResult {
  double residual = std::numeric_limits<double>::infinity();
  std::vector<double> point;
};

inline DescentResult project_descend(const MinorObjective& obj, SplitMix64 rng, std::size_t max_iters) {
  std::vector<double> x(obj.params);
  for (double& v : x) v = rng.next_symmetric();
  normalize_sphere(x);

  std::vector<double> grad, trial(obj.params);
  double f = obj.value(x);
  double eta = 0.5;
  for (std::size_t it = 0; it < max_iters && f > 1e-28; ++it) {
    double fg = obj.value_and_gradient(x, grad);
    f = fg;
    // project the gradient onto the tangent space of the sphere
    double dot = 0.0;
    for (std::size_t i = 0; i < obj.params; ++i) dot += grad[i] * x[i];
    double gn2 = 0.0;
    for (std::size_t i = 0; i < obj.params; ++i) {
      grad[i] -= dot * x[i];
      gn2 += grad[i] * grad[i];
    }
    if (gn2 < 1e-30) break;
    bool moved = false;
    for (int bt = 0; bt < 45; ++bt) {
      for (std::size_t i = 0; i < obj.params; ++i) trial[i] = x[i] - eta * grad[i];
      normalize_sphere(trial);
      double ft = obj.value(trial);
      if (ft < f - 0.25 * eta * gn2) {
        x.swap(trial);
        f = ft;
        eta *= 1.8;
        moved = true;
        break;
      }
      eta *= 0.5;
    }
    if (!moved) break;
  }
  return {obj.value(x), std::move(x)};
}

// ---- exact certification helpers ---------------------------------------------

// Scales so the entry of largest magnitude becomes exactly 1, then runs each
// coordinate through continued fractions. Any failure returns nullopt.
inline std::optional<Vec> rationalize_real_point(const CarnotAlgebra& a, const std::vector<double>& theta,
                                                 const Int& budget) {
  std::size_t d1 = a.layer_dims()[0];
  std::size_t best = 0;
  for (std::size_t i = 1; i < d1; ++i)
    if (std::fabs(theta[i]) > std::fabs(theta[best])) best = i;
  if (theta[best] == 0.0) return std::nullopt;
  Vec v = a.zero();
  for (std::size_t i = 0; i < d1; ++i) {
    auto r = rationalize(theta[i] / theta[best], budget);
    if (!r) return std::nullopt;
    v[i] = *r;
  }
  if (vec_is_zero(v)) return std::nullopt;
  return v;
}

inline std::optional<ComplexVec> rationalize_complex_point(const CarnotAlgebra& a,
                                                           const std::vector<double>& theta, const Int& budget) {
  std::size_t d1 = a.layer_dims()[0];
  std::size_t best = 0;
  double bestn = 0.0;
  for (std::size_t i = 0; i < d1; ++i) {
    double n = theta[i] * theta[i] + theta[d1 + i] * theta[d1 + i];
    if (n > bestn) {
      bestn = n;
      best = i;
    }
  }
  if (bestn == 0.0) return std::nullopt;
  std::complex<double> pivot(theta[best], theta[d1 + best]);
  ComplexVec z(a.zero(), a.zero());
  for (std::size_t i = 0; i < d1; ++i) {
    std::complex<double> c = std::complex<double>(theta[i], theta[d1 + i]) / pivot;
    auto re = rationalize(c.real(), budget);
    auto im = rationalize(c.imag(), budget);
    if (!re || !im) return std::nullopt;
    z.re[i] = *re;
    z.im[i] = *im;
  }
  if (z.is_zero()) return std::nullopt;
  return z;
}

// Exact solution space {x in V1 : image(ad x) lies in the line R*gen}; linear
// in x because ad is. Every nonzero member has rank <= 1 by construction.
inline std::vector<Vec> line_constrained_space(const CarnotAlgebra& a, const Vec& gen) {
  std::size_t d1 = a.layer_dims()[0];
  std::vector<std::vector<Rat>> rows;
  for (std::size_t l = 0; l < a.dim(); ++l) {
    std::vector<Vec> cols_pl;  // ad(b_p) b_l per p
    for (std::size_t p = 0; p < d1; ++p) cols_pl.push_back(a.bracket(a.basis_vector(p), a.basis_vector(l)));
    for (std::size_t al = 0; al < a.dim(); ++al)
      for (std::size_t be = al + 1; be < a.dim(); ++be) {
        std::vector<Rat> row(d1, Rat(0));
        bool nonzero = false;
        for (std::size_t p = 0; p < d1; ++p) {
          row[p] = cols_pl[p][al] * gen[be] - cols_pl[p][be] * gen[al];
          nonzero = nonzero || !is_zero(row[p]);
        }
        if (nonzero) rows.push_back(std::move(row));
      }
  }
  std::vector<Vec> out;
  if (rows.empty()) {
    for (std::size_t p = 0; p < d1; ++p) out.push_back(a.basis_vector(p));
    return out;
  }
  for (const auto& kv : kernel_basis(from_rows(rows))) {
    Vec v = a.zero();
    for (std::size_t p = 0; p < d1; ++p) v[p] = kv[p];
    out.push_back(std::move(v));
  }
  return out;
}

inline std::vector<ComplexVec> line_constrained_space_complex(const CarnotAlgebra& a, const ComplexVec& gen) {
  std::size_t d1 = a.layer_dims()[0];
  std::vector<std::vector<GaussRat>> rows;
  for (std::size_t l = 0; l < a.dim(); ++l) {
    std::vector<Vec> cols_pl;
    for (std::size_t p = 0; p < d1; ++p) cols_pl.push_back(a.bracket(a.basis_vector(p), a.basis_vector(l)));
    for (std::size_t al = 0; al < a.dim(); ++al)
      for (std::size_t be = al + 1; be < a.dim(); ++be) {
        GaussRat gal(gen.re[al], gen.im[al]), gbe(gen.re[be], gen.im[be]);
        std::vector<GaussRat> row(d1);
        bool nonzero = false;
        for (std::size_t p = 0; p < d1; ++p) {
          row[p] = GaussRat(cols_pl[p][al]) * gbe - GaussRat(cols_pl[p][be]) * gal;
          nonzero = nonzero || !row[p].is_zero();
        }
        if (nonzero) rows.push_back(std::move(row));
      }
  }
  std::vector<ComplexVec> out;
  if (rows.empty()) {
    for (std::size_t p = 0; p < d1; ++p) out.emplace_back(a.basis_vector(p));
    return out;
  }
  for (const auto& kv : kernel_basis(from_rows(rows))) {
    ComplexVec z(a.zero(), a.zero());
    for (std::size_t p = 0; p < d1; ++p) {
      z.re[p] = kv[p].re;
      z.im[p] = kv[p].im;
    }
    out.push_back(std::move(z));
  }
  return out;
}

// Numeric image direction of ad at a descent point: the column of largest
// norm, scaled so its largest entry is 1.
inline std::optional<std::vector<std::complex<double>>> numeric_image_direction(
    const MinorObjective& obj, const std::vector<double>& theta) {
  std::vector<std::complex<double>> m;
  obj.assemble(theta, m);
  std::size_t dim = obj.dim;
  std::size_t best_col = 0;
  double best = 0.0;
  for (std::size_t j = 0; j < dim; ++j) {
    double n = 0.0;
    for (std::size_t i = 0; i < dim; ++i) n += std::norm(m[i * dim + j]);
    if (n > best) {
      best = n;
      best_col = j;
    }
  }
  if (best == 0.0) return std::nullopt;
  std::vector<std::complex<double>> w(dim);
  std::size_t piv = 0;
  double pn = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    w[i] = m[i * dim + best_col];
    if (std::norm(w[i]) > pn) {
      pn = std::norm(w[i]);
      piv = i;
    }
  }
  std::complex<double> d = w[piv];
  for (auto& c : w) c /= d;
  return w;
}

}  // namespace detail

// Nonzero generator of the image of ad(x), normalized so the first nonzero
// coordinate equals 1. Requires rank(x) = 1 exactly.
inline Vec rank_one_image(const CarnotAlgebra& a, const Vec& x) {
  if (a.element_rank(x) != 1) throw RankNotOne("element does not have rank one");
  for (std::size_t j = 0; j < a.dim(); ++j) {
    Vec col = a.bracket(x, a.basis_vector(j));
    if (vec_is_zero(col)) continue;
    for (std::size_t i = 0; i < a.dim(); ++i)
      if (!is_zero(col[i])) return vec_scale(1 / col[i], col);
  }
  throw InternalInconsistency("rank-one element with zero adjoint image");
}

inline ComplexVec rank_one_image_complex(const CarnotAlgebra& a, const ComplexVec& z) {
  if (a.element_rank_complex(z) != 1) throw RankNotOne("element does not have complex rank one");
  for (std::size_t j = 0; j < a.dim(); ++j) {
    ComplexVec col = a.bracket(z, ComplexVec(a.basis_vector(j)));
    if (col.is_zero()) continue;
    for (std::size_t i = 0; i < a.dim(); ++i) {
      GaussRat c(col.re[i], col.im[i]);
      if (!c.is_zero()) {
        ComplexVec out = cvec_scale(GaussRat(Rat(1)) / c, col);
        return out;
      }
    }
  }
  throw InternalInconsistency("rank-one element with zero adjoint image");
}

// ---- the search ---------------------------------------------------------------

inline RankReport min_rank_search(const CarnotAlgebra& a, Field field, const SearchParams& params = {}) {
  std::size_t d1 = a.layer_dims()[0];
  bool cf = (field == Field::complex_field);

  // k = 0: exact kernel of x -> ad(x) restricted to the first layer. Over C
  // a zero of the complexified adjoint forces real and imaginary parts into
  // the real kernel, so the computation is shared.
  {
    std::vector<std::vector<Rat>> cols;
    for (std::size_t p = 0; p < d1; ++p) {
      MatQ m = a.ad_matrix(a.basis_vector(p));
      cols.push_back(m.a);
    }
    auto ker = kernel_basis(from_cols(cols));
    if (!ker.empty()) {
      Vec w = a.zero();
      for (std::size_t p = 0; p < d1; ++p) w[p] = ker[0][p];
      RankReport rep;
      rep.field = field;
      rep.min_rank = 0;
      rep.status = RankReport::Status::exact;
      rep.witness = ComplexVec(std::move(w));
      rep.residual = 0.0;
      return rep;
    }
  }

  // Deterministic exact probes give a certified upper bound to aim below.
  std::vector<Vec> probes;
  for (std::size_t i = 0; i < d1; ++i) probes.push_back(a.basis_vector(i));
  for (std::size_t i = 0; i < d1; ++i)
    for (std::size_t j = i + 1; j < d1; ++j) {
      probes.push_back(vec_add(a.basis_vector(i), a.basis_vector(j)));
      probes.push_back(vec_sub(a.basis_vector(i), a.basis_vector(j)));
    }
  {
    SplitMix64 rng = substream(params.seed, 0x9a0be, cf ? 1 : 0);
    for (int t = 0; t < 8; ++t) {
      Vec v = a.zero();
      for (std::size_t i = 0; i < d1; ++i) v[i] = Rat(rng.next_int(-3, 3));
      if (!vec_is_zero(v)) probes.push_back(std::move(v));
    }
  }
  std::size_t ub_rank = a.dim();
  ComplexVec ub_witness;
  for (const Vec& pr : probes) {
    std::size_t r = cf ? a.element_rank_complex(ComplexVec(pr)) : a.element_rank(pr);
    if (r < ub_rank) {
      ub_rank = r;
      ub_witness = ComplexVec(pr);
    }
  }

  // For every k strictly below the certified bound, probe rank <= k
  // feasibility numerically, then try to promote near-zero residuals to
  // exact witnesses: direct rationalization first, then the image-line
  // route (rationalize the image direction, solve the linear constraint
  // space exactly, pick a member).
  std::optional<std::pair<std::size_t, double>> numerical_candidate;
  std::optional<RankReport> exact_candidate;
  double best_residual_seen = std::numeric_limits<double>::infinity();
  std::vector<double> numerical_point;

  for (std::size_t k = 1; k < ub_rank && k + 1 <= 4 && !exact_candidate; ++k) {
    detail::MinorObjective obj(a, k, cf);
    // Fixed batch size: the early-stop decision points, and therefore the
    // chosen restart, must not depend on the thread budget.
    const std::size_t batch = 8;
    detail::DescentResult best;
    std::size_t best_index = params.restarts;
    for (std::size_t base = 0; base < params.restarts && !(best.residual < params.residual_tol);
         base += batch) {
      std::size_t count = std::min(batch, params.restarts - base);
      std::vector<detail::DescentResult> results(count);
      parallel_for(count, [&](std::size_t i) {
        results[i] =
            detail::project_descend(obj, substream(params.seed, 0xde5ce7, k * 1000 + base + i), params.max_iters);
      });
      for (std::size_t i = 0; i < count; ++i) {
        // lexicographic (residual, restart index)
        if (results[i].residual < best.residual ||
            (results[i].residual == best.residual && base + i < best_index)) {
          best = results[i];
          best_index = base + i;
        }
      }
    }
    best_residual_seen = std::min(best_residual_seen, best.residual);
    if (!(best.residual < params.residual_tol)) continue;

    auto record_exact = [&](std::size_t r, ComplexVec w) {
      RankReport rep;
      rep.field = field;
      rep.min_rank = r;
      rep.status = RankReport::Status::exact;
      rep.witness = std::move(w);
      rep.residual = 0.0;
      exact_candidate = std::move(rep);
    };

    // (a) direct rationalization of the witness
    if (!cf) {
      auto v = detail::rationalize_real_point(a, best.point, params.rationalize_budget);
      if (v) {
        std::size_t r = a.element_rank(*v);
        if (r <= k) record_exact(r, ComplexVec(*v));
      }
    } else {
      auto z = detail::rationalize_complex_point(a, best.point, params.rationalize_budget);
      if (z) {
        std::size_t r = a.element_rank_complex(*z);
        if (r <= k) record_exact(r, *z);
      }
    }

    // (b) image-line route (rank one only): rationalize the image direction
    // instead of the point, then pick an exact member of the linear space it
    // constrains.
    if (!exact_candidate && k == 1) {
      auto w = detail::numeric_image_direction(obj, best.point);
      if (w) {
        bool ok = true;
        ComplexVec gen(a.zero(), a.zero());
        for (std::size_t i = 0; i < a.dim() && ok; ++i) {
          auto re = rationalize((*w)[i].real(), params.rationalize_budget);
          auto im = rationalize((*w)[i].imag(), params.rationalize_budget);
          if (!re || !im)
            ok = false;
          else {
            gen.re[i] = *re;
            gen.im[i] = *im;
          }
        }
        if (ok && !gen.is_zero()) {
          if (!cf && gen.is_real()) {
            for (const Vec& cand : detail::line_constrained_space(a, gen.re)) {
              if (vec_is_zero(cand)) continue;
              if (a.element_rank(cand) == 1) {
                record_exact(1, ComplexVec(cand));
                break;
              }
            }
          } else if (cf) {
            for (const ComplexVec& cand : detail::line_constrained_space_complex(a, gen)) {
              if (cand.is_zero()) continue;
              if (a.element_rank_complex(cand) == 1) {
                record_exact(1, cand);
                break;
              }
            }
          }
        }
      }
    }

    // could not certify: remember the numerical evidence at the lowest k
    if (!exact_candidate && !numerical_candidate) {
      numerical_candidate = {k, best.residual};
      numerical_point = best.point;
    }
  }

  // Lowest-k evidence wins; exact beats numerical at equal k.
  if (exact_candidate &&
      (!numerical_candidate || exact_candidate->min_rank <= numerical_candidate->first) &&
      exact_candidate->min_rank <= ub_rank)
    return *exact_candidate;

  if (numerical_candidate && numerical_candidate->first < ub_rank) {
    RankReport rep;
    rep.field = field;
    rep.min_rank = numerical_candidate->first;
    rep.status = RankReport::Status::numerical;
    rep.residual = numerical_candidate->second;
    ComplexVec z(a.zero(), a.zero());
    for (std::size_t i = 0; i < d1; ++i) {
      auto re = rationalize(numerical_point[i], Int(1) << 30);
      z.re[i] = re ? *re : Rat(0);
      if (cf) {
        auto im = rationalize(numerical_point[d1 + i], Int(1) << 30);
        z.im[i] = im ? *im : Rat(0);
      }
    }
    rep.witness = z;
    return rep;
  }

  if (ub_rank >= a.dim()) throw SearchInconclusive(best_residual_seen);
  RankReport rep;
  rep.field = field;
  rep.min_rank = ub_rank;
  rep.status = RankReport::Status::exact;
  rep.witness = ub_witness;
  rep.residual = 0.0;
  return rep;
}

// ---- rank-one classes and invariant subspaces ---------------------------------

// Extended class data: span of the witnesses sharing an image line, plus the
// normalized line generator.
struct EquivalenceClassDecomposition {
  struct Class {
    std::vector<Vec> basis;      // echelon basis of the witness span
    Vec image_line;              // normalized generator of [v, n]
    std::vector<std::size_t> witness_indices;
  };
  std::vector<Class> classes;
  std::vector<Vec> residual;  // first-layer directions not covered by classes
};

// Groups exact rank-one witnesses by their image line, verifies the subspace
// closure of every class and the vanishing of cross-class brackets. Both
// facts are theorems when the minimum rank is one, so violations indicate
// corrupted input (non rank-one witnesses) or a bug.
inline EquivalenceClassDecomposition equivalence_classes(const CarnotAlgebra& a, const std::vector<Vec>& witnesses) {
  if (witnesses.empty()) throw EmptyWitnessSet();
  {
    // the extended-class structure needs minimum rank one: no flat directions
    std::size_t d1 = a.layer_dims()[0];
    std::vector<std::vector<Rat>> cols;
    for (std::size_t p = 0; p < d1; ++p) cols.push_back(a.ad_matrix(a.basis_vector(p)).a);
    if (!kernel_basis(from_cols(cols)).empty())
      throw PreconditionViolation("first layer contains rank-zero directions");
  }
  EquivalenceClassDecomposition out;
  for (std::size_t wi = 0; wi < witnesses.size(); ++wi) {
    const Vec& w = witnesses[wi];
    a.check_dim(w);
    if (!a.in_layer_span(w, 1)) throw WitnessNotRankOne("witness not in the first layer");
    if (a.element_rank(w) != 1) throw WitnessNotRankOne("witness does not have exact rank one");
    Vec line = rank_one_image(a, w);
    bool placed = false;
    for (auto& cls : out.classes) {
      if (cls.image_line == line) {
        cls.witness_indices.push_back(wi);
        placed = true;
        break;
      }
    }
    if (!placed) out.classes.push_back({{}, line, {wi}});
  }

  for (auto& cls : out.classes) {
    // grow each class to the full extended class: the solution space of
    // image(ad x) in R*line is linear in x, and with no flat directions its
    // nonzero members are exactly the rank-one elements with this line
    cls.basis = echelon_span(detail::line_constrained_space(a, cls.image_line));
    for (std::size_t wi : cls.witness_indices)
      if (!in_span(cls.basis, witnesses[wi]))
        throw InternalInconsistency("witness escapes its own extended class");
    // closure: nonzero sums of class members keep rank one and line
    for (std::size_t i = 0; i < cls.basis.size(); ++i) {
      if (a.element_rank(cls.basis[i]) != 1 || rank_one_image(a, cls.basis[i]) != cls.image_line)
        throw TheoremViolation("extended class member is not rank one on the same line");
      for (std::size_t j = i + 1; j < cls.basis.size(); ++j) {
        Vec s = vec_add(cls.basis[i], cls.basis[j]);
        if (vec_is_zero(s)) continue;
        if (a.element_rank(s) != 1 || rank_one_image(a, s) != cls.image_line)
          throw TheoremViolation("same-line witnesses fail subspace closure");
      }
    }
  }

  // cross-class brackets vanish identically
  for (std::size_t i = 0; i < out.classes.size(); ++i)
    for (std::size_t j = i + 1; j < out.classes.size(); ++j)
      for (const Vec& u : out.classes[i].basis)
        for (const Vec& v : out.classes[j].basis)
          if (!vec_is_zero(a.bracket(u, v))) throw TheoremViolation("cross-class bracket does not vanish");

  // pairwise trivial intersections (the joint sum need not be direct unless
  // the first layer is spanned by rank-one elements)
  for (std::size_t i = 0; i < out.classes.size(); ++i)
    for (std::size_t j = i + 1; j < out.classes.size(); ++j)
      if (intersection_dim(out.classes[i].basis, out.classes[j].basis) != 0)
        throw TheoremViolation("distinct extended classes intersect nontrivially");

  // residual: standard first-layer directions outside the class span
  std::vector<Vec> all;
  for (const auto& cls : out.classes) all.insert(all.end(), cls.basis.begin(), cls.basis.end());
  std::vector<Vec> ext = all;
  for (std::size_t i = 0; i < a.layer_dims()[0]; ++i) {
    Vec e = a.basis_vector(i);
    if (!in_span(ext, e)) {
      out.residual.push_back(e);
      ext.push_back(e);
    }
  }
  return out;
}

struct InvariantSubspace {
  enum class Kind { w1, w1c, hat_w1 } kind = Kind::w1;
  std::vector<Vec> basis;
  std::vector<std::string> witnesses_used;
};

struct ComplexInvariantSubspaces {
  std::vector<ComplexVec> w1c_basis;  // complex span of the witnesses
  InvariantSubspace hat_w1;           // real + imaginary parts, a real subspace of V1
};

// Span of supplied minimum-rank witnesses. A lower bound for the full
// invariant subspace: enumerating every minimum-rank element is the same
// feasibility problem the search solves pointwise.
inline InvariantSubspace invariant_subspace_real(const CarnotAlgebra& a, const RankReport& report,
                                                 const std::vector<Vec>& witnesses) {
  if (witnesses.empty()) throw EmptyWitnessSet();
  InvariantSubspace s;
  s.kind = InvariantSubspace::Kind::w1;
  for (const Vec& w : witnesses) {
    a.check_dim(w);
    if (a.element_rank(w) != report.min_rank)
      throw WitnessNotRankOne("witness rank does not match the reported minimum");
    s.witnesses_used.push_back(format_vector(w));
  }
  s.basis = echelon_span(witnesses);
  return s;
}

inline ComplexInvariantSubspaces invariant_subspace_complex(const CarnotAlgebra& a, const RankReport& report,
                                                            const std::vector<ComplexVec>& witnesses) {
  if (witnesses.empty()) throw EmptyWitnessSet();
  ComplexInvariantSubspaces out;
  std::vector<std::vector<GaussRat>> cvecs;
  std::vector<Vec> parts;
  for (const ComplexVec& z : witnesses) {
    a.check_dim(z.re);
    if (a.element_rank_complex(z) != report.min_rank)
      throw WitnessNotRankOne("witness rank does not match the reported minimum");
    std::vector<GaussRat> g(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) g[i] = GaussRat(z.re[i], z.im[i]);
    cvecs.push_back(std::move(g));
    out.hat_w1.witnesses_used.push_back(format_vector(z.re) + " + i(" + format_vector(z.im) + ")");
    parts.push_back(z.re);
    parts.push_back(z.im);
  }
  for (const auto& g : echelon_span(cvecs)) {
    ComplexVec z(a.zero(), a.zero());
    for (std::size_t i = 0; i < a.dim(); ++i) {
      z.re[i] = g[i].re;
      z.im[i] = g[i].im;
    }
    out.w1c_basis.push_back(std::move(z));
  }
  out.hat_w1.kind = InvariantSubspace::Kind::hat_w1;
  std::vector<Vec> nonzero;
  for (Vec& p : parts)
    if (!vec_is_zero(p)) nonzero.push_back(std::move(p));
  out.hat_w1.basis = echelon_span(nonzero);
  return out;
}

// True iff every supplied graded automorphism maps the subspace into itself.
inline bool invariance_check(const CarnotAlgebra& a, const std::vector<Vec>& subspace_basis,
                             const std::vector<MatQ>& automorphisms) {
  for (std::size_t i = 0; i < automorphisms.size(); ++i) {
    auto chk = verify_graded_automorphism(a, automorphisms[i]);
    if (!chk.ok) throw NotAnAutomorphism(i, chk.violation);
  }
  for (const MatQ& m : automorphisms)
    for (const Vec& v : subspace_basis)
      if (!in_span(subspace_basis, m.mul(v))) return false;
  return true;
}

// ---- witness harvesting --------------------------------------------------------

// Deterministic rank-one witness collection: exact probes, the search
// witness, and full extended classes grown from each witness's image line.
inline std::vector<Vec> harvest_rank_one_witnesses(const CarnotAlgebra& a, std::uint64_t seed) {
  std::size_t d1 = a.layer_dims()[0];
  std::vector<Vec> candidates;
  for (std::size_t i = 0; i < d1; ++i) candidates.push_back(a.basis_vector(i));
  for (std::size_t i = 0; i < d1; ++i)
    for (std::size_t j = i + 1; j < d1; ++j) {
      candidates.push_back(vec_add(a.basis_vector(i), a.basis_vector(j)));
      candidates.push_back(vec_sub(a.basis_vector(i), a.basis_vector(j)));
    }
  SplitMix64 rng = substream(seed, 0x4a11e57);
  for (int t = 0; t < 12; ++t) {
    Vec v = a.zero();
    for (std::size_t i = 0; i < d1; ++i) v[i] = Rat(rng.next_int(-2, 2));
    candidates.push_back(std::move(v));
  }
  try {
    SearchParams sp;
    sp.seed = seed;
    RankReport rep = min_rank_search(a, Field::real, sp);
    if (rep.status == RankReport::Status::exact && rep.min_rank == 1) candidates.push_back(rep.witness.re);
  } catch (const SearchInconclusive&) {
  }

  std::vector<Vec> witnesses;
  std::vector<Vec> span_so_far;
  auto add = [&](const Vec& w) {
    if (vec_is_zero(w)) return;
    if (in_span(span_so_far, w)) return;
    witnesses.push_back(w);
    span_so_far.push_back(w);
  };
  for (const Vec& c : candidates) {
    if (vec_is_zero(c)) continue;
    if (a.element_rank(c) != 1) continue;
    add(c);
    // grow the whole extended class of this witness
    Vec line = rank_one_image(a, c);
    for (const Vec& member : detail::line_constrained_space(a, line)) {
      if (vec_is_zero(member)) continue;
      if (a.element_rank(member) == 1) add(member);
    }
    if (span_dim(span_so_far) == d1) break;
  }
  return witnesses;
}

inline std::vector<ComplexVec> harvest_complex_rank_one_witnesses(const CarnotAlgebra& a, std::uint64_t seed) {
  std::size_t d1 = a.layer_dims()[0];
  std::vector<ComplexVec> candidates;
  try {
    SearchParams sp;
    sp.seed = seed;
    RankReport rep = min_rank_search(a, Field::complex_field, sp);
    if (rep.status == RankReport::Status::exact && rep.min_rank == 1) candidates.push_back(rep.witness);
  } catch (const SearchInconclusive&) {
  }
  for (std::size_t i = 0; i < d1; ++i)
    for (std::size_t j = 0; j < d1; ++j) {
      if (i == j) continue;
      candidates.emplace_back(a.basis_vector(i), a.basis_vector(j));
    }

  std::vector<ComplexVec> witnesses;
  std::vector<std::vector<GaussRat>> span_so_far;
  auto as_gauss = [&](const ComplexVec& z) {
    std::vector<GaussRat> g(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) g[i] = GaussRat(z.re[i], z.im[i]);
    return g;
  };
  auto add = [&](const ComplexVec& z) {
    if (z.is_zero()) return;
    auto g = as_gauss(z);
    if (in_span(span_so_far, g)) return;
    witnesses.push_back(z);
    span_so_far.push_back(std::move(g));
  };
  for (const ComplexVec& c : candidates) {
    if (c.is_zero()) continue;
    if (a.element_rank_complex(c) != 1) continue;
    add(c);
    add(c.conj());
    ComplexVec line = rank_one_image_complex(a, c);
    for (const ComplexVec& member : detail::line_constrained_space_complex(a, line)) {
      if (member.is_zero()) continue;
      if (a.element_rank_complex(member) == 1) {
        add(member);
        add(member.conj());
      }
    }
    if (span_dim(span_so_far) == d1) break;
  }
  return witnesses;
}

// ---- serialization --------------------------------------------------------------

inline json rank_report_to_json(const RankReport& r) {
  json j;
  j["field"] = field_name(r.field);
  j["min_rank"] = r.min_rank;
  j["status"] = (r.status == RankReport::Status::exact) ? "exact" : "numerical";
  j["witness"] = vector_to_json(r.witness.re);
  if (r.field == Field::complex_field) j["witness_imag"] = vector_to_json(r.witness.im);
  if (r.status == RankReport::Status::exact)
    j["residual"] = 0;
  else
    j["residual"] = r.residual;
  return j;
}

}  // namespace carnot

#endif
