#ifndef CARNOT_ALGEBRA_HPP
#define CARNOT_ALGEBRA_HPP

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "carnot/errors.hpp"
#include "carnot/linalg.hpp"
#include "carnot/rational.hpp"

namespace carnot {

// Element of the algebra in basis coordinates, exact rationals, length = dim.
using Vec = std::vector<Rat>;

// Element of the complexified algebra.
struct ComplexVec {
  Vec re, im;

  ComplexVec() = default;
  ComplexVec(Vec r, Vec i) : re(std::move(r)), im(std::move(i)) {
    if (re.size() != im.size()) throw DimensionMismatch("real and imaginary parts differ in length");
  }
  explicit ComplexVec(Vec r) : re(std::move(r)), im(re.size(), Rat(0)) {}

  std::size_t size() const { return re.size(); }
  bool is_zero() const { return vec_is_zero(re) && vec_is_zero(im); }
  bool is_real() const { return vec_is_zero(im); }
  ComplexVec conj() const { return {re, vec_neg(im)}; }
};

inline ComplexVec cvec_add(const ComplexVec& x, const ComplexVec& y) {
  return {vec_add(x.re, y.re), vec_add(x.im, y.im)};
}
inline ComplexVec cvec_scale(const GaussRat& c, const ComplexVec& x) {
  Vec re = vec_scale(c.re, x.re);
  vec_axpy(re, Rat(-c.im), x.im);
  Vec im = vec_scale(c.re, x.im);
  vec_axpy(im, c.im, x.re);
  return {std::move(re), std::move(im)};
}

// Sparse value of a bracket [b_i, b_j] in basis coordinates.
using SparseVec = std::vector<std::pair<std::size_t, Rat>>;  // (0-based index, coeff), sorted

// Input form of a structure table: 1-based (i, j, target index -> coefficient).
struct BracketRelation {
  std::size_t i = 0, j = 0;  // 1-based, i < j
  std::vector<std::pair<std::size_t, Rat>> out;  // 1-based target indices
};

// Stratified nilpotent Lie algebra with exact rational structure constants.
// Layers occupy contiguous index ranges in increasing layer order. Immutable
// after construction; all operations are pure.
class CarnotAlgebra {
 public:
  std::size_t dim() const { return dim_; }
  std::size_t step() const { return layer_dims_.size(); }
  const std::vector<std::size_t>& layer_dims() const { return layer_dims_; }
  bool is_abelian() const { return structure_.empty(); }

  // Hausdorff dimension of the associated homogeneous metric group.
  std::size_t homogeneous_dimension() const {
    std::size_t q = 0;
    for (std::size_t l = 0; l < layer_dims_.size(); ++l) q += (l + 1) * layer_dims_[l];
    return q;
  }

  // 1-based layer of a 0-based basis index.
  std::size_t layer_of(std::size_t index) const { return layer_of_[index]; }
  std::size_t layer_begin(std::size_t layer) const { return layer_begin_[layer - 1]; }
  std::size_t layer_end(std::size_t layer) const { return layer_begin_[layer - 1] + layer_dims_[layer - 1]; }

  Vec zero() const { return Vec(dim_, Rat(0)); }

  Vec basis_vector(std::size_t index) const {
    Vec v = zero();
    v.at(index) = 1;
    return v;
  }

  const std::map<std::pair<std::size_t, std::size_t>, SparseVec>& structure() const { return structure_; }

  // [x, y] by bilinear extension of the structure table.
  Vec bracket(const Vec& x, const Vec& y) const {
    check_dim(x);
    check_dim(y);
    Vec out = zero();
    for (const auto& [key, value] : structure_) {
      auto [i, j] = key;
      Rat c = x[i] * y[j] - x[j] * y[i];
      if (is_zero(c)) continue;
      for (const auto& [t, coeff] : value) out[t] += c * coeff;
    }
    return out;
  }

  ComplexVec bracket(const ComplexVec& x, const ComplexVec& y) const {
    Vec re = vec_sub(bracket(x.re, y.re), bracket(x.im, y.im));
    Vec im = vec_add(bracket(x.re, y.im), bracket(x.im, y.re));
    return {std::move(re), std::move(im)};
  }

  // Matrix of ad(x): column j is [x, b_j].
  MatQ ad_matrix(const Vec& x) const {
    check_dim(x);
    MatQ m(dim_, dim_);
    for (std::size_t j = 0; j < dim_; ++j) {
      Vec col = bracket(x, basis_vector(j));
      for (std::size_t i = 0; i < dim_; ++i) m(i, j) = col[i];
    }
    return m;
  }

  std::size_t element_rank(const Vec& x) const { return rank_fraction_free(ad_matrix(x)); }

  // Rank over C of ad(z) on the complexification, computed as half the exact
  // rank of the real block embedding [[A, -B], [B, A]].
  std::size_t element_rank_complex(const ComplexVec& z) const {
    check_dim(z.re);
    check_dim(z.im);
    MatQ a = ad_matrix(z.re);
    MatQ b = ad_matrix(z.im);
    MatQ blk(2 * dim_, 2 * dim_);
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = 0; j < dim_; ++j) {
        blk(i, j) = a(i, j);
        blk(i, dim_ + j) = -b(i, j);
        blk(dim_ + i, j) = b(i, j);
        blk(dim_ + i, dim_ + j) = a(i, j);
      }
    std::size_t r = rank_fraction_free(blk);
    if (r % 2 != 0) throw InternalInconsistency("block embedding produced odd rank");
    return r / 2;
  }

  // lambda_t: scales layer i by t^i. Graded automorphism for every t != 0.
  Vec dilate(const Rat& t, const Vec& x) const {
    check_dim(x);
    if (is_zero(t)) throw ZeroDilation();
    Vec out = x;
    for (std::size_t i = 0; i < dim_; ++i) out[i] *= rat_pow(t, static_cast<long>(layer_of_[i]));
    return out;
  }

  MatQ dilation_matrix(const Rat& t) const {
    if (is_zero(t)) throw ZeroDilation();
    MatQ m(dim_, dim_);
    for (std::size_t i = 0; i < dim_; ++i) m(i, i) = rat_pow(t, static_cast<long>(layer_of_[i]));
    return m;
  }

  // Projection onto layer l (coordinates outside the layer zeroed).
  Vec layer_part(const Vec& x, std::size_t layer) const {
    check_dim(x);
    Vec out = zero();
    for (std::size_t i = layer_begin(layer); i < layer_end(layer); ++i) out[i] = x[i];
    return out;
  }

  bool in_layer_span(const Vec& x, std::size_t layer) const {
    check_dim(x);
    for (std::size_t i = 0; i < dim_; ++i)
      if (layer_of_[i] != layer && !is_zero(x[i])) return false;
    return true;
  }

  void check_dim(const Vec& x) const {
    if (x.size() != dim_) throw DimensionMismatch("vector length does not match algebra dimension");
  }

  friend CarnotAlgebra build_algebra(const std::vector<std::size_t>&, const std::vector<BracketRelation>&);

 private:
  CarnotAlgebra() = default;

  std::size_t dim_ = 0;
  std::vector<std::size_t> layer_dims_;
  std::vector<std::size_t> layer_begin_;
  std::vector<std::size_t> layer_of_;  // per basis index, 1-based layer
  std::map<std::pair<std::size_t, std::size_t>, SparseVec> structure_;
};

// Validates and constructs. Checks, in order: index sanity, grading, Jacobi
// on all basis triples, and generation [V1, V_i] = V_{i+1}. All checks exact.
inline CarnotAlgebra build_algebra(const std::vector<std::size_t>& layer_dims,
                                   const std::vector<BracketRelation>& table) {
  if (layer_dims.empty()) throw DomainError("at least one layer required");
  for (std::size_t d : layer_dims)
    if (d == 0) throw DomainError("layer dimensions must be positive");

  CarnotAlgebra a;
  a.layer_dims_ = layer_dims;
  a.layer_begin_.resize(layer_dims.size());
  std::size_t off = 0;
  for (std::size_t l = 0; l < layer_dims.size(); ++l) {
    a.layer_begin_[l] = off;
    off += layer_dims[l];
  }
  a.dim_ = off;
  a.layer_of_.resize(a.dim_);
  for (std::size_t l = 0; l < layer_dims.size(); ++l)
    for (std::size_t i = a.layer_begin_[l]; i < a.layer_begin_[l] + layer_dims[l]; ++i)
      a.layer_of_[i] = l + 1;

  for (const BracketRelation& rel : table) {
    if (rel.i < 1 || rel.j < 1 || rel.i > a.dim_ || rel.j > a.dim_)
      throw DomainError("bracket indices out of range");
    if (rel.i >= rel.j) throw DomainError("bracket table must use i < j");
    SparseVec sv;
    for (const auto& [target, coeff] : rel.out) {
      if (target < 1 || target > a.dim_) throw DomainError("bracket target index out of range");
      if (is_zero(coeff)) continue;
      sv.emplace_back(target - 1, coeff);
    }
    if (sv.empty()) continue;
    std::sort(sv.begin(), sv.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    auto key = std::make_pair(rel.i - 1, rel.j - 1);
    if (a.structure_.count(key)) throw DomainError("duplicate bracket table entry");
    a.structure_[key] = std::move(sv);
  }

  // Grading: [b_i, b_j] supported exactly in layer(i) + layer(j).
  for (const auto& [key, value] : a.structure_) {
    std::size_t target_layer = a.layer_of_[key.first] + a.layer_of_[key.second];
    if (target_layer > a.step()) throw GradingViolation(key.first + 1, key.second + 1);
    for (const auto& [t, coeff] : value) {
      (void)coeff;
      if (a.layer_of_[t] != target_layer) throw GradingViolation(key.first + 1, key.second + 1);
    }
  }

  // Jacobi on all basis triples.
  for (std::size_t i = 0; i < a.dim_; ++i)
    for (std::size_t j = i + 1; j < a.dim_; ++j)
      for (std::size_t k = j + 1; k < a.dim_; ++k) {
        Vec bi = a.basis_vector(i), bj = a.basis_vector(j), bk = a.basis_vector(k);
        Vec s = a.bracket(a.bracket(bi, bj), bk);
        s = vec_add(s, a.bracket(a.bracket(bj, bk), bi));
        s = vec_add(s, a.bracket(a.bracket(bk, bi), bj));
        if (!vec_is_zero(s)) throw JacobiViolation(i + 1, j + 1, k + 1);
      }

  // Generation: span [V1, V_l] = V_{l+1}.
  for (std::size_t l = 1; l + 1 <= a.step(); ++l) {
    std::vector<std::vector<Rat>> images;
    for (std::size_t i = a.layer_begin(1); i < a.layer_end(1); ++i)
      for (std::size_t j = a.layer_begin(l); j < a.layer_end(l); ++j) {
        Vec br = a.bracket(a.basis_vector(i), a.basis_vector(j));
        std::vector<Rat> part(a.layer_dims_[l], Rat(0));
        for (std::size_t t = a.layer_begin(l + 1); t < a.layer_end(l + 1); ++t)
          part[t - a.layer_begin(l + 1)] = br[t];
        images.push_back(std::move(part));
      }
    if (span_dim(images) != a.layer_dims_[l]) throw GenerationFailure(l + 1);
  }

  return a;
}

// Block-diagonal direct sum. Layer dims add per layer, shorter factor padded.
inline CarnotAlgebra direct_sum(const CarnotAlgebra& x, const CarnotAlgebra& y) {
  std::size_t step = std::max(x.step(), y.step());
  std::vector<std::size_t> dims(step, 0);
  for (std::size_t l = 0; l < step; ++l) {
    if (l < x.step()) dims[l] += x.layer_dims()[l];
    if (l < y.step()) dims[l] += y.layer_dims()[l];
  }
  for (std::size_t l = 0; l < step; ++l)
    if (dims[l] == 0) throw GenerationFailure(l + 1);

  // Index maps: factor basis index -> sum basis index, layer by layer.
  std::vector<std::size_t> offset(step + 1, 0);
  for (std::size_t l = 0; l < step; ++l) offset[l + 1] = offset[l] + dims[l];
  auto map_x = [&](std::size_t i) {
    std::size_t l = x.layer_of(i);
    return offset[l - 1] + (i - x.layer_begin(l));
  };
  auto map_y = [&](std::size_t i) {
    std::size_t l = y.layer_of(i);
    std::size_t xl = (l <= x.step()) ? x.layer_dims()[l - 1] : 0;
    return offset[l - 1] + xl + (i - y.layer_begin(l));
  };

  std::vector<BracketRelation> table;
  for (const auto& [key, value] : x.structure()) {
    BracketRelation rel;
    rel.i = map_x(key.first) + 1;
    rel.j = map_x(key.second) + 1;
    for (const auto& [t, c] : value) rel.out.emplace_back(map_x(t) + 1, c);
    table.push_back(std::move(rel));
  }
  for (const auto& [key, value] : y.structure()) {
    BracketRelation rel;
    rel.i = map_y(key.first) + 1;
    rel.j = map_y(key.second) + 1;
    for (const auto& [t, c] : value) rel.out.emplace_back(map_y(t) + 1, c);
    table.push_back(std::move(rel));
  }
  return build_algebra(dims, table);
}

// Embeds an element of the left (right) factor into the direct sum.
inline Vec embed_left(const CarnotAlgebra& x, const CarnotAlgebra& /*y*/, const CarnotAlgebra& sum, const Vec& v) {
  x.check_dim(v);
  Vec out = sum.zero();
  for (std::size_t i = 0; i < x.dim(); ++i) {
    std::size_t l = x.layer_of(i);
    out[sum.layer_begin(l) + (i - x.layer_begin(l))] = v[i];
  }
  return out;
}

inline Vec embed_right(const CarnotAlgebra& x, const CarnotAlgebra& y, const CarnotAlgebra& sum, const Vec& v) {
  y.check_dim(v);
  Vec out = sum.zero();
  for (std::size_t i = 0; i < y.dim(); ++i) {
    std::size_t l = y.layer_of(i);
    std::size_t xl = (l <= x.step()) ? x.layer_dims()[l - 1] : 0;
    out[sum.layer_begin(l) + xl + (i - y.layer_begin(l))] = v[i];
  }
  return out;
}

struct QuotientResult {
  CarnotAlgebra algebra;
  MatQ projection;  // quotient_dim x dim, maps old coordinates onto the quotient
};

// Quotient by a subspace V of the second layer. V must be central (automatic
// for step 2, checked exactly for higher step) and linearly independent. The
// retained second-layer basis is the set of non-pivot standard directions of
// the reduced echelon form of V, so the result is canonical.
inline QuotientResult central_quotient(const CarnotAlgebra& a, const std::vector<Vec>& v_basis) {
  std::size_t d2 = a.layer_dims().size() >= 2 ? a.layer_dims()[1] : 0;
  for (const Vec& v : v_basis) {
    a.check_dim(v);
    if (!a.in_layer_span(v, 2))
      throw NotCentral("quotient subspace vector has support outside the second layer");
    for (std::size_t b = 0; b < a.dim(); ++b)
      if (!vec_is_zero(a.bracket(a.basis_vector(b), v)))
        throw NotCentral("quotient subspace vector does not commute with basis vector " + std::to_string(b + 1));
  }

  // Rows: second-layer coordinates of the subspace basis.
  std::vector<std::vector<Rat>> rows;
  for (const Vec& v : v_basis) {
    if (vec_is_zero(v)) throw NotIndependent("zero vector in quotient subspace basis");
    std::vector<Rat> r(d2, Rat(0));
    for (std::size_t i = 0; i < d2; ++i) r[i] = v[a.layer_begin(2) + i];
    rows.push_back(std::move(r));
  }
  std::size_t s = rows.size();
  if (s == 0) {
    QuotientResult res{a, MatQ::identity(a.dim())};
    return res;
  }
  MatQ rr = from_rows(rows);
  std::vector<std::size_t> pivots = rref_in_place(rr);
  if (pivots.size() != s) throw NotIndependent("quotient subspace basis is linearly dependent");
  if (s > d2) throw NotIndependent("quotient subspace larger than second layer");

  std::vector<bool> is_pivot(d2, false);
  for (std::size_t c : pivots) is_pivot[c] = true;
  std::vector<std::size_t> free_cols;
  for (std::size_t c = 0; c < d2; ++c)
    if (!is_pivot[c]) free_cols.push_back(c);

  std::size_t new_d2 = d2 - s;
  if (new_d2 == 0 && a.step() > 2) throw QuotientNotCarnot("second layer collapses below a higher layer");

  // New layer dims; drop the second layer entirely when it collapses (step 2).
  std::vector<std::size_t> new_dims = a.layer_dims();
  std::vector<std::size_t> kept_old_indices;  // old basis indices surviving into the quotient
  for (std::size_t i = a.layer_begin(1); i < a.layer_end(1); ++i) kept_old_indices.push_back(i);
  if (new_d2 > 0) {
    new_dims[1] = new_d2;
    for (std::size_t c : free_cols) kept_old_indices.push_back(a.layer_begin(2) + c);
  } else {
    new_dims.erase(new_dims.begin() + 1);
  }
  for (std::size_t l = 3; l <= a.step(); ++l)
    for (std::size_t i = a.layer_begin(l); i < a.layer_end(l); ++i) kept_old_indices.push_back(i);

  std::size_t new_dim = kept_old_indices.size();

  // Projection: identity off the second layer; on the second layer, pivot
  // coordinates are rewritten via e_{pivot_k} == -sum_f rr[k][f] e_f.
  MatQ proj(new_dim, a.dim());
  for (std::size_t ni = 0; ni < new_dim; ++ni) proj(ni, kept_old_indices[ni]) = 1;
  for (std::size_t k = 0; k < pivots.size(); ++k) {
    std::size_t old_col = a.layer_begin(2) + pivots[k];
    for (std::size_t fi = 0; fi < free_cols.size(); ++fi) {
      std::size_t ni = a.layer_dims()[0] + fi;  // index of free col fi in the quotient
      proj(ni, old_col) = -rr(k, free_cols[fi]);
    }
  }

  // Structure constants of the quotient: project brackets of kept basis vectors.
  std::vector<BracketRelation> table;
  for (std::size_t p = 0; p < new_dim; ++p)
    for (std::size_t q = p + 1; q < new_dim; ++q) {
      Vec br = a.bracket(a.basis_vector(kept_old_indices[p]), a.basis_vector(kept_old_indices[q]));
      std::vector<Rat> nb(new_dim, Rat(0));
      bool nonzero = false;
      for (std::size_t ni = 0; ni < new_dim; ++ni) {
        Rat acc(0);
        for (std::size_t oi = 0; oi < a.dim(); ++oi)
          if (!is_zero(proj(ni, oi))) acc += proj(ni, oi) * br[oi];
        nb[ni] = acc;
        if (!is_zero(acc)) nonzero = true;
      }
      if (!nonzero) continue;
      BracketRelation rel;
      rel.i = p + 1;
      rel.j = q + 1;
      for (std::size_t ni = 0; ni < new_dim; ++ni)
        if (!is_zero(nb[ni])) rel.out.emplace_back(ni + 1, nb[ni]);
      table.push_back(std::move(rel));
    }

  try {
    CarnotAlgebra q = build_algebra(new_dims, table);
    return QuotientResult{std::move(q), std::move(proj)};
  } catch (const DomainError& e) {
    throw QuotientNotCarnot(std::string("quotient fails validation: ") + e.what());
  }
}

struct GradedAutomorphismCheck {
  bool ok = false;
  std::string violation;  // empty when ok
};

// M is a graded automorphism iff it is invertible, block-diagonal with
// respect to the layers, and commutes with all brackets on basis pairs.
inline GradedAutomorphismCheck verify_graded_automorphism(const CarnotAlgebra& a, const MatQ& m) {
  if (m.rows != a.dim() || m.cols != a.dim())
    return {false, "matrix size does not match algebra dimension"};
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j)
      if (a.layer_of(i) != a.layer_of(j) && !is_zero(m(i, j)))
        return {false, "does not preserve layer " + std::to_string(a.layer_of(j)) +
                           " (entry " + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")"};
  if (rank_fraction_free(m) != a.dim()) return {false, "matrix is singular"};
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = i + 1; j < a.dim(); ++j) {
      Vec lhs = m.mul(a.bracket(a.basis_vector(i), a.basis_vector(j)));
      Vec rhs = a.bracket(m.mul(a.basis_vector(i)), m.mul(a.basis_vector(j)));
      if (lhs != rhs)
        return {false, "bracket not preserved on basis pair (" + std::to_string(i + 1) + "," +
                           std::to_string(j + 1) + ")"};
    }
  return {true, ""};
}

}  // namespace carnot

#endif
