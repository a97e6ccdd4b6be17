#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "carnot/algebra.hpp"
#include "carnot/catalog.hpp"
#include "carnot/io.hpp"

using namespace carnot;

namespace {

Vec rand_vec(const CarnotAlgebra& a, std::mt19937_64& rng) {
  Vec v = a.zero();
  for (std::size_t i = 0; i < a.dim(); ++i) {
    long num = static_cast<long>(rng() % 9) - 4;
    long den = 1 + static_cast<long>(rng() % 3);
    v[i] = frac(num, den);
  }
  return v;
}

}  // namespace

TEST_CASE("build_algebra accepts the canonical examples") {
  CarnotAlgebra h1 = build_algebra({2, 1}, {{1, 2, {{3, Rat(1)}}}});
  CHECK(h1.dim() == 3);
  CHECK(h1.step() == 2);
  CHECK(h1.layer_of(2) == 2);

  CarnotAlgebra f3 = build_algebra({2, 1, 1}, {{1, 2, {{3, Rat(1)}}}, {1, 3, {{4, Rat(1)}}}});
  CHECK(f3.dim() == 4);
  CHECK(f3.step() == 3);
  CHECK(f3.homogeneous_dimension() == 2 + 2 + 3);
}

TEST_CASE("build_algebra rejects invalid tables") {
  // target in the wrong layer
  CHECK_THROWS_AS(build_algebra({2, 1}, {{1, 2, {{1, Rat(1)}}}}), GradingViolation);
  // bracket past the last layer
  CHECK_THROWS_AS(build_algebra({2, 1}, {{1, 3, {{3, Rat(1)}}}}), GradingViolation);
  // nothing generates the second layer
  CHECK_THROWS_AS(build_algebra({2, 1}, {}), GenerationFailure);
  // V3 generated but [V1,V2] lands wrong: Jacobi breaks
  CHECK_THROWS_AS(build_algebra({3, 1, 1},
                                {{1, 2, {{4, Rat(1)}}},
                                 {3, 4, {{5, Rat(1)}}}}),
                  JacobiViolation);
  // duplicate entry
  CHECK_THROWS_AS(build_algebra({2, 1}, {{1, 2, {{3, Rat(1)}}}, {1, 2, {{3, Rat(2)}}}}),
                  DomainError);
  // i >= j
  CHECK_THROWS_AS(build_algebra({2, 1}, {{2, 1, {{3, Rat(1)}}}}), DomainError);
}

TEST_CASE("bracket is the bilinear extension of the table") {
  CarnotAlgebra h1 = heisenberg(1);
  Vec x = h1.basis_vector(0), y = h1.basis_vector(1), z = h1.basis_vector(2);
  CHECK(h1.bracket(x, y) == z);
  CHECK(vec_is_zero(h1.bracket(x, x)));
  CHECK(h1.bracket(y, x) == vec_neg(z));

  CarnotAlgebra f3 = filiform(3);
  Vec e1 = f3.basis_vector(0), e2 = f3.basis_vector(1);
  Vec e2e3 = vec_add(f3.basis_vector(1), f3.basis_vector(2));
  Vec expect = vec_add(f3.basis_vector(2), f3.basis_vector(3));
  CHECK(f3.bracket(e1, e2e3) == expect);

  CHECK_THROWS_AS(h1.bracket(x, f3.basis_vector(0)), DimensionMismatch);
}

TEST_CASE("Jacobi identity holds on random triples by bilinearity") {
  std::mt19937_64 rng(7);
  for (const CarnotAlgebra& a : {heisenberg(2), filiform(4), complex_heisenberg(1), star_graph(2)}) {
    for (int t = 0; t < 10; ++t) {
      Vec x = rand_vec(a, rng), y = rand_vec(a, rng), z = rand_vec(a, rng);
      Vec s = a.bracket(a.bracket(x, y), z);
      s = vec_add(s, a.bracket(a.bracket(y, z), x));
      s = vec_add(s, a.bracket(a.bracket(z, x), y));
      CHECK(vec_is_zero(s));
    }
  }
}

TEST_CASE("ad matrix and element rank") {
  CarnotAlgebra h1 = heisenberg(1);
  Vec x = h1.basis_vector(0);
  MatQ ad = h1.ad_matrix(x);
  // single nonzero entry: column of Y maps to Z
  CHECK(ad(2, 1) == Rat(1));
  std::size_t nonzero = 0;
  for (const Rat& v : ad.a)
    if (!is_zero(v)) ++nonzero;
  CHECK(nonzero == 1);
  CHECK(h1.element_rank(x) == 1);
  CHECK(h1.element_rank(h1.zero()) == 0);
  CHECK(h1.element_rank(h1.basis_vector(2)) == 0);  // center

  CarnotAlgebra star = star_graph(2);
  CHECK(star.element_rank(star.basis_vector(0)) == 1);  // X1
  CHECK(star.element_rank(star.basis_vector(2)) == 2);  // Y

  CarnotAlgebra f3 = filiform(3);
  CHECK(f3.element_rank(f3.basis_vector(0)) == 2);
  CHECK(f3.element_rank(f3.basis_vector(1)) == 1);
}

TEST_CASE("complex element rank") {
  CarnotAlgebra hc = complex_heisenberg(1);
  // z = X + i*Xt has complex rank 1; X alone has rank 2
  ComplexVec z(hc.basis_vector(0), hc.basis_vector(1));
  CHECK(hc.element_rank_complex(z) == 1);
  CHECK(hc.element_rank(hc.basis_vector(0)) == 2);
  ComplexVec xreal(hc.basis_vector(0));
  CHECK(hc.element_rank_complex(xreal) == 2);
  CHECK(hc.element_rank_complex(z.conj()) == 1);
}

TEST_CASE("element rank is invariant under dilation and conjugation symmetric") {
  std::mt19937_64 rng(11);
  for (const CarnotAlgebra& a : {heisenberg(1), filiform(3), star_graph(2), complex_heisenberg(1)}) {
    for (int t = 0; t < 6; ++t) {
      Vec x = rand_vec(a, rng);
      std::size_t r = a.element_rank(x);
      for (const Rat& scale : {Rat(2), Rat(-1), Rat(1, 3), Rat(7, 2)})
        CHECK(a.element_rank(a.dilate(scale, x)) == r);
      // complex rank of a real vector equals the real rank
      CHECK(a.element_rank_complex(ComplexVec(x)) == r);
      ComplexVec zc(x, rand_vec(a, rng));
      CHECK(a.element_rank_complex(zc) == a.element_rank_complex(zc.conj()));
    }
  }
}

TEST_CASE("dilations") {
  CarnotAlgebra h1 = heisenberg(1);
  Vec z = h1.basis_vector(2);
  CHECK(h1.dilate(Rat(2), z) == vec_scale(Rat(4), z));
  Vec v = {Rat(1), Rat(2), Rat(3)};
  CHECK(h1.dilate(Rat(1), v) == v);
  CHECK_THROWS_AS(h1.dilate(Rat(0), v), ZeroDilation);

  CarnotAlgebra f3 = filiform(3);
  Vec w = vec_add(f3.basis_vector(0), f3.basis_vector(3));
  Vec expect = vec_add(vec_scale(Rat(3), f3.basis_vector(0)), vec_scale(Rat(27), f3.basis_vector(3)));
  CHECK(f3.dilate(Rat(3), w) == expect);

  // dilations are graded automorphisms
  for (const Rat& t : {Rat(2), Rat(1, 2), Rat(-3)}) CHECK(verify_graded_automorphism(f3, f3.dilation_matrix(t)).ok);
}

TEST_CASE("direct sums") {
  CarnotAlgebra h1 = heisenberg(1);
  CarnotAlgebra hh = direct_sum(h1, h1);
  CHECK(hh.layer_dims() == std::vector<std::size_t>{4, 2});

  CarnotAlgebra r1 = euclidean(1);
  CarnotAlgebra rh = direct_sum(r1, h1);
  CHECK(rh.layer_dims() == std::vector<std::size_t>{3, 1});
  // the Euclidean direction is central in V1
  CHECK(rh.element_rank(rh.basis_vector(0)) == 0);

  CarnotAlgebra hf = direct_sum(h1, filiform(3));
  CHECK(hf.layer_dims() == std::vector<std::size_t>{4, 2, 1});

  // rank of (x, 0) in the sum equals rank of x in the factor
  std::mt19937_64 rng(3);
  for (int t = 0; t < 6; ++t) {
    Vec x = rand_vec(h1, rng);
    CHECK(hh.element_rank(embed_left(h1, h1, hh, x)) == h1.element_rank(x));
    CHECK(hh.element_rank(embed_right(h1, h1, hh, x)) == h1.element_rank(x));
  }

  // factor brackets are preserved by the embeddings
  Vec xl = embed_left(h1, h1, hh, h1.basis_vector(0));
  Vec yl = embed_left(h1, h1, hh, h1.basis_vector(1));
  CHECK(hh.bracket(xl, yl) == embed_left(h1, h1, hh, h1.basis_vector(2)));
  Vec xr = embed_right(h1, h1, hh, h1.basis_vector(0));
  CHECK(vec_is_zero(hh.bracket(xl, xr)));
}

TEST_CASE("central quotients") {
  CarnotAlgebra h1 = heisenberg(1);
  CarnotAlgebra hh = direct_sum(h1, h1);
  // indices in hh: X1 Y1' -> 0..3 = X1,Y1,X2,Y2 ; 4,5 = Z1,Z2

  SECTION("trivial quotient") {
    QuotientResult q = central_quotient(hh, {});
    CHECK(q.algebra.dim() == hh.dim());
    CHECK(q.projection == MatQ::identity(hh.dim()));
  }

  SECTION("quotient by Z1 - Z2 is a valid [4,1] algebra") {
    Vec v = vec_sub(hh.basis_vector(4), hh.basis_vector(5));
    QuotientResult q = central_quotient(hh, {v});
    CHECK(q.algebra.layer_dims() == std::vector<std::size_t>{4, 1});
    // both symplectic pairs hit the same center: [X1,Y1] = [X2,Y2] = Z
    Vec z1 = q.algebra.bracket(q.algebra.basis_vector(0), q.algebra.basis_vector(1));
    Vec z2 = q.algebra.bracket(q.algebra.basis_vector(2), q.algebra.basis_vector(3));
    CHECK(z1 == z2);
    CHECK(!vec_is_zero(z1));
    // projection kills v
    CHECK(vec_is_zero(q.projection.mul(v)));
  }

  SECTION("quotient by Z1 keeps a rank-0 direction but stays Carnot") {
    QuotientResult q = central_quotient(hh, {hh.basis_vector(4)});
    CHECK(q.algebra.layer_dims() == std::vector<std::size_t>{4, 1});
    CHECK(q.algebra.element_rank(q.algebra.basis_vector(0)) == 0);
  }

  SECTION("error cases") {
    CHECK_THROWS_AS(central_quotient(hh, {hh.basis_vector(0)}), NotCentral);
    Vec v = vec_sub(hh.basis_vector(4), hh.basis_vector(5));
    CHECK_THROWS_AS(central_quotient(hh, {v, vec_scale(Rat(2), v)}), NotIndependent);
    // quotient of H^1 by its whole center is R^2 (trailing layer dropped)
    QuotientResult q = central_quotient(h1, {h1.basis_vector(2)});
    CHECK(q.algebra.layer_dims() == std::vector<std::size_t>{2});
    // but collapsing V2 under a higher layer is not Carnot
    CarnotAlgebra f3 = filiform(3);
    CHECK_THROWS_AS(central_quotient(f3, {f3.basis_vector(2)}), DomainError);
  }

  SECTION("non-central second-layer subspace in a 3-step algebra is rejected") {
    CarnotAlgebra f3 = filiform(3);
    // e3 has [e1,e3] = e4 != 0
    CHECK_THROWS_AS(central_quotient(f3, {f3.basis_vector(2)}), NotCentral);
  }
}

TEST_CASE("graded automorphism verification") {
  CarnotAlgebra h1 = heisenberg(1);
  CHECK(verify_graded_automorphism(h1, h1.dilation_matrix(Rat(2))).ok);

  // swap X <-> Y fixing Z flips the bracket sign
  MatQ swap_xy(3, 3);
  swap_xy(0, 1) = 1;
  swap_xy(1, 0) = 1;
  swap_xy(2, 2) = 1;
  auto chk = verify_graded_automorphism(h1, swap_xy);
  CHECK(!chk.ok);
  CHECK(chk.violation.find("bracket") != std::string::npos);

  // factor swap on H1 + H1 preserves the structure table
  CarnotAlgebra hh = direct_sum(h1, h1);
  MatQ fswap(6, 6);
  fswap(0, 2) = 1;
  fswap(1, 3) = 1;
  fswap(2, 0) = 1;
  fswap(3, 1) = 1;
  fswap(4, 5) = 1;
  fswap(5, 4) = 1;
  CHECK(verify_graded_automorphism(hh, fswap).ok);

  // layer-mixing map is rejected
  MatQ mix = MatQ::identity(3);
  mix(2, 0) = 1;
  CHECK(!verify_graded_automorphism(h1, mix).ok);

  // singular layer-preserving map is rejected
  MatQ sing(3, 3);
  sing(0, 0) = 1;
  sing(1, 0) = 1;
  CHECK(!verify_graded_automorphism(h1, sing).ok);
}

TEST_CASE("algebra json round trip") {
  for (const CarnotAlgebra& a : {heisenberg(2), filiform(4), complex_heisenberg(1), star_graph(3)}) {
    json j = algebra_to_json(a);
    CarnotAlgebra b = algebra_from_json(j);
    CHECK(b.layer_dims() == a.layer_dims());
    CHECK(b.structure() == a.structure());
  }
  CHECK_THROWS_AS(algebra_from_json(json::parse(R"({"layers":[0]})")), ParseError);
  CHECK_THROWS_AS(algebra_from_json(json::parse(R"({"layers":[2,1],"brackets":[{"i":1,"j":2,"out":{"3":"1/0"}}]})")),
                  ParseError);
}

TEST_CASE("vector parsing") {
  CarnotAlgebra h1 = heisenberg(1);
  Vec v = parse_vector("1,0,-1/2", h1.dim());
  CHECK(v == Vec{Rat(1), Rat(0), Rat(-1, 2)});
  CHECK(format_vector(v) == "1,0,-1/2");
  CHECK_THROWS_AS(parse_vector("1,2", h1.dim()), ParseError);
  CHECK_THROWS_AS(parse_vector("1,,3", h1.dim()), ParseError);
}
