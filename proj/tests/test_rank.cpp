#include <catch2/catch_amalgamated.hpp>

#include "carnot/catalog.hpp"
#include "carnot/rank_search.hpp"

using namespace carnot;

TEST_CASE("minimum rank: euclidean factors give rank zero through the kernel") {
  CarnotAlgebra a = direct_sum(euclidean(2), heisenberg(1));
  for (Field f : {Field::real, Field::complex_field}) {
    RankReport rep = min_rank_search(a, f, {});
    CHECK(rep.min_rank == 0);
    CHECK(rep.status == RankReport::Status::exact);
    CHECK(!rep.witness.is_zero());
    CHECK(a.element_rank(rep.witness.re) == 0);
  }
}

TEST_CASE("minimum rank: star graph has exact rank one witnesses in the X-plane") {
  CarnotAlgebra star = star_graph(2);
  SearchParams p;
  p.seed = 7;
  RankReport rep = min_rank_search(star, Field::real, p);
  CHECK(rep.min_rank == 1);
  CHECK(rep.status == RankReport::Status::exact);
  REQUIRE(rep.witness.is_real());
  CHECK(star.element_rank(rep.witness.re) == 1);
  // witness lies in span{X1, X2}
  CHECK(is_zero(rep.witness.re[2]));
}

TEST_CASE("star graph rank stratification on a probe grid") {
  // rank(x) = 1 exactly on the nonzero elements of span{X1, X2}
  CarnotAlgebra star = star_graph(2);
  std::size_t checked = 0;
  for (long a1 = -2; a1 <= 2; ++a1)
    for (long a2 = -2; a2 <= 2; ++a2)
      for (long c = -2; c <= 2; ++c) {
        Vec x = star.zero();
        x[0] = a1;
        x[1] = a2;
        x[2] = c;
        if (vec_is_zero(x)) continue;
        std::size_t r = star.element_rank(x);
        if (c == 0)
          CHECK(r == 1);
        else
          CHECK(r == 2);
        ++checked;
      }
  CHECK(checked == 124);
}

TEST_CASE("minimum rank over C on the complex heisenberg algebra") {
  CarnotAlgebra hc = complex_heisenberg(1);
  SearchParams p;
  p.seed = 2024;

  RankReport real_rep = min_rank_search(hc, Field::real, p);
  CHECK(real_rep.min_rank == 2);
  CHECK(real_rep.status == RankReport::Status::exact);

  RankReport c_rep = min_rank_search(hc, Field::complex_field, p);
  CHECK(c_rep.min_rank == 1);
  CHECK(c_rep.status == RankReport::Status::exact);
  CHECK(hc.element_rank_complex(c_rep.witness) == 1);
  CHECK(!c_rep.witness.is_real());
}

TEST_CASE("search results are deterministic in the seed") {
  CarnotAlgebra hc = complex_heisenberg(1);
  SearchParams p;
  p.seed = 5;
  RankReport a = min_rank_search(hc, Field::complex_field, p);
  RankReport b = min_rank_search(hc, Field::complex_field, p);
  CHECK(a.min_rank == b.min_rank);
  CHECK(a.witness.re == b.witness.re);
  CHECK(a.witness.im == b.witness.im);
  CHECK(rank_report_to_json(a).dump() == rank_report_to_json(b).dump());
}

TEST_CASE("rank-one image lines") {
  CarnotAlgebra star = star_graph(2);
  SECTION("weighted combination") {
    Vec x = vec_add(vec_scale(Rat(2), star.basis_vector(0)), vec_scale(Rat(3), star.basis_vector(1)));
    Vec img = rank_one_image(star, x);
    // normalized to leading coordinate one: Z1 + (3/2) Z2
    Vec expect = star.zero();
    expect[3] = 1;
    expect[4] = frac(3, 2);
    CHECK(img == expect);
  }
  SECTION("heisenberg") {
    CarnotAlgebra h1 = heisenberg(1);
    CHECK(rank_one_image(h1, h1.basis_vector(0)) == h1.basis_vector(2));
  }
  SECTION("filiform e2 image is the e3 line despite the sign") {
    CarnotAlgebra f3 = filiform(3);
    CHECK(rank_one_image(f3, f3.basis_vector(1)) == f3.basis_vector(2));
  }
  SECTION("rank must be one") {
    CHECK_THROWS_AS(rank_one_image(star, star.basis_vector(2)), RankNotOne);
    CHECK_THROWS_AS(rank_one_image(star, star.zero()), RankNotOne);
  }
}

TEST_CASE("equivalence classes") {
  CarnotAlgebra star = star_graph(2);
  SECTION("distinct lines give distinct classes") {
    Vec x1 = star.basis_vector(0), x2 = star.basis_vector(1);
    Vec x12 = vec_add(x1, x2);
    auto dec = equivalence_classes(star, {x1, x2, x12});
    CHECK(dec.classes.size() == 3);
    for (const auto& cls : dec.classes) CHECK(cls.basis.size() == 1);
    // Y is not covered by any class
    CHECK(dec.residual.size() == 1);
    CHECK(dec.residual[0] == star.basis_vector(2));
  }
  SECTION("two blocks of the heisenberg sum") {
    CarnotAlgebra hh = direct_sum(heisenberg(1), heisenberg(1));
    auto dec = equivalence_classes(
        hh, {hh.basis_vector(0), hh.basis_vector(1), hh.basis_vector(2), hh.basis_vector(3)});
    REQUIRE(dec.classes.size() == 2);
    CHECK(dec.classes[0].basis.size() == 2);
    CHECK(dec.classes[1].basis.size() == 2);
    CHECK(dec.residual.empty());
  }
  SECTION("single witness") {
    auto dec = equivalence_classes(star, {star.basis_vector(0)});
    CHECK(dec.classes.size() == 1);
  }
  SECTION("bad witnesses are rejected") {
    CHECK_THROWS_AS(equivalence_classes(star, {star.basis_vector(2)}), WitnessNotRankOne);
    CHECK_THROWS_AS(equivalence_classes(star, {}), EmptyWitnessSet);
  }
}

TEST_CASE("rank-one elements commute with higher layers") {
  for (const CarnotAlgebra& a : {filiform(3), filiform(5), star_graph(2), heisenberg(2)}) {
    for (const Vec& w : harvest_rank_one_witnesses(a, 3)) {
      REQUIRE(a.element_rank(w) == 1);
      for (std::size_t j = 0; j < a.dim(); ++j) {
        if (a.layer_of(j) < 2) continue;
        CHECK(vec_is_zero(a.bracket(w, a.basis_vector(j))));
      }
    }
  }
}

TEST_CASE("same-line rational combinations keep rank one") {
  CarnotAlgebra hh = direct_sum(heisenberg(1), heisenberg(1));
  Vec u = hh.basis_vector(0), v = hh.basis_vector(1);
  REQUIRE(rank_one_image(hh, u) == rank_one_image(hh, v));
  for (long p = -3; p <= 3; ++p)
    for (long q = -3; q <= 3; ++q) {
      if (p == 0 && q == 0) continue;
      Vec s = vec_add(vec_scale(Rat(p), u), vec_scale(Rat(q), v));
      CHECK(hh.element_rank(s) == 1);
      CHECK(rank_one_image(hh, s) == rank_one_image(hh, u));
    }
}

TEST_CASE("distinct-line witnesses bracket to zero") {
  CarnotAlgebra star = star_graph(3);
  Vec x1 = star.basis_vector(0), x2 = star.basis_vector(1), x3 = star.basis_vector(2);
  CHECK(vec_is_zero(star.bracket(x1, x2)));
  CHECK(vec_is_zero(star.bracket(x1, x3)));
  auto dec = equivalence_classes(star, {x1, x2, x3, vec_add(x1, x3)});
  CHECK(dec.classes.size() == 4);
}

TEST_CASE("invariant subspaces") {
  CarnotAlgebra star = star_graph(2);
  SearchParams p;
  p.seed = 1;
  RankReport rep = min_rank_search(star, Field::real, p);

  auto w1 = invariant_subspace_real(star, rep, {star.basis_vector(0), star.basis_vector(1)});
  CHECK(w1.basis.size() == 2);
  CHECK(w1.kind == InvariantSubspace::Kind::w1);

  // proper subspace of V1: Y is outside
  CHECK(!in_span(w1.basis, star.basis_vector(2)));

  // invariant under dilations
  CHECK(invariance_check(star, w1.basis, {star.dilation_matrix(Rat(2))}));

  // full V1 is invariant under any graded automorphism
  std::vector<Vec> v1;
  for (std::size_t i = 0; i < 3; ++i) v1.push_back(star.basis_vector(i));
  CHECK(invariance_check(star, v1, {star.dilation_matrix(frac(1, 2))}));

  SECTION("witness at the wrong rank is rejected") {
    CHECK_THROWS_AS(invariant_subspace_real(star, rep, {star.basis_vector(2)}), WitnessNotRankOne);
    CHECK_THROWS_AS(invariant_subspace_real(star, rep, {}), EmptyWitnessSet);
  }

  SECTION("factor swap moves a single-factor span") {
    CarnotAlgebra hh = direct_sum(heisenberg(1), heisenberg(1));
    MatQ fswap(6, 6);
    fswap(0, 2) = 1;
    fswap(1, 3) = 1;
    fswap(2, 0) = 1;
    fswap(3, 1) = 1;
    fswap(4, 5) = 1;
    fswap(5, 4) = 1;
    CHECK(!invariance_check(hh, {hh.basis_vector(0)}, {fswap}));
    CHECK_THROWS_AS(invariance_check(hh, {hh.basis_vector(0)}, {MatQ(6, 6)}), NotAnAutomorphism);
  }
}

TEST_CASE("complex invariant subspaces on the complex heisenberg algebra") {
  CarnotAlgebra hc = complex_heisenberg(1);
  SearchParams p;
  p.seed = 3;
  RankReport rep = min_rank_search(hc, Field::complex_field, p);
  REQUIRE(rep.min_rank == 1);

  auto witnesses = harvest_complex_rank_one_witnesses(hc, 3);
  REQUIRE(!witnesses.empty());
  auto sub = invariant_subspace_complex(hc, rep, witnesses);
  // the conjugate-closed witness family spans V1 tensor C, so hat W1 = V1
  CHECK(sub.hat_w1.basis.size() == 4);
  CHECK(sub.w1c_basis.size() == 4);
}

TEST_CASE("witness harvesting spans the first layer where possible") {
  CarnotAlgebra hh = direct_sum(heisenberg(1), heisenberg(1));
  auto ws = harvest_rank_one_witnesses(hh, 11);
  CHECK(span_dim(ws) == 4);

  CarnotAlgebra h2 = heisenberg(2);
  CHECK(span_dim(harvest_rank_one_witnesses(h2, 11)) == 4);

  // star graph: rank-one elements span only the X-plane
  CarnotAlgebra star = star_graph(2);
  auto sw = harvest_rank_one_witnesses(star, 11);
  CHECK(span_dim(sw) == 2);
  for (const Vec& w : sw) CHECK(is_zero(w[2]));
}
