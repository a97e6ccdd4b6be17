#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "carnot/catalog.hpp"
#include "carnot/metric.hpp"

using namespace carnot;

TEST_CASE("homogeneous norm values") {
  CarnotAlgebra h1 = heisenberg(1);
  BchEngine e(h1);
  HomogeneousMetric m(e);

  CHECK(m.norm(h1.basis_vector(2)) == 1.0);  // |1|^{1/2}
  Vec v = {Rat(3), Rat(4), Rat(0)};
  CHECK(m.norm(v) == 5.0);
  CHECK(m.norm(h1.zero()) == 0.0);

  CarnotAlgebra f3 = filiform(3);
  BchEngine ef(f3);
  HomogeneousMetric mf(ef);
  Vec w = vec_scale(Rat(8), f3.basis_vector(3));
  CHECK(mf.norm(w) == Catch::Approx(2.0).margin(1e-12));  // 8^{1/3}
}

TEST_CASE("max layer norm option") {
  CarnotAlgebra h1 = heisenberg(1);
  BchEngine e(h1);
  HomogeneousMetric m(e, LayerNorm::max);
  Vec v = {Rat(3), Rat(4), Rat(0)};
  CHECK(m.norm(v) == 4.0);
}

TEST_CASE("distance values on the heisenberg group") {
  CarnotAlgebra h1 = heisenberg(1);
  BchEngine e(h1);
  HomogeneousMetric m(e);
  Vec x = h1.basis_vector(0), y = h1.basis_vector(1), z = h1.basis_vector(2);

  CHECK(m.distance(x, x) == 0.0);
  CHECK(m.coincide(x, x));

  // d(0, X+Y+Z) = ||X+Y+Z|| = sqrt(2) + 1
  Vec p = vec_add(vec_add(x, y), z);
  CHECK(m.distance(h1.zero(), p) == Catch::Approx(std::sqrt(2.0) + 1.0).epsilon(1e-12));

  // d(X, Y) = ||(-X)*Y|| = ||-X+Y-Z/2|| = sqrt(2) + sqrt(1/2)
  CHECK(m.distance(x, y) == Catch::Approx(std::sqrt(2.0) + std::sqrt(0.5)).epsilon(1e-12));
}

TEST_CASE("norm is symmetric under negation, exactly") {
  std::vector<CarnotAlgebra> algebras = {heisenberg(1), filiform(4), star_graph(2)};
  for (const CarnotAlgebra& a : algebras) {
    BchEngine e(a);
    for (LayerNorm ln : {LayerNorm::euclidean, LayerNorm::max}) {
      HomogeneousMetric m(e, ln);
      SplitMix64 rng = substream(17, 1);
      for (int t = 0; t < 20; ++t) {
        Vec x = m.sample_in_ball(Rat(3), rng);
        CHECK(m.norm(x) == m.norm(vec_neg(x)));
      }
    }
  }
}

TEST_CASE("left invariance within float tolerance") {
  for (const CarnotAlgebra& a : {heisenberg(1), filiform(3), complex_heisenberg(1)}) {
    BchEngine e(a);
    HomogeneousMetric m(e);
    SplitMix64 rng = substream(23, 2);
    for (int t = 0; t < 25; ++t) {
      Vec g = m.sample_in_ball(Rat(2), rng);
      Vec x = m.sample_in_ball(Rat(2), rng);
      Vec y = m.sample_in_ball(Rat(2), rng);
      double d0 = m.distance(x, y);
      double d1 = m.distance(e.product(g, x), e.product(g, y));
      CHECK(d1 == Catch::Approx(d0).epsilon(1e-12).margin(1e-12));
    }
  }
}

TEST_CASE("homogeneity of the distance") {
  for (const CarnotAlgebra& a : {heisenberg(1), filiform(3)}) {
    BchEngine e(a);
    HomogeneousMetric m(e);

    // exact example: d(0, 16 Z) = 4 = 4 * d(0, Z) on the heisenberg group
    if (a.step() == 2) {
      Vec z = a.basis_vector(2);
      CHECK(m.distance(a.zero(), a.dilate(Rat(4), z)) == Catch::Approx(4.0).epsilon(1e-12));
    }

    SplitMix64 rng = substream(31, 3);
    for (int t = 0; t < 15; ++t) {
      Vec x = m.sample_in_ball(Rat(2), rng);
      Vec y = m.sample_in_ball(Rat(2), rng);
      CHECK(m.verify_homogeneity(Rat(1), x, y, 0.0));  // t = 1 exact
      for (const Rat& s : {frac(1, 4), frac(1, 2), Rat(2), Rat(4)})
        CHECK(m.verify_homogeneity(s, x, y, 1e-9));
    }
  }
}

TEST_CASE("non-degeneracy via exact group cancellation") {
  CarnotAlgebra f3 = filiform(3);
  BchEngine e(f3);
  HomogeneousMetric m(e);
  SplitMix64 rng = substream(5, 4);
  for (int t = 0; t < 10; ++t) {
    Vec x = m.sample_in_ball(Rat(1), rng);
    CHECK(m.coincide(x, x));
    Vec y = vec_add(x, f3.basis_vector(3));
    CHECK(!m.coincide(x, y));
  }
}

TEST_CASE("ball sampling") {
  CarnotAlgebra f5 = filiform(5);
  BchEngine e(f5);
  HomogeneousMetric m(e);

  SECTION("count zero gives empty") { CHECK(m.ball_sample(f5.zero(), Rat(1), 0, 9).empty()); }

  SECTION("all samples stay within radius") {
    for (const Rat& r : {frac(1, 4), Rat(1), Rat(4)}) {
      auto pts = m.ball_sample(f5.zero(), r, 200, 42);
      REQUIRE(pts.size() == 200);
      bool nonzero_seen = false;
      for (const Vec& p : pts) {
        CHECK(m.norm(p) <= to_double(r));
        nonzero_seen = nonzero_seen || !vec_is_zero(p);
      }
      CHECK(nonzero_seen);
    }
  }

  SECTION("left translation of the samples") {
    Vec g = {Rat(1), frac(-1, 2), frac(1, 3), Rat(2), Rat(0), Rat(1)};
    auto at_zero = m.ball_sample(f5.zero(), Rat(2), 50, 77);
    auto at_g = m.ball_sample(g, Rat(2), 50, 77);
    for (std::size_t i = 0; i < 50; ++i) CHECK(at_g[i] == e.product(g, at_zero[i]));
  }

  SECTION("deterministic under seed") {
    auto a1 = m.ball_sample(f5.zero(), Rat(1), 30, 123);
    auto a2 = m.ball_sample(f5.zero(), Rat(1), 30, 123);
    CHECK(a1 == a2);
  }
}

TEST_CASE("quasi-triangle estimates") {
  SECTION("euclidean space is a true metric") {
    CarnotAlgebra r3 = euclidean(3);
    BchEngine e(r3);
    HomogeneousMetric m(e);
    CHECK(m.quasi_triangle_estimate(500, Rat(2), 7) <= 1.0 + 1e-12);
  }

  SECTION("single sample is a valid ratio") {
    CarnotAlgebra h1 = heisenberg(1);
    BchEngine e(h1);
    HomogeneousMetric m(e);
    double est = m.quasi_triangle_estimate(1, Rat(1), 3);
    CHECK(est >= 0.0);
  }

  SECTION("stable under sample doubling on the heisenberg group") {
    CarnotAlgebra h1 = heisenberg(1);
    BchEngine e(h1);
    HomogeneousMetric m(e);
    double a = m.quasi_triangle_estimate(2000, Rat(1), 11);
    double b = m.quasi_triangle_estimate(4000, Rat(1), 11);
    CHECK(a > 0.9);
    CHECK(std::fabs(a - b) / a < 0.10);
  }
}
