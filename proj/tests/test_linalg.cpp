#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "carnot/linalg.hpp"
#include "carnot/rational.hpp"

using namespace carnot;

TEST_CASE("rational parsing and formatting") {
  CHECK(rat_to_string(rat_from_string("3/4")) == "3/4");
  CHECK(rat_to_string(rat_from_string("-6/8")) == "-3/4");
  CHECK(rat_to_string(rat_from_string("7")) == "7");
  CHECK(rat_to_string(rat_from_string("+5/10")) == "1/2");
  CHECK(rat_from_string("0/9") == Rat(0));
  CHECK_THROWS_AS(rat_from_string("1/0"), ParseError);
  CHECK_THROWS_AS(rat_from_string("a"), ParseError);
  CHECK_THROWS_AS(rat_from_string("1/ 2"), ParseError);
  CHECK_THROWS_AS(rat_from_string(""), ParseError);
  CHECK_THROWS_AS(rat_from_string("1/2/3"), ParseError);
}

TEST_CASE("rat_pow") {
  CHECK(rat_pow(Rat(2), 10) == Rat(1024));
  CHECK(rat_pow(Rat(1, 2), 3) == Rat(1, 8));
  CHECK(rat_pow(Rat(-3), 2) == Rat(9));
  CHECK(rat_pow(Rat(5), 0) == Rat(1));
  CHECK(rat_pow(Rat(2, 3), -2) == Rat(9, 4));
}

TEST_CASE("rationalize recovers simple fractions") {
  auto r = rationalize(0.5, Int(1000000));
  REQUIRE(r.has_value());
  CHECK(*r == Rat(1, 2));
  r = rationalize(-2.0 / 3.0, Int(1000000));
  REQUIRE(r.has_value());
  CHECK(*r == Rat(-2, 3));
  r = rationalize(1.0 / 12.0 + 1e-14, Int(1000));
  REQUIRE(r.has_value());
  CHECK(*r == Rat(1, 12));
  r = rationalize(3.0, Int(10));
  REQUIRE(r.has_value());
  CHECK(*r == Rat(3));
  r = rationalize(0.0, Int(10));
  REQUIRE(r.has_value());
  CHECK(*r == Rat(0));
}

TEST_CASE("gaussian rational field ops") {
  GaussRat i(Rat(0), Rat(1));
  CHECK(i * i == GaussRat(Rat(-1)));
  GaussRat z(Rat(1, 2), Rat(-3));
  CHECK(z * z.conj() == GaussRat(z.norm2()));
  CHECK((z / z) == GaussRat(Rat(1)));
  CHECK_THROWS_AS(z / GaussRat(), DomainError);
}

static MatQ mat(const std::vector<std::vector<int>>& rows) {
  MatQ m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[0].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

TEST_CASE("rank, rref, kernel") {
  MatQ m = mat({{1, 2, 3}, {2, 4, 6}, {1, 1, 1}});
  CHECK(rank(m) == 2);
  CHECK(rank_fraction_free(m) == 2);

  auto ker = kernel_basis(m);
  REQUIRE(ker.size() == 1);
  for (const auto& v : ker) CHECK(vec_is_zero(m.mul(v)));

  MatQ id = MatQ::identity(4);
  CHECK(rank(id) == 4);
  CHECK(kernel_basis(id).empty());

  MatQ zero(3, 5);
  CHECK(rank(zero) == 0);
  CHECK(rank_fraction_free(zero) == 0);
  CHECK(kernel_basis(zero).size() == 5);
}

TEST_CASE("fraction-free rank agrees with field rank on random rational matrices") {
  std::mt19937_64 rng(12345);
  for (int trial = 0; trial < 40; ++trial) {
    std::size_t r = 1 + rng() % 6, c = 1 + rng() % 6;
    MatQ m(r, c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) {
        long num = static_cast<long>(rng() % 11) - 5;
        long den = 1 + static_cast<long>(rng() % 4);
        m(i, j) = frac(num, den);
      }
    CHECK(rank(m) == rank_fraction_free(m));
  }
}

TEST_CASE("solve and inverse") {
  MatQ m = mat({{2, 1}, {1, 3}});
  auto x = solve(m, {Rat(5), Rat(10)});
  REQUIRE(x.has_value());
  CHECK(m.mul(*x) == std::vector<Rat>{Rat(5), Rat(10)});

  auto inv = inverse(m);
  REQUIRE(inv.has_value());
  CHECK(m.mul(*inv) == MatQ::identity(2));

  MatQ sing = mat({{1, 2}, {2, 4}});
  CHECK(!inverse(sing).has_value());
  CHECK(!solve(sing, {Rat(1), Rat(0)}).has_value());
  CHECK(solve(sing, {Rat(1), Rat(2)}).has_value());

  CHECK(determinant(m) == Rat(5));
  CHECK(determinant(sing) == Rat(0));
}

TEST_CASE("span helpers") {
  std::vector<std::vector<Rat>> u = {{Rat(1), Rat(0), Rat(0)}, {Rat(0), Rat(1), Rat(0)}};
  std::vector<std::vector<Rat>> w = {{Rat(1), Rat(1), Rat(0)}, {Rat(0), Rat(0), Rat(1)}};
  CHECK(span_dim(u) == 2);
  CHECK(intersection_dim(u, w) == 1);
  auto inter = intersection_basis(u, w);
  REQUIRE(inter.size() == 1);
  CHECK(in_span(u, inter[0]));
  CHECK(in_span(w, inter[0]));

  CHECK(in_span(u, {Rat(3), Rat(-2), Rat(0)}));
  CHECK(!in_span(u, {Rat(0), Rat(0), Rat(1)}));

  std::vector<std::vector<Rat>> dep = {{Rat(2), Rat(4)}, {Rat(1), Rat(2)}};
  auto ech = echelon_span(dep);
  REQUIRE(ech.size() == 1);
  CHECK(ech[0] == std::vector<Rat>{Rat(1), Rat(2)});
}

TEST_CASE("complex field matrices") {
  MatC m(2, 2);
  m(0, 0) = GaussRat(Rat(0), Rat(1));
  m(0, 1) = GaussRat(Rat(1));
  m(1, 0) = GaussRat(Rat(-1));
  m(1, 1) = GaussRat(Rat(0), Rat(1));
  // rows are i*(row 2): rank 1 over Q(i)
  CHECK(rank(m) == 1);
  auto ker = kernel_basis(m);
  REQUIRE(ker.size() == 1);
  for (const auto& v : ker) {
    auto img = m.mul(v);
    CHECK(vec_is_zero(img));
  }
}
