#include <random>

#include "doctest.h"
#include "freestein/poly_io.hpp"
#include "support.hpp"

using namespace freestein;
using testing_support::random_poly;

namespace {

std::shared_ptr<const BAlgebra> diagonal_pair() {
  std::vector<BCombination> products(4);
  products[0] = {{0, QComplex(1)}};
  products[3] = {{1, QComplex(1)}};
  std::vector<BCombination> star{{{0, QComplex(1)}}, {{1, QComplex(1)}}};
  return std::make_shared<const BAlgebra>(2, products, star,
                                          BCombination{{0, QComplex(1)}, {1, QComplex(1)}});
}

}  // namespace

TEST_CASE("parse simple tuples") {
  auto s1 = make_system(1);
  auto p = parse_poly("(t1)", s1);
  REQUIRE(p.size() == 1);
  CHECK(p[0] == Poly::generator(s1, 0));

  auto s2 = make_system(2);
  auto q = parse_poly("(t1*t2 + 2, t2)", s2);
  REQUIRE(q.size() == 2);
  CHECK(q[0] == Poly::generator(s2, 0) * Poly::generator(s2, 1) + Poly::constant(s2, QComplex(2)));
  CHECK(q[1] == Poly::generator(s2, 1));
}

TEST_CASE("parse errors carry a position") {
  auto s2 = make_system(2);
  try {
    parse_poly("(t3)", s2);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.position() == 1);
  }
  CHECK_THROWS_AS(parse_poly("t1 +", s2), ParseError);
  CHECK_THROWS_AS(parse_poly("t1 / t2", s2), ParseError);
  CHECK_THROWS_AS(parse_poly("(t1", s2), ParseError);
  CHECK_THROWS_AS(parse_poly("t1 $", s2), ParseError);
  CHECK_THROWS_AS(parse_poly("b1", s2), ParseError);
}

TEST_CASE("parse operators and scalars") {
  auto s = make_system(2);
  auto x = Poly::generator(s, 0);
  auto y = Poly::generator(s, 1);
  CHECK(parse_poly("t1^3", s)[0] == x * x * x);
  CHECK(parse_poly("(t1 + t2)^2", s)[0] == x * x + x * y + y * x + y * y);
  CHECK(parse_poly("1/2 t1 - 0.25*t2", s)[0] ==
        x * QComplex(mpq_class(1, 2)) - y * QComplex(mpq_class(1, 4)));
  CHECK(parse_poly("2i t1", s)[0] == x * QComplex(0, 2));
  CHECK(parse_poly("-t1*(t2 - 1)", s)[0] == -(x * y) + x);
  CHECK(parse_poly("(t1 + t2)*t1", s).size() == 1);
  CHECK(parse_poly("1e-2", s)[0] == Poly::constant(s, QComplex(mpq_class(1, 100))));
}

TEST_CASE("JSON round trip is exact") {
  auto sys = make_system(3);
  std::mt19937_64 rng(99);
  for (int k = 0; k < 30; ++k) {
    auto p = random_poly(sys, rng, 4, 6);
    auto j = to_json(p);
    CHECK(poly_from_json(sys, nlohmann::json::parse(j.dump())) == p);
    auto t = Tensor::elementary(p, random_poly(sys, rng, 3, 3));
    CHECK(tensor_from_json(sys, nlohmann::json::parse(to_json(t).dump())) == t);
  }
  auto k = mai_kernel(PolyTuple{random_poly(sys, rng, 2, 2), random_poly(sys, rng, 2, 2),
                                random_poly(sys, rng, 2, 2)},
                      generator_tuple(sys));
  CHECK(kernel_from_json(sys, to_json(k)) == k);
}

TEST_CASE("JSON with coefficient algebra letters") {
  auto sys = make_system(1, {}, diagonal_pair());
  std::mt19937_64 rng(4);
  for (int k = 0; k < 10; ++k) {
    auto p = random_poly(sys, rng, 3, 4);
    CHECK(poly_from_json(sys, to_json(p)) == p);
  }
  auto p = parse_poly("b0 t1 b1 + 3", sys)[0];
  auto j = to_json(p);
  CHECK(j["terms"][0]["word"][0] == nlohmann::json::array({"b", 0}));
  CHECK(poly_from_json(sys, j) == p);
}

TEST_CASE("parser output round trips through serialization") {
  auto sys = make_system(2);
  auto tuple = parse_poly("(1/3 t1 t2 - i t2^2 + 7, 2 t1)", sys);
  CHECK(poly_tuple_from_json(sys, to_json(tuple)) == tuple);
}
