#include <random>

#include "doctest.h"
#include "freestein/ncalg.hpp"
#include "support.hpp"

using namespace freestein;
using testing_support::random_poly;

namespace {

Poly t(const SystemPtr& sys, int i) { return Poly::generator(sys, i - 1); }
Poly one(const SystemPtr& sys) { return Poly::one(sys); }
Tensor ox(const Poly& a, const Poly& b) { return Tensor::elementary(a, b); }

// Two-dimensional B = C ⊕ C with orthogonal minimal projections b0, b1.
std::shared_ptr<const BAlgebra> diagonal_pair() {
  std::vector<BCombination> products(4);
  products[0] = {{0, QComplex(1)}};
  products[3] = {{1, QComplex(1)}};
  std::vector<BCombination> star{{{0, QComplex(1)}}, {{1, QComplex(1)}}};
  return std::make_shared<const BAlgebra>(2, products, star,
                                          BCombination{{0, QComplex(1)}, {1, QComplex(1)}});
}

}  // namespace

TEST_CASE("arithmetic keeps canonical form") {
  auto sys = make_system(3);
  CHECK(t(sys, 1) * t(sys, 2) == Poly::monomial(sys, Word::of_letters({0, 1})));
  auto p = t(sys, 1) * t(sys, 2) + t(sys, 3) * QComplex(2);
  CHECK(p * one(sys) == p);
  CHECK(one(sys) * p == p);
  auto cancel = (t(sys, 1) + t(sys, 2)) + (-t(sys, 2));
  CHECK(cancel == t(sys, 1));
  CHECK(cancel.terms().size() == 1);
  CHECK((p - p).is_zero());
}

TEST_CASE("multiplication is associative on random inputs") {
  auto sys = make_system(2);
  std::mt19937_64 rng(7);
  for (int k = 0; k < 30; ++k) {
    auto a = random_poly(sys, rng, 3, 4);
    auto b = random_poly(sys, rng, 3, 4);
    auto c = random_poly(sys, rng, 3, 4);
    CHECK((a * b) * c == a * (b * c));
  }
}

TEST_CASE("mismatched systems are rejected") {
  auto s1 = make_system(2);
  auto s2 = make_system(3);
  CHECK_THROWS_AS(t(s1, 1) + t(s2, 1), StructuralError);
  CHECK_THROWS_AS(t(s1, 1) * t(s2, 1), StructuralError);
  // Structurally identical systems interoperate.
  auto s3 = make_system(2);
  CHECK_NOTHROW(t(s1, 1) * t(s3, 2));
}

TEST_CASE("degree cap is enforced") {
  auto sys = make_system(1, {}, nullptr, 3);
  auto x = t(sys, 1);
  CHECK_NOTHROW(x * x * x);
  CHECK_THROWS_AS(x * x * x * x, DegreeCapError);
}

TEST_CASE("adjoint") {
  auto sys = make_system(2);
  CHECK(adjoint(t(sys, 1) * t(sys, 2)) == t(sys, 2) * t(sys, 1));
  const QComplex i(0, 1);
  CHECK(adjoint(t(sys, 1) * i) == t(sys, 1) * QComplex(0, -1));
  std::mt19937_64 rng(11);
  for (int k = 0; k < 30; ++k) {
    auto p = random_poly(sys, rng, 4, 5);
    auto q = random_poly(sys, rng, 4, 5);
    CHECK(adjoint(adjoint(p)) == p);
    CHECK(adjoint(p * q) == adjoint(q) * adjoint(p));
  }
  // Non-self-adjoint pairing t1* = t2.
  auto paired = make_system(2, {1, 0});
  CHECK(adjoint(t(paired, 1) * t(paired, 1)) == t(paired, 2) * t(paired, 2));
}

TEST_CASE("tensor adjoint is an involution and antimultiplicative for #") {
  auto sys = make_system(2);
  std::mt19937_64 rng(5);
  for (int k = 0; k < 20; ++k) {
    auto a = ox(random_poly(sys, rng, 2, 3), random_poly(sys, rng, 2, 3));
    auto b = ox(random_poly(sys, rng, 2, 3), random_poly(sys, rng, 2, 3));
    CHECK(adjoint(adjoint(a)) == a);
    CHECK(adjoint(sharp(a, b)) == sharp(adjoint(b), adjoint(a)));
  }
}

TEST_CASE("sharp products") {
  auto sys = make_system(3);
  CHECK(sharp(ox(t(sys, 1), t(sys, 2)), t(sys, 3)) == t(sys, 1) * t(sys, 3) * t(sys, 2));
  auto p = t(sys, 1) * t(sys, 2) + Poly::constant(sys, QComplex(3));
  CHECK(sharp(Tensor::unit(sys), p) == p);
  CHECK(sharp(ox(t(sys, 1), one(sys)), ox(one(sys), t(sys, 2))) == ox(t(sys, 1), t(sys, 2)));
  // Associativity of the action: (a # b) # c = a # (b # c).
  std::mt19937_64 rng(3);
  for (int k = 0; k < 20; ++k) {
    auto a = ox(random_poly(sys, rng, 2, 2), random_poly(sys, rng, 2, 2));
    auto b = ox(random_poly(sys, rng, 2, 2), random_poly(sys, rng, 2, 2));
    auto c = random_poly(sys, rng, 2, 2);
    CHECK(sharp(sharp(a, b), c) == sharp(a, sharp(b, c)));
  }
}

TEST_CASE("free difference quotients") {
  auto sys = make_system(2);
  auto w = t(sys, 1) * t(sys, 2) * t(sys, 1);
  CHECK(diff_quotient(0, w) == ox(one(sys), t(sys, 2) * t(sys, 1)) + ox(t(sys, 1) * t(sys, 2), one(sys)));
  CHECK(diff_quotient(1, w) == ox(t(sys, 1), t(sys, 1)));
  CHECK(diff_quotient(0, Poly::constant(sys, QComplex(7))).is_zero());
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      auto d = diff_quotient(i, t(sys, j + 1));
      if (i == j) {
        CHECK(d == Tensor::unit(sys));
      } else {
        CHECK(d.is_zero());
      }
    }
}

TEST_CASE("difference quotient lowers degree by one per occurrence") {
  auto sys = make_system(3);
  std::mt19937_64 rng(19);
  for (int k = 0; k < 50; ++k) {
    auto p = random_poly(sys, rng, 6, 6);
    for (int i = 0; i < 3; ++i) {
      const auto d = diff_quotient(i, p);
      for (const auto& [key, c] : d.terms()) {
        // Every tensor term comes from a word of degree deg(left)+deg(right)+1.
        Word joined = key.first;
        joined.letters.push_back(i);
        joined.letters.insert(joined.letters.end(), key.second.letters.begin(), key.second.letters.end());
        joined.slots.insert(joined.slots.end(), key.second.slots.begin(), key.second.slots.end());
        CHECK(p.terms().count(joined) == 1);
      }
    }
  }
}

TEST_CASE("Leibniz law holds exactly on random pairs") {
  std::mt19937_64 rng(2024);
  for (int n = 1; n <= 3; ++n) {
    auto sys = make_system(n);
    for (int k = 0; k < 40; ++k) {
      auto p = random_poly(sys, rng, 6, 4);
      auto q = random_poly(sys, rng, 6, 4);
      for (int i = 0; i < n; ++i) {
        auto lhs = diff_quotient(i, p * q);
        auto rhs = left_act(p, diff_quotient(i, q)) + right_act(diff_quotient(i, p), q);
        CHECK(lhs == rhs);
      }
    }
  }
}

TEST_CASE("jacobian") {
  auto sys = make_system(2);
  CHECK(jacobian(generator_tuple(sys)) == KernelMatrix::identity(sys, 2));
  PolyTuple p{t(sys, 1) * t(sys, 2), t(sys, 2)};
  auto j = jacobian(p);
  CHECK(j.at(0, 0) == ox(one(sys), t(sys, 2)));
  CHECK(j.at(0, 1) == ox(t(sys, 1), one(sys)));
  CHECK(j.at(1, 0).is_zero());
  CHECK(j.at(1, 1) == Tensor::unit(sys));
  PolyTuple zero(2, Poly(sys));
  CHECK(jacobian(zero) == KernelMatrix(sys, 2));
  CHECK_THROWS_AS(jacobian(PolyTuple{t(sys, 1)}), StructuralError);
}

TEST_CASE("mai kernel expansions") {
  auto s1 = make_system(1);
  auto x = t(s1, 1);
  auto a = mai_kernel(PolyTuple{x}, PolyTuple{x});
  const QComplex half = QComplex(1) / QComplex(2);
  auto expected = ox(x * x, one(s1)) * half - ox(x, x) + ox(one(s1), x * x) * half;
  CHECK(a.at(0, 0) == expected);
  CHECK(mai_kernel(PolyTuple{Poly(s1)}, PolyTuple{x}) == KernelMatrix(s1, 1));

  // Term-by-term oracle: (ξ⊗1 − 1⊗ξ) # (x⊗1 − 1⊗x) = ξx⊗1 − ξ⊗x − x⊗ξ + 1⊗xξ.
  auto s2 = make_system(2);
  auto k = mai_kernel(PolyTuple{t(s2, 2), Poly(s2)}, generator_tuple(s2));
  auto oracle = (ox(t(s2, 2) * t(s2, 1), one(s2)) - ox(t(s2, 2), t(s2, 1)) -
                 ox(t(s2, 1), t(s2, 2)) + ox(one(s2), t(s2, 1) * t(s2, 2))) *
                half;
  CHECK(k.at(0, 0) == oracle);
  CHECK(k.at(1, 0).is_zero());
}

TEST_CASE("mai kernel is linear in xi") {
  auto sys = make_system(2);
  std::mt19937_64 rng(41);
  auto x = generator_tuple(sys);
  for (int k = 0; k < 10; ++k) {
    PolyTuple a{random_poly(sys, rng, 2, 3), random_poly(sys, rng, 2, 3)};
    PolyTuple b{random_poly(sys, rng, 2, 3), random_poly(sys, rng, 2, 3)};
    const QComplex c(mpq_class(3, 7), mpq_class(-1, 2));
    PolyTuple combo{a[0] + b[0] * c, a[1] + b[1] * c};
    CHECK(mai_kernel(combo, x) == mai_kernel(a, x) + mai_kernel(b, x) * c);
  }
}

TEST_CASE("kernel transform") {
  auto sys = make_system(1);
  auto x = t(sys, 1);
  TensorTuple a{Tensor::unit(sys)};
  CHECK(transform_kernel(a, PolyTuple{x}) == a);
  auto out = transform_kernel(a, PolyTuple{x * x});
  REQUIRE(out.size() == 1);
  CHECK(out[0] == ox(x, one(sys)) + ox(one(sys), x));
  CHECK(transform_kernel(TensorTuple{Tensor(sys)}, PolyTuple{x * x})[0].is_zero());

  auto s2 = make_system(2);
  std::mt19937_64 rng(1);
  TensorTuple row{ox(random_poly(s2, rng, 2, 2), random_poly(s2, rng, 2, 2)),
                  ox(random_poly(s2, rng, 2, 2), random_poly(s2, rng, 2, 2))};
  CHECK(transform_kernel(row, generator_tuple(s2)) == row);
}

TEST_CASE("coefficient algebra slots") {
  auto b = diagonal_pair();
  CHECK_NOTHROW(b->validate());
  auto sys = make_system(1, {}, b);
  CHECK(sys->has_b());
  auto b0 = Poly::b_element(sys, 0);
  auto b1 = Poly::b_element(sys, 1);
  auto x = t(sys, 1);
  // Adjacent B letters multiply eagerly: b0 b1 = 0, b0 b0 = b0.
  CHECK((b0 * b1).is_zero());
  CHECK(b0 * b0 == b0);
  CHECK(b0 + b1 == one(sys));
  // B lies in the kernel of ∂ and slots stay on their side.
  CHECK(diff_quotient(0, b0).is_zero());
  auto w = b0 * x * b1;
  CHECK(diff_quotient(0, w) == ox(b0, b1));
  std::mt19937_64 rng(9);
  for (int k = 0; k < 25; ++k) {
    auto p = random_poly(sys, rng, 4, 4);
    auto q = random_poly(sys, rng, 4, 4);
    CHECK(diff_quotient(0, p * q) ==
          left_act(p, diff_quotient(0, q)) + right_act(diff_quotient(0, p), q));
    CHECK(adjoint(adjoint(p)) == p);
    CHECK(adjoint(p * q) == adjoint(q) * adjoint(p));
  }
  CHECK(jacobian(generator_tuple(sys)) == KernelMatrix::identity(sys, 1));
}

TEST_CASE("invalid coefficient algebras are rejected") {
  std::vector<BCombination> products(4);
  products[0] = {{0, QComplex(1)}};
  products[1] = {{1, QComplex(1)}};
  products[2] = {{1, QComplex(1)}};
  products[3] = {{1, QComplex(1)}};
  std::vector<BCombination> star{{{0, QComplex(1)}}, {{1, QComplex(1)}}};
  // C[e]/(e^2 = e) with unit b0 and idempotent b1; declaring b1 the unit is invalid.
  BAlgebra ok(2, products, star, {{0, QComplex(1)}});
  CHECK_NOTHROW(ok.validate());
  BAlgebra bad_unit(2, products, star, {{1, QComplex(1)}});
  CHECK_THROWS_AS(bad_unit.validate(), StructuralError);
  CHECK_THROWS_AS(make_system(2, {1, 1}), StructuralError);
}

TEST_CASE("word enumeration is graded and complete") {
  auto sys = make_system(2);
  auto words = enumerate_words(*sys, 3);
  CHECK(words.size() == 1 + 2 + 4 + 8);
  CHECK(std::is_sorted(words.begin(), words.end()));
  auto sb = make_system(1, {}, diagonal_pair());
  CHECK(enumerate_words(*sb, 2, 1).size() == 4 + 8);
}
