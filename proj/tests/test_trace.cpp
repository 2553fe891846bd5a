#include <cmath>
#include <random>

#include "doctest.h"
#include "freestein/model_io.hpp"
#include "freestein/trace.hpp"
#include "support.hpp"

using namespace freestein;
using testing_support::fixture;

namespace {

// Independent oracle: count all pairings of the positions that are
// non-crossing and pair equal letters.
long brute_force_pairings(const std::vector<int>& letters) {
  const int d = static_cast<int>(letters.size());
  if (d % 2) return 0;
  std::vector<int> partner(d, -1);
  long count = 0;
  std::function<void()> rec = [&]() {
    int first = -1;
    for (int i = 0; i < d; ++i)
      if (partner[i] < 0) {
        first = i;
        break;
      }
    if (first < 0) {
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          const int c = partner[a], e = partner[b];
          if (a < b && b < c && c < e) return;  // (a,c) and (b,e) cross
        }
      ++count;
      return;
    }
    for (int j = first + 1; j < d; ++j) {
      if (partner[j] >= 0 || letters[j] != letters[first]) continue;
      partner[first] = j;
      partner[j] = first;
      rec();
      partner[first] = partner[j] = -1;
    }
  };
  rec();
  return count;
}

Word random_word(std::mt19937_64& rng, int n, int max_degree) {
  std::uniform_int_distribution<int> deg(0, max_degree), let(0, n - 1);
  std::vector<int> l(deg(rng));
  for (int& x : l) x = let(rng);
  return Word::of_letters(l);
}

long catalan(int k) {
  long c = 1;
  for (int i = 0; i < k; ++i) c = c * 2 * (2 * i + 1) / (i + 2);
  return c;
}

}  // namespace

TEST_CASE("matrix model traces") {
  auto m = load_model(fixture("cplusc.json"));
  CHECK(std::abs(m->trace(Word::of_letters({0, 0})) - 1.0) < 1e-15);
  CHECK(std::abs(m->trace(Word::of_letters({0}))) < 1e-15);
  CHECK(std::abs(m->trace(Word()) - 1.0) < 1e-15);
  auto m2 = load_model(fixture("m2.json"));
  // σz σx σz σx = -1.
  CHECK(std::abs(m2->trace(Word::of_letters({0, 1, 0, 1})) + 1.0) < 1e-15);
}

TEST_CASE("matrix model validation") {
  using Blocks = std::vector<MatrixBlock>;
  Eigen::MatrixXcd a(1, 1);
  a << 1.0;
  CHECK_THROWS_AS(MatrixModel(Blocks{{1, 0.4}}, {{a}}), std::invalid_argument);
  Eigen::MatrixXcd nonherm(2, 2);
  nonherm << 0, 1, 0, 0;
  CHECK_THROWS_AS(MatrixModel(Blocks{{2, 1.0}}, {{nonherm}}), std::invalid_argument);
  // With the pairing t1* = t2 the same matrices are admissible.
  CHECK_NOTHROW(MatrixModel(Blocks{{2, 1.0}}, {{nonherm}, {Eigen::MatrixXcd(nonherm.adjoint())}}, {1, 0}));
}

TEST_CASE("coefficient algebra inside a matrix model") {
  auto m = std::dynamic_pointer_cast<const MatrixModel>(load_model(fixture("cplusc_relative.json")));
  REQUIRE(m);
  CHECK(m->has_b());
  const auto& b = m->system()->b();
  CHECK(b.dim() == 2);
  // b0 b1 = 0 and b0 b0 = b0 recovered from the matrices.
  CHECK(b.product(0, 1).empty());
  REQUIRE(b.product(0, 0).size() == 1);
  CHECK(b.product(0, 0)[0].first == 0);
  // τ(b0 x b0 x b0) = ½ · 1.
  CHECK(std::abs(m->trace(Word({0, 0}, {0, 0, 0})) - 0.5) < 1e-15);
  CHECK(std::abs(m->trace(Word({0}, {1, 1})) + 0.5) < 1e-15);
}

TEST_CASE("semicircular moments") {
  SemicircularModel s(2);
  CHECK(std::abs(s.trace(Word::of_letters({0, 0, 0, 0})) - 2.0) < 1e-15);
  CHECK(std::abs(s.trace(Word::of_letters({0, 1, 0, 1}))) < 1e-15);
  for (int k = 0; k <= 5; ++k) {
    std::vector<int> l(2 * k, 0);
    CHECK(s.trace(Word::of_letters(l)).real() == doctest::Approx(catalan(k)));
    CHECK(brute_force_pairings(l) == catalan(k));
  }
  std::mt19937_64 rng(8);
  for (int k = 0; k < 200; ++k) {
    auto w = random_word(rng, 2, 10);
    CHECK(s.trace(w).real() == doctest::Approx(static_cast<double>(brute_force_pairings(w.letters))));
  }
}

TEST_CASE("inner products") {
  SemicircularModel s(1);
  auto sys = s.system();
  auto one = Poly::one(sys);
  auto x = Poly::generator(sys, 0);
  CHECK(std::abs(inner_l2(s, one, one) - 1.0) < 1e-15);
  CHECK(std::abs(inner_l2(s, x, x) - 1.0) < 1e-15);
  auto two = load_model(fixture("twopoint.json"));
  CHECK(std::abs(inner_l2(*two, Poly::generator(two->system(), 0), Poly::one(two->system()))) < 1e-15);

  auto u = Tensor::unit(sys);
  CHECK(std::abs(inner_tensor(s, u, u) - 1.0) < 1e-15);
  CHECK(std::abs(inner_tensor(s, Tensor::elementary(x, one), Tensor::elementary(one, x))) < 1e-15);
  auto xx = Tensor::elementary(x, x);
  CHECK(std::abs(inner_tensor(s, xx, xx) - 1.0) < 1e-15);

  SemicircularModel s2(2);
  auto id = KernelMatrix::identity(s2.system(), 2);
  CHECK(std::abs(inner_hs(s2, id, id) - 2.0) < 1e-15);
  CHECK(std::abs(inner_hs(s2, id, KernelMatrix(s2.system(), 2))) < 1e-15);
}

TEST_CASE("mai kernel distance from the identity for one semicircular") {
  SemicircularModel s(1);
  auto x = generator_tuple(s.system());
  auto d = mai_kernel(x, x) - KernelMatrix::identity(s.system(), 1);
  // Oracle: A − 1 = ½x²⊗1 − x⊗x + ½1⊗x² − 1⊗1. Expanding with τ(x²) = 1,
  // τ(x⁴) = 2 term by term gives ¼·2 + 1 + ¼·2 + 1 + 2·¼·1 − 2·½ − 2·½ + 0 = 3/2.
  CHECK(std::abs(inner_hs(s, d, d) - 1.5) < 1e-12);
}

TEST_CASE("measure model moments") {
  auto semi = std::dynamic_pointer_cast<const MeasureModel>(load_model(fixture("semicircle_density.json")));
  REQUIRE(semi);
  for (int k = 0; k <= 6; ++k) {
    CHECK(std::fabs(semi->moment(2 * k) - catalan(k)) < 1e-10);
    CHECK(std::fabs(semi->moment(2 * k + 1)) < 1e-10);
  }
  auto uni = std::dynamic_pointer_cast<const MeasureModel>(load_model(fixture("uniform01.json")));
  for (int k = 0; k <= 12; ++k) CHECK(std::fabs(uni->moment(k) - 1.0 / (k + 1)) < 1e-13);
  auto mixed = std::dynamic_pointer_cast<const MeasureModel>(load_model(fixture("semicircle_atom.json")));
  CHECK(std::fabs(mixed->moment(2) - (0.5 + 0.5 * 9)) < 1e-12);
  CHECK_THROWS_AS(measure_from_json(nlohmann::json::parse(R"({"type":"measure","atoms":[[0,0.5]]})")),
                  SpecError);
}

TEST_CASE("density tables integrate piecewise-linear densities") {
  auto m = measure_from_json(nlohmann::json::parse(
      R"({"type":"measure","density":{"kind":"table","x":[0,1,2],"density":[0,1,0]}})"));
  CHECK(std::fabs(m->moment(0) - 1.0) < 1e-13);
  CHECK(std::fabs(m->moment(1) - 1.0) < 1e-13);
  CHECK(std::fabs(m->moment(2) - 7.0 / 6.0) < 1e-13);
}

TEST_CASE("free products") {
  auto fp = std::dynamic_pointer_cast<const FreeProductModel>(load_model(fixture("free_twopoint.json")));
  REQUIRE(fp);
  CHECK(std::abs(free_product_trace(*fp, Word::of_letters({0, 1}))) < 1e-15);
  CHECK(std::abs(free_product_trace(*fp, Word::of_letters({0, 1, 0, 1}))) < 1e-15);
  CHECK(std::abs(free_product_trace(*fp, Word::of_letters({0, 0, 1, 1})) - 1.0) < 1e-15);
  CHECK(std::abs(free_product_trace(*fp, Word::of_letters({0, 0, 0, 0})) - 1.0) < 1e-15);

  // Oracle: a free product of single semicirculars is a semicircular family.
  std::vector<ModelPtr> factors{std::make_shared<SemicircularModel>(1), std::make_shared<SemicircularModel>(1),
                                std::make_shared<SemicircularModel>(1)};
  FreeProductModel prod(factors);
  SemicircularModel family(3);
  std::mt19937_64 rng(17);
  for (int k = 0; k < 300; ++k) {
    auto w = random_word(rng, 3, 10);
    CHECK(std::abs(prod.trace(w) - family.trace(w)) < 1e-10);
  }
  // Mixed alternating centered moments vanish: (x² − 1)(y² − 1)(x² − 1)(y² − 1).
  SemicircularModel s2(2);
  auto sys = prod.system();
  auto c0 = Poly::generator(sys, 0) * Poly::generator(sys, 0) - Poly::one(sys);
  auto c1 = Poly::generator(sys, 1) * Poly::generator(sys, 1) - Poly::one(sys);
  CHECK(std::abs(trace_poly(prod, c0 * c1 * c0 * c1)) < 1e-10);
  CHECK(std::abs(trace_poly(prod, c0 * c1 * Poly::generator(sys, 2) * c0)) < 1e-10);
}

TEST_CASE("trace property and positivity in every model") {
  std::vector<ModelPtr> models{load_model(fixture("m2c.json")), load_model(fixture("semicircular2.json")),
                               load_model(fixture("threepoint.json")),
                               load_model(fixture("semicircle_atom.json")),
                               load_model(fixture("free_twopoint.json"))};
  std::mt19937_64 rng(23);
  for (const auto& m : models) {
    CAPTURE(m->kind());
    const int n = m->size();
    for (int k = 0; k < 100; ++k) {
      auto u = random_word(rng, n, 4);
      auto v = random_word(rng, n, 4);
      Word uv = u, vu = v;
      uv.letters.insert(uv.letters.end(), v.letters.begin(), v.letters.end());
      vu.letters.insert(vu.letters.end(), u.letters.begin(), u.letters.end());
      uv.slots.assign(uv.letters.size() + 1, 0);
      vu.slots.assign(vu.letters.size() + 1, 0);
      CHECK(std::abs(m->trace(uv) - m->trace(vu)) < 1e-10);
      Word ustar = Word::of_letters(std::vector<int>(u.letters.rbegin(), u.letters.rend()));
      for (int& l : ustar.letters) l = m->system()->star(l);
      CHECK(std::abs(m->trace(ustar) - std::conj(m->trace(u))) < 1e-10);
    }
    auto words = enumerate_words(*m->system(), 3);
    const auto sz = static_cast<Eigen::Index>(words.size());
    Eigen::MatrixXcd g(sz, sz);
    for (Eigen::Index a = 0; a < sz; ++a)
      for (Eigen::Index b = 0; b < sz; ++b) g(a, b) = trace_star_product(*m, words[b], words[a]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g);
    CHECK(es.eigenvalues().minCoeff() >= -1e-9);
  }
}

TEST_CASE("degree cap and unknown letters") {
  SemicircularModel s(1, 2);
  CHECK_NOTHROW(s.trace(Word::of_letters({0, 0, 0, 0})));
  CHECK_THROWS_AS(s.trace(Word::of_letters({0, 0, 0, 0, 0, 0})), DegreeCapError);
  CHECK_THROWS_AS(s.trace(Word::of_letters({1})), std::out_of_range);
}

TEST_CASE("malformed model specs name the field") {
  try {
    model_from_json(nlohmann::json::parse(R"({"type":"matrix","blocks":[[1,"x"]],"generators":[]})"));
    FAIL("expected a spec error");
  } catch (const SpecError& e) {
    CHECK(std::string(e.what()).find("model.blocks[0].weight") != std::string::npos);
  }
  CHECK_THROWS_AS(model_from_json(nlohmann::json::parse(R"({"type":"bogus"})")), SpecError);
  CHECK_THROWS_AS(model_from_json(nlohmann::json::parse(R"({"n":2})")), SpecError);
}
