#pragma once

#include <cstdlib>
#include <random>
#include <string>

#include "freestein/ncalg.hpp"

namespace testing_support {

using namespace freestein;

inline std::string fixture(const std::string& name) {
  const char* dir = std::getenv("FREESTEIN_FIXTURES");
  return std::string(dir ? dir : "fixtures") + "/" + name;
}

/// Random polynomial with small rational coefficients (possibly complex).
inline Poly random_poly(const SystemPtr& sys, std::mt19937_64& rng, int max_degree, int max_terms,
                        bool complex_coefficients = true) {
  std::uniform_int_distribution<int> terms(1, max_terms);
  std::uniform_int_distribution<int> degree(0, max_degree);
  std::uniform_int_distribution<int> letter(0, sys->size() - 1);
  std::uniform_int_distribution<int> slot(0, sys->b().dim() - 1);
  std::uniform_int_distribution<long> num(-5, 5);
  std::uniform_int_distribution<long> den(1, 4);
  Poly p(sys);
  const int count = terms(rng);
  for (int k = 0; k < count; ++k) {
    const int d = degree(rng);
    std::vector<int> letters(d), slots(d + 1);
    for (int& l : letters) l = letter(rng);
    for (int& s : slots) s = slot(rng);
    mpq_class re(num(rng), den(rng));
    mpq_class im = complex_coefficients ? mpq_class(num(rng), den(rng)) : mpq_class(0);
    re.canonicalize();
    im.canonicalize();
    p.add_term(Word(letters, slots), QComplex(re, im));
  }
  return p;
}

}  // namespace testing_support
