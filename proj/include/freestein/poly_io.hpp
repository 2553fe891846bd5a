#pragma once

// Text and JSON forms of polynomials, tensors and kernel matrices.
//
// JSON words are arrays of letter tags: ["t", i] with 1-based i, and, when the
// system carries a coefficient algebra, ["b", k] for the B-basis element k.
// Coefficients are [re, im] pairs of exact rational strings, so a round trip
// through JSON is bit-exact.

#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "freestein/ncalg.hpp"

namespace freestein {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t position)
      : std::runtime_error(message + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

nlohmann::json to_json(const QComplex& c);
QComplex complex_from_json(const nlohmann::json& j);

nlohmann::json to_json(const GeneratorSystem& sys, const Word& w);
nlohmann::json to_json(const Poly& p);
nlohmann::json to_json(const PolyTuple& p);
nlohmann::json to_json(const Tensor& t);
nlohmann::json to_json(const KernelMatrix& k);

/// A JSON word as a polynomial (letters are multiplied, so non-canonical
/// sequences such as adjacent B letters are accepted).
Poly word_from_json(const SystemPtr& sys, const nlohmann::json& j);
Poly poly_from_json(const SystemPtr& sys, const nlohmann::json& j);
PolyTuple poly_tuple_from_json(const SystemPtr& sys, const nlohmann::json& j);
Tensor tensor_from_json(const SystemPtr& sys, const nlohmann::json& j);
KernelMatrix kernel_from_json(const SystemPtr& sys, const nlohmann::json& j);

/// Parses "p" or "(p1, ..., pm)". Terms are products of t<i>, b<k>, integers,
/// decimals, the imaginary unit i and parenthesised sums; '^' takes a
/// non-negative integer exponent and '/' divides by a scalar.
PolyTuple parse_poly(std::string_view text, const SystemPtr& sys);

}  // namespace freestein
