#include "freestein/poly_io.hpp"

#include <cctype>

namespace freestein {

using nlohmann::json;

json to_json(const QComplex& c) {
  return json::array({rational_string(c.real()), rational_string(c.imag())});
}

namespace {

mpq_class rational_from_json(const json& j) {
  if (j.is_string()) return QComplex::parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return mpq_class(j.get<long>());
  if (j.is_number_float()) return QComplex::from_double(j.get<double>()).real();
  throw std::invalid_argument("coefficient component must be a string or number");
}

}  // namespace

QComplex complex_from_json(const json& j) {
  if (j.is_array()) {
    if (j.size() != 2) throw std::invalid_argument("coefficient must be [re, im]");
    return {rational_from_json(j[0]), rational_from_json(j[1])};
  }
  return {rational_from_json(j), 0};
}

json to_json(const GeneratorSystem& sys, const Word& w) {
  json out = json::array();
  const bool show_b = sys.has_b();
  for (int k = 0; k <= w.degree(); ++k) {
    if (show_b) out.push_back(json::array({"b", w.slots[k]}));
    if (k < w.degree()) out.push_back(json::array({"t", w.letters[k] + 1}));
  }
  return out;
}

json to_json(const Poly& p) {
  json terms = json::array();
  for (const auto& [w, c] : p.terms()) {
    terms.push_back({{"word", to_json(*p.system(), w)}, {"coeff", to_json(c)}});
  }
  return {{"n", p.system()->size()}, {"terms", terms}};
}

json to_json(const PolyTuple& p) {
  json out = json::array();
  for (const auto& x : p) out.push_back(to_json(x));
  return out;
}

json to_json(const Tensor& t) {
  json terms = json::array();
  const auto& sys = *t.system();
  for (const auto& [k, c] : t.terms()) {
    terms.push_back(
        {{"left", to_json(sys, k.first)}, {"right", to_json(sys, k.second)}, {"coeff", to_json(c)}});
  }
  return {{"n", sys.size()}, {"terms", terms}};
}

json to_json(const KernelMatrix& k) {
  json rows = json::array();
  for (int i = 0; i < k.size(); ++i) {
    json row = json::array();
    for (int j = 0; j < k.size(); ++j) row.push_back(to_json(k.at(i, j)));
    rows.push_back(row);
  }
  return {{"size", k.size()}, {"entries", rows}};
}

Poly word_from_json(const SystemPtr& sys, const json& j) {
  if (!j.is_array()) throw std::invalid_argument("word must be an array of letter tags");
  Poly out = Poly::one(sys);
  for (const auto& tag : j) {
    if (!tag.is_array() || tag.size() != 2 || !tag[0].is_string() || !tag[1].is_number_integer()) {
      throw std::invalid_argument("letter tag must be [\"t\", i] or [\"b\", k]");
    }
    const std::string kind = tag[0].get<std::string>();
    const int index = tag[1].get<int>();
    if (kind == "t") {
      if (index < 1 || index > sys->size()) {
        throw std::invalid_argument("unknown generator t" + std::to_string(index));
      }
      out = out * Poly::generator(sys, index - 1);
    } else if (kind == "b") {
      if (index < 0 || index >= sys->b().dim()) {
        throw std::invalid_argument("unknown B basis element b" + std::to_string(index));
      }
      out = out * Poly::b_element(sys, index);
    } else {
      throw std::invalid_argument("unknown letter tag '" + kind + "'");
    }
  }
  return out;
}

namespace {

void check_n(const SystemPtr& sys, const json& j) {
  if (j.contains("n") && j.at("n").get<int>() != sys->size()) {
    throw std::invalid_argument("serialized object has a different generator count");
  }
}

}  // namespace

Poly poly_from_json(const SystemPtr& sys, const json& j) {
  check_n(sys, j);
  Poly out(sys);
  for (const auto& term : j.at("terms")) {
    out += word_from_json(sys, term.at("word")) * complex_from_json(term.at("coeff"));
  }
  return out;
}

PolyTuple poly_tuple_from_json(const SystemPtr& sys, const json& j) {
  PolyTuple out;
  for (const auto& p : j) out.push_back(poly_from_json(sys, p));
  return out;
}

Tensor tensor_from_json(const SystemPtr& sys, const json& j) {
  check_n(sys, j);
  Tensor out(sys);
  for (const auto& term : j.at("terms")) {
    out += Tensor::elementary(word_from_json(sys, term.at("left")),
                              word_from_json(sys, term.at("right"))) *
           complex_from_json(term.at("coeff"));
  }
  return out;
}

KernelMatrix kernel_from_json(const SystemPtr& sys, const json& j) {
  const int n = j.at("size").get<int>();
  const auto& rows = j.at("entries");
  if (static_cast<int>(rows.size()) != n) throw std::invalid_argument("kernel row count mismatch");
  KernelMatrix out(sys, n);
  for (int r = 0; r < n; ++r) {
    if (static_cast<int>(rows[r].size()) != n) throw std::invalid_argument("kernel row length mismatch");
    for (int c = 0; c < n; ++c) out.at(r, c) = tensor_from_json(sys, rows[r][c]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Recursive-descent parser

namespace {

class Parser {
 public:
  Parser(std::string_view text, SystemPtr sys) : s_(text), sys_(std::move(sys)) {}

  PolyTuple parse_top() {
    skip();
    if (peek() == '(') {
      const std::size_t start = pos_;
      ++pos_;
      PolyTuple items{expr()};
      while (accept(',')) items.push_back(expr());
      if (accept(')')) {
        skip();
        if (pos_ == s_.size()) return items;
      }
      pos_ = start;  // not a bare tuple: reparse as a single expression
    }
    PolyTuple out{expr()};
    skip();
    if (pos_ != s_.size()) fail("unexpected character '" + std::string(1, s_[pos_]) + "'");
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  char peek() {
    skip();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }
  bool accept(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Poly expr() {
    Poly acc(sys_);
    bool first = true;
    while (true) {
      bool negative = false;
      if (accept('-')) {
        negative = true;
      } else if (accept('+')) {
      } else if (!first) {
        break;
      }
      Poly t = term();
      acc += negative ? -t : t;
      first = false;
      char c = peek();
      if (c != '+' && c != '-') break;
    }
    return acc;
  }

  Poly term() {
    Poly acc = power();
    while (true) {
      char c = peek();
      if (c == '*') {
        ++pos_;
        acc = acc * power();
      } else if (c == '/') {
        ++pos_;
        const std::size_t at = pos_;
        Poly d = power();
        acc *= QComplex(1) / scalar_value(d, at);
      } else if (c == '(' || c == 't' || c == 'b' || c == 'i' || std::isdigit(static_cast<unsigned char>(c)) ||
                 c == '.') {
        acc = acc * power();  // juxtaposition
      } else {
        return acc;
      }
    }
  }

  QComplex scalar_value(const Poly& d, std::size_t at) {
    if (d.is_zero()) throw ParseError("division by zero", at);
    if (d.degree() != 0) throw ParseError("division by a non-scalar", at);
    const Word& w = d.terms().begin()->first;
    QComplex c = d.terms().begin()->second;
    // Recover c from c times the unit of B.
    QComplex unit_coeff;
    for (const auto& [k, u] : sys_->b().unit())
      if (k == w.slots[0]) unit_coeff = u;
    if (unit_coeff.is_zero()) throw ParseError("division by a non-scalar", at);
    c /= unit_coeff;
    if (!(Poly::constant(sys_, c) == d)) throw ParseError("division by a non-scalar", at);
    return c;
  }

  Poly power() {
    Poly base = unary();
    if (accept('^')) {
      skip();
      const std::size_t at = pos_;
      long e = integer();
      if (e < 0) throw ParseError("negative exponent", at);
      Poly out = Poly::one(sys_);
      for (long k = 0; k < e; ++k) out = out * base;
      return out;
    }
    return base;
  }

  Poly unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return atom();
  }

  long integer() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) fail("expected an integer");
    return std::stol(std::string(s_.substr(start, pos_ - start)));
  }

  Poly atom() {
    char c = peek();
    const std::size_t at = pos_;
    if (c == '(') {
      ++pos_;
      Poly inner = expr();
      if (peek() == ',') fail("tuple not allowed inside an expression");
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (c == 't' || c == 'b') {
      ++pos_;
      if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        throw ParseError(std::string("expected an index after '") + c + "'", at);
      }
      long k = integer();
      if (c == 't') {
        if (k < 1 || k > sys_->size()) {
          throw ParseError("unknown generator t" + std::to_string(k), at);
        }
        return Poly::generator(sys_, static_cast<int>(k - 1));
      }
      if (k < 0 || k >= sys_->b().dim()) {
        throw ParseError("unknown B basis element b" + std::to_string(k), at);
      }
      return Poly::b_element(sys_, static_cast<int>(k));
    }
    if (c == 'i') {
      ++pos_;
      return Poly::constant(sys_, QComplex(0, 1));
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) {
        ++pos_;
      }
      if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
        std::size_t save = pos_;
        ++pos_;
        if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
        if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
          while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        } else {
          pos_ = save;
        }
      }
      try {
        return Poly::constant(sys_, QComplex(QComplex::parse_rational(s_.substr(start, pos_ - start))));
      } catch (const std::invalid_argument& e) {
        throw ParseError(e.what(), start);
      }
    }
    if (c == '\0') fail("unexpected end of input");
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  std::string_view s_;
  SystemPtr sys_;
  std::size_t pos_ = 0;
};

}  // namespace

PolyTuple parse_poly(std::string_view text, const SystemPtr& sys) {
  Parser parser(text, sys);
  return parser.parse_top();
}

}  // namespace freestein
