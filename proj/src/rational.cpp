#include "freestein/rational.hpp"

#include <cmath>
#include <stdexcept>

namespace freestein {

QComplex::QComplex(mpq_class re, mpq_class im) : re_(std::move(re)), im_(std::move(im)) {
  re_.canonicalize();
  im_.canonicalize();
}

mpq_class QComplex::parse_rational(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw std::invalid_argument("empty rational literal");
  auto dot = s.find('.');
  auto exp = s.find_first_of("eE");
  if (dot == std::string::npos && exp == std::string::npos) {
    mpq_class q;
    if (q.set_str(s, 10) != 0 || s.find('/') == 0) {
      throw std::invalid_argument("malformed rational literal '" + s + "'");
    }
    if (s.find('/') != std::string::npos && q.get_den() == 0) {
      throw std::invalid_argument("zero denominator in '" + s + "'");
    }
    q.canonicalize();
    return q;
  }
  // Decimal literal: mantissa digits over a power of ten, then exponent.
  std::string mantissa = s.substr(0, exp);
  long e10 = 0;
  if (exp != std::string::npos) {
    try {
      e10 = std::stol(s.substr(exp + 1));
    } catch (const std::exception&) {
      throw std::invalid_argument("malformed exponent in '" + s + "'");
    }
  }
  bool negative = false;
  std::size_t pos = 0;
  if (pos < mantissa.size() && (mantissa[pos] == '-' || mantissa[pos] == '+')) {
    negative = mantissa[pos] == '-';
    ++pos;
  }
  std::string digits;
  long frac = 0;
  bool seen_dot = false;
  for (; pos < mantissa.size(); ++pos) {
    char c = mantissa[pos];
    if (c == '.' && !seen_dot) {
      seen_dot = true;
    } else if (c >= '0' && c <= '9') {
      digits.push_back(c);
      if (seen_dot) ++frac;
    } else {
      throw std::invalid_argument("malformed decimal literal '" + s + "'");
    }
  }
  if (digits.empty()) throw std::invalid_argument("malformed decimal literal '" + s + "'");
  mpz_class num(digits, 10);
  mpz_class ten = 10;
  mpz_class scale;
  long shift = e10 - frac;
  mpq_class q;
  if (shift >= 0) {
    mpz_pow_ui(scale.get_mpz_t(), ten.get_mpz_t(), static_cast<unsigned long>(shift));
    q = mpq_class(num * scale);
  } else {
    mpz_pow_ui(scale.get_mpz_t(), ten.get_mpz_t(), static_cast<unsigned long>(-shift));
    q = mpq_class(num, scale);
  }
  q.canonicalize();
  return negative ? mpq_class(-q) : q;
}

QComplex QComplex::from_strings(std::string_view re, std::string_view im) {
  return {parse_rational(re), parse_rational(im)};
}

QComplex QComplex::from_double(double re, double im) {
  if (!std::isfinite(re) || !std::isfinite(im)) {
    throw std::invalid_argument("non-finite coefficient");
  }
  return {mpq_class(re), mpq_class(im)};
}

QComplex& QComplex::operator+=(const QComplex& o) {
  re_ += o.re_;
  im_ += o.im_;
  return *this;
}

QComplex& QComplex::operator-=(const QComplex& o) {
  re_ -= o.re_;
  im_ -= o.im_;
  return *this;
}

QComplex& QComplex::operator*=(const QComplex& o) {
  if (sgn(im_) == 0 && sgn(o.im_) == 0) {
    re_ *= o.re_;
    return *this;
  }
  mpq_class re = re_ * o.re_ - im_ * o.im_;
  mpq_class im = re_ * o.im_ + im_ * o.re_;
  re_ = std::move(re);
  im_ = std::move(im);
  return *this;
}

QComplex& QComplex::operator/=(const QComplex& o) {
  mpq_class den = o.re_ * o.re_ + o.im_ * o.im_;
  if (sgn(den) == 0) throw std::domain_error("division by zero");
  mpq_class re = (re_ * o.re_ + im_ * o.im_) / den;
  mpq_class im = (im_ * o.re_ - re_ * o.im_) / den;
  re_ = std::move(re);
  im_ = std::move(im);
  return *this;
}

std::string rational_string(const mpq_class& q) { return q.get_str(10); }

std::string QComplex::to_string() const {
  if (sgn(im_) == 0) return rational_string(re_);
  return "(" + rational_string(re_) + (sgn(im_) < 0 ? " - " : " + ") +
         rational_string(abs(im_)) + "i)";
}

mpq_class rationalize(double value, long max_den) {
  if (!std::isfinite(value)) throw std::invalid_argument("cannot rationalize a non-finite value");
  // Standard continued-fraction convergents, stopped at the denominator bound.
  bool negative = value < 0;
  double x = std::fabs(value);
  long long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double rem = x;
  for (int iter = 0; iter < 64; ++iter) {
    double a = std::floor(rem);
    if (a > 9.0e15) break;
    auto ai = static_cast<long long>(a);
    long long h2 = ai * h1 + h0;
    long long k2 = ai * k1 + k0;
    if (k2 > max_den) break;
    h0 = h1;
    h1 = h2;
    k0 = k1;
    k1 = k2;
    double frac = rem - a;
    if (frac < 1e-15) break;
    rem = 1.0 / frac;
  }
  if (k1 == 0) return 0;
  mpq_class q(mpz_class(static_cast<long>(h1)), mpz_class(static_cast<long>(k1)));
  q.canonicalize();
  return negative ? mpq_class(-q) : q;
}

}  // namespace freestein
