#pragma once

#include <complex>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace freestein {

/// Complex number with exact rational real and imaginary parts.
///
/// This is the coefficient field of the symbolic layer. Every calculus
/// identity (Leibniz, kernel transforms, Jacobians) is checked for exact
/// equality over it; floating point only enters once a trace is evaluated.
class QComplex {
 public:
  QComplex() = default;
  QComplex(long value) : re_(value), im_(0) {}  // NOLINT(google-explicit-constructor)
  QComplex(mpq_class re, mpq_class im = 0);

  /// Parses "p", "p/q" or a plain decimal literal such as "-0.125".
  static mpq_class parse_rational(std::string_view text);
  static QComplex from_strings(std::string_view re, std::string_view im);
  /// Exact binary value of a double.
  static QComplex from_double(double re, double im = 0.0);

  const mpq_class& real() const { return re_; }
  const mpq_class& imag() const { return im_; }

  bool is_zero() const { return sgn(re_) == 0 && sgn(im_) == 0; }
  QComplex conj() const { return {re_, -im_}; }
  std::complex<double> to_complex() const { return {re_.get_d(), im_.get_d()}; }

  QComplex& operator+=(const QComplex& o);
  QComplex& operator-=(const QComplex& o);
  QComplex& operator*=(const QComplex& o);
  QComplex& operator/=(const QComplex& o);

  friend QComplex operator+(QComplex a, const QComplex& b) { return a += b; }
  friend QComplex operator-(QComplex a, const QComplex& b) { return a -= b; }
  friend QComplex operator*(QComplex a, const QComplex& b) { return a *= b; }
  friend QComplex operator/(QComplex a, const QComplex& b) { return a /= b; }
  QComplex operator-() const { return {-re_, -im_}; }

  friend bool operator==(const QComplex& a, const QComplex& b) {
    return a.re_ == b.re_ && a.im_ == b.im_;
  }
  friend bool operator!=(const QComplex& a, const QComplex& b) { return !(a == b); }

  std::string to_string() const;

 private:
  mpq_class re_{0};
  mpq_class im_{0};
};

/// Canonical "p/q" (or "p") text for a rational.
std::string rational_string(const mpq_class& q);

/// Nearest rational with denominator at most max_den (continued fractions).
mpq_class rationalize(double value, long max_den = 1000000);

// Scalar helpers shared by the exact and floating-point instantiations of the
// polynomial containers.
inline bool scalar_is_zero(const QComplex& c) { return c.is_zero(); }
inline bool scalar_is_zero(const std::complex<double>& c) { return c == std::complex<double>{}; }
inline QComplex scalar_conj(const QComplex& c) { return c.conj(); }
inline std::complex<double> scalar_conj(const std::complex<double>& c) { return std::conj(c); }
inline std::complex<double> to_complex(const QComplex& c) { return c.to_complex(); }
inline std::complex<double> to_complex(const std::complex<double>& c) { return c; }

template <class S>
S scalar_from(const QComplex& c);
template <>
inline QComplex scalar_from<QComplex>(const QComplex& c) {
  return c;
}
template <>
inline std::complex<double> scalar_from<std::complex<double>>(const QComplex& c) {
  return c.to_complex();
}

}  // namespace freestein
