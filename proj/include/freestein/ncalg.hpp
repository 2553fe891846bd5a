#pragma once

// Noncommutative polynomials over indeterminates t_1..t_n and a
// finite-dimensional coefficient *-algebra B, together with the free
// difference quotients, Jacobians and #-products built on them.
//
// Words are stored in B-normal form: b_0 t_{i_1} b_1 ... t_{i_d} b_d where each
// slot holds a single B-basis index. When B is absent (B = C) the basis is {1}
// and every slot is 0.

#include <compare>
#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "freestein/rational.hpp"

namespace freestein {

inline constexpr int kDefaultDegreeCap = 12;

/// Operands built over different generator systems, or of mismatched shape.
class StructuralError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A word would exceed the degree cap of its generator system.
class DegreeCapError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Sparse linear combination of B-basis elements.
using BCombination = std::vector<std::pair<int, QComplex>>;

/// Finite-dimensional unital *-algebra given by structure constants.
class BAlgebra {
 public:
  /// products[a * dim + b] expands b_a b_b; involution[a] expands b_a^*.
  BAlgebra(int dim, std::vector<BCombination> products, std::vector<BCombination> involution,
           BCombination unit);

  /// The one-dimensional algebra C with basis {1}.
  static std::shared_ptr<const BAlgebra> scalars();

  int dim() const { return dim_; }
  const BCombination& product(int a, int b) const { return products_[a * dim_ + b]; }
  const BCombination& star(int a) const { return involution_[a]; }
  const BCombination& unit() const { return unit_; }
  bool is_scalar() const { return scalar_; }

  /// Throws StructuralError unless the constants define an associative unital
  /// algebra whose involution is a conjugate-linear anti-automorphism of order two.
  void validate() const;

  friend bool operator==(const BAlgebra& a, const BAlgebra& b);

 private:
  int dim_;
  std::vector<BCombination> products_;
  std::vector<BCombination> involution_;
  BCombination unit_;
  bool scalar_ = false;
};

/// Indeterminates t_1..t_n with their star pairing and optional algebra B.
class GeneratorSystem {
 public:
  explicit GeneratorSystem(int n, std::vector<int> star = {},
                           std::shared_ptr<const BAlgebra> b = nullptr,
                           int cap = kDefaultDegreeCap);

  int size() const { return n_; }
  /// Zero-based partner i* of generator i.
  int star(int i) const { return star_[i]; }
  const std::vector<int>& star_pairing() const { return star_; }
  const BAlgebra& b() const { return *b_; }
  const std::shared_ptr<const BAlgebra>& b_ptr() const { return b_; }
  bool has_b() const { return !b_->is_scalar(); }
  int cap() const { return cap_; }

  bool compatible(const GeneratorSystem& other) const;

 private:
  int n_;
  std::vector<int> star_;
  std::shared_ptr<const BAlgebra> b_;
  int cap_;
};

using SystemPtr = std::shared_ptr<const GeneratorSystem>;

SystemPtr make_system(int n, std::vector<int> star = {},
                      std::shared_ptr<const BAlgebra> b = nullptr, int cap = kDefaultDegreeCap);

/// b_0 t_{i_1} b_1 ... t_{i_d} b_d with zero-based letters and B-basis slots.
struct Word {
  std::vector<int> letters;
  std::vector<int> slots{0};

  Word() = default;
  Word(std::vector<int> letters_, std::vector<int> slots_);
  /// Word in the letters with every slot holding basis element 0.
  static Word of_letters(std::vector<int> letters_);

  int degree() const { return static_cast<int>(letters.size()); }

  /// Graded order: degree first, then letters, then slots.
  friend std::strong_ordering operator<=>(const Word& a, const Word& b);
  friend bool operator==(const Word& a, const Word& b) = default;
};

struct WordHash {
  std::size_t operator()(const Word& w) const noexcept;
};

/// Calls emit(word, coefficient) for each term of the product u v.
void multiply_words(const BAlgebra& b, const Word& u, const Word& v,
                    const std::function<void(Word&&, const QComplex&)>& emit);

/// Calls emit(word, coefficient) for each term of w^*.
void adjoint_word(const GeneratorSystem& sys, const Word& w,
                  const std::function<void(Word&&, const QComplex&)>& emit);

/// All words with min_degree <= degree <= max_degree in graded order. With B
/// present every slot ranges over the basis.
std::vector<Word> enumerate_words(const GeneratorSystem& sys, int max_degree, int min_degree = 0);

void check_same_system(const SystemPtr& a, const SystemPtr& b);

// ---------------------------------------------------------------------------
// Polynomials

template <class S>
class BasicPoly {
 public:
  using Scalar = S;
  using Terms = std::map<Word, S>;

  explicit BasicPoly(SystemPtr sys) : sys_(std::move(sys)) {
    if (!sys_) throw StructuralError("polynomial needs a generator system");
  }

  static BasicPoly constant(SystemPtr sys, const S& c) {
    BasicPoly p(std::move(sys));
    for (const auto& [k, u] : p.sys_->b().unit()) {
      p.add_term(Word({}, {k}), c * scalar_from<S>(u));
    }
    return p;
  }

  static BasicPoly one(SystemPtr sys) { return constant(std::move(sys), S(1)); }

  /// t_i (zero-based) with unit slots on either side.
  static BasicPoly generator(SystemPtr sys, int i) {
    if (i < 0 || i >= sys->size()) throw StructuralError("generator index out of range");
    BasicPoly p(sys);
    for (const auto& [a, ua] : sys->b().unit()) {
      for (const auto& [b, ub] : sys->b().unit()) {
        p.add_term(Word({i}, {a, b}), scalar_from<S>(ua * ub));
      }
    }
    return p;
  }

  /// The B-basis element b_k as a degree-zero polynomial.
  static BasicPoly b_element(SystemPtr sys, int k) {
    if (k < 0 || k >= sys->b().dim()) throw StructuralError("B basis index out of range");
    BasicPoly p(std::move(sys));
    p.add_term(Word({}, {k}), S(1));
    return p;
  }

  static BasicPoly monomial(SystemPtr sys, const Word& w, const S& c = S(1)) {
    BasicPoly p(std::move(sys));
    p.add_term(w, c);
    return p;
  }

  const SystemPtr& system() const { return sys_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const { return terms_.empty() ? -1 : terms_.rbegin()->first.degree(); }

  void add_term(const Word& w, const S& c) {
    if (scalar_is_zero(c)) return;
    if (w.degree() > sys_->cap()) {
      throw DegreeCapError("word of degree " + std::to_string(w.degree()) +
                           " exceeds the degree cap " + std::to_string(sys_->cap()));
    }
    auto [it, inserted] = terms_.try_emplace(w, c);
    if (!inserted) {
      it->second += c;
      if (scalar_is_zero(it->second)) terms_.erase(it);
    }
  }

  S coefficient(const Word& w) const {
    auto it = terms_.find(w);
    return it == terms_.end() ? S(0) : it->second;
  }

  BasicPoly& operator+=(const BasicPoly& o) {
    check_same_system(sys_, o.sys_);
    for (const auto& [w, c] : o.terms_) add_term(w, c);
    return *this;
  }
  BasicPoly& operator-=(const BasicPoly& o) {
    check_same_system(sys_, o.sys_);
    for (const auto& [w, c] : o.terms_) add_term(w, -c);
    return *this;
  }
  BasicPoly& operator*=(const S& c) {
    if (scalar_is_zero(c)) {
      terms_.clear();
      return *this;
    }
    for (auto& [w, v] : terms_) v *= c;
    return *this;
  }

  friend BasicPoly operator+(BasicPoly a, const BasicPoly& b) { return a += b; }
  friend BasicPoly operator-(BasicPoly a, const BasicPoly& b) { return a -= b; }
  friend BasicPoly operator*(BasicPoly a, const S& c) { return a *= c; }
  friend BasicPoly operator*(const S& c, BasicPoly a) { return a *= c; }
  BasicPoly operator-() const { return BasicPoly(*this) *= S(-1); }

  friend BasicPoly operator*(const BasicPoly& p, const BasicPoly& q) {
    check_same_system(p.sys_, q.sys_);
    BasicPoly out(p.sys_);
    const BAlgebra& b = p.sys_->b();
    for (const auto& [u, cu] : p.terms_) {
      for (const auto& [v, cv] : q.terms_) {
        S c = cu * cv;
        multiply_words(b, u, v, [&](Word&& w, const QComplex& k) {
          out.add_term(w, c * scalar_from<S>(k));
        });
      }
    }
    return out;
  }

  friend bool operator==(const BasicPoly& a, const BasicPoly& b) {
    return a.sys_->compatible(*b.sys_) && a.terms_ == b.terms_;
  }

 private:
  SystemPtr sys_;
  Terms terms_;
};

// ---------------------------------------------------------------------------
// Tensors p ⊗ q° in B<T> ⊗ B<T>°

template <class S>
class BasicTensor {
 public:
  using Scalar = S;
  using Key = std::pair<Word, Word>;
  using Terms = std::map<Key, S>;

  explicit BasicTensor(SystemPtr sys) : sys_(std::move(sys)) {
    if (!sys_) throw StructuralError("tensor needs a generator system");
  }

  static BasicTensor elementary(const BasicPoly<S>& p, const BasicPoly<S>& q) {
    check_same_system(p.system(), q.system());
    BasicTensor t(p.system());
    for (const auto& [u, cu] : p.terms()) {
      for (const auto& [v, cv] : q.terms()) t.add_term(u, v, cu * cv);
    }
    return t;
  }

  static BasicTensor unit(SystemPtr sys) {
    auto one = BasicPoly<S>::one(sys);
    return elementary(one, one);
  }

  const SystemPtr& system() const { return sys_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  void add_term(const Word& left, const Word& right, const S& c) {
    if (scalar_is_zero(c)) return;
    if (left.degree() > sys_->cap() || right.degree() > sys_->cap()) {
      throw DegreeCapError("tensor leg exceeds the degree cap " + std::to_string(sys_->cap()));
    }
    auto [it, inserted] = terms_.try_emplace(Key{left, right}, c);
    if (!inserted) {
      it->second += c;
      if (scalar_is_zero(it->second)) terms_.erase(it);
    }
  }

  BasicTensor& operator+=(const BasicTensor& o) {
    check_same_system(sys_, o.sys_);
    for (const auto& [k, c] : o.terms_) add_term(k.first, k.second, c);
    return *this;
  }
  BasicTensor& operator-=(const BasicTensor& o) {
    check_same_system(sys_, o.sys_);
    for (const auto& [k, c] : o.terms_) add_term(k.first, k.second, -c);
    return *this;
  }
  BasicTensor& operator*=(const S& c) {
    if (scalar_is_zero(c)) {
      terms_.clear();
      return *this;
    }
    for (auto& [k, v] : terms_) v *= c;
    return *this;
  }

  friend BasicTensor operator+(BasicTensor a, const BasicTensor& b) { return a += b; }
  friend BasicTensor operator-(BasicTensor a, const BasicTensor& b) { return a -= b; }
  friend BasicTensor operator*(BasicTensor a, const S& c) { return a *= c; }
  friend BasicTensor operator*(const S& c, BasicTensor a) { return a *= c; }

  friend bool operator==(const BasicTensor& a, const BasicTensor& b) {
    return a.sys_->compatible(*b.sys_) && a.terms_ == b.terms_;
  }

 private:
  SystemPtr sys_;
  Terms terms_;
};

// ---------------------------------------------------------------------------
// n x n matrices of tensors: Stein kernels, the identity kernel, Jacobians

template <class S>
class BasicKernel {
 public:
  using Scalar = S;

  BasicKernel(SystemPtr sys, int n) : sys_(std::move(sys)), n_(n) {
    if (n < 0) throw StructuralError("negative kernel size");
    entries_.assign(static_cast<std::size_t>(n) * n, BasicTensor<S>(sys_));
  }

  static BasicKernel identity(SystemPtr sys, int n) {
    BasicKernel k(sys, n);
    for (int i = 0; i < n; ++i) k.at(i, i) = BasicTensor<S>::unit(sys);
    return k;
  }

  const SystemPtr& system() const { return sys_; }
  int size() const { return n_; }
  BasicTensor<S>& at(int i, int j) { return entries_[index(i, j)]; }
  const BasicTensor<S>& at(int i, int j) const { return entries_[index(i, j)]; }

  BasicKernel& operator+=(const BasicKernel& o) {
    check_shape(o);
    for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] += o.entries_[k];
    return *this;
  }
  BasicKernel& operator-=(const BasicKernel& o) {
    check_shape(o);
    for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] -= o.entries_[k];
    return *this;
  }
  BasicKernel& operator*=(const S& c) {
    for (auto& e : entries_) e *= c;
    return *this;
  }
  friend BasicKernel operator+(BasicKernel a, const BasicKernel& b) { return a += b; }
  friend BasicKernel operator-(BasicKernel a, const BasicKernel& b) { return a -= b; }
  friend BasicKernel operator*(BasicKernel a, const S& c) { return a *= c; }
  friend BasicKernel operator*(const S& c, BasicKernel a) { return a *= c; }

  friend bool operator==(const BasicKernel& a, const BasicKernel& b) {
    return a.n_ == b.n_ && a.sys_->compatible(*b.sys_) && a.entries_ == b.entries_;
  }

  void check_shape(const BasicKernel& o) const {
    check_same_system(sys_, o.sys_);
    if (o.n_ != n_) throw StructuralError("kernel size mismatch");
  }

 private:
  std::size_t index(int i, int j) const {
    if (i < 0 || j < 0 || i >= n_ || j >= n_) throw StructuralError("kernel index out of range");
    return static_cast<std::size_t>(i) * n_ + j;
  }

  SystemPtr sys_;
  int n_;
  std::vector<BasicTensor<S>> entries_;
};

template <class S>
using BasicPolyTuple = std::vector<BasicPoly<S>>;
template <class S>
using BasicTensorTuple = std::vector<BasicTensor<S>>;

using Poly = BasicPoly<QComplex>;
using Tensor = BasicTensor<QComplex>;
using KernelMatrix = BasicKernel<QComplex>;
using PolyTuple = BasicPolyTuple<QComplex>;
using TensorTuple = BasicTensorTuple<QComplex>;

using NumPoly = BasicPoly<std::complex<double>>;
using NumTensor = BasicTensor<std::complex<double>>;
using NumKernel = BasicKernel<std::complex<double>>;
using NumPolyTuple = BasicPolyTuple<std::complex<double>>;
using NumTensorTuple = BasicTensorTuple<std::complex<double>>;

// ---------------------------------------------------------------------------
// Operations

/// The generator tuple T = (t_1, ..., t_n).
PolyTuple generator_tuple(const SystemPtr& sys);

template <class S>
BasicPoly<S> adjoint(const BasicPoly<S>& p) {
  BasicPoly<S> out(p.system());
  for (const auto& [w, c] : p.terms()) {
    S cc = scalar_conj(c);
    adjoint_word(*p.system(), w, [&](Word&& v, const QComplex& k) {
      out.add_term(v, cc * scalar_from<S>(k));
    });
  }
  return out;
}

/// Adjoint in B<T> ⊗ B<T>°: (p ⊗ q)^* = p^* ⊗ q^*.
template <class S>
BasicTensor<S> adjoint(const BasicTensor<S>& t) {
  BasicTensor<S> out(t.system());
  const auto& sys = *t.system();
  for (const auto& [key, c] : t.terms()) {
    S cc = scalar_conj(c);
    adjoint_word(sys, key.first, [&](Word&& l, const QComplex& kl) {
      adjoint_word(sys, key.second, [&](Word&& r, const QComplex& kr) {
        out.add_term(l, r, cc * scalar_from<S>(kl * kr));
      });
    });
  }
  return out;
}

/// Conjugate transpose with entrywise tensor adjoint.
template <class S>
BasicKernel<S> adjoint(const BasicKernel<S>& k) {
  BasicKernel<S> out(k.system(), k.size());
  for (int i = 0; i < k.size(); ++i)
    for (int j = 0; j < k.size(); ++j) out.at(j, i) = adjoint(k.at(i, j));
  return out;
}

/// (a ⊗ b) # c = a c b.
template <class S>
BasicPoly<S> sharp(const BasicTensor<S>& t, const BasicPoly<S>& p) {
  check_same_system(t.system(), p.system());
  BasicPoly<S> out(p.system());
  const BAlgebra& b = p.system()->b();
  for (const auto& [key, ct] : t.terms()) {
    for (const auto& [w, cw] : p.terms()) {
      S c = ct * cw;
      multiply_words(b, key.first, w, [&](Word&& lw, const QComplex& k1) {
        multiply_words(b, lw, key.second, [&](Word&& full, const QComplex& k2) {
          out.add_term(full, c * scalar_from<S>(k1 * k2));
        });
      });
    }
  }
  return out;
}

/// (a ⊗ b) # (c ⊗ d) = (a c) ⊗ (d b).
template <class S>
BasicTensor<S> sharp(const BasicTensor<S>& x, const BasicTensor<S>& y) {
  check_same_system(x.system(), y.system());
  BasicTensor<S> out(x.system());
  const BAlgebra& b = x.system()->b();
  for (const auto& [kx, cx] : x.terms()) {
    for (const auto& [ky, cy] : y.terms()) {
      S c = cx * cy;
      multiply_words(b, kx.first, ky.first, [&](Word&& left, const QComplex& k1) {
        multiply_words(b, ky.second, kx.second, [&](Word&& right, const QComplex& k2) {
          out.add_term(left, right, c * scalar_from<S>(k1 * k2));
        });
      });
    }
  }
  return out;
}

/// Left bimodule action in B<T> ⊗ B<T>: p · (a ⊗ b) = (p a) ⊗ b.
template <class S>
BasicTensor<S> left_act(const BasicPoly<S>& p, const BasicTensor<S>& t) {
  check_same_system(p.system(), t.system());
  BasicTensor<S> out(t.system());
  const BAlgebra& b = t.system()->b();
  for (const auto& [w, cw] : p.terms()) {
    for (const auto& [key, ct] : t.terms()) {
      S c = cw * ct;
      multiply_words(b, w, key.first, [&](Word&& left, const QComplex& k) {
        out.add_term(left, key.second, c * scalar_from<S>(k));
      });
    }
  }
  return out;
}

/// Right bimodule action in B<T> ⊗ B<T>: (a ⊗ b) · q = a ⊗ (b q).
template <class S>
BasicTensor<S> right_act(const BasicTensor<S>& t, const BasicPoly<S>& q) {
  check_same_system(t.system(), q.system());
  BasicTensor<S> out(t.system());
  const BAlgebra& b = t.system()->b();
  for (const auto& [key, ct] : t.terms()) {
    for (const auto& [w, cw] : q.terms()) {
      S c = ct * cw;
      multiply_words(b, key.second, w, [&](Word&& right, const QComplex& k) {
        out.add_term(key.first, right, c * scalar_from<S>(k));
      });
    }
  }
  return out;
}

/// A # P for a kernel acting on a tuple: (A # P)_i = sum_j A_ij # p_j.
template <class S>
BasicPolyTuple<S> sharp(const BasicKernel<S>& a, const BasicPolyTuple<S>& p) {
  if (static_cast<int>(p.size()) != a.size()) throw StructuralError("tuple length mismatch");
  BasicPolyTuple<S> out(p.size(), BasicPoly<S>(a.system()));
  for (int i = 0; i < a.size(); ++i)
    for (int j = 0; j < a.size(); ++j) out[i] += sharp(a.at(i, j), p[j]);
  return out;
}

/// Matrix product with # on the entries.
template <class S>
BasicKernel<S> sharp(const BasicKernel<S>& a, const BasicKernel<S>& b) {
  a.check_shape(b);
  BasicKernel<S> out(a.system(), a.size());
  for (int i = 0; i < a.size(); ++i)
    for (int j = 0; j < a.size(); ++j)
      for (int k = 0; k < a.size(); ++k) out.at(i, j) += sharp(a.at(i, k), b.at(k, j));
  return out;
}

/// Free difference quotient ∂_i (zero-based i): splits each word at every
/// occurrence of t_i, keeping the adjacent B-slots on their own sides.
template <class S>
BasicTensor<S> diff_quotient(int i, const BasicPoly<S>& p) {
  const auto& sys = p.system();
  if (i < 0 || i >= sys->size()) throw StructuralError("difference quotient index out of range");
  BasicTensor<S> out(sys);
  for (const auto& [w, c] : p.terms()) {
    for (int k = 0; k < w.degree(); ++k) {
      if (w.letters[k] != i) continue;
      Word left(std::vector<int>(w.letters.begin(), w.letters.begin() + k),
                std::vector<int>(w.slots.begin(), w.slots.begin() + k + 1));
      Word right(std::vector<int>(w.letters.begin() + k + 1, w.letters.end()),
                 std::vector<int>(w.slots.begin() + k + 1, w.slots.end()));
      out.add_term(left, right, c);
    }
  }
  return out;
}

/// Jacobian: entry (i, j) = ∂_j p_i.
template <class S>
BasicKernel<S> jacobian(const BasicPolyTuple<S>& p) {
  if (p.empty()) throw StructuralError("jacobian of an empty tuple");
  const auto& sys = p.front().system();
  const int n = sys->size();
  if (static_cast<int>(p.size()) != n) throw StructuralError("jacobian needs a tuple of length n");
  BasicKernel<S> out(sys, n);
  for (int i = 0; i < n; ++i) {
    check_same_system(sys, p[i].system());
    for (int j = 0; j < n; ++j) out.at(i, j) = diff_quotient(j, p[i]);
  }
  return out;
}

/// Kernel [ 1/2 (ξ_i ⊗ 1 - 1 ⊗ ξ_i) # (x_j ⊗ 1 - 1 ⊗ x_j) ]_{ij}. It is a Stein
/// kernel relative to Ξ whenever Ξ is orthogonal to the scalars and B = C.
template <class S>
BasicKernel<S> mai_kernel(const BasicPolyTuple<S>& xi, const BasicPolyTuple<S>& x) {
  if (xi.size() != x.size() || xi.empty()) throw StructuralError("mai_kernel needs tuples of equal length");
  const auto& sys = x.front().system();
  const int n = static_cast<int>(x.size());
  auto one = BasicPoly<S>::one(sys);
  std::vector<BasicTensor<S>> dxi, dx;
  for (int i = 0; i < n; ++i) {
    dxi.push_back(BasicTensor<S>::elementary(xi[i], one) - BasicTensor<S>::elementary(one, xi[i]));
    dx.push_back(BasicTensor<S>::elementary(x[i], one) - BasicTensor<S>::elementary(one, x[i]));
  }
  BasicKernel<S> out(sys, n);
  const S half = S(1) / S(2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.at(i, j) = sharp(dxi[i], dx[j]) * half;
  return out;
}

/// a # J(F)^*: component k is sum_i a_i # (∂_i f_k)^*. Carries a kernel row for X
/// to a kernel row for Y = F(X).
template <class S>
BasicTensorTuple<S> transform_kernel(const BasicTensorTuple<S>& a, const BasicPolyTuple<S>& f) {
  if (a.empty()) throw StructuralError("transform_kernel needs a non-empty row");
  const auto& sys = a.front().system();
  if (static_cast<int>(a.size()) != sys->size()) throw StructuralError("row length must equal n");
  BasicTensorTuple<S> out;
  out.reserve(f.size());
  for (const auto& fk : f) {
    BasicTensor<S> acc(sys);
    for (int i = 0; i < sys->size(); ++i) acc += sharp(a[i], adjoint(diff_quotient(i, fk)));
    out.push_back(std::move(acc));
  }
  return out;
}

template <class S>
BasicPoly<std::complex<double>> to_numeric(const BasicPoly<S>& p) {
  BasicPoly<std::complex<double>> out(p.system());
  for (const auto& [w, c] : p.terms()) out.add_term(w, to_complex(c));
  return out;
}

template <class S>
BasicTensor<std::complex<double>> to_numeric(const BasicTensor<S>& t) {
  BasicTensor<std::complex<double>> out(t.system());
  for (const auto& [k, c] : t.terms()) out.add_term(k.first, k.second, to_complex(c));
  return out;
}

template <class S>
BasicKernel<std::complex<double>> to_numeric(const BasicKernel<S>& k) {
  BasicKernel<std::complex<double>> out(k.system(), k.size());
  for (int i = 0; i < k.size(); ++i)
    for (int j = 0; j < k.size(); ++j) out.at(i, j) = to_numeric(k.at(i, j));
  return out;
}

/// Human-readable rendering, e.g. "1/2 t1 t2 + b1 t1".
std::string to_string(const Poly& p);
std::string to_string(const Tensor& t);
std::string word_string(const GeneratorSystem& sys, const Word& w);

}  // namespace freestein
