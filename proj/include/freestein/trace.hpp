#pragma once

// Tracial states evaluated on words, and the L², tensor-L² and Hilbert–Schmidt
// inner products they induce on polynomials, tensors and kernel matrices.

#include <complex>
#include <functional>
#include <memory>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "freestein/ncalg.hpp"
#include "freestein/quadrature.hpp"

namespace freestein {

using cplx = std::complex<double>;

/// Degree cap from FREE_STEIN_CAP, else kDefaultDegreeCap.
int default_degree_cap();

/// Base class: memoized evaluation of τ on canonical words. Traces are accepted
/// up to twice the symbolic degree cap, since inner products multiply two
/// capped words.
class TraceModel {
 public:
  explicit TraceModel(SystemPtr sys) : sys_(std::move(sys)) {}
  virtual ~TraceModel() = default;
  TraceModel(const TraceModel&) = delete;
  TraceModel& operator=(const TraceModel&) = delete;

  const SystemPtr& system() const { return sys_; }
  int size() const { return sys_->size(); }
  virtual std::string kind() const = 0;

  /// τ(w); throws DegreeCapError beyond 2·cap and std::out_of_range on
  /// unknown letters or B indices.
  cplx trace(const Word& w) const;

  std::size_t cache_size() const;

 protected:
  virtual cplx compute(const Word& w) const = 0;

 private:
  SystemPtr sys_;
  mutable std::shared_mutex mu_;
  mutable std::unordered_map<Word, cplx, WordHash> cache_;
};

using ModelPtr = std::shared_ptr<const TraceModel>;

// ---------------------------------------------------------------------------

struct MatrixBlock {
  int k = 1;            // matrix size
  double weight = 1.0;  // λ
};

/// ⊕_b (M_{k_b}(C), λ_b tr_{k_b}) with generator matrices per block and an
/// optional finite-dimensional unital *-subalgebra B given by a basis.
class MatrixModel : public TraceModel {
 public:
  /// generators[i][b] is generator i in block b; b_basis[k][b] likewise.
  MatrixModel(std::vector<MatrixBlock> blocks, std::vector<std::vector<Eigen::MatrixXcd>> generators,
              std::vector<int> star = {}, std::vector<std::vector<Eigen::MatrixXcd>> b_basis = {},
              int cap = default_degree_cap());

  std::string kind() const override { return "matrix"; }
  const std::vector<MatrixBlock>& blocks() const { return blocks_; }
  int block_count() const { return static_cast<int>(blocks_.size()); }
  const Eigen::MatrixXcd& generator(int i, int b) const { return generators_[i][b]; }
  const Eigen::MatrixXcd& b_matrix(int k, int b) const { return b_basis_[k][b]; }
  bool has_b() const { return system()->has_b(); }
  /// Total dimension Σ k_b² of the ambient algebra.
  int ambient_dimension() const;

  /// Block matrices of a word / polynomial.
  std::vector<Eigen::MatrixXcd> evaluate(const Word& w) const;
  template <class S>
  std::vector<Eigen::MatrixXcd> evaluate(const BasicPoly<S>& p) const {
    std::vector<Eigen::MatrixXcd> out;
    for (const auto& blk : blocks_) out.push_back(Eigen::MatrixXcd::Zero(blk.k, blk.k));
    for (const auto& [w, c] : p.terms()) {
      auto m = evaluate(w);
      for (std::size_t b = 0; b < out.size(); ++b) out[b] += to_complex(c) * m[b];
    }
    return out;
  }

  /// Weighted normalized trace of block matrices.
  cplx trace_blocks(const std::vector<Eigen::MatrixXcd>& m) const;

 protected:
  cplx compute(const Word& w) const override;

 private:
  std::vector<MatrixBlock> blocks_;
  std::vector<std::vector<Eigen::MatrixXcd>> generators_;
  std::vector<std::vector<Eigen::MatrixXcd>> b_basis_;
};

/// n free standard semicircular elements; τ counts index-respecting
/// non-crossing pairings.
class SemicircularModel : public TraceModel {
 public:
  explicit SemicircularModel(int n, int cap = default_degree_cap());
  std::string kind() const override { return "semicircular"; }

 protected:
  cplx compute(const Word& w) const override;
};

/// Continuous part of a one-variable measure.
struct Density {
  enum class Kind { none, semicircle, uniform, table };
  Kind kind = Kind::none;
  double mass = 0.0;  // total continuous mass
  double center = 0.0, radius = 2.0;
  double a = 0.0, b = 1.0;
  std::vector<double> x, values;  // piecewise-linear density table (absolute values)

  double lo() const;
  double hi() const;
  /// Density (including its mass) at t.
  double pdf(double t) const;
  /// ∫ f dρ over the continuous part, split at the given breakpoints. With
  /// adaptive = false a composite rule is refined by doubling (smooth f).
  QuadResult integrate(const std::function<double(double)>& f, double tol = 1e-12,
                       std::vector<double> breakpoints = {}, bool adaptive = false) const;
  std::string name() const;
};

struct Atom {
  double location = 0.0;
  double mass = 0.0;
};

/// Self-adjoint single generator with law Σ atoms + density.
class MeasureModel : public TraceModel {
 public:
  MeasureModel(std::vector<Atom> atoms, Density density, int cap = default_degree_cap());
  std::string kind() const override { return "measure"; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const Density& density() const { return density_; }
  double moment(int k) const;

 protected:
  cplx compute(const Word& w) const override;

 private:
  std::vector<Atom> atoms_;
  Density density_;
};

/// Free product of factor models; generators are concatenated. Traces are
/// computed by the centering recursion for alternating products.
class FreeProductModel : public TraceModel {
 public:
  explicit FreeProductModel(std::vector<ModelPtr> factors, int cap = default_degree_cap());
  std::string kind() const override { return "free_product"; }
  const std::vector<ModelPtr>& factors() const { return factors_; }
  /// (factor, local index) of a global generator.
  std::pair<int, int> locate(int letter) const { return owner_[letter]; }
  int offset(int factor) const { return offsets_[factor]; }

 protected:
  cplx compute(const Word& w) const override;

 private:
  std::vector<ModelPtr> factors_;
  std::vector<int> offsets_;
  std::vector<std::pair<int, int>> owner_;
};

cplx free_product_trace(const FreeProductModel& m, const Word& w);

// ---------------------------------------------------------------------------
// Induced inner products

/// τ(c^* a) for words c, a (B slots expanded through the involution).
cplx trace_star_product(const TraceModel& m, const Word& c, const Word& a);

template <class S>
cplx trace_poly(const TraceModel& m, const BasicPoly<S>& p) {
  cplx acc = 0.0;
  for (const auto& [w, c] : p.terms()) acc += to_complex(c) * m.trace(w);
  return acc;
}

/// ⟨p, q⟩ = τ(q^* p).
template <class S>
cplx inner_l2(const TraceModel& m, const BasicPoly<S>& p, const BasicPoly<S>& q) {
  cplx acc = 0.0;
  for (const auto& [v, cv] : q.terms()) {
    const cplx cq = std::conj(to_complex(cv));
    for (const auto& [u, cu] : p.terms()) acc += cq * to_complex(cu) * trace_star_product(m, v, u);
  }
  return acc;
}

/// ⟨a ⊗ b, c ⊗ d⟩ = τ(c^* a) τ(b d^*), extended sesquilinearly.
template <class S>
cplx inner_tensor(const TraceModel& m, const BasicTensor<S>& x, const BasicTensor<S>& y) {
  cplx acc = 0.0;
  for (const auto& [ky, cy] : y.terms()) {
    const cplx c2 = std::conj(to_complex(cy));
    for (const auto& [kx, cx] : x.terms()) {
      const cplx left = trace_star_product(m, ky.first, kx.first);
      if (left == cplx{}) continue;
      // τ(b d^*) = τ(d^* b) by traciality.
      const cplx right = trace_star_product(m, ky.second, kx.second);
      acc += c2 * to_complex(cx) * left * right;
    }
  }
  return acc;
}

/// ⟨A, B⟩_HS = Σ_{jk} ⟨A_jk, B_jk⟩.
template <class S>
cplx inner_hs(const TraceModel& m, const BasicKernel<S>& a, const BasicKernel<S>& b) {
  a.check_shape(b);
  cplx acc = 0.0;
  for (int i = 0; i < a.size(); ++i)
    for (int j = 0; j < a.size(); ++j) acc += inner_tensor(m, a.at(i, j), b.at(i, j));
  return acc;
}

}  // namespace freestein
