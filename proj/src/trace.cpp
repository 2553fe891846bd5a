#include "freestein/trace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace freestein {

int default_degree_cap() {
  if (const char* env = std::getenv("FREE_STEIN_CAP")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v < 64) return static_cast<int>(v);
  }
  return kDefaultDegreeCap;
}

cplx TraceModel::trace(const Word& w) const {
  if (w.degree() > 2 * sys_->cap()) {
    throw DegreeCapError("trace of a word of degree " + std::to_string(w.degree()) +
                         " exceeds twice the degree cap " + std::to_string(sys_->cap()));
  }
  for (int l : w.letters) {
    if (l < 0 || l >= sys_->size()) throw std::out_of_range("unknown letter t" + std::to_string(l + 1));
  }
  for (int s : w.slots) {
    if (s < 0 || s >= sys_->b().dim()) throw std::out_of_range("unknown B letter b" + std::to_string(s));
  }
  {
    std::shared_lock lock(mu_);
    auto it = cache_.find(w);
    if (it != cache_.end()) return it->second;
  }
  const cplx value = compute(w);
  std::unique_lock lock(mu_);
  cache_.emplace(w, value);
  return value;
}

std::size_t TraceModel::cache_size() const {
  std::shared_lock lock(mu_);
  return cache_.size();
}

cplx trace_star_product(const TraceModel& m, const Word& c, const Word& a) {
  const GeneratorSystem& sys = *m.system();
  if (!sys.has_b()) {
    std::vector<int> letters;
    letters.reserve(c.letters.size() + a.letters.size());
    for (auto it = c.letters.rbegin(); it != c.letters.rend(); ++it) letters.push_back(sys.star(*it));
    letters.insert(letters.end(), a.letters.begin(), a.letters.end());
    return m.trace(Word::of_letters(std::move(letters)));
  }
  cplx acc = 0.0;
  adjoint_word(sys, c, [&](Word&& cs, const QComplex& k1) {
    multiply_words(sys.b(), cs, a, [&](Word&& w, const QComplex& k2) {
      acc += (k1 * k2).to_complex() * m.trace(w);
    });
  });
  return acc;
}

// ---------------------------------------------------------------------------
// Matrix models

namespace {

Eigen::VectorXcd vectorize(const std::vector<Eigen::MatrixXcd>& blocks) {
  Eigen::Index total = 0;
  for (const auto& b : blocks) total += b.size();
  Eigen::VectorXcd v(total);
  Eigen::Index pos = 0;
  for (const auto& b : blocks) {
    v.segment(pos, b.size()) = Eigen::Map<const Eigen::VectorXcd>(b.data(), b.size());
    pos += b.size();
  }
  return v;
}

std::vector<Eigen::MatrixXcd> blockwise_product(const std::vector<Eigen::MatrixXcd>& x,
                                                const std::vector<Eigen::MatrixXcd>& y) {
  std::vector<Eigen::MatrixXcd> out(x.size());
  for (std::size_t b = 0; b < x.size(); ++b) out[b] = x[b] * y[b];
  return out;
}

std::vector<Eigen::MatrixXcd> blockwise_adjoint(const std::vector<Eigen::MatrixXcd>& x) {
  std::vector<Eigen::MatrixXcd> out(x.size());
  for (std::size_t b = 0; b < x.size(); ++b) out[b] = x[b].adjoint();
  return out;
}

// Expresses target in the basis with exact rational coefficients.
BCombination fit_combination(const Eigen::MatrixXcd& basis,
                             const Eigen::ColPivHouseholderQR<Eigen::MatrixXcd>& qr,
                             const Eigen::VectorXcd& target, const std::string& what) {
  Eigen::VectorXcd c = qr.solve(target);
  const double scale = 1.0 + target.norm();
  if ((basis * c - target).norm() > 1e-9 * scale) {
    throw std::invalid_argument("B basis is not closed under " + what);
  }
  BCombination out;
  Eigen::VectorXcd exact(c.size());
  for (Eigen::Index k = 0; k < c.size(); ++k) {
    mpq_class re = rationalize(c[k].real());
    mpq_class im = rationalize(c[k].imag());
    exact[k] = cplx(re.get_d(), im.get_d());
    if (sgn(re) != 0 || sgn(im) != 0) out.emplace_back(static_cast<int>(k), QComplex(re, im));
  }
  if ((basis * exact - target).norm() > 1e-9 * scale) {
    throw std::invalid_argument("B structure constants for " + what + " are not small rationals");
  }
  return out;
}

SystemPtr matrix_system(const std::vector<MatrixBlock>& blocks,
                        const std::vector<std::vector<Eigen::MatrixXcd>>& generators,
                        const std::vector<int>& star,
                        const std::vector<std::vector<Eigen::MatrixXcd>>& b_basis, int cap) {
  if (blocks.empty()) throw std::invalid_argument("matrix model needs at least one block");
  double total = 0.0;
  for (const auto& blk : blocks) {
    if (blk.k < 1) throw std::invalid_argument("block size must be positive");
    if (!(blk.weight > 0.0)) throw std::invalid_argument("block weights must be positive");
    total += blk.weight;
  }
  if (std::fabs(total - 1.0) > 1e-12) throw std::invalid_argument("block weights must sum to 1");
  if (generators.empty()) throw std::invalid_argument("matrix model needs at least one generator");
  auto check_shapes = [&](const std::vector<std::vector<Eigen::MatrixXcd>>& family, const std::string& what) {
    for (const auto& g : family) {
      if (g.size() != blocks.size()) throw std::invalid_argument(what + " needs one matrix per block");
      for (std::size_t b = 0; b < blocks.size(); ++b) {
        if (g[b].rows() != blocks[b].k || g[b].cols() != blocks[b].k) {
          throw std::invalid_argument(what + " matrix has the wrong shape for block " + std::to_string(b));
        }
      }
    }
  };
  check_shapes(generators, "generator");
  check_shapes(b_basis, "B element");

  const int n = static_cast<int>(generators.size());
  std::vector<int> pairing = star;
  if (pairing.empty()) {
    pairing.resize(n);
    for (int i = 0; i < n; ++i) pairing[i] = i;
  }
  if (static_cast<int>(pairing.size()) != n) throw std::invalid_argument("star pairing has wrong length");
  for (int i = 0; i < n; ++i) {
    if (pairing[i] < 0 || pairing[i] >= n) throw std::invalid_argument("star pairing out of range");
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const auto& g = generators[i][b];
      if ((g.adjoint() - generators[pairing[i]][b]).norm() > 1e-10 * (1.0 + g.norm())) {
        throw std::invalid_argument("generator " + std::to_string(i + 1) +
                                    " does not respect the star pairing");
      }
    }
  }

  std::shared_ptr<const BAlgebra> balg;
  if (!b_basis.empty()) {
    const int dim = static_cast<int>(b_basis.size());
    const Eigen::Index total_dim = vectorize(b_basis[0]).size();
    Eigen::MatrixXcd basis(total_dim, dim);
    for (int k = 0; k < dim; ++k) basis.col(k) = vectorize(b_basis[k]);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(basis);
    qr.setThreshold(1e-10);
    if (qr.rank() != dim) throw std::invalid_argument("B basis elements are linearly dependent");
    std::vector<BCombination> products(static_cast<std::size_t>(dim) * dim), involution(dim);
    for (int a = 0; a < dim; ++a) {
      involution[a] = fit_combination(basis, qr, vectorize(blockwise_adjoint(b_basis[a])), "adjoints");
      for (int c = 0; c < dim; ++c) {
        products[a * dim + c] =
            fit_combination(basis, qr, vectorize(blockwise_product(b_basis[a], b_basis[c])), "products");
      }
    }
    std::vector<Eigen::MatrixXcd> identity;
    for (const auto& blk : blocks) identity.push_back(Eigen::MatrixXcd::Identity(blk.k, blk.k));
    BCombination unit = fit_combination(basis, qr, vectorize(identity), "the identity");
    auto algebra = std::make_shared<const BAlgebra>(dim, products, involution, unit);
    algebra->validate();
    balg = algebra;
  }
  return make_system(n, pairing, balg, cap);
}

}  // namespace

MatrixModel::MatrixModel(std::vector<MatrixBlock> blocks,
                         std::vector<std::vector<Eigen::MatrixXcd>> generators, std::vector<int> star,
                         std::vector<std::vector<Eigen::MatrixXcd>> b_basis, int cap)
    : TraceModel(matrix_system(blocks, generators, star, b_basis, cap)),
      blocks_(std::move(blocks)),
      generators_(std::move(generators)),
      b_basis_(std::move(b_basis)) {
  if (b_basis_.empty()) {
    std::vector<Eigen::MatrixXcd> identity;
    for (const auto& blk : blocks_) identity.push_back(Eigen::MatrixXcd::Identity(blk.k, blk.k));
    b_basis_.push_back(std::move(identity));
  }
}

int MatrixModel::ambient_dimension() const {
  int d = 0;
  for (const auto& blk : blocks_) d += blk.k * blk.k;
  return d;
}

std::vector<Eigen::MatrixXcd> MatrixModel::evaluate(const Word& w) const {
  std::vector<Eigen::MatrixXcd> out;
  out.reserve(blocks_.size());
  const bool with_b = has_b();
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    Eigen::MatrixXcd m = with_b ? b_basis_[w.slots[0]][b]
                                : Eigen::MatrixXcd::Identity(blocks_[b].k, blocks_[b].k);
    for (int k = 0; k < w.degree(); ++k) {
      m = m * generators_[w.letters[k]][b];
      if (with_b) m = m * b_basis_[w.slots[k + 1]][b];
    }
    out.push_back(std::move(m));
  }
  return out;
}

cplx MatrixModel::trace_blocks(const std::vector<Eigen::MatrixXcd>& m) const {
  cplx acc = 0.0;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    acc += blocks_[b].weight * m[b].trace() / static_cast<double>(blocks_[b].k);
  }
  return acc;
}

cplx MatrixModel::compute(const Word& w) const { return trace_blocks(evaluate(w)); }

// ---------------------------------------------------------------------------
// Semicircular family

SemicircularModel::SemicircularModel(int n, int cap) : TraceModel(make_system(n, {}, nullptr, cap)) {}

cplx SemicircularModel::compute(const Word& w) const {
  const int d = w.degree();
  if (d == 0) return 1.0;
  if (d % 2 == 1) return 0.0;
  // The first letter is paired with a same-index letter at odd distance; a
  // non-crossing pairing then splits into the inside and outside parts.
  cplx acc = 0.0;
  const int first = w.letters[0];
  for (int j = 1; j < d; j += 2) {
    if (w.letters[j] != first) continue;
    Word inside = Word::of_letters(std::vector<int>(w.letters.begin() + 1, w.letters.begin() + j));
    Word outside = Word::of_letters(std::vector<int>(w.letters.begin() + j + 1, w.letters.end()));
    const cplx in = trace(inside);
    if (in == cplx{}) continue;
    acc += in * trace(outside);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// One-variable measures

double Density::lo() const {
  switch (kind) {
    case Kind::semicircle: return center - radius;
    case Kind::uniform: return a;
    case Kind::table: return x.empty() ? 0.0 : x.front();
    case Kind::none: break;
  }
  return 0.0;
}

double Density::hi() const {
  switch (kind) {
    case Kind::semicircle: return center + radius;
    case Kind::uniform: return b;
    case Kind::table: return x.empty() ? 0.0 : x.back();
    case Kind::none: break;
  }
  return 0.0;
}

double Density::pdf(double t) const {
  switch (kind) {
    case Kind::semicircle: {
      const double u = t - center;
      if (std::fabs(u) >= radius) return 0.0;
      return mass * 2.0 / (std::numbers::pi * radius * radius) * std::sqrt(radius * radius - u * u);
    }
    case Kind::uniform:
      return (t < a || t > b) ? 0.0 : mass / (b - a);
    case Kind::table: {
      if (x.empty() || t < x.front() || t > x.back()) return 0.0;
      auto it = std::upper_bound(x.begin(), x.end(), t);
      if (it == x.end()) return values.back();
      const std::size_t i = static_cast<std::size_t>(it - x.begin());
      const double s = (t - x[i - 1]) / (x[i] - x[i - 1]);
      return (1.0 - s) * values[i - 1] + s * values[i];
    }
    case Kind::none: break;
  }
  return 0.0;
}

std::string Density::name() const {
  switch (kind) {
    case Kind::semicircle: return "semicircle";
    case Kind::uniform: return "uniform";
    case Kind::table: return "table";
    case Kind::none: break;
  }
  return "none";
}

namespace {

void accumulate(QuadResult& total, const QuadResult& part) {
  total.value += part.value;
  total.error += part.error;
  total.panels += part.panels;
  total.converged = total.converged && part.converged;
}

// Integrates g over [lo, hi] split at the breakpoints that fall inside.
QuadResult integrate_split(const std::function<double(double)>& g, double lo, double hi,
                           std::vector<double> cuts, double tol, bool adaptive) {
  QuadResult total;
  total.converged = true;
  std::vector<double> pts{lo};
  std::sort(cuts.begin(), cuts.end());
  for (double c : cuts)
    if (c > lo && c < hi) pts.push_back(c);
  pts.push_back(hi);
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    accumulate(total, adaptive ? integrate_adaptive(g, pts[k], pts[k + 1], tol)
                               : integrate_composite(g, pts[k], pts[k + 1], tol));
  }
  return total;
}

}  // namespace

QuadResult Density::integrate(const std::function<double(double)>& f, double tol,
                              std::vector<double> breakpoints, bool adaptive) const {
  QuadResult none;
  none.converged = true;
  if (mass == 0.0) return none;
  switch (kind) {
    case Kind::semicircle: {
      // t = c + r cos θ turns the density into (2/π) sin²θ dθ on [0, π].
      std::vector<double> cuts;
      for (double t : breakpoints) {
        const double u = (t - center) / radius;
        if (u > -1.0 && u < 1.0) cuts.push_back(std::acos(u));
      }
      const double w = mass * 2.0 / std::numbers::pi;
      auto g = [&](double th) {
        const double s = std::sin(th);
        return f(center + radius * std::cos(th)) * w * s * s;
      };
      return integrate_split(g, 0.0, std::numbers::pi, cuts, tol, adaptive);
    }
    case Kind::uniform: {
      const double w = mass / (b - a);
      return integrate_split([&](double t) { return w * f(t); }, a, b, breakpoints, tol, adaptive);
    }
    case Kind::table: {
      std::vector<double> cuts = breakpoints;
      cuts.insert(cuts.end(), x.begin(), x.end());
      return integrate_split([&](double t) { return pdf(t) * f(t); }, x.front(), x.back(), cuts, tol,
                             adaptive);
    }
    case Kind::none: break;
  }
  return none;
}

namespace {

SystemPtr measure_system(std::vector<Atom>& atoms, Density& density, int cap) {
  double total = 0.0;
  for (const auto& a : atoms) {
    if (!(a.mass > 0.0)) throw std::invalid_argument("atom masses must be positive");
    if (!std::isfinite(a.location)) throw std::invalid_argument("atom locations must be finite");
    total += a.mass;
  }
  switch (density.kind) {
    case Density::Kind::semicircle:
      if (!(density.radius > 0.0)) throw std::invalid_argument("density.radius must be positive");
      break;
    case Density::Kind::uniform:
      if (!(density.b > density.a)) throw std::invalid_argument("density.b must exceed density.a");
      break;
    case Density::Kind::table: {
      if (density.x.size() < 2 || density.x.size() != density.values.size()) {
        throw std::invalid_argument("density table needs matching x and density arrays of length >= 2");
      }
      double integral = 0.0;
      for (std::size_t i = 0; i + 1 < density.x.size(); ++i) {
        if (!(density.x[i + 1] > density.x[i])) throw std::invalid_argument("density.x must increase");
        integral += 0.5 * (density.values[i] + density.values[i + 1]) * (density.x[i + 1] - density.x[i]);
      }
      for (double v : density.values)
        if (v < 0.0) throw std::invalid_argument("density values must be nonnegative");
      density.mass = integral;
      break;
    }
    case Density::Kind::none:
      density.mass = 0.0;
      break;
  }
  if (density.mass < 0.0) throw std::invalid_argument("density.mass must be nonnegative");
  total += density.mass;
  if (std::fabs(total - 1.0) > 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "measure masses sum to " << total << ", not 1";
    throw std::invalid_argument(os.str());
  }
  std::sort(atoms.begin(), atoms.end(), [](const Atom& x, const Atom& y) { return x.location < y.location; });
  return make_system(1, {}, nullptr, cap);
}

}  // namespace

MeasureModel::MeasureModel(std::vector<Atom> atoms, Density density, int cap)
    : TraceModel(measure_system(atoms, density, cap)), atoms_(std::move(atoms)), density_(std::move(density)) {}

double MeasureModel::moment(int k) const {
  double acc = 0.0;
  for (const auto& a : atoms_) acc += a.mass * std::pow(a.location, k);
  if (density_.kind != Density::Kind::none) {
    auto r = density_.integrate([k](double t) { return std::pow(t, k); });
    if (!r.converged) throw std::runtime_error("moment quadrature did not converge");
    acc += r.value;
  }
  return acc;
}

cplx MeasureModel::compute(const Word& w) const { return moment(w.degree()); }

// ---------------------------------------------------------------------------
// Free products

namespace {

SystemPtr free_product_system(const std::vector<ModelPtr>& factors, int cap) {
  if (factors.empty()) throw std::invalid_argument("free product needs at least one factor");
  std::vector<int> star;
  int offset = 0;
  for (const auto& f : factors) {
    if (!f) throw std::invalid_argument("free product factor is null");
    if (f->system()->has_b()) throw std::invalid_argument("free product factors must have B = C");
    for (int i = 0; i < f->size(); ++i) star.push_back(offset + f->system()->star(i));
    offset += f->size();
  }
  return make_system(offset, star, nullptr, cap);
}

}  // namespace

FreeProductModel::FreeProductModel(std::vector<ModelPtr> factors, int cap)
    : TraceModel(free_product_system(factors, cap)), factors_(std::move(factors)) {
  int offset = 0;
  for (std::size_t f = 0; f < factors_.size(); ++f) {
    offsets_.push_back(offset);
    for (int i = 0; i < factors_[f]->size(); ++i) owner_.emplace_back(static_cast<int>(f), i);
    offset += factors_[f]->size();
  }
}

cplx FreeProductModel::compute(const Word& w) const {
  if (w.degree() == 0) return 1.0;
  // Maximal runs of letters from one factor.
  struct Run {
    int factor;
    std::vector<int> global;
  };
  std::vector<Run> runs;
  for (int l : w.letters) {
    const int f = owner_[l].first;
    if (runs.empty() || runs.back().factor != f) runs.push_back({f, {}});
    runs.back().global.push_back(l);
  }
  // Traciality: rotate the last run onto the first when they share a factor.
  if (runs.size() >= 2 && runs.front().factor == runs.back().factor) {
    Run last = std::move(runs.back());
    runs.pop_back();
    last.global.insert(last.global.end(), runs.front().global.begin(), runs.front().global.end());
    runs.front() = std::move(last);
  }
  auto local_trace = [&](const Run& r) {
    std::vector<int> local;
    for (int l : r.global) local.push_back(owner_[l].second);
    return factors_[r.factor]->trace(Word::of_letters(std::move(local)));
  };
  if (runs.size() == 1) return local_trace(runs.front());

  // For cyclically alternating runs W_1..W_m, τ(Π (W_j − τ(W_j))) = 0, hence
  // τ(W_1⋯W_m) = −Σ_{S ⊊ [m]} (−1)^{m−|S|} Π_{j∉S} τ(W_j) · τ(Π_{j∈S} W_j).
  const int m = static_cast<int>(runs.size());
  std::vector<cplx> tr(m);
  for (int j = 0; j < m; ++j) tr[j] = local_trace(runs[j]);
  cplx acc = 0.0;
  const unsigned full = (1u << m) - 1;
  for (unsigned s = 0; s < full; ++s) {
    cplx coeff = 1.0;
    std::vector<int> letters;
    int kept = 0;
    for (int j = 0; j < m; ++j) {
      if (s & (1u << j)) {
        letters.insert(letters.end(), runs[j].global.begin(), runs[j].global.end());
        ++kept;
      } else {
        coeff *= tr[j];
      }
    }
    if (coeff == cplx{}) continue;
    const double sign = ((m - kept) % 2 == 0) ? 1.0 : -1.0;
    acc -= sign * coeff * trace(Word::of_letters(std::move(letters)));
  }
  return acc;
}

cplx free_product_trace(const FreeProductModel& m, const Word& w) { return m.trace(w); }

}  // namespace freestein
