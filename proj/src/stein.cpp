#include "freestein/stein.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "parallel.hpp"

namespace freestein {

using detail::parallel_for;

void DegreeScheme::validate(const GeneratorSystem& sys) const {
  if (d_xi < 1) throw std::invalid_argument("d_xi must be at least 1");
  if (d_proj < 1) throw std::invalid_argument("d_proj must be at least 1");
  if (d_xi > sys.cap() || d_proj > sys.cap()) {
    throw DegreeCapError("degree scheme exceeds the degree cap " + std::to_string(sys.cap()));
  }
}

std::string mode_name(SigmaReport::Mode mode) {
  return mode == SigmaReport::Mode::exact_fd ? "exact_fd" : "estimate";
}

// ---------------------------------------------------------------------------
// Gram systems

Eigen::MatrixXcd GramSystem::whitening() const {
  Eigen::MatrixXcd w = eigenvectors.adjoint();
  for (Eigen::Index k = 0; k < w.rows(); ++k) w.row(k) /= std::sqrt(eigenvalues[k]);
  return w;
}

Eigen::VectorXcd GramSystem::solve(const Eigen::VectorXcd& r) const {
  Eigen::VectorXcd c = eigenvectors.adjoint() * r;
  for (Eigen::Index k = 0; k < c.size(); ++k) c[k] /= eigenvalues[k];
  return eigenvectors * c;
}

double GramSystem::projected_norm2(const Eigen::VectorXcd& r) const {
  return std::max(0.0, (whitening() * r).squaredNorm());
}

namespace {

struct Spectrum {
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;
  double lambda_max = 0.0;
  double condition = 1.0;
};

// Eigen-decomposition of a Hermitian matrix keeping eigenvalues above
// cutoff · λ_max.
Spectrum kept_spectrum(const Eigen::MatrixXcd& g, double cutoff) {
  Spectrum s;
  if (g.rows() == 0) {
    s.vectors.resize(0, 0);
    return s;
  }
  Eigen::MatrixXcd h = 0.5 * (g + g.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  const Eigen::VectorXd& ev = es.eigenvalues();
  s.lambda_max = std::max(0.0, ev.maxCoeff());
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < ev.size(); ++k)
    if (s.lambda_max > 0.0 && ev[k] > cutoff * s.lambda_max) keep.push_back(k);
  s.values.resize(static_cast<Eigen::Index>(keep.size()));
  s.vectors.resize(g.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    s.values[static_cast<Eigen::Index>(i)] = ev[keep[i]];
    s.vectors.col(static_cast<Eigen::Index>(i)) = es.eigenvectors().col(keep[i]);
  }
  if (!keep.empty()) s.condition = s.lambda_max / s.values.minCoeff();
  return s;
}

// Numeric free difference quotients ∂_j w of a list of words.
struct WordCalculus {
  std::vector<Word> words;
  std::vector<std::vector<NumTensor>> dq;  // dq[a][j]
};

WordCalculus word_calculus(const SystemPtr& sys, int min_degree, int max_degree) {
  WordCalculus c;
  c.words = enumerate_words(*sys, max_degree, min_degree);
  for (const auto& w : c.words) {
    const Poly p = Poly::monomial(sys, w);
    std::vector<NumTensor> row;
    for (int j = 0; j < sys->size(); ++j) row.push_back(to_numeric(diff_quotient(j, p)));
    c.dq.push_back(std::move(row));
  }
  return c;
}

// ⟨row, ∂w⟩ = Σ_j ⟨row_j, ∂_j w⟩.
cplx row_inner(const TraceModel& m, const std::vector<const NumTensor*>& row, const std::vector<NumTensor>& dq) {
  cplx acc = 0.0;
  for (std::size_t j = 0; j < dq.size(); ++j) acc += inner_tensor(m, *row[j], dq[j]);
  return acc;
}

// Word-level Gram G_ab = Σ_j ⟨∂_j w_b, ∂_j w_a⟩.
Eigen::MatrixXcd word_gram(const TraceModel& m, const WordCalculus& c, int threads) {
  const int w = static_cast<int>(c.words.size());
  Eigen::MatrixXcd g(w, w);
  parallel_for(w, threads, [&](int a) {
    for (int b = a; b < w; ++b) {
      cplx acc = 0.0;
      for (std::size_t j = 0; j < c.dq[a].size(); ++j) acc += inner_tensor(m, c.dq[b][j], c.dq[a][j]);
      g(a, b) = acc;
    }
  });
  for (int a = 0; a < w; ++a)
    for (int b = 0; b < a; ++b) g(a, b) = std::conj(g(b, a));
  return g;
}

Eigen::MatrixXcd block_diagonal(const Eigen::MatrixXcd& block, int copies) {
  const Eigen::Index b = block.rows();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(b * copies, block.cols() * copies);
  for (int s = 0; s < copies; ++s) out.block(s * b, s * block.cols(), b, block.cols()) = block;
  return out;
}

GramSystem gram_from(const std::vector<TestFunction>& basis, Eigen::MatrixXcd gram, double cutoff) {
  GramSystem g;
  g.basis = basis;
  g.gram = std::move(gram);
  Spectrum s = kept_spectrum(g.gram, cutoff);
  g.eigenvalues = s.values;
  g.eigenvectors = s.vectors;
  g.lambda_max = s.lambda_max;
  g.condition = s.condition;
  g.rank = static_cast<int>(s.values.size());
  return g;
}

std::vector<TestFunction> slot_major(const std::vector<Word>& words, int n) {
  std::vector<TestFunction> out;
  for (int s = 0; s < n; ++s)
    for (const auto& w : words) out.push_back({s, w});
  return out;
}

void require_scalar_b(const TraceModel& m, const char* what) {
  if (m.system()->has_b()) {
    throw std::invalid_argument(std::string(what) +
                                " is implemented for B = C only; use sigma-exact for B-relative models");
  }
}

NumPolyTuple numeric_generators(const SystemPtr& sys) {
  NumPolyTuple x;
  for (int i = 0; i < sys->size(); ++i) x.push_back(to_numeric(Poly::generator(sys, i)));
  return x;
}

}  // namespace

std::vector<TestFunction> test_functions(const GeneratorSystem& sys, int d_proj) {
  return slot_major(enumerate_words(sys, d_proj, 1), sys.size());
}

std::vector<KernelMatrix> jacobian_basis(const TraceModel& m, const DegreeScheme& scheme) {
  const auto& sys = m.system();
  if (scheme.d_proj < 1 || scheme.d_proj > sys->cap()) {
    throw DegreeCapError("d_proj outside 1..cap");
  }
  std::vector<KernelMatrix> out;
  for (const auto& t : test_functions(*sys, scheme.d_proj)) {
    PolyTuple p(sys->size(), Poly(sys));
    p[t.slot] = Poly::monomial(sys, t.word);
    out.push_back(jacobian(p));
  }
  return out;
}

GramSystem assemble_gram(const TraceModel& m, int d_proj, const SolverOptions& opts) {
  const auto& sys = m.system();
  if (d_proj < 1 || d_proj > sys->cap()) throw DegreeCapError("d_proj outside 1..cap");
  WordCalculus c = word_calculus(sys, 1, d_proj);
  Eigen::MatrixXcd g = block_diagonal(word_gram(m, c, opts.threads), sys->size());
  return gram_from(slot_major(c.words, sys->size()), std::move(g), opts.cutoff);
}

Eigen::VectorXcd kernel_rhs(const TraceModel& m, const GramSystem& g, const NumKernel& k,
                            const SolverOptions& opts) {
  const auto& sys = m.system();
  const int n = sys->size();
  if (k.size() != n) throw StructuralError("kernel size must equal the generator count");
  const int count = static_cast<int>(g.basis.size());
  Eigen::VectorXcd r(count);
  parallel_for(count, opts.threads, [&](int idx) {
    const auto& t = g.basis[idx];
    const Poly w = Poly::monomial(sys, t.word);
    cplx acc = 0.0;
    for (int j = 0; j < n; ++j) acc += inner_tensor(m, k.at(t.slot, j), to_numeric(diff_quotient(j, w)));
    r[idx] = acc;
  });
  return r;
}

double projection_norm(const TraceModel& m, const NumKernel& k, int d_proj, const SolverOptions& opts) {
  GramSystem g = assemble_gram(m, d_proj, opts);
  return std::sqrt(g.projected_norm2(kernel_rhs(m, g, k, opts)));
}

// ---------------------------------------------------------------------------
// Discrepancy

namespace {

NumPolyTuple centered(const TraceModel& m, const NumPolyTuple& xi) {
  NumPolyTuple out;
  for (const auto& p : xi) {
    check_same_system(m.system(), p.system());
    out.push_back(p - NumPoly::constant(m.system(), trace_poly(m, p)));
  }
  return out;
}

double tuple_norm2(const TraceModel& m, const NumPolyTuple& xi) {
  double acc = 0.0;
  for (const auto& p : xi) acc += inner_l2(m, p, p).real();
  return std::max(0.0, acc);
}

void flag_condition(std::vector<std::string>& diagnostics, double condition, double limit) {
  if (condition > limit) {
    std::ostringstream os;
    os << "gram condition " << condition << " exceeds " << limit;
    diagnostics.push_back(os.str());
  }
}

}  // namespace

DiscrepancyReport discrepancy(const TraceModel& m, const NumPolyTuple& xi, const DegreeScheme& scheme,
                              const SolverOptions& opts) {
  require_scalar_b(m, "discrepancy");
  const auto& sys = m.system();
  if (static_cast<int>(xi.size()) != sys->size()) throw StructuralError("Xi must have length n");
  if (scheme.d_proj < 1 || scheme.d_proj > sys->cap()) throw DegreeCapError("d_proj outside 1..cap");
  DiscrepancyReport rep;
  rep.scheme = scheme;
  NumPolyTuple xc = centered(m, xi);
  NumKernel diff = mai_kernel(xc, numeric_generators(sys)) - NumKernel::identity(sys, sys->size());
  GramSystem g = assemble_gram(m, scheme.d_proj, opts);
  Eigen::VectorXcd r = kernel_rhs(m, g, diff, opts);
  rep.value = std::sqrt(g.projected_norm2(r));
  rep.projection = g.solve(r);
  rep.gram_condition = g.condition;
  rep.gram_rank = g.rank;
  rep.kernel_distance = std::sqrt(std::max(0.0, inner_hs(m, diff, diff).real()));
  rep.xi = xc;
  rep.xi_norm = std::sqrt(tuple_norm2(m, xc));
  flag_condition(rep.diagnostics, g.condition, opts.condition_limit);
  return rep;
}

DiscrepancyReport discrepancy(const TraceModel& m, const PolyTuple& xi, const DegreeScheme& scheme,
                              const SolverOptions& opts) {
  NumPolyTuple x;
  for (const auto& p : xi) x.push_back(to_numeric(p));
  return discrepancy(m, x, scheme, opts);
}

// ---------------------------------------------------------------------------
// Irregularity: minimise over Ξ = Σ y_m (u_m − τ(u_m)) in whitened coordinates.

namespace {

struct Candidate {
  int slot;
  Word word;
  cplx trace;
};

struct EstimateProblem {
  std::vector<Candidate> candidates;
  Eigen::MatrixXcd r;  // R_{km} = ⟨M_m, J_k⟩
  Eigen::VectorXcd s;  // s_k = ⟨𝟙, J_k⟩
  Eigen::MatrixXcd h;  // candidate Gram H_{ab} = ⟨E_b, E_a⟩
  GramSystem gram;
};

EstimateProblem build_problem(const TraceModel& m, const DegreeScheme& scheme, const SolverOptions& opts) {
  require_scalar_b(m, "irregularity");
  const auto& sys = m.system();
  scheme.validate(*sys);
  const int n = sys->size();
  EstimateProblem pb;

  WordCalculus tests = word_calculus(sys, 1, scheme.d_proj);
  const int nt = static_cast<int>(tests.words.size());
  pb.gram = gram_from(slot_major(tests.words, n), block_diagonal(word_gram(m, tests, opts.threads), n),
                      opts.cutoff);

  const std::vector<Word> cand_words = enumerate_words(*sys, scheme.d_xi, 1);
  const int nc = static_cast<int>(cand_words.size());
  // Mai kernel row of a candidate u: entries ½(u⊗1 − 1⊗u) # (x_j⊗1 − 1⊗x_j).
  const NumPoly one = NumPoly::one(sys);
  std::vector<std::vector<NumTensor>> mai(nc);
  std::vector<cplx> traces(nc);
  for (int c = 0; c < nc; ++c) {
    const NumPoly u = to_numeric(Poly::monomial(sys, cand_words[c]));
    traces[c] = m.trace(cand_words[c]);
    const NumTensor du = NumTensor::elementary(u, one) - NumTensor::elementary(one, u);
    for (int j = 0; j < n; ++j) {
      const NumPoly xj = to_numeric(Poly::generator(sys, j));
      const NumTensor dx = NumTensor::elementary(xj, one) - NumTensor::elementary(one, xj);
      mai[c].push_back(sharp(du, dx) * cplx(0.5));
    }
  }
  Eigen::MatrixXcd rw(nt, nc);
  parallel_for(nt, opts.threads, [&](int k) {
    for (int c = 0; c < nc; ++c) {
      std::vector<const NumTensor*> row;
      for (int j = 0; j < n; ++j) row.push_back(&mai[c][j]);
      rw(k, c) = row_inner(m, row, tests.dq[k]);
    }
  });
  Eigen::MatrixXcd hw(nc, nc);
  for (int a = 0; a < nc; ++a)
    for (int b = 0; b < nc; ++b) {
      hw(a, b) = trace_star_product(m, cand_words[a], cand_words[b]) - traces[b] * std::conj(traces[a]);
    }
  pb.r = block_diagonal(rw, n);
  pb.h = block_diagonal(hw, n);
  pb.s.resize(static_cast<Eigen::Index>(n) * nt);
  const NumTensor unit = NumTensor::unit(sys);
  for (int slot = 0; slot < n; ++slot) {
    for (int k = 0; k < nt; ++k) pb.s[slot * nt + k] = inner_tensor(m, unit, tests.dq[k][slot]);
    for (int c = 0; c < nc; ++c) pb.candidates.push_back({slot, cand_words[c], traces[c]});
  }
  return pb;
}

// Objective ‖K z − t‖ with ‖z‖ = ‖Ξ‖₂ and y = T z.
struct Whitened {
  Eigen::MatrixXcd k;
  Eigen::VectorXcd t;
  Eigen::MatrixXcd to_y;
  std::vector<int> columns;  // candidate indices in use
};

Whitened whiten(const EstimateProblem& pb, int max_degree, double cutoff) {
  Whitened w;
  for (int c = 0; c < static_cast<int>(pb.candidates.size()); ++c)
    if (pb.candidates[c].word.degree() <= max_degree) w.columns.push_back(c);
  const auto nc = static_cast<Eigen::Index>(w.columns.size());
  Eigen::MatrixXcd h(nc, nc), r(pb.r.rows(), nc);
  for (Eigen::Index a = 0; a < nc; ++a) {
    r.col(a) = pb.r.col(w.columns[a]);
    for (Eigen::Index b = 0; b < nc; ++b) h(a, b) = pb.h(w.columns[a], w.columns[b]);
  }
  Spectrum hs = kept_spectrum(h, cutoff);
  w.to_y = hs.vectors;
  for (Eigen::Index k = 0; k < w.to_y.cols(); ++k) w.to_y.col(k) /= std::sqrt(hs.values[k]);
  const Eigen::MatrixXcd white = pb.gram.whitening();
  w.k = white * r * w.to_y;
  w.t = white * pb.s;
  return w;
}

NumPolyTuple xi_from(const TraceModel& m, const EstimateProblem& pb, const Whitened& w,
                     const Eigen::VectorXcd& z) {
  const auto& sys = m.system();
  NumPolyTuple xi(sys->size(), NumPoly(sys));
  const Eigen::VectorXcd y = w.to_y * z;
  for (Eigen::Index a = 0; a < y.size(); ++a) {
    const Candidate& c = pb.candidates[w.columns[a]];
    if (std::abs(y[a]) == 0.0) continue;
    xi[c.slot].add_term(c.word, y[a]);
    xi[c.slot].add_term(Word({}, {0}), -y[a] * c.trace);
  }
  return xi;
}

struct SvdSolve {
  Eigen::MatrixXcd v;
  Eigen::VectorXd sigma;
  Eigen::VectorXcd beta;  // U^H t restricted to kept singular values
};

SvdSolve svd_solve(const Whitened& w, double cutoff) {
  SvdSolve s;
  if (w.k.cols() == 0 || w.k.rows() == 0) {
    s.v.resize(w.k.cols(), 0);
    return s;
  }
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(w.k, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double smax = sv.size() ? sv[0] : 0.0;
  Eigen::Index keep = 0;
  while (keep < sv.size() && smax > 0.0 && sv[keep] > cutoff * smax) ++keep;
  s.v = svd.matrixV().leftCols(keep);
  s.sigma = sv.head(keep);
  s.beta = svd.matrixU().leftCols(keep).adjoint() * w.t;
  return s;
}

Eigen::VectorXcd z_of(const SvdSolve& s, double lambda) {
  Eigen::VectorXcd c(s.sigma.size());
  for (Eigen::Index k = 0; k < c.size(); ++k) c[k] = s.beta[k] * (s.sigma[k] / (s.sigma[k] * s.sigma[k] + lambda));
  return s.v * c;
}

}  // namespace

SigmaReport irregularity_estimate(const TraceModel& m, const DegreeScheme& scheme, const SolverOptions& opts) {
  EstimateProblem pb = build_problem(m, scheme, opts);
  const int n = m.size();
  SigmaReport rep;
  rep.mode = SigmaReport::Mode::estimate;
  rep.n = n;
  rep.scheme = scheme;
  rep.gram_condition = pb.gram.condition;
  rep.gram_rank = pb.gram.rank;
  for (int d = 1; d <= scheme.d_xi; ++d) {
    Whitened w = whiten(pb, d, opts.cutoff);
    SvdSolve s = svd_solve(w, opts.cutoff);
    const Eigen::VectorXcd z = z_of(s, 0.0);
    const double value2 = std::max(0.0, (w.k * z - w.t).squaredNorm());
    rep.trail.emplace_back(d, n - value2);
    if (d == scheme.d_xi) {
      rep.irregularity = std::sqrt(value2);
      rep.sigma = n - value2;
      rep.xi = xi_from(m, pb, w, z);
    }
  }
  flag_condition(rep.diagnostics, pb.gram.condition, opts.condition_limit);
  return rep;
}

DiscrepancyReport irregularity_bounded(const TraceModel& m, const DegreeScheme& scheme, double radius,
                                       const SolverOptions& opts) {
  if (!(radius >= 0.0) || !std::isfinite(radius)) throw std::invalid_argument("radius must be nonnegative");
  EstimateProblem pb = build_problem(m, scheme, opts);
  Whitened w = whiten(pb, scheme.d_xi, opts.cutoff);
  SvdSolve s = svd_solve(w, opts.cutoff);
  DiscrepancyReport rep;
  rep.scheme = scheme;
  rep.radius = radius;
  rep.gram_condition = pb.gram.condition;
  rep.gram_rank = pb.gram.rank;

  Eigen::VectorXcd z = z_of(s, 0.0);
  if (z.norm() <= radius) {
    rep.interior = true;
  } else if (radius == 0.0) {
    rep.interior = false;
    z = Eigen::VectorXcd::Zero(z.size());
    rep.multiplier = std::numeric_limits<double>::infinity();
  } else {
    // ‖z(λ)‖ decreases from ‖z(0)‖ > R to 0; bracket and bisect on λ.
    rep.interior = false;
    double lo = 0.0;
    double hi = std::max(1.0, s.sigma.size() ? s.sigma[0] * s.beta.norm() / radius : 1.0);
    while (z_of(s, hi).norm() > radius) hi *= 2.0;
    double lambda = hi;
    bool converged = false;
    for (int iter = 0; iter < 400; ++iter) {
      lambda = 0.5 * (lo + hi);
      const double norm = z_of(s, lambda).norm();
      if (std::fabs(norm - radius) <= 1e-10) {
        converged = true;
        break;
      }
      (norm > radius ? lo : hi) = lambda;
      if (hi - lo <= 1e-300) break;
    }
    if (!converged) {
      lambda = hi;  // feasible side
      if (std::fabs(z_of(s, lambda).norm() - radius) > 1e-10) {
        rep.diagnostics.push_back("trust-region bisection did not reach the 1e-10 norm tolerance");
      }
    }
    rep.multiplier = lambda;
    z = z_of(s, lambda);
  }
  rep.value = std::sqrt(std::max(0.0, (w.k * z - w.t).squaredNorm()));
  rep.xi = xi_from(m, pb, w, z);
  rep.xi_norm = z.norm();
  rep.projection = z;
  flag_condition(rep.diagnostics, pb.gram.condition, opts.condition_limit);
  return rep;
}

// ---------------------------------------------------------------------------
// Exact finite-dimensional recipe

namespace {

// L²(M) of a matrix model as C^D: block b contributes sqrt(λ_b / k_b) vec(m_b).
struct L2Space {
  const MatrixModel& m;
  int dim = 0;
  std::vector<int> offsets;
  std::vector<double> scales;

  explicit L2Space(const MatrixModel& model) : m(model) {
    for (const auto& blk : m.blocks()) {
      offsets.push_back(dim);
      scales.push_back(std::sqrt(blk.weight / blk.k));
      dim += blk.k * blk.k;
    }
  }

  Eigen::VectorXcd vec(const std::vector<Eigen::MatrixXcd>& blocks) const {
    Eigen::VectorXcd v(dim);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      v.segment(offsets[b], blocks[b].size()) =
          scales[b] * Eigen::Map<const Eigen::VectorXcd>(blocks[b].data(), blocks[b].size());
    }
    return v;
  }

  // vec(a u) = (I ⊗ a) vec(u) and vec(u b) = (bᵀ ⊗ I) vec(u), blockwise.
  Eigen::MatrixXcd left(const std::vector<Eigen::MatrixXcd>& a) const {
    Eigen::MatrixXcd op = Eigen::MatrixXcd::Zero(dim, dim);
    for (std::size_t b = 0; b < a.size(); ++b) {
      const int k = m.blocks()[b].k;
      for (int c = 0; c < k; ++c) op.block(offsets[b] + c * k, offsets[b] + c * k, k, k) = a[b];
    }
    return op;
  }
  Eigen::MatrixXcd right(const std::vector<Eigen::MatrixXcd>& a) const {
    Eigen::MatrixXcd op = Eigen::MatrixXcd::Zero(dim, dim);
    for (std::size_t b = 0; b < a.size(); ++b) {
      const int k = m.blocks()[b].k;
      for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c)
          op.block(offsets[b] + r * k, offsets[b] + c * k, k, k) =
              a[b](c, r) * Eigen::MatrixXcd::Identity(k, k);
    }
    return op;
  }
};

// A basis of the algebra generated by the model, as words whose evaluations
// are linearly independent.
std::vector<std::vector<Eigen::MatrixXcd>> algebra_basis(const MatrixModel& m, const L2Space& space) {
  const auto& sys = *m.system();
  std::vector<std::vector<Eigen::MatrixXcd>> basis;
  std::vector<Eigen::VectorXcd> ortho;
  int prev_rank = -1;
  for (int d = 0; d <= space.dim + 1 && d <= 2 * sys.cap(); ++d) {
    for (const auto& w : enumerate_words(sys, d, d)) {
      auto blocks = m.evaluate(w);
      Eigen::VectorXcd v = space.vec(blocks);
      const double norm0 = v.norm();
      for (const auto& q : ortho) v -= q.dot(v) * q;
      for (const auto& q : ortho) v -= q.dot(v) * q;
      if (v.norm() > 1e-10 * std::max(1.0, norm0)) {
        ortho.push_back(v / v.norm());
        basis.push_back(std::move(blocks));
      }
    }
    const int rank = static_cast<int>(basis.size());
    if (rank == prev_rank) break;
    prev_rank = rank;
  }
  return basis;
}

struct FdResult {
  double sigma_star2 = 0.0;
  int relations = 0;
  int module_rank = 0;
};

FdResult matrix_fd(const MatrixModel& m, int d, double cutoff) {
  const auto& sys = m.system();
  const int n = sys->size();
  L2Space space(m);
  const int dim = space.dim;
  const int dim2 = dim * dim;

  // Evaluation matrix over all words of degree ≤ d and its null space.
  const std::vector<Word> words = enumerate_words(*sys, d, 0);
  const auto nw = static_cast<Eigen::Index>(words.size());
  std::vector<Eigen::VectorXcd> evals;
  Eigen::MatrixXcd e(dim, nw);
  for (Eigen::Index k = 0; k < nw; ++k) {
    evals.push_back(space.vec(m.evaluate(words[k])));
    e.col(k) = evals.back();
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(e, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double smax = sv.size() ? sv[0] : 0.0;
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv[rank] > cutoff * smax) ++rank;
  const Eigen::MatrixXcd null = svd.matrixV().rightCols(nw - rank);

  FdResult out;
  out.relations = static_cast<int>(null.cols());
  if (null.cols() == 0) return out;

  // ∂_j w as a D×D matrix Σ c vec(left) vec(right)ᵀ.
  std::vector<std::vector<Eigen::MatrixXcd>> dq(static_cast<std::size_t>(nw));
  for (Eigen::Index k = 0; k < nw; ++k) {
    const Poly w = Poly::monomial(sys, words[k]);
    for (int j = 0; j < n; ++j) {
      Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(dim, dim);
      const Tensor dw = diff_quotient(j, w);
      for (const auto& [key, c] : dw.terms()) {
        t += c.to_complex() * space.vec(m.evaluate(key.first)) * space.vec(m.evaluate(key.second)).transpose();
      }
      dq[k].push_back(std::move(t));
    }
  }

  // Relation images, closed under (a ⊗ 1) · _ · (1 ⊗ b) for a, b in the algebra.
  const auto alg = algebra_basis(m, space);
  std::vector<Eigen::MatrixXcd> lefts, rights;
  for (const auto& a : alg) {
    lefts.push_back(space.left(a));
    rights.push_back(space.right(a).transpose());
  }
  const auto per_relation = static_cast<Eigen::Index>(alg.size() * alg.size());
  Eigen::MatrixXcd z(static_cast<Eigen::Index>(n) * dim2, null.cols() * per_relation);
  Eigen::Index col = 0;
  for (Eigen::Index r = 0; r < null.cols(); ++r) {
    std::vector<Eigen::MatrixXcd> image(n, Eigen::MatrixXcd::Zero(dim, dim));
    for (Eigen::Index k = 0; k < nw; ++k) {
      if (std::abs(null(k, r)) == 0.0) continue;
      for (int j = 0; j < n; ++j) image[j] += null(k, r) * dq[k][j];
    }
    for (std::size_t a = 0; a < alg.size(); ++a) {
      for (std::size_t b = 0; b < alg.size(); ++b) {
        for (int j = 0; j < n; ++j) {
          Eigen::MatrixXcd t = lefts[a] * image[j] * rights[b];
          z.col(col).segment(static_cast<Eigen::Index>(j) * dim2, dim2) =
              Eigen::Map<const Eigen::VectorXcd>(t.data(), dim2);
        }
        ++col;
      }
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> zs(z, Eigen::ComputeThinU);
  const Eigen::VectorXd& zsv = zs.singularValues();
  const double zmax = zsv.size() ? zsv[0] : 0.0;
  Eigen::Index zrank = 0;
  while (zrank < zsv.size() && zmax > 0.0 && zsv[zrank] > cutoff * zmax) ++zrank;
  const Eigen::MatrixXcd q = zs.matrixU().leftCols(zrank);
  out.module_rank = static_cast<int>(zrank);

  // Σ*² = Σ_i ‖proj_K (1⊗1 in column i)‖².
  std::vector<Eigen::MatrixXcd> identity;
  for (const auto& blk : m.blocks()) identity.push_back(Eigen::MatrixXcd::Identity(blk.k, blk.k));
  const Eigen::VectorXcd one = space.vec(identity);
  const Eigen::MatrixXcd unit = one * one.transpose();
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXcd ei = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n) * dim2);
    ei.segment(static_cast<Eigen::Index>(i) * dim2, dim2) = Eigen::Map<const Eigen::VectorXcd>(unit.data(), dim2);
    out.sigma_star2 += (q.adjoint() * ei).squaredNorm();
  }
  return out;
}

std::shared_ptr<const MatrixModel> atomic_as_matrix(const MeasureModel& mm) {
  if (mm.density().kind != Density::Kind::none && mm.density().mass > 0.0) {
    throw std::invalid_argument("sigma_exact_fd needs a purely atomic measure");
  }
  std::vector<MatrixBlock> blocks;
  std::vector<Eigen::MatrixXcd> gen;
  for (const auto& a : mm.atoms()) {
    blocks.push_back({1, a.mass});
    gen.push_back(Eigen::MatrixXcd::Constant(1, 1, a.location));
  }
  return std::make_shared<const MatrixModel>(blocks, std::vector<std::vector<Eigen::MatrixXcd>>{gen},
                                             std::vector<int>{}, std::vector<std::vector<Eigen::MatrixXcd>>{},
                                             mm.system()->cap());
}

// Σ*² at degree d for any supported finite-dimensional model.
FdResult exact_star2(const TraceModel& m, int d, double cutoff) {
  if (const auto* mat = dynamic_cast<const MatrixModel*>(&m)) return matrix_fd(*mat, d, cutoff);
  if (const auto* meas = dynamic_cast<const MeasureModel*>(&m)) {
    return matrix_fd(*atomic_as_matrix(*meas), d, cutoff);
  }
  if (const auto* fp = dynamic_cast<const FreeProductModel*>(&m)) {
    // Free factors contribute additively: Σ*(X,Y)² = Σ*(X)² + Σ*(Y)².
    FdResult total;
    for (const auto& f : fp->factors()) {
      FdResult part = exact_star2(*f, d, cutoff);
      total.sigma_star2 += part.sigma_star2;
      total.relations += part.relations;
      total.module_rank += part.module_rank;
    }
    return total;
  }
  throw std::invalid_argument("sigma_exact_fd needs a finite-dimensional model (matrix, atomic measure, "
                              "or a free product of such); got '" + m.kind() + "'");
}

}  // namespace

SigmaReport sigma_exact_fd(const TraceModel& m, int d, const SolverOptions& opts) {
  const auto& sys = m.system();
  if (d < 1 || d > sys->cap()) throw DegreeCapError("relation degree outside 1..cap");
  SigmaReport rep;
  rep.mode = SigmaReport::Mode::exact_fd;
  rep.n = sys->size();
  rep.scheme = {d, d};
  for (int k = 1; k <= d; ++k) {
    FdResult r = exact_star2(m, k, opts.cutoff);
    const double sigma = rep.n - r.sigma_star2;
    rep.trail.emplace_back(k, sigma);
    if (k == d) {
      rep.sigma = sigma;
      rep.irregularity = std::sqrt(std::max(0.0, r.sigma_star2));
      rep.gram_rank = r.module_rank;
    }
  }
  if (rep.sigma < -1e-8 || rep.sigma > rep.n + 1e-8) {
    rep.diagnostics.push_back("sigma outside [0, n]");
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Residual checks

double stein_residual_at(const TraceModel& m, const NumPolyTuple& xi, const NumKernel& a, const TestFunction& t) {
  const auto& sys = m.system();
  const NumPoly w = to_numeric(Poly::monomial(sys, t.word));
  cplx lhs = inner_l2(m, xi[t.slot], w);
  cplx rhs = 0.0;
  for (int j = 0; j < sys->size(); ++j) rhs += inner_tensor(m, a.at(t.slot, j), diff_quotient(j, w));
  return std::abs(lhs - rhs);
}

ResidualReport stein_kernel_residual(const TraceModel& m, const NumPolyTuple& xi, const NumKernel& a, int d) {
  const auto& sys = m.system();
  if (static_cast<int>(xi.size()) != sys->size()) throw StructuralError("Xi must have length n");
  if (a.size() != sys->size()) throw StructuralError("kernel size must equal n");
  ResidualReport rep;
  for (int s = 0; s < sys->size(); ++s) {
    for (const auto& w : enumerate_words(*sys, d, 0)) {
      TestFunction t{s, w};
      const double r = stein_residual_at(m, xi, a, t);
      ++rep.tested;
      if (r > rep.max_residual || rep.tested == 1) {
        rep.max_residual = std::max(r, rep.max_residual);
        if (r >= rep.max_residual) rep.argmax = t;
      }
    }
  }
  rep.fisher_info = tuple_norm2(m, xi);
  return rep;
}

ResidualReport conjugate_variable_check(const TraceModel& m, const NumPolyTuple& xi, int d) {
  return stein_kernel_residual(m, xi, NumKernel::identity(m.system(), m.size()), d);
}

// ---------------------------------------------------------------------------
// Adjoint action

NumPoly adjoint_action(const TraceModel& m, const NumTensorTuple& eta, const NumPoly& p, const NumPoly& q,
                       const NumPoly& eta_adj) {
  const auto& sys = m.system();
  if (static_cast<int>(eta.size()) != sys->size()) throw StructuralError("eta must have length n");
  NumPoly out = sharp(NumTensor::elementary(p, q), eta_adj);
  const NumPoly ps = adjoint(p);
  const NumPoly qs = adjoint(q);
  for (int j = 0; j < sys->size(); ++j) {
    // (1 ⊗ τ)(p · [η_j # ∂_j(q*)*]): keep the left leg, trace the right one.
    const NumTensor left_term = left_act(p, sharp(eta[j], adjoint(diff_quotient(j, qs))));
    for (const auto& [key, c] : left_term.terms()) out.add_term(key.first, -c * m.trace(key.second));
    // (τ ⊗ 1)([η_j # ∂_j(p*)*] · q): trace the left leg, keep the right one.
    const NumTensor right_term = right_act(sharp(eta[j], adjoint(diff_quotient(j, ps))), q);
    for (const auto& [key, c] : right_term.terms()) out.add_term(key.second, -c * m.trace(key.first));
  }
  return out;
}

// ---------------------------------------------------------------------------
// α diagnostic

AlphaReport alpha_estimate(const std::vector<std::pair<double, double>>& sweep, double zero_tolerance,
                           double floor) {
  AlphaReport rep;
  std::vector<std::pair<double, double>> usable;
  for (const auto& [r, v] : sweep) {
    if (!(r > 0.0) || !std::isfinite(r) || !std::isfinite(v)) continue;
    usable.emplace_back(r, v);
  }
  for (std::size_t k = 1; k < usable.size(); ++k) {
    if (!(usable[k].first > usable[k - 1].first)) throw std::invalid_argument("radii must be increasing");
  }
  const int count = static_cast<int>(usable.size());
  if (count < 3) throw std::invalid_argument("alpha_estimate needs at least 3 points with R > 0");
  rep.window = std::max(3, (count + 1) / 2);
  std::vector<double> lx, ly;
  bool all_floor = true;
  for (int k = count - rep.window; k < count; ++k) {
    double v = usable[k].second;
    if (v <= zero_tolerance) {
      v = floor;
      ++rep.floored;
    } else {
      all_floor = false;
    }
    lx.push_back(std::log(usable[k].first));
    ly.push_back(std::log(v));
  }
  if (rep.floored > 0) rep.diagnostics.push_back(std::to_string(rep.floored) + " value(s) at the floor");
  if (all_floor) {
    rep.minus_infinity = true;
    rep.alpha = -std::numeric_limits<double>::infinity();
    return rep;
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxy += (lx[k] - mx) * (ly[k] - my);
    sxx += (lx[k] - mx) * (lx[k] - mx);
  }
  rep.alpha = std::min(0.0, sxx > 0.0 ? sxy / sxx : 0.0);
  if (rep.alpha == 0.0) rep.alpha = 0.0;  // normalise −0
  return rep;
}

}  // namespace freestein
