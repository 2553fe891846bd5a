#pragma once

// Free Stein discrepancy, irregularity and dimension reduced to Gram /
// least-squares problems over degree-truncated Jacobian ranges.
//
// Conventions. A test tuple P with the word w in slot s and 0 elsewhere has
// Jacobian ev𝒥(P) supported in row s with entries ∂_j w. For such test
// functions J_k the Gram matrix is G_kl = ⟨J_l, J_k⟩_HS and the projection of a
// kernel K onto their span has squared norm r^H G^+ r with r_k = ⟨K, J_k⟩_HS.
// The pseudo-inverse drops eigenvalues below cutoff · λ_max.

#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "freestein/ncalg.hpp"
#include "freestein/trace.hpp"

namespace freestein {

/// Two truncation knobs: Ξ candidates up to degree d_xi, test tuples up to
/// degree d_proj.
struct DegreeScheme {
  int d_xi = 1;
  int d_proj = 3;

  /// d_proj = d_xi + 2.
  static DegreeScheme with_default_proj(int d_xi) { return {d_xi, d_xi + 2}; }
  /// Throws std::invalid_argument for non-positive degrees or degrees beyond the cap.
  void validate(const GeneratorSystem& sys) const;
};

struct SolverOptions {
  double cutoff = 1e-10;           // relative eigen/singular value cutoff
  int threads = 1;                 // Gram assembly workers
  double condition_limit = 1e9;    // kept-spectrum condition number flagged beyond this
};

/// The test tuple with `word` in `slot` (zero-based) and 0 elsewhere.
struct TestFunction {
  int slot = 0;
  Word word;
};

struct GramSystem {
  std::vector<TestFunction> basis;
  Eigen::MatrixXcd gram;
  Eigen::VectorXd eigenvalues;    // kept eigenvalues
  Eigen::MatrixXcd eigenvectors;  // matching eigenvectors (columns)
  double lambda_max = 0.0;
  double condition = 1.0;         // λ_max / λ_min over the kept spectrum
  int rank = 0;

  /// Λ^{-1/2} V^H, so that r^H G^+ r = ‖W r‖².
  Eigen::MatrixXcd whitening() const;
  Eigen::VectorXcd solve(const Eigen::VectorXcd& r) const;
  double projected_norm2(const Eigen::VectorXcd& r) const;
};

struct DiscrepancyReport {
  double value = 0.0;          // Σ*(X | Ξ) truncated (or Σ*_R for bounded runs)
  DegreeScheme scheme;
  double gram_condition = 1.0;
  int gram_rank = 0;
  double kernel_distance = 0.0;  // ‖A_Ξ − 𝟙‖_HS, an upper bound for value
  Eigen::VectorXcd projection;   // coefficients of Π(A_Ξ − 𝟙) in the test basis
  std::optional<NumPolyTuple> xi;
  std::optional<double> radius;
  double xi_norm = 0.0;          // ‖Ξ‖₂
  double multiplier = 0.0;       // trust-region Lagrange multiplier
  bool interior = true;
  std::vector<std::string> diagnostics;
};

struct SigmaReport {
  enum class Mode { estimate, exact_fd };
  double sigma = 0.0;
  double irregularity = 0.0;  // Σ*(X : B)
  Mode mode = Mode::estimate;
  int n = 0;
  DegreeScheme scheme;        // exact_fd uses scheme.d_proj as the relation degree
  std::vector<std::pair<int, double>> trail;  // (degree, sigma)
  double gram_condition = 1.0;
  int gram_rank = 0;
  std::optional<NumPolyTuple> xi;
  std::vector<std::string> diagnostics;
};

std::string mode_name(SigmaReport::Mode mode);

/// Test functions (slot, word) for all words of degree 1..d_proj, including
/// B-interleaved words when the model carries a coefficient algebra.
std::vector<TestFunction> test_functions(const GeneratorSystem& sys, int d_proj);

/// ev𝒥(P) for every test function, as symbolic kernel matrices.
std::vector<KernelMatrix> jacobian_basis(const TraceModel& m, const DegreeScheme& scheme);

GramSystem assemble_gram(const TraceModel& m, int d_proj, const SolverOptions& opts = {});

/// r_k = ⟨K, J_k⟩_HS for the test functions of g.
Eigen::VectorXcd kernel_rhs(const TraceModel& m, const GramSystem& g, const NumKernel& k,
                            const SolverOptions& opts = {});

/// ‖Π_{d_proj} K‖_HS.
double projection_norm(const TraceModel& m, const NumKernel& k, int d_proj, const SolverOptions& opts = {});

/// Σ*(X | Ξ) truncated at scheme.d_proj using the Mai kernel of the centred Ξ.
DiscrepancyReport discrepancy(const TraceModel& m, const NumPolyTuple& xi, const DegreeScheme& scheme,
                              const SolverOptions& opts = {});
DiscrepancyReport discrepancy(const TraceModel& m, const PolyTuple& xi, const DegreeScheme& scheme,
                              const SolverOptions& opts = {});

/// Minimises ‖Π(A_Ξ − 𝟙)‖ over Ξ of degree ≤ d_xi; the trail runs over d_xi.
SigmaReport irregularity_estimate(const TraceModel& m, const DegreeScheme& scheme,
                                  const SolverOptions& opts = {});

/// Same objective subject to ‖Ξ‖₂ ≤ R (trust-region subproblem).
DiscrepancyReport irregularity_bounded(const TraceModel& m, const DegreeScheme& scheme, double radius,
                                       const SolverOptions& opts = {});

/// Exact Σ*² = ‖proj_K 𝟙‖² in a finite-dimensional model, K generated by the
/// Jacobians of relations of degree ≤ d. Accepts matrix models, purely atomic
/// measures, and free products of such (summing the factors' Σ*²).
SigmaReport sigma_exact_fd(const TraceModel& m, int d, const SolverOptions& opts = {});

struct ResidualReport {
  double max_residual = 0.0;
  TestFunction argmax;
  double fisher_info = 0.0;  // ‖Ξ‖₂²
  int tested = 0;
};

/// max over monomial test tuples of degree ≤ d of |⟨Ξ, evP⟩ − ⟨A, ev𝒥P⟩|.
ResidualReport stein_kernel_residual(const TraceModel& m, const NumPolyTuple& xi, const NumKernel& a, int d);

/// The residual above with A = 𝟙; Ξ is a conjugate variable iff it vanishes.
ResidualReport conjugate_variable_check(const TraceModel& m, const NumPolyTuple& xi, int d);

/// |⟨Ξ, evP⟩ − ⟨A, ev𝒥P⟩| for one test function.
double stein_residual_at(const TraceModel& m, const NumPolyTuple& xi, const NumKernel& a,
                         const TestFunction& t);

/// ∂*((p ⊗ q) # η) from a known value of ∂*(η):
/// (p⊗q)#∂*η − Σ_j [(1⊗τ)(p·(η_j # ∂_j(q*)*)) + (τ⊗1)((η_j # ∂_j(p*)*)·q)].
NumPoly adjoint_action(const TraceModel& m, const NumTensorTuple& eta, const NumPoly& p, const NumPoly& q,
                       const NumPoly& eta_adj);

struct AlphaReport {
  double alpha = 0.0;  // in [−∞, 0]
  bool minus_infinity = false;
  int window = 0;
  int floored = 0;  // points replaced by the floor value
  std::vector<std::string> diagnostics;
};

/// Slope of ln Σ*_R against ln R over the largest-R window of max(3, ⌈N/2⌉)
/// points. Values at or below zero_tolerance are replaced by floor and flagged.
AlphaReport alpha_estimate(const std::vector<std::pair<double, double>>& sweep, double zero_tolerance = 1e-8,
                           double floor = 1e-12);

}  // namespace freestein
