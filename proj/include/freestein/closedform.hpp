#pragma once

// Closed-form values of free Stein irregularity and dimension: one-variable
// laws, finite-dimensional algebras, group algebras, the Rădulescu and free
// graph algebra examples, the ε-regularised kernels of one-variable laws, and
// logarithmic energies.
//
// Identities that are stated exactly (finite-dimensional formula, Rădulescu,
// graph algebras) are evaluated in rational arithmetic.

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>
#include <json.hpp>

#include "freestein/trace.hpp"

namespace freestein {

struct OneVarResult {
  double star2 = 0.0;  // Σ*(x)² = Σ μ({t})²
  double sigma = 1.0;  // 1 − Σ*(x)²
};

/// Σ*(x)² = Σ_t μ({t})² and σ(x) = 1 − Σ*(x)².
OneVarResult one_var_sigma(const MeasureModel& m);

/// Normal matrix with eigenvalue multiplicities m_j over N = Σ m_j (uniform
/// trace): Σ*² = Σ m_j² / N².
mpq_class one_var_star2_multiplicities(const std::vector<long>& multiplicities);

struct FdBlock {
  int k = 1;
  mpq_class weight;
};

/// σ = 1 − Σ λ_i² / k_i² for ⊕ (M_{k_i}, λ_i tr). Weights must be positive and sum to 1.
mpq_class fd_sigma(const std::vector<FdBlock>& blocks);
/// Same formula from floating-point block weights (checked to sum to 1 within 1e-12).
double fd_sigma(const std::vector<MatrixBlock>& blocks);

/// σ = β₁ − β₀ + 1 from user-supplied ℓ²-Betti numbers.
double group_sigma(double beta0, double beta1);
/// Finite group of the given order: β₀ = 1/|Γ|, β₁ = 0.
mpq_class finite_group_sigma(long order);
/// Regular representation of ℤ/N acting on ℓ²(ℤ/N): the shift u and its
/// adjoint u* as a star-paired generator pair in a single N×N block.
std::shared_ptr<const MatrixModel> cyclic_regular_model(int order);

struct RadulescuPair {
  mpq_class tau_e;
  mpq_class tau_f;
  bool equal = true;  // e = f (k = 1); otherwise e ⟂ f (k = 2)
};

struct RadulescuResult {
  long k_total = 0;     // K = Σ k_j
  mpq_class t;          // 1 + Σ k_j τ(e_j) τ(f_j)
  mpq_class star2;      // Σ*(X:B)² = K + 1 − t
  mpq_class sigma;      // σ(X:B) = K − Σ*²
  bool identity_holds = false;  // σ(X:B) + σ(s₀) = t with σ(s₀) = 1
};

RadulescuResult radulescu(const std::vector<RadulescuPair>& pairs);

struct GraphEdge {
  int v = 0;
  int w = 0;
  long multiplicity = 1;
};

struct GraphSpec {
  std::vector<mpq_class> weights;  // μ(v)
  std::vector<GraphEdge> edges;    // undirected; v == w is a loop
};

struct GraphResult {
  long directed_edges = 0;  // |E⃗|; a loop contributes one self-opposite directed edge
  mpq_class t;
  mpq_class star2;     // |E⃗| − Σ_v μ(v) Σ_{w∼v} n_{v,w} μ(w)
  mpq_class sigma_xb;  // σ(X:B)
  mpq_class sigma_y;   // σ(Y) = 1 − Σ μ(v)²
  bool has_loops = false;
  bool identity_holds = false;  // σ(X:B) + σ(Y) = t
  std::vector<std::string> diagnostics;
};

/// Throws std::invalid_argument for invalid weights, edgeless or disconnected graphs.
GraphResult graph_sigma(const GraphSpec& g);

struct EpsKernelResult {
  double eps = 0.0;
  double bound = 0.0;  // ‖A_ε − 𝟙‖² = ∬ ε⁴ / ((t−s)² + ε²)² dμ dμ
  std::vector<std::pair<double, double>> g_atoms;  // (atom, g_ε(atom))
  std::vector<std::pair<double, double>> g_grid;   // (t, g_ε(t)) on the continuous support
  double g_norm = 0.0;                             // ‖g_ε‖_{L²(μ)}
  bool converged = true;
  std::vector<std::string> diagnostics;
};

/// The kernel A_ε(t, s) = (t−s)²/((t−s)²+ε²) is a Stein kernel relative to
/// g_ε(t) = 2 ∫ (t−s)/((t−s)²+ε²) dμ(s).
EpsKernelResult eps_kernel(const MeasureModel& m, double eps, int grid_points = 33, double tol = 1e-10);

struct LogEnergyResult {
  double value = 0.0;
  bool minus_infinity = false;
  bool converged = true;
  std::vector<std::pair<int, double>> partial_sums;  // (level, value) for staircase runs
  std::vector<std::string> diagnostics;
};

/// ∬ log|x − y| dμ(x) dμ(y); any atom makes it −∞.
LogEnergyResult log_energy(const MeasureModel& m, double tol = 1e-10);

/// Staircase density Σ_n (2ⁿ λ_n)⁻¹ χ_{I_n} with I_n = [1 − 2^{1−n}, 1 − 2^{1−n} + λ_n]
/// and λ_n = e^{−12ⁿ}, truncated at `level`; reports the partial energies of
/// the truncated (sub-probability) measure for every level up to `level`.
LogEnergyResult staircase_log_energy(int level);

/// JSON inputs: {"vertices": [w, ...], "edges": [[v, w] or [v, w, n], ...]} (1-based)
/// and {"pairs": [{"tau_e": .., "tau_f": .., "equal": bool}, ...]}.
GraphSpec graph_from_json(const nlohmann::json& j);
std::vector<RadulescuPair> radulescu_from_json(const nlohmann::json& j);
mpq_class rational_from_json(const nlohmann::json& j, const std::string& field);

}  // namespace freestein
