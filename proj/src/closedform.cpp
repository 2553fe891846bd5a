#include "freestein/closedform.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "freestein/model_io.hpp"
#include "freestein/quadrature.hpp"
#include "freestein/rational.hpp"

namespace freestein {

// ---------------------------------------------------------------------------
// One variable and finite-dimensional algebras

OneVarResult one_var_sigma(const MeasureModel& m) {
  OneVarResult r;
  for (const auto& a : m.atoms()) r.star2 += a.mass * a.mass;
  r.sigma = 1.0 - r.star2;
  return r;
}

mpq_class one_var_star2_multiplicities(const std::vector<long>& multiplicities) {
  if (multiplicities.empty()) throw std::invalid_argument("multiplicities must be non-empty");
  mpz_class total = 0, squares = 0;
  for (long m : multiplicities) {
    if (m <= 0) throw std::invalid_argument("multiplicities must be positive");
    total += m;
    squares += mpz_class(m) * m;
  }
  mpq_class q(squares, total * total);
  q.canonicalize();
  return q;
}

mpq_class fd_sigma(const std::vector<FdBlock>& blocks) {
  if (blocks.empty()) throw std::invalid_argument("at least one block is required");
  mpq_class total = 0, sum = 0;
  for (const auto& b : blocks) {
    if (b.k < 1) throw std::invalid_argument("block sizes must be positive");
    if (b.weight <= 0) throw std::invalid_argument("block weights must be positive");
    total += b.weight;
    sum += b.weight * b.weight / (b.k * b.k);
  }
  if (total != 1) throw std::invalid_argument("block weights must sum to 1");
  return 1 - sum;
}

double fd_sigma(const std::vector<MatrixBlock>& blocks) {
  if (blocks.empty()) throw std::invalid_argument("at least one block is required");
  double total = 0.0, sum = 0.0;
  for (const auto& b : blocks) {
    if (b.k < 1) throw std::invalid_argument("block sizes must be positive");
    if (!(b.weight > 0.0)) throw std::invalid_argument("block weights must be positive");
    total += b.weight;
    sum += b.weight * b.weight / (static_cast<double>(b.k) * b.k);
  }
  if (std::fabs(total - 1.0) > 1e-12) throw std::invalid_argument("block weights must sum to 1");
  return 1.0 - sum;
}

double group_sigma(double beta0, double beta1) {
  if (!(beta0 >= 0.0) || !(beta1 >= 0.0)) throw std::invalid_argument("Betti numbers must be nonnegative");
  return beta1 - beta0 + 1.0;
}

mpq_class finite_group_sigma(long order) {
  if (order < 1) throw std::invalid_argument("group order must be at least 1");
  mpq_class beta0(1, order);
  beta0.canonicalize();
  return mpq_class(0) - beta0 + 1;
}

std::shared_ptr<const MatrixModel> cyclic_regular_model(int order) {
  if (order < 1) throw std::invalid_argument("group order must be at least 1");
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(order, order);
  for (int k = 0; k < order; ++k) u((k + 1) % order, k) = 1.0;
  std::vector<std::vector<Eigen::MatrixXcd>> gens{{u}, {u.adjoint()}};
  return std::make_shared<const MatrixModel>(std::vector<MatrixBlock>{{order, 1.0}}, gens, std::vector<int>{1, 0});
}

// ---------------------------------------------------------------------------
// Projection-pair and graph algebra examples

RadulescuResult radulescu(const std::vector<RadulescuPair>& pairs) {
  RadulescuResult r;
  r.t = 1;
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    const auto& p = pairs[j];
    const std::string where = "pairs[" + std::to_string(j) + "]";
    if (p.tau_e <= 0 || p.tau_e > 1 || p.tau_f <= 0 || p.tau_f > 1) {
      throw std::invalid_argument(where + ": traces must lie in (0, 1]");
    }
    if (p.equal && p.tau_e != p.tau_f) throw std::invalid_argument(where + ": e = f requires equal traces");
    if (!p.equal && p.tau_e + p.tau_f > 1) {
      throw std::invalid_argument(where + ": orthogonal projections need tau_e + tau_f <= 1");
    }
    const long k = p.equal ? 1 : 2;
    r.k_total += k;
    r.t += k * p.tau_e * p.tau_f;
  }
  r.star2 = r.k_total + 1 - r.t;
  r.sigma = r.k_total - r.star2;
  r.identity_holds = (r.sigma + 1 == r.t);
  return r;
}

GraphResult graph_sigma(const GraphSpec& g) {
  const int nv = static_cast<int>(g.weights.size());
  if (nv == 0) throw std::invalid_argument("graph: at least one vertex is required");
  mpq_class total = 0;
  for (const auto& w : g.weights) {
    if (w <= 0) throw std::invalid_argument("graph: vertex weights must be positive");
    total += w;
  }
  if (total != 1) throw std::invalid_argument("graph: vertex weights must sum to 1");
  if (g.edges.empty()) throw std::invalid_argument("graph: edgeless graphs generate no diffuse part");

  GraphResult r;
  std::vector<int> parent(nv);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  mpq_class adjacency = 0;  // Σ_v μ(v) Σ_{w∼v} n_{v,w} μ(w)
  for (const auto& e : g.edges) {
    if (e.v < 0 || e.v >= nv || e.w < 0 || e.w >= nv) throw std::invalid_argument("graph: edge vertex out of range");
    if (e.multiplicity < 1) throw std::invalid_argument("graph: edge multiplicities must be positive");
    if (e.v == e.w) {
      r.has_loops = true;
      r.directed_edges += e.multiplicity;
      adjacency += e.multiplicity * g.weights[e.v] * g.weights[e.v];
    } else {
      r.directed_edges += 2 * e.multiplicity;
      adjacency += 2 * e.multiplicity * g.weights[e.v] * g.weights[e.w];
      parent[find(e.v)] = find(e.w);
    }
  }
  for (int v = 0; v < nv; ++v)
    if (find(v) != find(0)) throw std::invalid_argument("graph: the graph must be connected");

  mpq_class squares = 0;
  for (const auto& w : g.weights) squares += w * w;
  r.t = 1 - squares + adjacency;
  r.star2 = r.directed_edges - adjacency;
  r.sigma_xb = r.directed_edges - r.star2;
  r.sigma_y = 1 - squares;
  r.identity_holds = (r.sigma_xb + r.sigma_y == r.t);
  if (r.has_loops) {
    r.diagnostics.push_back("loops present: each loop counts as one self-opposite directed edge");
  }
  return r;
}

// ---------------------------------------------------------------------------
// ε-regularised kernels

namespace {

// Breakpoints resolving features of width ε around t.
std::vector<double> peak_cuts(double t, double eps) {
  std::vector<double> cuts{t};
  for (double k : {1.0, 10.0, 100.0, 1000.0}) {
    cuts.push_back(t - k * eps);
    cuts.push_back(t + k * eps);
  }
  return cuts;
}

struct Accumulator {
  bool converged = true;
  double add(const QuadResult& q) {
    converged = converged && q.converged;
    return q.value;
  }
};

}  // namespace

EpsKernelResult eps_kernel(const MeasureModel& m, double eps, int grid_points, double tol) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("eps must be positive");
  EpsKernelResult r;
  r.eps = eps;
  const double e2 = eps * eps;
  const double e4 = e2 * e2;
  const auto& atoms = m.atoms();
  const Density& rho = m.density();
  Accumulator acc;

  auto kernel = [&](double u) {
    const double d = u * u + e2;
    return e4 / (d * d);
  };
  // Atom–atom pairs.
  for (const auto& a : atoms)
    for (const auto& b : atoms) r.bound += a.mass * b.mass * kernel(a.location - b.location);
  // Atom–density pairs (counted twice by symmetry) and density–density.
  for (const auto& a : atoms) {
    r.bound += 2.0 * a.mass *
               acc.add(rho.integrate([&](double s) { return kernel(a.location - s); }, tol,
                                     peak_cuts(a.location, eps), true));
  }
  if (rho.mass > 0.0) {
    auto inner = [&](double t) {
      return acc.add(rho.integrate([&](double s) { return kernel(t - s); }, tol, peak_cuts(t, eps), true));
    };
    r.bound += acc.add(rho.integrate(inner, tol, {}, true));
  }

  auto g = [&](double t) {
    double v = 0.0;
    for (const auto& a : atoms) {
      const double u = t - a.location;
      v += a.mass * u / (u * u + e2);
    }
    if (rho.mass > 0.0) {
      v += acc.add(rho.integrate([&](double s) { return (t - s) / ((t - s) * (t - s) + e2); }, tol,
                                 peak_cuts(t, eps), true));
    }
    return 2.0 * v;
  };
  double norm2 = 0.0;
  for (const auto& a : atoms) {
    const double ga = g(a.location);
    r.g_atoms.emplace_back(a.location, ga);
    norm2 += a.mass * ga * ga;
  }
  if (rho.mass > 0.0) {
    const double lo = rho.lo(), hi = rho.hi();
    for (int k = 0; k < grid_points; ++k) {
      const double t = lo + (hi - lo) * (k + 0.5) / grid_points;
      r.g_grid.emplace_back(t, g(t));
    }
    norm2 += acc.add(rho.integrate([&](double t) {
      const double v = g(t);
      return v * v;
    }, std::max(tol, 1e-9), {}, true));
  }
  r.g_norm = std::sqrt(std::max(0.0, norm2));
  r.converged = acc.converged;
  if (!r.converged) r.diagnostics.push_back("quadrature did not converge to the requested tolerance");
  return r;
}

// ---------------------------------------------------------------------------
// Logarithmic energy

LogEnergyResult log_energy(const MeasureModel& m, double tol) {
  LogEnergyResult r;
  if (!m.atoms().empty()) {
    r.minus_infinity = true;
    r.value = -std::numeric_limits<double>::infinity();
    r.diagnostics.push_back("atom on the diagonal: log 0 has positive mass");
    return r;
  }
  const Density& rho = m.density();
  Accumulator acc;
  // ∫ log|x − y| ρ(y) dy, split at the singular point; u = u₀ + δ with
  // δ = ±L s³ turns the logarithmic singularity into a bounded integrand. The
  // offset δ is passed along so that |x − y| never suffers cancellation. The
  // semicircle is handled in the angle y = c + r cos θ, which also removes its
  // square-root edges.
  auto split_log = [&](double u0, double lo, double hi, const std::function<double(double, double)>& g) {
    double v = 0.0;
    for (double end : {lo, hi}) {
      const double len = std::fabs(end - u0);
      if (len == 0.0) continue;
      const double dir = end > u0 ? 1.0 : -1.0;
      v += acc.add(integrate_adaptive(
          [&](double s) {
            const double delta = dir * len * s * s * s;
            return s == 0.0 ? 0.0 : 3.0 * len * s * s * g(std::clamp(u0 + delta, lo, hi), delta);
          },
          0.0, 1.0, 1e-2 * tol));
    }
    return v;
  };
  auto inner = [&](double x) {
    if (rho.kind == Density::Kind::semicircle) {
      const double w = rho.mass * 2.0 / std::numbers::pi;
      const double th0 = std::acos(std::clamp((x - rho.center) / rho.radius, -1.0, 1.0));
      return split_log(th0, 0.0, std::numbers::pi, [&](double th, double delta) {
        // x − y = r (cos θ₀ − cos θ) = 2 r sin((θ + θ₀)/2) sin((θ − θ₀)/2)
        const double d = std::fabs(2.0 * rho.radius * std::sin(0.5 * (th + th0)) * std::sin(0.5 * delta));
        const double s = std::sin(th);
        return d == 0.0 ? 0.0 : w * s * s * std::log(d);
      });
    }
    return split_log(x, rho.lo(), rho.hi(), [&](double y, double delta) {
      return delta == 0.0 ? 0.0 : rho.pdf(y) * std::log(std::fabs(delta));
    });
  };
  r.value = acc.add(rho.integrate(inner, tol, {}, true));
  r.converged = acc.converged;
  if (!r.converged) r.diagnostics.push_back("quadrature did not converge to the requested tolerance");
  return r;
}

LogEnergyResult staircase_log_energy(int level) {
  if (level < 1) throw std::invalid_argument("level must be at least 1");
  if (level > 60) throw std::invalid_argument("level must be at most 60");
  LogEnergyResult r;
  const GaussRule& rule = gauss_legendre(16);
  // log λ_n = −12ⁿ is kept exactly; λ_n itself underflows from n = 3 on.
  auto log_length = [](int n) { return -std::pow(12.0, n); };
  auto start = [](int n) { return 1.0 - std::ldexp(1.0, 1 - n); };
  auto mass = [](int n) { return std::ldexp(1.0, -n); };
  // Mean of log|x − y| for x, y uniform on I_m and I_n (m ≠ n); the intervals
  // are separated, so a tensor Gauss rule is accurate.
  auto cross_mean = [&](int m, int n) {
    const double lm = std::exp(log_length(m)), ln = std::exp(log_length(n));
    double s = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double x = start(m) + 0.5 * lm * (rule.nodes[i] + 1.0);
      for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
        const double y = start(n) + 0.5 * ln * (rule.nodes[j] + 1.0);
        s += 0.25 * rule.weights[i] * rule.weights[j] * std::log(std::fabs(x - y));
      }
    }
    return s;
  };
  double total = 0.0;
  for (int n = 1; n <= level; ++n) {
    // Uniform law on an interval of length λ: mean log-distance = log λ − 3/2.
    total += mass(n) * mass(n) * (log_length(n) - 1.5);
    for (int k = 1; k < n; ++k) total += 2.0 * mass(k) * mass(n) * cross_mean(k, n);
    r.partial_sums.emplace_back(n, total);
  }
  r.value = total;
  return r;
}

// ---------------------------------------------------------------------------
// JSON inputs

mpq_class rational_from_json(const nlohmann::json& j, const std::string& field) {
  try {
    if (j.is_string()) return QComplex::parse_rational(j.get<std::string>());
    if (j.is_number_integer()) return mpq_class(j.get<long>());
    if (j.is_number()) return rationalize(j.get<double>());
  } catch (const std::exception& e) {
    throw SpecError(field + ": " + e.what());
  }
  throw SpecError(field + ": expected a number or rational string");
}

GraphSpec graph_from_json(const nlohmann::json& j) {
  GraphSpec g;
  if (!j.is_object() || !j.contains("vertices")) throw SpecError("graph.vertices: missing field");
  if (!j.contains("edges")) throw SpecError("graph.edges: missing field");
  const auto& jv = j.at("vertices");
  for (std::size_t v = 0; v < jv.size(); ++v) {
    g.weights.push_back(rational_from_json(jv[v], "graph.vertices[" + std::to_string(v) + "]"));
  }
  const auto& je = j.at("edges");
  for (std::size_t e = 0; e < je.size(); ++e) {
    const std::string f = "graph.edges[" + std::to_string(e) + "]";
    if (!je[e].is_array() || je[e].size() < 2 || je[e].size() > 3) throw SpecError(f + ": expected [v, w] or [v, w, n]");
    GraphEdge edge{je[e][0].get<int>() - 1, je[e][1].get<int>() - 1, je[e].size() == 3 ? je[e][2].get<long>() : 1};
    g.edges.push_back(edge);
  }
  return g;
}

std::vector<RadulescuPair> radulescu_from_json(const nlohmann::json& j) {
  std::vector<RadulescuPair> out;
  if (!j.is_object() || !j.contains("pairs")) throw SpecError("radulescu.pairs: missing field");
  const auto& jp = j.at("pairs");
  for (std::size_t k = 0; k < jp.size(); ++k) {
    const std::string f = "radulescu.pairs[" + std::to_string(k) + "]";
    if (!jp[k].contains("tau_e")) throw SpecError(f + ".tau_e: missing field");
    RadulescuPair p;
    p.tau_e = rational_from_json(jp[k].at("tau_e"), f + ".tau_e");
    p.equal = jp[k].value("equal", !jp[k].contains("tau_f"));
    p.tau_f = jp[k].contains("tau_f") ? rational_from_json(jp[k].at("tau_f"), f + ".tau_f") : p.tau_e;
    out.push_back(p);
  }
  return out;
}

}  // namespace freestein
