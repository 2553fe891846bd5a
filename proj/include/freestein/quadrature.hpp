#pragma once

#include <functional>
#include <vector>

namespace freestein {

/// Gauss–Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached n-point rule computed by Newton iteration on P_n.
const GaussRule& gauss_legendre(int n);

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // |difference| between the last two refinements
  int panels = 0;
  bool converged = false;
};

/// Composite Gauss–Legendre on [a, b] with `order` points per panel; the panel
/// count doubles until successive estimates differ by at most
/// tol * max(1, |value|).
QuadResult integrate_composite(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-12, int order = 20, int max_panels = 1 << 14);

/// Recursive bisection comparing an n-point rule against the sum of two
/// half-interval rules; suited to integrands with endpoint singularities.
QuadResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                              double tol = 1e-12, int order = 15, int max_depth = 50);

}  // namespace freestein
