#include "freestein/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace freestein {

const GaussRule& gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("Gauss-Legendre order must be positive");
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  GaussRule rule;
  if (n == 1) {
    rule.nodes = {0.0};
    rule.weights = {2.0};
    return cache.emplace(n, std::move(rule)).first->second;
  }
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = rule.weights[n - 1 - i] = w;
  }
  return cache.emplace(n, std::move(rule)).first->second;
}

namespace {

double panel_sum(const std::function<double(double)>& f, double a, double b, int panels,
                 const GaussRule& rule) {
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    const double mid = lo + 0.5 * h;
    double s = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) s += rule.weights[k] * f(mid + 0.5 * h * rule.nodes[k]);
    total += 0.5 * h * s;
  }
  return total;
}

double single(const std::function<double(double)>& f, double a, double b, const GaussRule& rule) {
  return panel_sum(f, a, b, 1, rule);
}

double adaptive_step(const std::function<double(double)>& f, double a, double b, double whole,
                     double tol, int depth, const GaussRule& rule, bool& ok, int& panels) {
  const double m = 0.5 * (a + b);
  const double left = single(f, a, m, rule);
  const double right = single(f, m, b, rule);
  const double refined = left + right;
  // Differences below round-off cannot be resolved by further bisection.
  const double target = std::max(tol, 1e-15 * (std::fabs(left) + std::fabs(right)));
  if (std::fabs(refined - whole) <= target || depth <= 0 || m <= a || m >= b) {
    if (std::fabs(refined - whole) > target) ok = false;
    panels += 2;
    return refined;
  }
  return adaptive_step(f, a, m, left, 0.5 * tol, depth - 1, rule, ok, panels) +
         adaptive_step(f, m, b, right, 0.5 * tol, depth - 1, rule, ok, panels);
}

}  // namespace

QuadResult integrate_composite(const std::function<double(double)>& f, double a, double b,
                               double tol, int order, int max_panels) {
  const GaussRule& rule = gauss_legendre(order);
  QuadResult r;
  if (a == b) {
    r.converged = true;
    return r;
  }
  int panels = 1;
  double prev = panel_sum(f, a, b, panels, rule);
  while (panels < max_panels) {
    panels *= 2;
    const double next = panel_sum(f, a, b, panels, rule);
    r.error = std::fabs(next - prev);
    r.value = next;
    r.panels = panels;
    if (r.error <= tol * std::max(1.0, std::fabs(next))) {
      r.converged = true;
      return r;
    }
    prev = next;
  }
  return r;
}

QuadResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                              double tol, int order, int max_depth) {
  const GaussRule& rule = gauss_legendre(order);
  QuadResult r;
  if (a == b) {
    r.converged = true;
    return r;
  }
  bool ok = true;
  int panels = 0;
  const double whole = single(f, a, b, rule);
  r.value = adaptive_step(f, a, b, whole, tol, max_depth, rule, ok, panels);
  r.error = std::fabs(r.value - whole);
  r.panels = panels;
  r.converged = ok;
  return r;
}

}  // namespace freestein
