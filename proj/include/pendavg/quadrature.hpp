#pragma once
// Adaptive composite Gauss-Legendre quadrature for smooth vector-valued integrands.

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "pendavg/error.hpp"

namespace pendavg::quadrature {

inline constexpr int kRuleOrder = 16;
inline constexpr int kMaxPanels = 1 << 16;

struct Rule {
  std::array<double, kRuleOrder> nodes{};
  std::array<double, kRuleOrder> weights{};
};

namespace detail {

// Roots of P_n by Newton iteration from the Chebyshev-like initial guesses.
inline Rule build_gauss_legendre() {
  Rule rule;
  constexpr int n = kRuleOrder;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node for the weight.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

}  // namespace detail

inline const Rule& gauss_legendre() {
  static const Rule rule = detail::build_gauss_legendre();
  return rule;
}

template <int K>
using Vector = Eigen::Matrix<double, K, 1>;

template <int K>
struct Result {
  Vector<K> value;
  Vector<K> error_estimate;
  int panels = 0;
};

struct Options {
  double tolerance = 1e-12;  // absolute, per component
  int initial_panels = 4;
  int max_panels = kMaxPanels;
};

/// Composite rule over `panels` equal panels. `magnitude` accumulates the
/// integral of |f|, used to bound the achievable roundoff.
template <int K, class F>
Vector<K> composite(F&& f, double a, double b, int panels, Vector<K>& magnitude) {
  const Rule& rule = gauss_legendre();
  const double width = (b - a) / panels;
  const double half = 0.5 * width;
  Vector<K> total = Vector<K>::Zero();
  magnitude.setZero();
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * width;
    Vector<K> panel = Vector<K>::Zero();
    for (int i = 0; i < kRuleOrder; ++i) {
      const Vector<K> v = f(mid + half * rule.nodes[i]);
      panel += rule.weights[i] * v;
      magnitude += rule.weights[i] * v.cwiseAbs();
    }
    total += half * panel;
  }
  magnitude *= half;
  return total;
}

/// Integrates f over [a, b], doubling the panel count until successive
/// estimates differ by at most the tolerance in every component (or by the
/// roundoff floor of the integrand). Throws NumericalError at the panel cap.
template <int K, class F>
Result<K> integrate(F&& f, double a, double b, const Options& opts = {}) {
  if (!(opts.tolerance > 0.0)) throw ConfigError("quadrature tolerance must be positive");
  int panels = std::max(1, opts.initial_panels);
  Vector<K> magnitude;
  Vector<K> previous = composite<K>(f, a, b, panels, magnitude);
  for (;;) {
    if (panels * 2 > opts.max_panels)
      throw NumericalError("quadrature did not converge within " + std::to_string(opts.max_panels) + " panels");
    panels *= 2;
    const Vector<K> current = composite<K>(f, a, b, panels, magnitude);
    const Vector<K> diff = (current - previous).cwiseAbs();
    bool converged = true;
    for (int k = 0; k < diff.size(); ++k) {
      const double floor = 64.0 * std::numeric_limits<double>::epsilon() * magnitude(k);
      if (!(diff(k) <= std::max(opts.tolerance, floor))) converged = false;
    }
    if (converged) return {current, diff, panels};
    previous = current;
  }
}

}  // namespace pendavg::quadrature
