#pragma once
// Explicit Runge-Kutta integrators for x' = f(t, x) with fixed-size Eigen states.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "pendavg/error.hpp"

namespace pendavg::ode {

enum class Method { RK4, RK45 };

struct IntegratorConfig {
  Method method = Method::RK45;
  double step = 1e-3;  // RK4 step; RK45 initial step hint
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  long max_steps = 5'000'000;

  void validate() const {
    if (method == Method::RK4 && !(step > 0.0)) throw ConfigError("RK4 step must be positive");
    if (method == Method::RK45 && (!(abs_tol > 0.0) || !(rel_tol > 0.0)))
      throw ConfigError("RK45 tolerances must be positive");
    if (max_steps < 1) throw ConfigError("max_steps must be at least 1");
  }

  static IntegratorConfig rk4(double h) {
    IntegratorConfig c;
    c.method = Method::RK4;
    c.step = h;
    return c;
  }
  static IntegratorConfig rk45(double tol) {
    IntegratorConfig c;
    c.method = Method::RK45;
    c.abs_tol = c.rel_tol = tol;
    return c;
  }
};

struct StepStats {
  long accepted = 0;
  long rejected = 0;
  long evaluations = 0;
};

namespace detail {

template <class F, class V>
V rk4_step(F& f, double t, const V& x, double h) {
  const V k1 = f(t, x);
  const V k2 = f(t + 0.5 * h, (x + 0.5 * h * k1).eval());
  const V k3 = f(t + 0.5 * h, (x + 0.5 * h * k2).eval());
  const V k4 = f(t + h, (x + h * k3).eval());
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Dormand-Prince 5(4) tableau.
struct DP {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  // b - b_hat
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
};

}  // namespace detail

/// Advances x from t0 to t1 (t1 >= t0). Throws NumericalError on step exhaustion
/// or when the step size underflows.
template <class F, class V>
V propagate(F&& f, double t0, double t1, V x, const IntegratorConfig& config, StepStats* stats = nullptr) {
  config.validate();
  StepStats local;
  StepStats& st = stats ? *stats : local;
  const double span = t1 - t0;
  if (span < 0.0) throw ConfigError("integration span must be non-negative");
  if (span == 0.0) return x;

  if (config.method == Method::RK4) {
    const long n = std::max(1L, static_cast<long>(std::ceil(span / config.step - 1e-9)));
    if (n > config.max_steps) throw NumericalError("RK4 step budget exhausted");
    const double h = span / n;
    for (long i = 0; i < n; ++i) x = detail::rk4_step(f, t0 + i * h, x, h);
    st.accepted += n;
    st.evaluations += 4 * n;
    return x;
  }

  using D = detail::DP;
  auto error_norm = [&](const V& err, const V& a, const V& b) {
    double m = 0.0;
    for (int i = 0; i < err.size(); ++i) {
      const double sc = config.abs_tol + config.rel_tol * std::max(std::abs(a(i)), std::abs(b(i)));
      m = std::max(m, std::abs(err(i)) / sc);
    }
    return m;
  };

  double t = t0;
  double h = std::min(config.step, span);
  V k1 = f(t, x);
  ++st.evaluations;
  long steps = 0;
  while (t < t1) {
    if (++steps > config.max_steps) throw NumericalError("RK45 step budget exhausted");
    const bool last = t + h >= t1;
    if (last) h = t1 - t;
    const V k2 = f(t + D::c2 * h, (x + h * (D::a21 * k1)).eval());
    const V k3 = f(t + D::c3 * h, (x + h * (D::a31 * k1 + D::a32 * k2)).eval());
    const V k4 = f(t + D::c4 * h, (x + h * (D::a41 * k1 + D::a42 * k2 + D::a43 * k3)).eval());
    const V k5 = f(t + D::c5 * h, (x + h * (D::a51 * k1 + D::a52 * k2 + D::a53 * k3 + D::a54 * k4)).eval());
    const V k6 =
        f(t + h, (x + h * (D::a61 * k1 + D::a62 * k2 + D::a63 * k3 + D::a64 * k4 + D::a65 * k5)).eval());
    const V xn = x + h * (D::b1 * k1 + D::b3 * k3 + D::b4 * k4 + D::b5 * k5 + D::b6 * k6);
    const V k7 = f(t + h, xn);
    st.evaluations += 6;
    const V err = h * (D::e1 * k1 + D::e3 * k3 + D::e4 * k4 + D::e5 * k5 + D::e6 * k6 + D::e7 * k7);
    const double en = error_norm(err, x, xn);
    const double factor = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
    if (en <= 1.0) {
      t = last ? t1 : t + h;
      x = xn;
      k1 = k7;
      ++st.accepted;
      h *= factor;
    } else {
      ++st.rejected;
      h *= std::min(1.0, factor);
    }
    if (t < t1 && !(h > 1e-14 * std::max(1.0, std::abs(t))))
      throw NumericalError("RK45 step size underflow at t = " + std::to_string(t));
  }
  return x;
}

template <class V>
struct Trajectory {
  std::vector<double> t;
  std::vector<V> x;
  StepStats stats;
};

/// Integrates over [t0, t1] and records the state at `samples` equally spaced
/// times including both endpoints (samples >= 2), or at t0 only (samples == 1).
template <class F, class V>
Trajectory<V> integrate(F&& f, double t0, double t1, const V& x0, const IntegratorConfig& config, int samples) {
  if (samples < 1) throw ConfigError("sample count must be at least 1");
  Trajectory<V> traj;
  traj.t.push_back(t0);
  traj.x.push_back(x0);
  V x = x0;
  for (int i = 1; i < samples; ++i) {
    const double a = t0 + (t1 - t0) * (i - 1) / (samples - 1);
    const double b = i == samples - 1 ? t1 : t0 + (t1 - t0) * i / (samples - 1);
    x = propagate(f, a, b, x, config, &traj.stats);
    traj.t.push_back(b);
    traj.x.push_back(x);
  }
  return traj;
}

}  // namespace pendavg::ode
