#pragma once
// Checks averaging predictions against the full perturbed system by
// fixed-period shooting.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pendavg/error.hpp"
#include "pendavg/integrate.hpp"
#include "pendavg/pendulum.hpp"

namespace pendavg {

/// Shooting cannot proceed: the period map minus identity is (numerically) singular.
class SingularShootingError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

using IntegratorConfig = ode::IntegratorConfig;

/// RK45 with tol = min(1e-12, |eps| 1e-9).
inline IntegratorConfig default_integrator(double eps) {
  return IntegratorConfig::rk45(std::min(1e-12, std::abs(eps) * 1e-9));
}

struct PendulumTrajectory {
  std::vector<double> tau;
  std::vector<State4> states;
  ode::StepStats stats;
};

inline auto pendulum_rhs(const PerturbationSpec& spec, double eps) {
  return [&spec, eps](double tau, const Vec4& x) -> Vec4 {
    return vector_field_original(tau, State4::from(x), spec, eps);
  };
}

/// Flow of the perturbed pendulum from tau0 to tau1.
inline State4 flow(const PerturbationSpec& spec, double eps, const State4& x0, double tau0, double tau1,
                   const IntegratorConfig& config, ode::StepStats* stats = nullptr) {
  return State4::from(ode::propagate(pendulum_rhs(spec, eps), tau0, tau1, x0.vec(), config, stats));
}

/// Trajectory sampled at `samples` equally spaced times over [tau0, tau1].
inline PendulumTrajectory integrate(const PerturbationSpec& spec, double eps, const State4& x0, double tau0,
                                    double tau1, const IntegratorConfig& config, int samples) {
  auto traj = ode::integrate(pendulum_rhs(spec, eps), tau0, tau1, x0.vec(), config, samples);
  PendulumTrajectory out;
  out.tau = std::move(traj.t);
  out.states.reserve(traj.x.size());
  for (const auto& v : traj.x) out.states.push_back(State4::from(v));
  out.stats = traj.stats;
  return out;
}

/// Initial state at tau = 0 of the unperturbed orbit selected by a zero of the
/// bifurcation function.
inline State4 predicted_initial_state(ModeId mode, const Vec2& alpha_star) {
  return unperturbed_orbit(mode, alpha_star, 0.0);
}

struct PeriodicOrbit {
  double epsilon = 0.0;
  double period = 0.0;
  State4 initial_state;
  double residual = 0.0;  // |Phi_period(x0) - x0|
  std::vector<std::pair<double, State4>> samples;
  State4 predicted_initial;
  double distance_to_prediction = 0.0;
  int iterations = 0;
  double condition = 0.0;  // of the final displacement-map Jacobian
};

struct ShootingOptions {
  double tolerance = 1e-9;
  int max_iterations = 25;
  double fd_step = 1e-7;  // relative to max(1, |x_i|)
  double condition_limit = 1e12;
  int samples = 257;
};

/// Damped Newton on x -> Phi_period(x) - x with a forward-difference monodromy
/// Jacobian. `guess` is also recorded as the prediction.
inline PeriodicOrbit shoot_periodic(const PerturbationSpec& spec, double eps, const State4& guess, double period,
                                    const IntegratorConfig& config, const ShootingOptions& opts = {}) {
  if (eps == 0.0)
    throw SingularShootingError(
        "epsilon too small for direct shooting: at eps = 0 the period map is the identity on the resonant plane");
  if (!(period > 0.0)) throw ConfigError("shooting period must be positive");
  const Vec4 g0 = guess.vec();
  if (!g0.allFinite()) throw ConfigError("shooting guess must be finite");

  auto displacement = [&](const Vec4& x) -> Vec4 {
    return flow(spec, eps, State4::from(x), 0.0, period, config).vec() - x;
  };

  PeriodicOrbit orbit;
  orbit.epsilon = eps;
  orbit.period = period;
  orbit.predicted_initial = guess;

  Vec4 x = g0;
  Vec4 r = displacement(x);
  double res = r.norm();
  int iter = 0;
  double condition = 0.0;
  while (res > opts.tolerance) {
    if (iter >= opts.max_iterations)
      throw NumericalError("shooting did not converge in " + std::to_string(opts.max_iterations) +
                           " iterations (residual " + std::to_string(res) + ")");
    Mat4 J;
    for (int j = 0; j < 4; ++j) {
      const double h = opts.fd_step * std::max(1.0, std::abs(x(j)));
      Vec4 xp = x;
      xp(j) += h;
      J.col(j) = (displacement(xp) - r) / h;
    }
    Eigen::JacobiSVD<Mat4> svd(J);
    const auto sv = svd.singularValues();
    condition = sv(3) > 0.0 ? sv(0) / sv(3) : std::numeric_limits<double>::infinity();
    if (!(condition <= opts.condition_limit))
      throw SingularShootingError("epsilon too small for direct shooting: displacement Jacobian condition " +
                                  std::to_string(condition) + " exceeds " + std::to_string(opts.condition_limit));
    const Vec4 step = -J.partialPivLu().solve(r);
    double lambda = 1.0;
    bool improved = false;
    for (int halving = 0; halving < 20; ++halving, lambda *= 0.5) {
      const Vec4 xn = x + lambda * step;
      const Vec4 rn = displacement(xn);
      if (rn.norm() < res) {
        x = xn;
        r = rn;
        res = rn.norm();
        improved = true;
        break;
      }
    }
    if (!improved)
      throw NumericalError("shooting stalled at residual " + std::to_string(res) + " (no descent along Newton step)");
    ++iter;
  }

  orbit.initial_state = State4::from(x);
  orbit.residual = res;
  orbit.iterations = iter;
  orbit.condition = condition;
  orbit.distance_to_prediction = (x - g0).norm();
  if (opts.samples > 0) {
    const auto traj = integrate(spec, eps, orbit.initial_state, 0.0, period, config, opts.samples);
    orbit.samples.reserve(traj.tau.size());
    for (std::size_t i = 0; i < traj.tau.size(); ++i) orbit.samples.emplace_back(traj.tau[i], traj.states[i]);
  }
  return orbit;
}

/// Outcome of shooting from one zero at one epsilon; failures are recorded, not thrown.
struct Verification {
  Vec2 alpha_star = Vec2::Zero();
  double epsilon = 0.0;
  std::optional<PeriodicOrbit> orbit;
  std::string error;
};

/// Shoots from the averaging prediction of `alpha_star` for every epsilon.
/// Results are sorted by (epsilon, alpha).
inline std::vector<Verification> verify_zero(const PerturbationSpec& spec, const Vec2& alpha_star,
                                             const std::vector<double>& epsilons, const ShootingOptions& opts = {}) {
  std::vector<Verification> out;
  const State4 guess = predicted_initial_state(spec.mode, alpha_star);
  for (double eps : epsilons) {
    Verification v{alpha_star, eps, std::nullopt, {}};
    try {
      v.orbit = shoot_periodic(spec, eps, guess, spec.orbit_period(), default_integrator(eps), opts);
    } catch (const NumericalError& e) {
      v.error = e.what();
    }
    out.push_back(std::move(v));
  }
  std::sort(out.begin(), out.end(), [](const Verification& a, const Verification& b) {
    if (a.epsilon != b.epsilon) return a.epsilon < b.epsilon;
    if (a.alpha_star(0) != b.alpha_star(0)) return a.alpha_star(0) < b.alpha_star(0);
    return a.alpha_star(1) < b.alpha_star(1);
  });
  return out;
}

}  // namespace pendavg
