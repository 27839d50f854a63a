#pragma once
// Linearized equal-mass, equal-length double pendulum in rescaled time tau = sqrt(g/l) t.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <utility>

#include "pendavg/constants.hpp"
#include "pendavg/error.hpp"
#include "pendavg/expr.hpp"

namespace pendavg {

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;

struct PhysicalParams {
  double mass = 1.0;    // kg
  double length = 1.0;  // m
  double gravity = 9.8; // m/s^2

  void validate() const {
    if (!(mass > 0.0) || !(length > 0.0) || !(gravity > 0.0))
      throw ConfigError("physical parameters must be positive (m, l, g)");
  }
};

struct Reduction {
  double a;           // g / l
  double time_scale;  // tau = time_scale * t
};

/// Collapses the equal-mass, equal-length pendulum to the single parameter a = g/l.
/// The mass cancels once the equations are divided by m l.
inline Reduction reduce(const PhysicalParams& params) {
  params.validate();
  const double a = params.gravity / params.length;
  return {a, std::sqrt(a)};
}

enum class ModeId { Mode1, Mode2 };

inline double mode_frequency(ModeId m) {
  return m == ModeId::Mode1 ? constants::omega1 : constants::omega2;
}
inline double mode_period(ModeId m) {
  return m == ModeId::Mode1 ? constants::period1 : constants::period2;
}
inline const char* mode_name(ModeId m) { return m == ModeId::Mode1 ? "mode1" : "mode2"; }

inline ModeId parse_mode(const std::string& text) {
  if (text == "mode1" || text == "1") return ModeId::Mode1;
  if (text == "mode2" || text == "2") return ModeId::Mode2;
  throw ConfigError("mode must be 'mode1' or 'mode2', got '" + text + "'");
}

/// Forcing in p:q resonance with a normal mode; p and q must be coprime.
class Resonance {
public:
  Resonance() = default;
  Resonance(int p, int q) : p_(p), q_(q) {
    if (p <= 0 || q <= 0) throw ConfigError("resonance p and q must be positive integers");
    if (std::gcd(p, q) != 1)
      throw ConfigError("resonance " + std::to_string(p) + ":" + std::to_string(q) +
                        " is not in lowest terms (gcd(p, q) must be 1)");
  }
  int p() const { return p_; }
  int q() const { return q_; }

private:
  int p_ = 1;
  int q_ = 1;
};

/// State in original coordinates (x, y, z, w) = (th1, th1', th2, th2').
struct State4 {
  double th1 = 0.0;
  double th1d = 0.0;
  double th2 = 0.0;
  double th2d = 0.0;

  Vec4 vec() const { return {th1, th1d, th2, th2d}; }
  static State4 from(const Vec4& v) { return {v(0), v(1), v(2), v(3)}; }
};

/// State in the real Jordan coordinates (X, Y, Z, W).
struct ModalState {
  double X = 0.0;
  double Y = 0.0;
  double Z = 0.0;
  double W = 0.0;

  Vec4 vec() const { return {X, Y, Z, W}; }
  static ModalState from(const Vec4& v) { return {v(0), v(1), v(2), v(3)}; }
};

// ---------------------------------------------------------------------------
// Modal change of variables

namespace detail {

inline Mat4 build_modal_matrix() {
  using constants::sqrt2;
  Mat4 P = Mat4::Zero();
  P(0, 0) = std::sqrt(1.0 - 1.0 / sqrt2);
  P(0, 2) = std::sqrt(2.0 - sqrt2) / 2.0;
  P(1, 1) = 1.0 / sqrt2;
  P(1, 3) = 0.5;
  P(2, 0) = -std::sqrt(1.0 + 1.0 / sqrt2);
  P(2, 2) = std::sqrt(2.0 + sqrt2) / 2.0;
  P(3, 1) = -1.0 / sqrt2;
  P(3, 3) = 0.5;
  return P;
}

// Rows are the closed-form back-substitutions for (x, y, z, w) in terms of (X, Y, Z, W).
inline Mat4 build_inverse_modal_matrix() {
  using constants::sqrt2;
  Mat4 Q = Mat4::Zero();
  Q(0, 0) = 1.0 / std::sqrt(4.0 - 2.0 * sqrt2);
  Q(0, 2) = -1.0 / std::sqrt(2.0 * (2.0 + sqrt2));
  Q(1, 1) = 1.0 / sqrt2;
  Q(1, 3) = -1.0 / sqrt2;
  Q(2, 0) = 1.0 / std::sqrt(2.0 - sqrt2);
  Q(2, 2) = 1.0 / std::sqrt(2.0 + sqrt2);
  Q(3, 1) = 1.0;
  Q(3, 3) = 1.0;
  return Q;
}

struct ModalMatrices {
  Mat4 forward;
  Mat4 inverse;

  ModalMatrices() : forward(build_modal_matrix()), inverse(build_inverse_modal_matrix()) {
    // Two independent transcriptions of the same change of variables must agree.
    const double err = (forward * inverse - Mat4::Identity()).cwiseAbs().maxCoeff();
    if (err > 1e-12)
      throw Error("modal change of variables is inconsistent with its closed-form inverse (error " +
                  std::to_string(err) + ")");
  }
};

}  // namespace detail

inline const detail::ModalMatrices& modal_matrices() {
  static const detail::ModalMatrices matrices;
  return matrices;
}

inline const Mat4& modal_matrix() { return modal_matrices().forward; }
inline const Mat4& inverse_modal_matrix() { return modal_matrices().inverse; }

inline ModalState modal_transform(const State4& s) {
  return ModalState::from(modal_matrix() * s.vec());
}

inline State4 inverse_modal_transform(const ModalState& m) {
  return State4::from(inverse_modal_matrix() * m.vec());
}

/// Linear part of the first-order system in original coordinates.
inline Mat4 linear_part_original() {
  Mat4 A = Mat4::Zero();
  A(0, 1) = 1.0;
  A(1, 0) = -2.0;
  A(1, 2) = 1.0;
  A(2, 3) = 1.0;
  A(3, 0) = 2.0;
  A(3, 2) = -2.0;
  return A;
}

/// Block generator diag([[0, w1], [-w1, 0]], [[0, w2], [-w2, 0]]).
inline Mat4 linear_part_modal() {
  Mat4 A = Mat4::Zero();
  A(0, 1) = constants::omega1;
  A(1, 0) = -constants::omega1;
  A(2, 3) = constants::omega2;
  A(3, 2) = -constants::omega2;
  return A;
}

// ---------------------------------------------------------------------------
// Perturbation

/// The experiment definition: forcing terms, resonant mode and p:q ratio.
struct PerturbationSpec {
  expr::Expr f1;
  expr::Expr f2;
  ModeId mode = ModeId::Mode1;
  Resonance resonance;
  double epsilon = 0.0;

  /// Forcing period p T / q in tau.
  double forcing_period() const {
    return resonance.p() * mode_period(mode) / resonance.q();
  }
  /// Period of the resonant orbit, p T; the averaging window and shooting period.
  double orbit_period() const { return resonance.p() * mode_period(mode); }
};

inline expr::EvalEnv make_env(double tau, const State4& s) {
  return {tau, s.th1, s.th1d, s.th2, s.th2d};
}

struct ForcingValues {
  double f1;
  double f2;
};

inline ForcingValues eval_forcing(const PerturbationSpec& spec, double tau, const State4& s) {
  const auto env = make_env(tau, s);
  return {spec.f1.eval(env), spec.f2.eval(env)};
}

/// Right-hand side (y, -2x + z + eps F1, w, 2x - 2z + eps F2).
inline Vec4 vector_field_original(double tau, const State4& s, const PerturbationSpec& spec, double eps) {
  Vec4 d(s.th1d, -2.0 * s.th1 + s.th2, s.th2d, 2.0 * s.th1 - 2.0 * s.th2);
  if (eps != 0.0) {
    const auto f = eval_forcing(spec, tau, s);
    d(1) += eps * f.f1;
    d(3) += eps * f.f2;
  }
  return d;
}

struct PeriodicityAudit {
  double max_violation = 0.0;
  bool ok = true;
};

/// Samples |F_k(tau + P, s) - F_k(tau, s)| with P = p T / q on a tau grid and
/// seeded random states in [-1, 1]^4.
inline PeriodicityAudit audit_periodicity(const PerturbationSpec& spec, int tau_points = 32,
                                          int state_points = 16, double tolerance = 1e-9) {
  const double period = spec.forcing_period();
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  PeriodicityAudit audit;
  for (int j = 0; j < state_points; ++j) {
    const State4 s{unit(rng), unit(rng), unit(rng), unit(rng)};
    for (int i = 0; i < tau_points; ++i) {
      const double tau = period * i / tau_points;
      const auto a = eval_forcing(spec, tau, s);
      const auto b = eval_forcing(spec, tau + period, s);
      audit.max_violation = std::max({audit.max_violation, std::abs(a.f1 - b.f1), std::abs(a.f2 - b.f2)});
    }
  }
  audit.ok = audit.max_violation <= tolerance;
  return audit;
}

/// Builds and validates a spec. Throws ConfigError on parse failure or when the
/// forcing is not periodic with period p T / q.
inline PerturbationSpec make_spec(std::string_view f1, std::string_view f2, ModeId mode, int p, int q,
                                  double epsilon = 0.0) {
  PerturbationSpec spec{expr::parse(f1), expr::parse(f2), mode, Resonance(p, q), epsilon};
  PeriodicityAudit audit;
  try {
    audit = audit_periodicity(spec);
  } catch (const EvalError& e) {
    throw ConfigError(std::string("perturbation cannot be evaluated during the periodicity audit: ") + e.what());
  }
  if (!audit.ok)
    throw ConfigError("perturbation is not periodic in tau with period p*T/q = " +
                      std::to_string(spec.forcing_period()) + " (max violation " +
                      std::to_string(audit.max_violation) + ")");
  return spec;
}

// ---------------------------------------------------------------------------
// Closed-form unperturbed solutions

/// Modal state at time tau of the unperturbed orbit in the chosen mode plane,
/// starting from (X0, Y0, 0, 0) or (0, 0, Z0, W0).
inline ModalState unperturbed_modal(ModeId mode, const Vec2& alpha, double tau) {
  const double w = mode_frequency(mode);
  const double c = std::cos(w * tau);
  const double s = std::sin(w * tau);
  const double u = alpha(0) * c + alpha(1) * s;
  const double v = alpha(1) * c - alpha(0) * s;
  return mode == ModeId::Mode1 ? ModalState{u, v, 0.0, 0.0} : ModalState{0.0, 0.0, u, v};
}

/// The T-periodic unperturbed orbit (A, B, C, D)(tau) of the chosen mode in
/// original coordinates.
inline State4 unperturbed_orbit(ModeId mode, const Vec2& alpha, double tau) {
  using constants::sqrt2;
  const double w = mode_frequency(mode);
  const double c = std::cos(w * tau);
  const double s = std::sin(w * tau);
  const double u = alpha(0) * c + alpha(1) * s;
  const double v = alpha(1) * c - alpha(0) * s;
  if (mode == ModeId::Mode1) {
    return {u / std::sqrt(4.0 - 2.0 * sqrt2), v / sqrt2, u / std::sqrt(2.0 - sqrt2), v};
  }
  return {-u / std::sqrt(4.0 + 2.0 * sqrt2), -v / sqrt2, u / std::sqrt(2.0 + sqrt2), v};
}

/// Principal fundamental matrix of the unperturbed modal system: a pair of
/// rotation blocks with angles w1 tau and w2 tau.
inline Mat4 fundamental_matrix(double tau) {
  Mat4 M = Mat4::Zero();
  const double c1 = std::cos(constants::omega1 * tau), s1 = std::sin(constants::omega1 * tau);
  const double c2 = std::cos(constants::omega2 * tau), s2 = std::sin(constants::omega2 * tau);
  M(0, 0) = c1;
  M(0, 1) = s1;
  M(1, 0) = -s1;
  M(1, 1) = c1;
  M(2, 2) = c2;
  M(2, 3) = s2;
  M(3, 2) = -s2;
  M(3, 3) = c2;
  return M;
}

/// Inverse of fundamental_matrix, by transposition of the rotation blocks.
inline Mat4 inverse_fundamental_matrix(double tau) { return fundamental_matrix(tau).transpose(); }

}  // namespace pendavg
