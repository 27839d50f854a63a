#pragma once
// First-order averaging (Malkin bifurcation function) and its instantiation on
// the two normal-mode planes of the pendulum.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "pendavg/constants.hpp"
#include "pendavg/error.hpp"
#include "pendavg/pendulum.hpp"
#include "pendavg/quadrature.hpp"

namespace pendavg {

/// A T-periodic system x' = G0(t, x) + eps G1(t, x) whose unperturbed part has a
/// k-dimensional manifold of T-periodic orbits z_alpha = (alpha, beta(alpha)).
///
/// Coordinates must be ordered so that the manifold parameters come first;
/// the bifurcation function projects onto those k coordinates.
template <int N, int K>
struct AveragingProblem {
  static_assert(K > 0 && K < N);
  using StateN = Eigen::Matrix<double, N, 1>;
  using MatrixN = Eigen::Matrix<double, N, N>;
  using ParamK = Eigen::Matrix<double, K, 1>;

  double period = 0.0;
  /// x(t, z_alpha): the unperturbed orbit through z_alpha.
  std::function<StateN(double, const ParamK&)> flow;
  /// M_{z_alpha}(t): a fundamental matrix of the linearization along that orbit.
  std::function<MatrixN(double, const ParamK&)> fundamental;
  /// G1(t, x).
  std::function<StateN(double, const StateN&)> perturbation;
  int initial_panels = 4;
};

/// Numerical check of the two hypotheses that make the bifurcation function meaningful.
struct HypothesisReport {
  double periodicity_error = 0.0;  // |x(T) - x(0)|_inf
  double upper_right_max = 0.0;    // largest entry of the k x (n-k) block
  double delta_det = 0.0;          // det of the lower-right (n-k) x (n-k) block
  bool ok = false;
};

template <int N, int K>
HypothesisReport check_hypotheses(const AveragingProblem<N, K>& problem,
                                  const typename AveragingProblem<N, K>::ParamK& alpha) {
  HypothesisReport r;
  const auto x0 = problem.flow(0.0, alpha);
  const auto xT = problem.flow(problem.period, alpha);
  r.periodicity_error = (xT - x0).cwiseAbs().maxCoeff();
  const auto difference =
      (problem.fundamental(0.0, alpha).inverse() - problem.fundamental(problem.period, alpha).inverse()).eval();
  r.upper_right_max = difference.template topRightCorner<K, N - K>().cwiseAbs().maxCoeff();
  r.delta_det = difference.template bottomRightCorner<N - K, N - K>().determinant();
  r.ok = r.periodicity_error <= 1e-9 && r.upper_right_max <= 1e-10 && std::abs(r.delta_det) > 1e-8;
  return r;
}

/// xi( (1/T) int_0^T M^{-1}(t) G1(t, x(t, z_alpha)) dt ), each component to an
/// absolute quadrature tolerance `tol`.
template <int N, int K>
typename AveragingProblem<N, K>::ParamK averaged_function(const AveragingProblem<N, K>& problem,
                                                         const typename AveragingProblem<N, K>::ParamK& alpha,
                                                         double tol) {
  const auto hyp = check_hypotheses(problem, alpha);
  if (!hyp.ok)
    throw NumericalError("averaging hypotheses violated: periodicity error " + std::to_string(hyp.periodicity_error) +
                         ", upper-right block " + std::to_string(hyp.upper_right_max) + ", det(Delta) " +
                         std::to_string(hyp.delta_det));
  const double T = problem.period;
  auto integrand = [&](double t) -> Eigen::Matrix<double, K, 1> {
    const auto x = problem.flow(t, alpha);
    const auto g = problem.perturbation(t, x);
    const auto Minv = problem.fundamental(t, alpha).inverse().eval();
    return (Minv.template topRows<K>() * g) / T;
  };
  quadrature::Options opts;
  opts.tolerance = tol;
  opts.initial_panels = problem.initial_panels;
  return quadrature::integrate<K>(integrand, 0.0, T, opts).value;
}

// ---------------------------------------------------------------------------
// Pendulum instantiation

namespace detail {

// Swaps the two modal planes so the resonant plane occupies coordinates 0..1.
inline Mat4 plane_permutation(ModeId mode) {
  if (mode == ModeId::Mode1) return Mat4::Identity();
  Mat4 P = Mat4::Zero();
  P(0, 2) = P(1, 3) = P(2, 0) = P(3, 1) = 1.0;
  return P;
}

}  // namespace detail

/// G1 of the modal system: (0, (sqrt2 F1 + F2)/2, 0, (F2 - sqrt2 F1)/2), with F
/// evaluated at the original coordinates of the modal state.
inline Vec4 modal_perturbation(const PerturbationSpec& spec, double tau, const ModalState& m) {
  const auto f = eval_forcing(spec, tau, inverse_modal_transform(m));
  return {0.0, 0.5 * (constants::sqrt2 * f.f1 + f.f2), 0.0, 0.5 * (f.f2 - constants::sqrt2 * f.f1)};
}

/// The pendulum written as a generic averaging problem on the spec's mode plane
/// over the window [0, p T].
inline AveragingProblem<4, 2> pendulum_problem(const PerturbationSpec& spec) {
  const ModeId mode = spec.mode;
  const Mat4 perm = detail::plane_permutation(mode);
  AveragingProblem<4, 2> problem;
  problem.period = spec.orbit_period();
  problem.initial_panels = 4 * spec.resonance.p();
  problem.flow = [mode, perm](double t, const Vec2& alpha) -> Vec4 {
    return perm * unperturbed_modal(mode, alpha, t).vec();
  };
  problem.fundamental = [perm](double t, const Vec2&) -> Mat4 {
    return perm * fundamental_matrix(t) * perm.transpose();
  };
  problem.perturbation = [spec, perm](double t, const Vec4& x) -> Vec4 {
    return perm * modal_perturbation(spec, t, ModalState::from(perm.transpose() * x));
  };
  return problem;
}

/// Both scalings of the mode bifurcation functions.
///
/// `raw` holds the integrals of sin(w tau) h and cos(w tau) h over [0, p T],
/// with h = +-sqrt2 F1 + F2 on the unperturbed orbit. `canonical` is the
/// generic averaging operator's output, (-c raw_1, c raw_2) with
/// c = w / (4 pi p). The two differ by a nonzero constant, so their zeros coincide.
struct AveragedValues {
  Vec2 raw;
  Vec2 canonical;
};

inline double canonical_prefactor(const PerturbationSpec& spec) {
  return mode_frequency(spec.mode) / (4.0 * constants::pi * spec.resonance.p());
}

inline Vec2 raw_to_canonical(const PerturbationSpec& spec, const Vec2& raw) {
  const double c = canonical_prefactor(spec);
  return {-c * raw(0), c * raw(1)};
}

inline Vec2 canonical_to_raw(const PerturbationSpec& spec, const Vec2& canonical) {
  const double c = canonical_prefactor(spec);
  return {-canonical(0) / c, canonical(1) / c};
}

inline AveragedValues mode_averaged(const PerturbationSpec& spec, const Vec2& alpha, double tol) {
  const ModeId mode = spec.mode;
  const double w = mode_frequency(mode);
  const double sign = mode == ModeId::Mode1 ? 1.0 : -1.0;
  auto integrand = [&](double tau) -> Vec2 {
    const auto f = eval_forcing(spec, tau, unperturbed_orbit(mode, alpha, tau));
    const double h = sign * constants::sqrt2 * f.f1 + f.f2;
    return {std::sin(w * tau) * h, std::cos(w * tau) * h};
  };
  quadrature::Options opts;
  // Raw values are larger than canonical ones by 1/c; scale the tolerance so
  // that the canonical output meets `tol`.
  opts.tolerance = tol / canonical_prefactor(spec);
  opts.initial_panels = 4 * spec.resonance.p();
  const Vec2 raw = quadrature::integrate<2>(integrand, 0.0, spec.orbit_period(), opts).value;
  return {raw, raw_to_canonical(spec, raw)};
}

inline AveragedValues mode1_averaged(const PerturbationSpec& spec, const Vec2& alpha, double tol) {
  if (spec.mode != ModeId::Mode1) throw ConfigError("mode1_averaged requires a mode1 spec");
  return mode_averaged(spec, alpha, tol);
}

inline AveragedValues mode2_averaged(const PerturbationSpec& spec, const Vec2& alpha, double tol) {
  if (spec.mode != ModeId::Mode2) throw ConfigError("mode2_averaged requires a mode2 spec");
  return mode_averaged(spec, alpha, tol);
}

enum class Convention { Canonical, Raw };

/// A bifurcation function alpha -> G(alpha) in R^2 with a finite-difference Jacobian.
class AveragedSystem {
public:
  using Evaluator = std::function<Vec2(const Vec2&)>;

  AveragedSystem(Evaluator evaluator, double tolerance)
      : evaluator_(std::move(evaluator)), tolerance_(tolerance) {}

  Vec2 operator()(const Vec2& alpha) const { return evaluator_(alpha); }

  /// Central differences with step max(1e-6, 1e-6 |alpha|).
  Mat2 jacobian(const Vec2& alpha) const {
    const double h = std::max(1e-6, 1e-6 * alpha.norm());
    Mat2 J;
    for (int j = 0; j < 2; ++j) {
      Vec2 plus = alpha, minus = alpha;
      plus(j) += h;
      minus(j) -= h;
      J.col(j) = (evaluator_(plus) - evaluator_(minus)) / (2.0 * h);
    }
    return J;
  }

  double tolerance() const { return tolerance_; }

private:
  Evaluator evaluator_;
  double tolerance_;
};

inline AveragedSystem make_averaged_system(const PerturbationSpec& spec, double tol,
                                           Convention convention = Convention::Canonical) {
  if (convention == Convention::Raw)
    return AveragedSystem([spec, tol](const Vec2& a) { return mode_averaged(spec, a, tol).raw; }, tol);
  return AveragedSystem([spec, tol](const Vec2& a) { return mode_averaged(spec, a, tol).canonical; }, tol);
}

}  // namespace pendavg
