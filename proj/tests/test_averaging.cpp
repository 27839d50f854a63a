#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "pendavg/averaging.hpp"

using namespace pendavg;

namespace {

PerturbationSpec corollary1(int p = 1) {
  return make_spec("0", "(1 - th1^2) * sin(w1 * tau)", ModeId::Mode1, p, 1);
}
PerturbationSpec corollary2() { return make_spec("th2d + th1^2 * cos(w2 * tau)", "0", ModeId::Mode2, 1, 1); }

void cor1_forcing(double tau, const double x[4], double& f1, double& f2) {
  f1 = 0.0;
  f2 = (1 - x[0] * x[0]) * std::sin(oracle::kW1 * tau);
}

void cor2_forcing(double tau, const double x[4], double& f1, double& f2) {
  f1 = x[3] + x[0] * x[0] * std::cos(oracle::kW2 * tau);
  f2 = 0.0;
}

}  // namespace

TEST(ClosedForm, Corollary1OnGrid) {
  const auto spec = corollary1();
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 20; ++j) {
      const Vec2 a(-3.0 + 6.0 * i / 19, -3.0 + 6.0 * j / 19);
      double g1, g2;
      oracle::corollary1_closed_form(a(0), a(1), g1, g2);
      const Vec2 raw = mode1_averaged(spec, a, 1e-13).raw;
      worst = std::max({worst, std::abs(raw(0) - g1), std::abs(raw(1) - g2)});
    }
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(ClosedForm, Corollary2OnGrid) {
  const auto spec = corollary2();
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 20; ++j) {
      const Vec2 a(-5.0 + 10.0 * i / 19, -30.0 + 35.0 * j / 19);
      double g1, g2;
      oracle::corollary2_closed_form(a(0), a(1), g1, g2);
      const Vec2 raw = mode2_averaged(spec, a, 1e-13).raw;
      worst = std::max({worst, std::abs(raw(0) - g1), std::abs(raw(1) - g2)});
    }
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(ClosedForm, Corollary2PrintedCoefficientSimplifies) {
  EXPECT_NEAR(std::sqrt((10 - 7 * oracle::kSqrt2) * (2 + oracle::kSqrt2)), 2 - oracle::kSqrt2, 1e-15);
}

TEST(ModeAveraged, ValueAtOriginInBothScalings) {
  const auto v = mode1_averaged(corollary1(), {0, 0}, 1e-13);
  EXPECT_NEAR(v.raw(0), oracle::kPiOverW1, 1e-12);
  EXPECT_NEAR(v.raw(1), 0.0, 1e-12);
  EXPECT_NEAR(v.canonical(0), -0.25, 1e-13);
  EXPECT_NEAR(v.canonical(1), 0.0, 1e-13);
}

TEST(ModeAveraged, AgreesWithTrapezoidOracle) {
  const auto s1 = corollary1();
  const auto s2 = corollary2();
  for (const Vec2& a : {Vec2(0.3, -1.2), Vec2(2.0, 0.5), Vec2(-0.7, 4.0)}) {
    double g1, g2;
    oracle::trapezoid_raw(1, 1, cor1_forcing, a(0), a(1), g1, g2);
    const Vec2 r1 = mode1_averaged(s1, a, 1e-13).raw;
    EXPECT_NEAR(r1(0), g1, 1e-11);
    EXPECT_NEAR(r1(1), g2, 1e-11);
    oracle::trapezoid_raw(2, 1, cor2_forcing, a(0), a(1), g1, g2);
    const Vec2 r2 = mode2_averaged(s2, a, 1e-13).raw;
    EXPECT_NEAR(r2(0), g1, 1e-11);
    EXPECT_NEAR(r2(1), g2, 1e-11);
  }
}

TEST(ModeAveraged, ModeMismatchIsRejected) {
  EXPECT_THROW(mode2_averaged(corollary1(), {1, 1}, 1e-12), ConfigError);
  EXPECT_THROW(mode1_averaged(corollary2(), {1, 1}, 1e-12), ConfigError);
}

TEST(ModeAveraged, ZeroAndConstantForcing) {
  const auto zero = make_spec("0", "0", ModeId::Mode1, 1, 1);
  EXPECT_EQ(mode_averaged(zero, {1.5, -2}, 1e-12).raw, Vec2::Zero());
  // A constant cannot resonate: both moments of sin and cos vanish.
  const auto constant = make_spec("0", "1", ModeId::Mode2, 1, 1);
  const Vec2 g = mode_averaged(constant, {0.4, 0.2}, 1e-12).canonical;
  EXPECT_NEAR(g(0), 0.0, 1e-13);
  EXPECT_NEAR(g(1), 0.0, 1e-13);
}

TEST(ModeAveraged, ToleranceMonotonicity) {
  for (const auto& spec : {corollary1(), corollary2()}) {
    for (const Vec2& a : {Vec2(1.0, -0.5), Vec2(0.2, 3.0), Vec2(-2.5, -20.0)}) {
      const Vec2 loose = mode_averaged(spec, a, 1e-10).canonical;
      const Vec2 tight = mode_averaged(spec, a, 1e-12).canonical;
      EXPECT_LE((loose - tight).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
}

TEST(ModeAveraged, ScalingsAreConsistent) {
  const auto spec = corollary2();
  const Vec2 a(0.9, -3.0);
  const auto v = mode_averaged(spec, a, 1e-13);
  EXPECT_LE((canonical_to_raw(spec, v.canonical) - v.raw).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(canonical_prefactor(spec), oracle::kOmega2 / (4 * oracle::kPi), 1e-16);
  EXPECT_NEAR(canonical_prefactor(corollary1(3)), oracle::kOmega1 / (12 * oracle::kPi), 1e-16);
}

// The generic Malkin operator on the permuted modal system reproduces the
// mode-specific canonical values, including for p > 1.
TEST(GenericEngine, MatchesModeSpecificRoute) {
  for (const auto& spec : {corollary1(1), corollary1(2), corollary2()}) {
    const auto problem = pendulum_problem(spec);
    for (const Vec2& a : {Vec2(0.5, 1.0), Vec2(-1.5, 0.25)}) {
      const Vec2 generic = averaged_function(problem, a, 1e-13);
      const Vec2 canonical = mode_averaged(spec, a, 1e-13).canonical;
      EXPECT_LE((generic - canonical).cwiseAbs().maxCoeff(), 1e-11);
    }
  }
}

TEST(GenericEngine, HypothesesHoldOnBothPlanes) {
  const auto h1 = check_hypotheses(pendulum_problem(corollary1()), Vec2(1, 0));
  EXPECT_TRUE(h1.ok);
  EXPECT_NEAR(h1.delta_det, oracle::kFourSinSq, 1e-10);
  EXPECT_LE(h1.upper_right_max, 1e-12);
  const auto h2 = check_hypotheses(pendulum_problem(corollary2()), Vec2(1, 0));
  EXPECT_TRUE(h2.ok);
  const double s = std::sin(oracle::kW1 * oracle::kPeriod2 / 2);
  EXPECT_NEAR(h2.delta_det, 4 * s * s, 1e-10);
}

// Two identical unit oscillators: every orbit is 2 pi periodic, the
// complementary block of M^-1(0) - M^-1(T) vanishes and averaging is refused.
TEST(GenericEngine, DegenerateProblemIsRejected) {
  AveragingProblem<4, 2> problem;
  problem.period = 2 * oracle::kPi;
  problem.flow = [](double t, const Vec2& a) -> Vec4 {
    return {a(0) * std::cos(t) + a(1) * std::sin(t), a(1) * std::cos(t) - a(0) * std::sin(t), 0, 0};
  };
  problem.fundamental = [](double t, const Vec2&) -> Mat4 {
    Mat4 M = Mat4::Identity();
    M.block<2, 2>(0, 0) << std::cos(t), std::sin(t), -std::sin(t), std::cos(t);
    M.block<2, 2>(2, 2) << std::cos(t), std::sin(t), -std::sin(t), std::cos(t);
    return M;
  };
  problem.perturbation = [](double, const Vec4&) -> Vec4 { return Vec4::Zero(); };
  EXPECT_FALSE(check_hypotheses(problem, Vec2(1, 0)).ok);
  EXPECT_THROW(averaged_function(problem, Vec2(1, 0), 1e-12), NumericalError);
}

TEST(AveragedSystem, JacobianMatchesClosedForm) {
  const auto sys = make_averaged_system(corollary1(), 1e-13, Convention::Raw);
  const Vec2 a(0.8, -0.4);
  const Mat2 J = sys.jacobian(a);
  const double d = std::pow(2 - oracle::kSqrt2, 1.5);
  EXPECT_NEAR(J(0, 0), -oracle::kPi * 2 * a(0) / (8 * d), 1e-7);
  EXPECT_NEAR(J(0, 1), -oracle::kPi * 6 * a(1) / (8 * d), 1e-7);
  EXPECT_NEAR(J(1, 0), -oracle::kPi * a(1) / (4 * d), 1e-7);
  EXPECT_NEAR(J(1, 1), -oracle::kPi * a(0) / (4 * d), 1e-7);
}
