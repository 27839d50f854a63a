#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "pendavg/continuation.hpp"
#include "pendavg/experiment.hpp"

using namespace pendavg;

namespace {

const PerturbationSpec& cor1() {
  static const PerturbationSpec spec = preset_corollary1().spec();
  return spec;
}
const PerturbationSpec& cor2() {
  static const PerturbationSpec spec = preset_corollary2().spec();
  return spec;
}

double set_distance(const PeriodicOrbit& a, const PeriodicOrbit& b) {
  auto one_way = [](const PeriodicOrbit& x, const PeriodicOrbit& y) {
    double worst = 0.0;
    for (const auto& [t, s] : x.samples) {
      double best = INFINITY;
      for (const auto& [u, r] : y.samples) best = std::min(best, (s.vec() - r.vec()).norm());
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(one_way(a, b), one_way(b, a));
}

}  // namespace

TEST(PredictedState, Corollary1Zero) {
  const State4 s = predicted_initial_state(ModeId::Mode1, {oracle::kCor1X, 0});
  EXPECT_NEAR(s.th1, 2.0, 1e-12);
  EXPECT_NEAR(s.th2, 2.8284271247461903, 1e-12);
  EXPECT_EQ(s.th1d, 0.0);
  EXPECT_EQ(s.th2d, 0.0);
  EXPECT_EQ(predicted_initial_state(ModeId::Mode1, {0, 0}).vec(), Vec4::Zero());
}

TEST(PredictedState, EqualsEmbeddedInverseModalTransform) {
  for (const Vec2& a : {Vec2(0.3, -1.1), Vec2(-4.0, 2.5), Vec2(0, oracle::kCor2W)}) {
    const State4 m1 = inverse_modal_transform({a(0), a(1), 0, 0});
    const State4 m2 = inverse_modal_transform({0, 0, a(0), a(1)});
    EXPECT_LE((predicted_initial_state(ModeId::Mode1, a).vec() - m1.vec()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((predicted_initial_state(ModeId::Mode2, a).vec() - m2.vec()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Shooting, ZeroEpsilonIsRejected) {
  EXPECT_THROW(shoot_periodic(cor1(), 0.0, State4{1, 0, 1, 0}, oracle::kPeriod1, default_integrator(1e-3)),
               SingularShootingError);
}

TEST(Shooting, Corollary1ZerosConvergeAtSmallEpsilon) {
  for (const Vec2& a : {Vec2(oracle::kCor1X, 0), Vec2(0, oracle::kCor1Y)}) {
    const auto v = verify_zero(cor1(), a, {1e-3});
    ASSERT_EQ(v.size(), 1u);
    ASSERT_TRUE(v[0].orbit.has_value()) << v[0].error;
    const auto& o = *v[0].orbit;
    EXPECT_LE(o.residual, 1e-9);
    EXPECT_LE(o.distance_to_prediction, 10 * 1e-3);
    EXPECT_NEAR(o.period, oracle::kPeriod1, 1e-12);
    EXPECT_EQ(o.samples.size(), 257u);
  }
}

TEST(Shooting, DistanceScalesLinearlyWithEpsilon) {
  const std::vector<double> ladder = kDefaultEpsilonLadder;
  for (const auto& [spec, a] : {std::pair{&cor1(), Vec2(oracle::kCor1X, 0)}, std::pair{&cor2(), Vec2(0, oracle::kCor2W)}}) {
    const auto v = verify_zero(*spec, a, ladder);
    double lo = INFINITY, hi = 0.0;
    for (const auto& r : v) {
      ASSERT_TRUE(r.orbit.has_value()) << r.error;
      const double ratio = r.orbit->distance_to_prediction / r.epsilon;
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    EXPECT_LT((hi - lo) / hi, 0.5);
  }
}

TEST(Shooting, OrbitsAreHalfPeriodAntisymmetric) {
  const double eps = 1e-3;
  const auto plus = verify_zero(cor1(), {oracle::kCor1X, 0}, {eps})[0].orbit;
  const auto minus = verify_zero(cor1(), {-oracle::kCor1X, 0}, {eps})[0].orbit;
  ASSERT_TRUE(plus && minus);
  // The forcing is odd under tau -> tau + T/2 together with th -> -th.
  const auto config = default_integrator(eps);
  const State4 half = flow(cor1(), eps, plus->initial_state, 0.0, oracle::kPeriod1 / 2, config);
  EXPECT_LE((half.vec() + plus->initial_state.vec()).norm(), 1e-8);
  // Orbits from antipodal zeros are distinct but O(eps) apart.
  const double d = set_distance(*plus, *minus);
  EXPECT_LE(d, 10 * eps);
  EXPECT_GT(d, 0.0);
}

TEST(Verify, ResultsAreSortedByEpsilon) {
  const auto v = verify_zero(cor2(), {0, oracle::kCor2W}, {5e-3, 1e-2});
  ASSERT_EQ(v.size(), 2u);
  EXPECT_LT(v[0].epsilon, v[1].epsilon);
}
