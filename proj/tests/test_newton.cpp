#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "grid_oracle.hpp"
#include "nttnn/newton.hpp"

using namespace nttnn;
using Kind = NonlinearFn::Kind;

TEST(Newton, PureQuadraticWhenBetaIsZero) {
  const ScalarProblem p{1.001, 0.0, 0.37, 0.9};
  NewtonResult res = newton_scalar(p, -4.0, NonlinearFn(Kind::Tanh));
  EXPECT_EQ(res.z, 0.37);
  EXPECT_TRUE(res.converged);
}

TEST(Newton, IdentityClosedForm) {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const ScalarProblem p{10.001, 10.0, u(rng), u(rng)};
    const double expected = (p.curvature * p.g + p.beta * p.y) / (p.curvature + p.beta);
    NewtonResult res = newton_scalar(p, u(rng), NonlinearFn(Kind::Identity));
    EXPECT_NEAR(res.z, expected, 1e-12);
    EXPECT_TRUE(res.converged);
  }
}

TEST(Newton, TanhReferenceInstanceMatchesDenseGrid) {
  const ScalarProblem p{1.001, 10.0, 0.3, 0.9};
  const NonlinearFn f(Kind::Tanh);
  const double oracle = test::grid_minimizer(p, f);
  NewtonResult res = newton_scalar(p, 0.3, f);
  EXPECT_TRUE(res.converged);
  EXPECT_NEAR(res.z, oracle, 1e-5);
  EXPECT_LE(std::abs(p.gradient(res.z, f)), 1e-10);
}

TEST(Newton, StationaryAndNeverWorseThanWarmStart) {
  std::mt19937_64 rng(52);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_real_distribution<double> curv(0.001, 20.0);
  std::uniform_real_distribution<double> beta(0.0, 100.0);
  for (Kind k : {Kind::Identity, Kind::Tanh, Kind::Sigmoid, Kind::Softplus}) {
    const NonlinearFn f(k);
    for (int trial = 0; trial < 500; ++trial) {
      const ScalarProblem p{curv(rng), beta(rng), u(rng), u(rng)};
      const double z0 = u(rng);
      NewtonResult res = newton_scalar(p, z0, f);
      EXPECT_TRUE(res.converged) << f.name() << " trial " << trial;
      EXPECT_LE(std::abs(p.gradient(res.z, f)), 1e-10 * std::max(1.0, p.curvature + p.beta));
      EXPECT_LE(p.change(z0, res.z, f), p.change_error(z0, res.z, f));
    }
  }
}

TEST(Newton, ChangeMatchesDirectDifference) {
  const ScalarProblem p{3.0, 7.0, 0.2, -0.4};
  const NonlinearFn f(Kind::Tanh);
  for (double a : {-2.0, -0.1, 0.5})
    for (double b : {-1.5, 0.0, 1.25}) EXPECT_NEAR(p.change(a, b, f), p.value(b, f) - p.value(a, f), 1e-13);
}

TEST(Newton, RespectsStepBudget) {
  const ScalarProblem p{1e-3, 100.0, 2.5, -0.95};
  NewtonOptions tight{1, 1e-300, 30};
  NewtonResult res = newton_scalar(p, 2.5, NonlinearFn(Kind::Tanh), tight);
  EXPECT_FALSE(res.converged);
  EXPECT_LE(p.change(2.5, res.z, NonlinearFn(Kind::Tanh)), 0.0);
  EXPECT_THROW(newton_scalar(p, 0.0, NonlinearFn(Kind::Tanh), NewtonOptions{-1, 1e-10, 30}), std::invalid_argument);
  EXPECT_THROW(newton_scalar(p, 0.0, NonlinearFn(Kind::Tanh), NewtonOptions{50, 0.0, 30}), std::invalid_argument);
}
