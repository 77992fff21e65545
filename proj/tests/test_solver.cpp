#include <gtest/gtest.h>

#include <cmath>

#include "grid_oracle.hpp"
#include "helpers.hpp"
#include "nttnn/io.hpp"
#include "nttnn/linalg.hpp"
#include "nttnn/solver.hpp"

using namespace nttnn;
using Kind = NonlinearFn::Kind;
using test::random_matrix;
using test::random_semi_orthogonal;
using test::random_tensor;

namespace {

struct Instance {
  CompletionProblem problem;
  SolverState state;
  SolverConfig cfg;
};

// A random feasible state that is not a fixed point of any block.
Instance random_instance(std::mt19937_64& rng, Dims dims, std::size_t r, Kind phi) {
  Instance in;
  in.cfg.r = r;
  in.cfg.phi = NonlinearFn(phi);
  in.problem.observed = random_tensor(dims, rng);
  in.problem.mask = test::random_mask(dims, 0.5, rng);
  in.state.x = project_observed(random_tensor(dims, rng), in.problem.observed, in.problem.mask);
  in.state.y = random_tensor(Dims{dims.n1, dims.n2, r}, rng, 0.5);
  in.state.z = random_tensor(Dims{dims.n1, dims.n2, r}, rng);
  in.state.t = random_semi_orthogonal(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(dims.n3), rng);
  return in;
}

double y_prox_objective(const Matrix& y, const Matrix& phi_z, const Matrix& y_prev, const SolverConfig& cfg) {
  return nuclear_norm(y) + 0.5 * cfg.beta * (y - phi_z).squaredNorm() + 0.5 * cfg.rho[1] * (y - y_prev).squaredNorm();
}

double t_objective(const Matrix& t, const SolverState& s, const SolverConfig& cfg) {
  Tensor3 fit = s.x - mode3_product(s.z, t.transpose(), Exec::Serial);
  return 0.5 * cfg.alpha * squared_norm(fit) + 0.5 * cfg.rho[3] * (t - s.t).squaredNorm();
}

}  // namespace

// ---------------------------------------------------------------- initialization

TEST(Interpolation, FullMaskReturnsObservation) {
  std::mt19937_64 rng(61);
  Tensor3 o = random_tensor(Dims{3, 3, 4}, rng);
  EXPECT_EQ(linear_interpolate_init(o, ObservationMask(o.dims(), true)), o);
}

TEST(Interpolation, FiberFills) {
  Tensor3 o(Dims{1, 2, 4});
  ObservationMask m(o.dims());
  // Fiber (0,0): [a, ?, b, ?] with a = 1, b = 5.
  o(0, 0, 0) = 1.0;
  o(0, 0, 2) = 5.0;
  m.set(0, true);
  m.set(4, true);
  // Fiber (0,1): observations 0 and 3 at positions 0 and 3.
  o(0, 1, 0) = 0.0;
  o(0, 1, 3) = 3.0;
  m.set(1, true);
  m.set(7, true);
  Tensor3 x = linear_interpolate_init(o, m);
  EXPECT_EQ(x(0, 0, 1), 3.0);
  EXPECT_EQ(x(0, 0, 3), 5.0);  // constant extrapolation
  EXPECT_DOUBLE_EQ(x(0, 1, 1), 1.0);
  EXPECT_DOUBLE_EQ(x(0, 1, 2), 2.0);
  EXPECT_EQ(x(0, 1, 0), 0.0);
  EXPECT_EQ(x(0, 1, 3), 3.0);
}

TEST(Interpolation, EmptyFiberGetsGlobalMeanAndEmptyMaskRejected) {
  Tensor3 o(Dims{2, 1, 3});
  ObservationMask m(o.dims());
  o(0, 0, 0) = 2.0;
  o(0, 0, 2) = 4.0;
  m.set(0, true);
  m.set(4, true);
  Tensor3 x = linear_interpolate_init(o, m);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_DOUBLE_EQ(x(1, 0, k), 3.0);
  EXPECT_THROW(linear_interpolate_init(o, ObservationMask(o.dims())), std::invalid_argument);
}

TEST(InitState, FullRankReconstructs) {
  std::mt19937_64 rng(62);
  Dims dims{4, 4, 3};
  CompletionProblem p{random_tensor(dims, rng), ObservationMask(dims, true)};
  SolverConfig cfg;
  cfg.r = 3;
  SolverState s = init_state(p, cfg);
  EXPECT_LE(semi_orthogonality_residual(s.t), 1e-10);
  EXPECT_LE(frobenius_norm(s.x - mode3_product(s.z, s.t.transpose())), 1e-12 * frobenius_norm(s.x));
  EXPECT_EQ(s.y, apply_phi(s.z, cfg.phi));
}

TEST(InitState, RankOneUnfoldingWithROne) {
  std::mt19937_64 rng(63);
  Dims dims{3, 3, 5};
  Matrix a = random_matrix(5, 1, rng);
  Matrix b = random_matrix(1, 9, rng);
  CompletionProblem p{fold(a * b, 3, dims), ObservationMask(dims, true)};
  SolverConfig cfg;
  cfg.r = 1;
  SolverState s = init_state(p, cfg);
  EXPECT_LE(frobenius_norm(s.x - mode3_product(s.z, s.t.transpose())), 1e-8);
}

TEST(InitState, TruncationMatchesEckartYoung) {
  std::mt19937_64 rng(64);
  Dims dims{3, 4, 5};
  CompletionProblem p{random_tensor(dims, rng), ObservationMask(dims, true)};
  SolverConfig cfg;
  cfg.r = 2;
  SolverState s = init_state(p, cfg);
  Vector sv = svd(unfold(p.observed, 3)).s;
  const double tail = std::sqrt(sv.tail(sv.size() - 2).squaredNorm());
  EXPECT_NEAR(frobenius_norm(s.x - mode3_product(s.z, s.t.transpose())), tail, 1e-10);
}

TEST(InitState, StrategiesAndFixedTransform) {
  std::mt19937_64 rng(65);
  Dims dims{3, 3, 4};
  CompletionProblem p{random_tensor(dims, rng), test::random_mask(dims, 0.5, rng)};
  SolverConfig cfg;
  cfg.r = 2;
  cfg.init = InitStrategy::Observed;
  EXPECT_EQ(init_state(p, cfg).x, masked_observation(p.observed, p.mask));

  cfg.init = InitStrategy::WarmStart;
  cfg.warm_start = random_tensor(dims, rng);
  EXPECT_EQ(init_state(p, cfg).x, project_observed(*cfg.warm_start, p.observed, p.mask));

  cfg.init = InitStrategy::Interpolation;
  cfg.t_mode = TransformMode::Fixed;
  cfg.fixed_t = dct_matrix(4).topRows(2);
  EXPECT_EQ(init_state(p, cfg).t, *cfg.fixed_t);
}

TEST(SolverConfig, RejectsInvalidSettings) {
  const Dims dims{4, 4, 6};
  auto rejects = [&](auto mutate) {
    SolverConfig cfg;
    mutate(cfg);
    EXPECT_THROW(cfg.validate(dims), std::invalid_argument);
  };
  EXPECT_NO_THROW(SolverConfig{}.validate(dims));
  rejects([](SolverConfig& c) { c.alpha = 0.0; });
  rejects([](SolverConfig& c) { c.beta = -1.0; });
  rejects([](SolverConfig& c) { c.rho[2] = 0.0; });
  rejects([](SolverConfig& c) { c.r = 7; });
  rejects([](SolverConfig& c) { c.r = 0; });
  rejects([](SolverConfig& c) { c.max_iters = 0; });
  rejects([](SolverConfig& c) { c.rel_tol = 0.0; });
  rejects([](SolverConfig& c) { c.t_mode = TransformMode::Fixed; });
  rejects([](SolverConfig& c) {
    c.t_mode = TransformMode::Fixed;
    c.fixed_t = Matrix::Identity(6, 6);
  });
  rejects([](SolverConfig& c) { c.init = InitStrategy::WarmStart; });
  rejects([](SolverConfig& c) { c.newton.max_steps = 0; });
}

// ---------------------------------------------------------------- objective

TEST(Objective, ZeroAtExactFit) {
  Dims dims{3, 3, 2};
  SolverConfig cfg;
  cfg.r = 2;
  cfg.phi = NonlinearFn(Kind::Tanh);
  SolverState s;
  s.z = Tensor3(dims);
  s.y = Tensor3(dims);
  s.t = Matrix::Identity(2, 2);
  s.x = Tensor3(dims);
  EXPECT_EQ(model_objective(s.x, s.y, s.z, s.t, cfg), 0.0);
}

TEST(Objective, OneHotNuclearNorm) {
  Dims dims{3, 3, 2};
  SolverConfig cfg;
  cfg.r = 2;
  cfg.phi = NonlinearFn(Kind::Identity);
  Tensor3 y(dims);
  y(1, 2, 0) = 2.0;
  Tensor3 z = y;
  Matrix t = Matrix::Identity(2, 2);
  Tensor3 x = z;
  EXPECT_NEAR(model_objective(x, y, z, t, cfg), 2.0, 1e-14);
}

TEST(Objective, TermByTermOracle) {
  std::mt19937_64 rng(66);
  Instance in = random_instance(rng, Dims{3, 4, 5}, 2, Kind::Tanh);
  const auto& s = in.state;
  double nuc = 0.0;
  for (std::size_t k = 0; k < 2; ++k) nuc += svd(Matrix(s.y.slice(k))).s.sum();
  double fit = 0.0;
  double link = 0.0;
  for (std::size_t k = 0; k < 5; ++k)
    for (std::size_t j = 0; j < 4; ++j)
      for (std::size_t i = 0; i < 3; ++i) {
        double zt = 0.0;
        for (std::size_t q = 0; q < 2; ++q) zt += s.z(i, j, q) * s.t(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(k));
        fit += (s.x(i, j, k) - zt) * (s.x(i, j, k) - zt);
      }
  for (std::size_t n = 0; n < s.y.size(); ++n) {
    const double d = s.y.data()[n] - std::tanh(s.z.data()[n]);
    link += d * d;
  }
  const double expected = nuc + 0.5 * in.cfg.alpha * fit + 0.5 * in.cfg.beta * link;
  EXPECT_NEAR(objective(s, in.problem, in.cfg), expected, 1e-12 * expected);
}

TEST(Objective, RejectsInfeasibleStates) {
  std::mt19937_64 rng(67);
  Instance in = random_instance(rng, Dims{3, 3, 4}, 2, Kind::Tanh);
  SolverState bad_x = in.state;
  bad_x.x.data()[0] = std::nextafter(bad_x.x.data()[0], 1e300);  // mask always observes entry 0
  EXPECT_THROW(objective(bad_x, in.problem, in.cfg), std::invalid_argument);
  SolverState bad_t = in.state;
  bad_t.t *= 1.0 + 1e-9;
  EXPECT_THROW(objective(bad_t, in.problem, in.cfg), std::invalid_argument);
}

// ---------------------------------------------------------------- block updates

TEST(UpdateX, WithoutProximalTermCopiesModelOffMask) {
  std::mt19937_64 rng(68);
  Instance in = random_instance(rng, Dims{3, 3, 4}, 2, Kind::Tanh);
  in.cfg.rho[0] = 0.0;
  Tensor3 x = update_x(in.state, in.problem, in.cfg);
  Tensor3 model = mode3_product(in.state.z, in.state.t.transpose());
  for (std::size_t n = 0; n < x.size(); ++n) {
    if (in.problem.mask.observed(n)) {
      EXPECT_EQ(x.data()[n], in.problem.observed.data()[n]);
    } else {
      EXPECT_DOUBLE_EQ(x.data()[n], model.data()[n]);
    }
  }
}

TEST(UpdateX, FixedPointWhenModelMatches) {
  std::mt19937_64 rng(69);
  Instance in = random_instance(rng, Dims{3, 3, 4}, 4, Kind::Tanh);
  in.state.t = random_semi_orthogonal(4, 4, rng);
  in.state.x = mode3_product(in.state.z, in.state.t.transpose());
  Tensor3 x = update_x(in.state, in.problem, in.cfg);
  Tensor3 expected = project_observed(in.state.x, in.problem.observed, in.problem.mask);
  for (std::size_t n = 0; n < x.size(); ++n) EXPECT_NEAR(x.data()[n], expected.data()[n], 1e-14);
}

TEST(UpdateX, FirstOrderConditionOffMask) {
  std::mt19937_64 rng(70);
  for (int trial = 0; trial < 10; ++trial) {
    Instance in = random_instance(rng, Dims{3, 4, 5}, 3, Kind::Tanh);
    Tensor3 x = update_x(in.state, in.problem, in.cfg);
    Tensor3 w = mode3_product(in.state.z, in.state.t.transpose(), Exec::Serial);
    const double h = 1e-5;
    for (std::size_t n = 0; n < x.size(); ++n) {
      if (in.problem.mask.observed(n)) {
        EXPECT_EQ(x.data()[n], in.problem.observed.data()[n]);
        continue;
      }
      auto term = [&](double v) {
        const double a = v - w.data()[n];
        const double b = v - in.state.x.data()[n];
        return 0.5 * in.cfg.alpha * a * a + 0.5 * in.cfg.rho[0] * b * b;
      };
      const double fd = (term(x.data()[n] + h) - term(x.data()[n] - h)) / (2 * h);
      EXPECT_LE(std::abs(fd), 1e-8);
    }
  }
}

TEST(UpdateY, CollapsesToSvtWhenLinkIsExact) {
  std::mt19937_64 rng(71);
  Instance in = random_instance(rng, Dims{4, 3, 5}, 2, Kind::Identity);
  in.state.y = in.state.z;
  Tensor3 y = update_y(in.state, in.cfg);
  const double tau = 1.0 / (in.cfg.beta + in.cfg.rho[1]);
  for (std::size_t k = 0; k < 2; ++k) {
    Matrix expected = svt(Matrix(in.state.y.slice(k)), tau);
    EXPECT_LE((Matrix(y.slice(k)) - expected).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(UpdateY, SmallSlicesVanish) {
  std::mt19937_64 rng(72);
  Instance in = random_instance(rng, Dims{4, 3, 5}, 2, Kind::Tanh);
  in.state.y *= 1e-4;
  in.state.z *= 1e-4;
  Tensor3 y = update_y(in.state, in.cfg);
  EXPECT_EQ(y, Tensor3(y.dims()));
}

TEST(UpdateY, BeatsRandomProbes) {
  std::mt19937_64 rng(73);
  Instance in = random_instance(rng, Dims{4, 4, 5}, 2, Kind::Tanh);
  in.state.z *= 3.0;
  Tensor3 y = update_y(in.state, in.cfg);
  Tensor3 phi_z = apply_phi(in.state.z, in.cfg.phi);
  std::uniform_real_distribution<double> scale(-7.0, 0.0);
  for (std::size_t k = 0; k < 2; ++k) {
    const Matrix yk = y.slice(k);
    const double best = y_prox_objective(yk, phi_z.slice(k), in.state.y.slice(k), in.cfg);
    for (int probe = 0; probe < 2000; ++probe) {
      Matrix cand = yk + random_matrix(4, 4, rng) * std::pow(10.0, scale(rng));
      EXPECT_LE(best, y_prox_objective(cand, phi_z.slice(k), in.state.y.slice(k), in.cfg) + 1e-12);
    }
  }
}

TEST(UpdateZ, IdentityClosedForm) {
  std::mt19937_64 rng(74);
  Instance in = random_instance(rng, Dims{3, 3, 4}, 2, Kind::Identity);
  ZUpdate up = update_z(in.state, in.cfg);
  EXPECT_EQ(up.newton_failures, 0u);
  const double c = in.cfg.alpha + in.cfg.rho[2];
  Tensor3 g = mode3_product(in.state.x, in.state.t);
  for (std::size_t n = 0; n < g.size(); ++n) {
    const double gn = (in.cfg.alpha * g.data()[n] + in.cfg.rho[2] * in.state.z.data()[n]) / c;
    const double expected = (c * gn + in.cfg.beta * in.state.y.data()[n]) / (c + in.cfg.beta);
    EXPECT_NEAR(up.z.data()[n], expected, 1e-12);
  }
}

TEST(UpdateZ, ZeroBetaReturnsProximalCentre) {
  std::mt19937_64 rng(75);
  Instance in = random_instance(rng, Dims{3, 3, 4}, 2, Kind::Tanh);
  in.cfg.beta = 0.0;
  ZUpdate up = update_z(in.state, in.cfg);
  Tensor3 g = mode3_product(in.state.x, in.state.t);
  for (std::size_t n = 0; n < g.size(); ++n) {
    const double gn = (in.cfg.alpha * g.data()[n] + in.cfg.rho[2] * in.state.z.data()[n]) / (in.cfg.alpha + in.cfg.rho[2]);
    EXPECT_NEAR(up.z.data()[n], gn, 1e-14);
  }
}

TEST(UpdateZ, EntrywiseGridOracle) {
  std::mt19937_64 rng(76);
  for (Kind k : {Kind::Tanh, Kind::Sigmoid, Kind::Softplus}) {
    Instance in = random_instance(rng, Dims{2, 2, 3}, 2, k);
    in.cfg.alpha = 1.0;
    ZUpdate up = update_z(in.state, in.cfg);
    Tensor3 g = mode3_product(in.state.x, in.state.t);
    const double c = in.cfg.alpha + in.cfg.rho[2];
    for (std::size_t n = 0; n < g.size(); ++n) {
      const ScalarProblem p{c, in.cfg.beta, (in.cfg.alpha * g.data()[n] + in.cfg.rho[2] * in.state.z.data()[n]) / c,
                            in.state.y.data()[n]};
      EXPECT_NEAR(up.z.data()[n], test::grid_minimizer(p, in.cfg.phi), 1e-5) << in.cfg.phi.name() << " entry " << n;
    }
  }
}

TEST(UpdateT, FixedModeKeepsTransform) {
  std::mt19937_64 rng(77);
  Instance in = random_instance(rng, Dims{3, 3, 4}, 2, Kind::Tanh);
  in.cfg.t_mode = TransformMode::Fixed;
  in.cfg.fixed_t = in.state.t;
  EXPECT_EQ(update_t(in.state, in.cfg).t, in.state.t);
}

TEST(UpdateT, ProximalTermAloneKeepsTransform) {
  std::mt19937_64 rng(78);
  Instance in = random_instance(rng, Dims{3, 3, 4}, 2, Kind::Tanh);
  in.cfg.alpha = 0.0;
  TUpdate up = update_t(in.state, in.cfg);
  EXPECT_LE((up.t - in.state.t).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(UpdateT, BeatsRandomSemiOrthogonalProbes) {
  std::mt19937_64 rng(79);
  Instance in = random_instance(rng, Dims{3, 3, 5}, 2, Kind::Tanh);
  TUpdate up = update_t(in.state, in.cfg);
  EXPECT_FALSE(up.rank_deficient);
  EXPECT_LE(semi_orthogonality_residual(up.t), 1e-10);
  const double best = t_objective(up.t, in.state, in.cfg);
  for (int probe = 0; probe < 2000; ++probe) {
    EXPECT_LE(best, t_objective(random_semi_orthogonal(2, 5, rng), in.state, in.cfg) + 1e-10);
  }
}

// ---------------------------------------------------------------- full runs

TEST(Run, FullyObservedConvergesImmediately) {
  std::mt19937_64 rng(80);
  Dims dims{5, 4, 6};
  CompletionProblem p{random_tensor(dims, rng), ObservationMask(dims, true)};
  SolverConfig cfg;
  cfg.r = 3;
  CompletionResult res = run(p, cfg);
  EXPECT_TRUE(res.converged);
  EXPECT_LE(res.iterations, 2);
  EXPECT_EQ(res.x_hat, p.observed);
}

TEST(Run, TracedRunDescendsAndStaysFeasible) {
  io::SynthSpec spec;
  spec.dims = {12, 12, 6};
  spec.r = 2;
  spec.seed = 3;
  io::SynthData d = io::synth_ground_truth(spec);
  ObservationMask mask = io::gen_mask(spec.dims, 0.5, 4);
  CompletionProblem p{masked_observation(d.x, mask), mask};
  SolverConfig cfg;
  cfg.r = 2;
  cfg.trace_blocks = true;
  CompletionResult res = run(p, cfg);
  EXPECT_TRUE(res.converged);
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& rec : res.state.history) {
    ASSERT_TRUE(rec.blocks.has_value());
    const BlockTrace& b = *rec.blocks;
    EXPECT_TRUE(b.x_feasible);
    EXPECT_LE(b.t_residual, 1e-10);
    double before = b.f_start;
    for (std::size_t i = 0; i < 4; ++i) {
      EXPECT_LE(b.f_after[i] + b.prox[i], before + 1e-8 * std::max(1.0, std::abs(before))) << "iter " << rec.iter;
      before = b.f_after[i];
    }
    EXPECT_LE(rec.objective, prev + 1e-8 * std::max(1.0, std::abs(prev)));
    prev = rec.objective;
  }
  EXPECT_LE(res.state.history.back().rel_change, cfg.rel_tol);
  for (std::size_t n = 0; n < res.x_hat.size(); ++n)
    if (mask.observed(n)) EXPECT_EQ(res.x_hat.data()[n], p.observed.data()[n]);
}

TEST(Run, RecoversSmallExactModelInstance) {
  // Reference run of this configuration: relative error 8.53e-2 after 193
  // iterations; frozen with headroom.
  io::SynthSpec spec;
  io::SynthData d = io::synth_ground_truth(spec);
  ObservationMask mask = io::gen_mask(spec.dims, 0.5, 1);
  CompletionProblem p{masked_observation(d.x, mask), mask};
  SolverConfig cfg;
  cfg.r = 3;
  CompletionResult res = run(p, cfg);
  const double err = frobenius_norm(res.x_hat - d.x) / frobenius_norm(d.x);
  std::cout << "relative error " << err << " after " << res.iterations << " iterations\n";
  EXPECT_TRUE(res.converged);
  EXPECT_LE(err, 0.1);
}

TEST(Run, IterationCapWithoutConvergence) {
  io::SynthSpec spec;
  io::SynthData d = io::synth_ground_truth(spec);
  ObservationMask mask = io::gen_mask(spec.dims, 0.3, 2);
  CompletionProblem p{masked_observation(d.x, mask), mask};
  SolverConfig cfg;
  cfg.r = 3;
  cfg.max_iters = 3;
  CompletionResult res = run(p, cfg);
  EXPECT_FALSE(res.converged);
  EXPECT_EQ(res.iterations, 3);
  EXPECT_EQ(res.state.history.size(), 3u);
}

TEST(Run, RejectsInvalidProblem) {
  Dims dims{3, 3, 3};
  CompletionProblem empty{Tensor3(dims), ObservationMask(dims)};
  EXPECT_THROW(run(empty, SolverConfig{}), std::invalid_argument);
  CompletionProblem mismatched{Tensor3(dims), ObservationMask(Dims{3, 3, 4}, true)};
  EXPECT_THROW(run(mismatched, SolverConfig{}), std::invalid_argument);
}
