#include "nttnn/solver.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "nttnn/kernels.hpp"
#include "nttnn/linalg.hpp"

namespace nttnn {

namespace {

constexpr double kSemiOrthTol = 1e-10;

using ConstDataMap = Eigen::Map<const Matrix>;

// A tensor's storage viewed as the (n1*n2) x n3 matrix whose transpose is the
// mode-3 unfolding.
ConstDataMap pixel_by_band(const Tensor3& t) {
  return {t.data().data(), static_cast<Eigen::Index>(t.dims().n1 * t.dims().n2),
          static_cast<Eigen::Index>(t.dims().n3)};
}

bool matches_observed(const Tensor3& x, const CompletionProblem& p) {
  if (!(x.dims() == p.observed.dims())) return false;
  auto a = x.data();
  auto b = p.observed.data();
  for (std::size_t n = 0; n < a.size(); ++n)
    if (p.mask.observed(n) && std::bit_cast<std::uint64_t>(a[n]) != std::bit_cast<std::uint64_t>(b[n]))
      return false;
  return true;
}

double squared_distance(const Tensor3& a, const Tensor3& b) {
  auto x = a.data();
  auto y = b.data();
  double acc = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double d = x[n] - y[n];
    acc += d * d;
  }
  return acc;
}

}  // namespace

std::string_view to_string(InitStrategy s) {
  switch (s) {
    case InitStrategy::Interpolation: return "interpolation";
    case InitStrategy::Observed: return "observed";
    case InitStrategy::WarmStart: return "warmstart";
  }
  return "interpolation";
}

std::string_view to_string(TransformMode m) { return m == TransformMode::Learned ? "learned" : "fixed"; }

void SolverConfig::validate(const Dims& dims) const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(alpha) || !positive(beta)) throw std::invalid_argument("alpha and beta must be positive");
  for (double p : rho)
    if (!positive(p)) throw std::invalid_argument("proximal parameters rho1..rho4 must be positive");
  if (r == 0) throw std::invalid_argument("r must be positive");
  if (r > dims.n3) {
    throw std::invalid_argument("r = " + std::to_string(r) + " exceeds n3 = " + std::to_string(dims.n3));
  }
  if (t_mode == TransformMode::Learned && r > dims.n1 * dims.n2) {
    throw std::invalid_argument("r exceeds the rank bound n1*n2 of the mode-3 unfolding");
  }
  if (t_mode == TransformMode::Fixed) {
    if (!fixed_t) throw std::invalid_argument("fixed transform mode requires a transform matrix");
    TransformSpec{*fixed_t, phi, t_mode}.validate(dims.n3);
    if (static_cast<std::size_t>(fixed_t->rows()) != r) {
      throw std::invalid_argument("r does not match the row count of the fixed transform");
    }
  }
  if (init == InitStrategy::WarmStart && (!warm_start || !(warm_start->dims() == dims))) {
    throw std::invalid_argument("warm-start initialization requires a tensor with the observed dims");
  }
  if (max_iters <= 0) throw std::invalid_argument("max_iters must be positive");
  if (!positive(rel_tol)) throw std::invalid_argument("rel_tol must be positive");
  if (newton.max_steps <= 0 || newton.max_backtracks < 0 || !positive(newton.grad_tol)) {
    throw std::invalid_argument("invalid Newton options");
  }
}

void CompletionProblem::validate() const {
  if (!(observed.dims() == mask.dims())) throw std::invalid_argument("observed tensor and mask dims differ");
  if (mask.count() == 0) throw std::invalid_argument("mask has no observed entries");
  if (!observed.all_finite()) throw std::invalid_argument("observed tensor has non-finite entries");
}

Tensor3 linear_interpolate_init(const Tensor3& o, const ObservationMask& mask) {
  if (!(o.dims() == mask.dims())) throw std::invalid_argument("linear_interpolate_init: dimension mismatch");
  const std::size_t observed = mask.count();
  if (observed == 0) throw std::invalid_argument("linear_interpolate_init: mask has no observed entries");

  double mean = 0.0;
  for (std::size_t n = 0; n < o.size(); ++n)
    if (mask.observed(n)) mean += o.data()[n];
  mean /= static_cast<double>(observed);

  const Dims& d = o.dims();
  Tensor3 x(d);
  std::vector<std::size_t> known;
  known.reserve(d.n3);
  for (std::size_t j = 0; j < d.n2; ++j) {
    for (std::size_t i = 0; i < d.n1; ++i) {
      known.clear();
      for (std::size_t k = 0; k < d.n3; ++k)
        if (mask(i, j, k)) known.push_back(k);
      if (known.empty()) {
        for (std::size_t k = 0; k < d.n3; ++k) x(i, j, k) = mean;
        continue;
      }
      std::size_t next = 0;  // index into `known` of the first observation at or after k
      for (std::size_t k = 0; k < d.n3; ++k) {
        while (next < known.size() && known[next] < k) ++next;
        if (next < known.size() && known[next] == k) {
          x(i, j, k) = o(i, j, k);
        } else if (next == 0) {
          x(i, j, k) = o(i, j, known.front());
        } else if (next == known.size()) {
          x(i, j, k) = o(i, j, known.back());
        } else {
          const std::size_t lo = known[next - 1];
          const std::size_t hi = known[next];
          const double w = static_cast<double>(k - lo) / static_cast<double>(hi - lo);
          x(i, j, k) = (1.0 - w) * o(i, j, lo) + w * o(i, j, hi);
        }
      }
    }
  }
  return x;
}

SolverState init_state(const CompletionProblem& problem, const SolverConfig& cfg) {
  problem.validate();
  cfg.validate(problem.observed.dims());

  SolverState s;
  switch (cfg.init) {
    case InitStrategy::Interpolation: s.x = linear_interpolate_init(problem.observed, problem.mask); break;
    case InitStrategy::Observed: s.x = masked_observation(problem.observed, problem.mask); break;
    case InitStrategy::WarmStart:
      s.x = project_observed(*cfg.warm_start, problem.observed, problem.mask);
      break;
  }

  if (cfg.t_mode == TransformMode::Fixed) {
    s.t = *cfg.fixed_t;
  } else {
    SvdFactors f = svd(pixel_by_band(s.x).transpose());
    s.t = f.u.leftCols(static_cast<Eigen::Index>(cfg.r)).transpose();
  }
  s.z = mode3_product(s.x, s.t, cfg.exec);
  s.y = apply_phi(s.z, cfg.phi, cfg.exec);
  return s;
}

double model_objective(const Tensor3& x, const Tensor3& y, const Tensor3& z, const Matrix& t,
                       const SolverConfig& cfg) {
  const double nuclear = slice_nuclear_norm_sum(y);
  const double fit = squared_distance(x, mode3_product(z, t.transpose(), cfg.exec));
  const double split = squared_distance(y, apply_phi(z, cfg.phi, cfg.exec));
  return nuclear + 0.5 * cfg.alpha * fit + 0.5 * cfg.beta * split;
}

double objective(const SolverState& state, const CompletionProblem& problem, const SolverConfig& cfg) {
  if (!matches_observed(state.x, problem)) {
    throw std::invalid_argument("objective: X does not agree with the observations on the mask");
  }
  if (semi_orthogonality_residual(state.t) > kSemiOrthTol) {
    throw std::invalid_argument("objective: T is not semi-orthogonal");
  }
  return model_objective(state.x, state.y, state.z, state.t, cfg);
}

Tensor3 update_x(const SolverState& state, const CompletionProblem& problem, const SolverConfig& cfg) {
  Tensor3 out = mode3_product(state.z, state.t.transpose(), cfg.exec);
  if (!(out.dims() == state.x.dims())) throw std::invalid_argument("update_x: Z x_3 T^T does not match X");
  const double denom = cfg.alpha + cfg.rho[0];
  auto dst = out.data();
  auto prev = state.x.data();
  auto obs = problem.observed.data();
  for (std::size_t n = 0; n < dst.size(); ++n) {
    dst[n] = problem.mask.observed(n) ? obs[n] : (cfg.alpha * dst[n] + cfg.rho[0] * prev[n]) / denom;
  }
  return out;
}

Tensor3 update_y(const SolverState& state, const SolverConfig& cfg) {
  const double denom = cfg.beta + cfg.rho[1];
  Tensor3 h = apply_phi(state.z, cfg.phi, cfg.exec);
  auto dst = h.data();
  auto prev = state.y.data();
  for (std::size_t n = 0; n < dst.size(); ++n) dst[n] = (cfg.beta * dst[n] + cfg.rho[1] * prev[n]) / denom;
  const double tau = 1.0 / denom;
  return cfg.exec == Exec::Serial ? kernels::serial::slice_svt(h, tau) : kernels::omp::slice_svt(h, tau);
}

ZUpdate update_z(const SolverState& state, const SolverConfig& cfg) {
  const double denom = cfg.alpha + cfg.rho[2];
  Tensor3 g = mode3_product(state.x, state.t, cfg.exec);
  auto dst = g.data();
  auto prev = state.z.data();
  for (std::size_t n = 0; n < dst.size(); ++n) dst[n] = (cfg.alpha * dst[n] + cfg.rho[2] * prev[n]) / denom;

  kernels::NewtonBatch batch{&g, &state.y, &state.z, denom, cfg.beta, cfg.phi, cfg.newton};
  ZUpdate out{Tensor3(state.z.dims()), 0};
  out.newton_failures = cfg.exec == Exec::Serial ? kernels::serial::newton_batch(batch, out.z)
                                                 : kernels::omp::newton_batch(batch, out.z);
  return out;
}

TUpdate update_t(const SolverState& state, const SolverConfig& cfg) {
  if (cfg.t_mode == TransformMode::Fixed) return {state.t, false};
  // alpha * X_(3) Z_(3)^T + rho4 * T^T, an n3 x r matrix.
  Matrix m = cfg.alpha * (pixel_by_band(state.x).transpose() * pixel_by_band(state.z));
  m += cfg.rho[3] * state.t.transpose();
  ProcrustesResult p = procrustes_max_trace(m);
  return {std::move(p.t), !p.unique};
}

CompletionResult run(const CompletionProblem& problem, const SolverConfig& cfg) {
  kernels::set_threads(cfg.threads);
  return run_from(init_state(problem, cfg), problem, cfg);
}

CompletionResult run_from(SolverState state, const CompletionProblem& problem, const SolverConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  problem.validate();
  cfg.validate(problem.observed.dims());
  kernels::set_threads(cfg.threads);

  CompletionResult result;
  try {
    for (int it = 1; it <= cfg.max_iters; ++it) {
      const auto start = Clock::now();
      IterationRecord rec;
      rec.iter = it;
      std::optional<BlockTrace> trace;
      if (cfg.trace_blocks) {
        trace.emplace();
        trace->f_start = model_objective(state.x, state.y, state.z, state.t, cfg);
      }
      auto after_block = [&](int b, double delta_sq) {
        if (!trace) return;
        trace->prox[static_cast<std::size_t>(b)] = 0.5 * cfg.rho[static_cast<std::size_t>(b)] * delta_sq;
        trace->f_after[static_cast<std::size_t>(b)] = model_objective(state.x, state.y, state.z, state.t, cfg);
      };

      Tensor3 x_old = state.x;
      state.x = update_x(state, problem, cfg);
      const double dx_sq = squared_distance(state.x, x_old);
      after_block(0, dx_sq);
      if (trace) trace->x_feasible = matches_observed(state.x, problem);

      Tensor3 y_new = update_y(state, cfg);
      const double dy_sq = trace ? squared_distance(y_new, state.y) : 0.0;
      state.y = std::move(y_new);
      after_block(1, dy_sq);

      ZUpdate zu = update_z(state, cfg);
      const double dz_sq = trace ? squared_distance(zu.z, state.z) : 0.0;
      state.z = std::move(zu.z);
      rec.newton_failures = zu.newton_failures;
      after_block(2, dz_sq);

      TUpdate tu = update_t(state, cfg);
      const double dt_sq = trace ? (tu.t - state.t).squaredNorm() : 0.0;
      state.t = std::move(tu.t);
      rec.t_rank_deficient = tu.rank_deficient;
      after_block(3, dt_sq);
      if (trace) trace->t_residual = semi_orthogonality_residual(state.t);

      const double base = std::sqrt(squared_norm(x_old));
      rec.rel_change = base > 0.0 ? std::sqrt(dx_sq) / base : std::sqrt(dx_sq);
      rec.objective = trace ? trace->f_after[3] : model_objective(state.x, state.y, state.z, state.t, cfg);
      rec.blocks = trace;
      rec.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
      state.iter = it;
      state.history.push_back(std::move(rec));

      if (!std::isfinite(state.history.back().objective)) {
        throw NumericError("objective became non-finite at iteration " + std::to_string(it));
      }
      // Convergence is tested from the second sweep on.
      if (it > 1 && state.history.back().rel_change <= cfg.rel_tol) {
        result.converged = true;
        break;
      }
    }
  } catch (const std::exception& e) {
    throw SolverError(std::string("solver failed at iteration ") + std::to_string(state.iter + 1) + ": " + e.what(),
                      state.history);
  }

  result.iterations = state.iter;
  result.x_hat = state.x;
  result.state = std::move(state);
  return result;
}

}  // namespace nttnn
