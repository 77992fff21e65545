#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nttnn/newton.hpp"
#include "nttnn/tensor.hpp"
#include "nttnn/transforms.hpp"

namespace nttnn {

enum class InitStrategy {
  Interpolation,  // linear interpolation along mode-3 fibers
  Observed,       // observed entries, zeros elsewhere
  WarmStart,      // caller-supplied tensor
};

std::string_view to_string(InitStrategy s);
std::string_view to_string(TransformMode m);

struct SolverConfig {
  double alpha = 10.0;
  double beta = 10.0;
  std::array<double, 4> rho{1e-3, 1e-3, 1e-3, 1e-3};
  std::size_t r = 5;
  NonlinearFn phi{NonlinearFn::Kind::Tanh};
  TransformMode t_mode = TransformMode::Learned;
  std::optional<Matrix> fixed_t;  // required when t_mode == Fixed
  InitStrategy init = InitStrategy::Interpolation;
  std::optional<Tensor3> warm_start;  // required when init == WarmStart
  int max_iters = 500;
  double rel_tol = 1e-4;
  NewtonOptions newton;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = OpenMP default
  Exec exec = Exec::Parallel;
  /// Record the objective after every block update (costs one extra
  /// objective evaluation per block).
  bool trace_blocks = false;

  /// Throws std::invalid_argument on any violated constraint.
  void validate(const Dims& dims) const;
};

/// The observed tensor O together with its index set.
struct CompletionProblem {
  Tensor3 observed;
  ObservationMask mask;

  void validate() const;
};

/// Objective values around the four block updates of one iteration.
struct BlockTrace {
  double f_start = 0.0;
  std::array<double, 4> f_after{};   // after X, Y, Z, T
  std::array<double, 4> prox{};      // (rho_i / 2) * ||block_new - block_old||_F^2
  bool x_feasible = true;            // X agrees bitwise with O on the mask
  double t_residual = 0.0;           // max |T T^T - I| after the T update
};

struct IterationRecord {
  int iter = 0;
  double objective = 0.0;
  double rel_change = 0.0;
  double wall_seconds = 0.0;
  std::size_t newton_failures = 0;
  bool t_rank_deficient = false;
  std::optional<BlockTrace> blocks;
};

struct SolverState {
  Tensor3 x;  // n1 x n2 x n3
  Tensor3 y;  // n1 x n2 x r
  Tensor3 z;  // n1 x n2 x r
  Matrix t;   // r x n3
  int iter = 0;
  std::vector<IterationRecord> history;
};

struct CompletionResult {
  Tensor3 x_hat;
  SolverState state;
  bool converged = false;
  int iterations = 0;
};

/// A fatal error inside the iteration loop; carries the history up to it.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::vector<IterationRecord> history)
      : std::runtime_error(what), history_(std::move(history)) {}
  const std::vector<IterationRecord>& history() const { return history_; }

 private:
  std::vector<IterationRecord> history_;
};

/// Fills unobserved entries by 1-D linear interpolation along each mode-3
/// fiber, holding the end values constant; fibers without observations get
/// the mean of all observed entries.
Tensor3 linear_interpolate_init(const Tensor3& o, const ObservationMask& mask);

/// X0 from cfg.init, T0 = leading r left singular vectors of X0_(3)
/// (transposed) or the fixed transform, Z0 = X0 x_3 T0, Y0 = phi(Z0).
SolverState init_state(const CompletionProblem& problem, const SolverConfig& cfg);

/// f = sum_i ||Y_i||_* + alpha/2 ||X - Z x_3 T^T||^2 + beta/2 ||Y - phi(Z)||^2,
/// without the indicator terms.
double model_objective(const Tensor3& x, const Tensor3& y, const Tensor3& z, const Matrix& t,
                       const SolverConfig& cfg);

/// model_objective after checking that X matches O on the mask and T is
/// semi-orthogonal; throws std::invalid_argument otherwise.
double objective(const SolverState& state, const CompletionProblem& problem,
                 const SolverConfig& cfg);

Tensor3 update_x(const SolverState& state, const CompletionProblem& problem,
                 const SolverConfig& cfg);
Tensor3 update_y(const SolverState& state, const SolverConfig& cfg);

struct ZUpdate {
  Tensor3 z;
  std::size_t newton_failures = 0;
};
ZUpdate update_z(const SolverState& state, const SolverConfig& cfg);

struct TUpdate {
  Matrix t;
  bool rank_deficient = false;
};
TUpdate update_t(const SolverState& state, const SolverConfig& cfg);

/// Runs X -> Y -> Z -> T sweeps until ||X+ - X|| / ||X|| <= rel_tol or
/// max_iters is reached.
CompletionResult run(const CompletionProblem& problem, const SolverConfig& cfg);

/// Runs the loop from an already initialized state.
CompletionResult run_from(SolverState state, const CompletionProblem& problem,
                          const SolverConfig& cfg);

}  // namespace nttnn
