#pragma once

#include "nttnn/transforms.hpp"

namespace nttnn {

struct NewtonOptions {
  int max_steps = 50;
  double grad_tol = 1e-10;
  int max_backtracks = 30;
};

/// One entry of the Z block: minimize
///   h(z) = (curvature / 2) * (z - g)^2 + (beta / 2) * (phi(z) - y)^2.
struct ScalarProblem {
  double curvature = 1.0;  // alpha + rho3
  double beta = 0.0;
  double g = 0.0;
  double y = 0.0;

  double value(double z, const NonlinearFn& f) const;
  double gradient(double z, const NonlinearFn& f) const;
  double hessian(double z, const NonlinearFn& f) const;
  /// h(to) - h(from), computed without cancellation.
  double change(double from, double to, const NonlinearFn& f) const;
  /// Rounding-error bound for change().
  double change_error(double from, double to, const NonlinearFn& f) const;
};

struct NewtonResult {
  double z = 0.0;
  bool converged = false;
  int steps = 0;
};

/// Safeguarded Newton iteration for ScalarProblem. The returned point never
/// has a larger h than z_init. Besides the warm start, the minimizer bracket
/// endpoints g and phi^{-1}(y) are tried as starts and the best local
/// minimizer is kept.
NewtonResult newton_scalar(const ScalarProblem& p, double z_init, const NonlinearFn& f,
                           const NewtonOptions& opts = {});

}  // namespace nttnn
