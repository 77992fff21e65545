#include "nttnn/newton.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nttnn {

double ScalarProblem::value(double z, const NonlinearFn& f) const {
  const double dz = z - g;
  const double dy = f.eval(z) - y;
  return 0.5 * curvature * dz * dz + 0.5 * beta * dy * dy;
}

double ScalarProblem::gradient(double z, const NonlinearFn& f) const {
  return curvature * (z - g) + beta * f.deriv(z) * (f.eval(z) - y);
}

double ScalarProblem::change(double from, double to, const NonlinearFn& f) const {
  // Factored differences avoid cancelling two nearly equal values of h.
  const double pf = f.eval(from);
  const double pt = f.eval(to);
  return 0.5 * curvature * (to - from) * ((to - g) + (from - g)) + 0.5 * beta * (pt - pf) * ((pt - y) + (pf - y));
}

double ScalarProblem::change_error(double from, double to, const NonlinearFn& f) const {
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  const double pf = f.eval(from);
  const double pt = f.eval(to);
  const double quad = 0.5 * curvature * std::abs(to - from) * (std::abs(to - g) + std::abs(from - g));
  const double split = 0.5 * beta * (std::abs(pt) + std::abs(pf)) * (std::abs(pt - y) + std::abs(pf - y));
  return 8.0 * kEps * (quad + split);
}

double ScalarProblem::hessian(double z, const NonlinearFn& f) const {
  const double d1 = f.deriv(z);
  return curvature + beta * (d1 * d1 + f.second_deriv(z) * (f.eval(z) - y));
}

namespace {

struct LocalResult {
  double z;
  double h;
  bool converged;
  int steps;
};

LocalResult descend(const ScalarProblem& p, double z, const NonlinearFn& f, const NewtonOptions& opts) {
  double h = p.value(z, f);
  int steps = 0;
  for (; steps < opts.max_steps; ++steps) {
    const double grad = p.gradient(z, f);
    if (std::abs(grad) <= opts.grad_tol) return {z, h, true, steps};
    const double hess = p.hessian(z, f);
    // Newton direction where h is locally convex, scaled gradient otherwise.
    const double dir = hess > 0.0 ? -grad / hess : -grad / p.curvature;
    double step = 1.0;
    bool moved = false;
    for (int bt = 0; bt <= opts.max_backtracks; ++bt, step *= 0.5) {
      const double zn = z + step * dir;
      const double dh = p.change(z, zn, f);
      // Within rounding of zero the sign of dh is noise; fall back to
      // requiring a smaller gradient.
      if (dh < -p.change_error(z, zn, f) ||
          (dh <= p.change_error(z, zn, f) && std::abs(p.gradient(zn, f)) < std::abs(grad))) {
        z = zn;
        h = p.value(zn, f);
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return {z, h, std::abs(p.gradient(z, f)) <= opts.grad_tol, steps};
}

}  // namespace

NewtonResult newton_scalar(const ScalarProblem& p, double z_init, const NonlinearFn& f,
                           const NewtonOptions& opts) {
  if (opts.max_steps < 0 || opts.max_backtracks < 0 || !(opts.grad_tol > 0.0)) {
    throw std::invalid_argument("invalid Newton options");
  }
  if (p.beta == 0.0) return {p.g, true, 0};

  LocalResult best = descend(p, z_init, f, opts);
  int steps = best.steps;

  // h' has the sign of (z - g) beyond both g and phi^{-1}(y), so every
  // minimizer lies between them. Starting from the bracket ends guards
  // against stopping in a worse local minimum when h is nonconvex.
  std::array<double, 2> extra{p.g, p.g};
  int n_extra = 1;
  if (f.in_range(p.y)) extra[n_extra++] = f.inverse(p.y);
  for (int s = 0; s < n_extra; ++s) {
    if (extra[static_cast<std::size_t>(s)] == z_init) continue;
    LocalResult cand = descend(p, extra[static_cast<std::size_t>(s)], f, opts);
    steps += cand.steps;
    const double gap = p.change(best.z, cand.z, f);
    if (gap < 0.0 || (gap == 0.0 && cand.converged && !best.converged)) best = cand;
  }
  return {best.z, best.converged, steps};
}

}  // namespace nttnn
