#include "nttnn/transforms.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "nttnn/kernels.hpp"
#include "nttnn/linalg.hpp"

namespace nttnn {

namespace {

constexpr double kGuard = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

NonlinearFn NonlinearFn::FromName(std::string_view name) {
  if (name == "identity") return NonlinearFn(Kind::Identity);
  if (name == "tanh") return NonlinearFn(Kind::Tanh);
  if (name == "sigmoid") return NonlinearFn(Kind::Sigmoid);
  if (name == "softplus") return NonlinearFn(Kind::Softplus);
  throw std::invalid_argument("unknown nonlinear function '" + std::string(name) +
                              "' (expected identity, tanh, sigmoid or softplus)");
}

std::string_view NonlinearFn::name() const {
  switch (kind_) {
    case Kind::Identity: return "identity";
    case Kind::Tanh: return "tanh";
    case Kind::Sigmoid: return "sigmoid";
    case Kind::Softplus: return "softplus";
  }
  return "identity";
}

double NonlinearFn::eval(double x) const {
  switch (kind_) {
    case Kind::Identity: return x;
    case Kind::Tanh: return std::tanh(x);
    case Kind::Sigmoid: return sigmoid(x);
    case Kind::Softplus: return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
  }
  return x;
}

double NonlinearFn::deriv(double x) const {
  switch (kind_) {
    case Kind::Identity: return 1.0;
    case Kind::Tanh: {
      const double c = std::cosh(x);
      return 1.0 / (c * c);
    }
    case Kind::Sigmoid: {
      const double s = sigmoid(x);
      return s * (1.0 - s);
    }
    case Kind::Softplus: return sigmoid(x);
  }
  return 1.0;
}

double NonlinearFn::second_deriv(double x) const {
  switch (kind_) {
    case Kind::Identity: return 0.0;
    case Kind::Tanh: {
      const double c = std::cosh(x);
      return -2.0 * std::tanh(x) / (c * c);
    }
    case Kind::Sigmoid: {
      const double s = sigmoid(x);
      return s * (1.0 - s) * (1.0 - 2.0 * s);
    }
    case Kind::Softplus: {
      const double s = sigmoid(x);
      return s * (1.0 - s);
    }
  }
  return 0.0;
}

double NonlinearFn::inverse(double y) const {
  if (!in_range(y)) {
    throw std::domain_error("value " + std::to_string(y) + " is outside the range of " + std::string(name()));
  }
  switch (kind_) {
    case Kind::Identity: return y;
    case Kind::Tanh: return std::atanh(y);
    case Kind::Sigmoid: return std::log(y) - std::log1p(-y);
    case Kind::Softplus: return y + std::log(-std::expm1(-y));
  }
  return y;
}

double NonlinearFn::range_lo() const {
  switch (kind_) {
    case Kind::Tanh: return -1.0;
    case Kind::Sigmoid:
    case Kind::Softplus: return 0.0;
    case Kind::Identity: break;
  }
  return -kInf;
}

double NonlinearFn::range_hi() const {
  switch (kind_) {
    case Kind::Tanh:
    case Kind::Sigmoid: return 1.0;
    case Kind::Softplus:
    case Kind::Identity: break;
  }
  return kInf;
}

bool NonlinearFn::in_range(double y) const {
  return std::isfinite(y) && y > range_lo() + kGuard && y < range_hi() - kGuard;
}

void TransformSpec::validate(std::size_t n3) const {
  if (t.rows() == 0 || static_cast<std::size_t>(t.cols()) != n3) {
    throw std::invalid_argument("transform must be r x n3 with n3 = " + std::to_string(n3) + ", got " +
                                std::to_string(t.rows()) + "x" + std::to_string(t.cols()));
  }
  if (static_cast<std::size_t>(t.rows()) > n3) throw std::invalid_argument("transform has more rows than n3");
  if (!t.allFinite() || semi_orthogonality_residual(t) > 1e-10) {
    throw std::invalid_argument("transform is not semi-orthogonal (T T^T != I)");
  }
}

Tensor3 apply_phi(const Tensor3& t, const NonlinearFn& f, Exec exec) {
  if (f.kind() == NonlinearFn::Kind::Identity) return t;
  return exec == Exec::Serial ? kernels::serial::apply_phi(t, f) : kernels::omp::apply_phi(t, f);
}

Tensor3 apply_phi_inverse(const Tensor3& t, const NonlinearFn& f) {
  Tensor3 out(t.dims());
  const Dims& d = t.dims();
  for (std::size_t k = 0; k < d.n3; ++k)
    for (std::size_t j = 0; j < d.n2; ++j)
      for (std::size_t i = 0; i < d.n1; ++i) {
        const double v = t(i, j, k);
        if (!f.in_range(v)) {
          throw std::domain_error("inverse of " + std::string(f.name()) + " undefined at entry (" +
                                  std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(k) +
                                  ") = " + std::to_string(v));
        }
        out(i, j, k) = f.inverse(v);
      }
  return out;
}

Tensor3 psi(const Tensor3& x, const TransformSpec& spec, Exec exec) {
  spec.validate(x.dims().n3);
  return apply_phi(mode3_product(x, spec.t, exec), spec.phi, exec);
}

double slice_nuclear_norm_sum(const Tensor3& t) {
  double total = 0.0;
  for (std::size_t k = 0; k < t.dims().n3; ++k) total += nuclear_norm(t.slice(k));
  return total;
}

double nttnn_norm(const Tensor3& x, const TransformSpec& spec) { return slice_nuclear_norm_sum(psi(x, spec)); }

}  // namespace nttnn
