#pragma once

#include <limits>
#include <string>
#include <string_view>

#include "nttnn/tensor.hpp"

namespace nttnn {

/// Strictly increasing element-wise nonlinearity with closed-form calculus.
class NonlinearFn {
 public:
  enum class Kind { Identity, Tanh, Sigmoid, Softplus };

  constexpr NonlinearFn() = default;
  constexpr explicit NonlinearFn(Kind kind) : kind_(kind) {}

  /// Accepts "identity" | "tanh" | "sigmoid" | "softplus".
  static NonlinearFn FromName(std::string_view name);

  Kind kind() const { return kind_; }
  std::string_view name() const;

  double eval(double x) const;
  double deriv(double x) const;
  double second_deriv(double x) const;
  /// Throws std::domain_error unless y is strictly inside the range.
  double inverse(double y) const;

  /// Open interval of attainable values.
  double range_lo() const;
  double range_hi() const;
  /// True when y is inside the range with the 1e-12 guard band.
  bool in_range(double y) const;

  friend bool operator==(NonlinearFn, NonlinearFn) = default;

 private:
  Kind kind_ = Kind::Identity;
};

enum class TransformMode { Learned, Fixed };

/// Semi-orthogonal linear transform T (r x n3) followed by phi.
struct TransformSpec {
  Matrix t;
  NonlinearFn phi;
  TransformMode mode = TransformMode::Learned;

  std::size_t r() const { return static_cast<std::size_t>(t.rows()); }
  /// Throws if T is not semi-orthogonal or its width differs from n3.
  void validate(std::size_t n3) const;
};

Tensor3 apply_phi(const Tensor3& t, const NonlinearFn& f, Exec exec = Exec::Parallel);
Tensor3 apply_phi_inverse(const Tensor3& t, const NonlinearFn& f);

/// psi(X) = phi(X x_3 T).
Tensor3 psi(const Tensor3& x, const TransformSpec& spec, Exec exec = Exec::Parallel);

/// Sum over frontal slices of psi(X) of their nuclear norms.
double nttnn_norm(const Tensor3& x, const TransformSpec& spec);

/// Sum of nuclear norms of the frontal slices of t.
double slice_nuclear_norm_sum(const Tensor3& t);

}  // namespace nttnn
