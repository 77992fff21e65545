#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace nttnn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Selects between the serial reference kernels and their OpenMP counterparts.
enum class Exec { Serial, Parallel };

struct Dims {
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  std::size_t n3 = 0;

  std::size_t numel() const { return n1 * n2 * n3; }
  std::size_t operator[](int mode) const;  // 1-based mode index
  bool operator==(const Dims&) const = default;
};

/// Dense real third-order tensor. Storage is first-index-fastest: element
/// (i, j, k) lives at i + n1 * (j + n2 * k), so each frontal slice is a
/// contiguous column-major n1 x n2 block.
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(Dims dims, double fill = 0.0);
  Tensor3(Dims dims, std::vector<double> data);

  static Tensor3 Zeros(Dims dims) { return Tensor3(dims); }

  const Dims& dims() const { return dims_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j, std::size_t k) {
    return data_[i + dims_.n1 * (j + dims_.n2 * k)];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[i + dims_.n1 * (j + dims_.n2 * k)];
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  /// Frontal slice k as an n1 x n2 view.
  Eigen::Map<Matrix> slice(std::size_t k);
  Eigen::Map<const Matrix> slice(std::size_t k) const;

  bool all_finite() const;

  Tensor3& operator+=(const Tensor3& other);
  Tensor3& operator-=(const Tensor3& other);
  Tensor3& operator*=(double s);

  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  Dims dims_{};
  std::vector<double> data_;
};

Tensor3 operator+(Tensor3 a, const Tensor3& b);
Tensor3 operator-(Tensor3 a, const Tensor3& b);
Tensor3 operator*(double s, Tensor3 a);

/// Index set of observed entries. Same layout as Tensor3.
class ObservationMask {
 public:
  ObservationMask() = default;
  explicit ObservationMask(Dims dims, bool fill = false);
  ObservationMask(Dims dims, std::vector<char> flags);

  /// Nonzero entries of `t` become observed.
  static ObservationMask FromTensor(const Tensor3& t);
  Tensor3 to_tensor() const;

  const Dims& dims() const { return dims_; }
  bool observed(std::size_t linear) const { return flags_[linear] != 0; }
  bool operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return flags_[i + dims_.n1 * (j + dims_.n2 * k)] != 0;
  }
  void set(std::size_t linear, bool value) { flags_[linear] = value ? 1 : 0; }

  std::size_t count() const;
  double sampling_rate() const;

  friend bool operator==(const ObservationMask&, const ObservationMask&) = default;

 private:
  Dims dims_{};
  std::vector<char> flags_;
};

/// Mode-k matricization (k in {1,2,3}). Column index follows the Kolda-Bader
/// rule: the lower-numbered remaining mode varies fastest.
Matrix unfold(const Tensor3& t, int mode);
Tensor3 fold(const Matrix& m, int mode, Dims dims);

/// t x_3 d, i.e. fold_3(d * unfold(t, 3)). Result has d.rows() frontal slices.
Tensor3 mode3_product(const Tensor3& t, const Matrix& d, Exec exec = Exec::Parallel);

/// Returns o on the observed set and x elsewhere.
Tensor3 project_observed(const Tensor3& x, const Tensor3& o, const ObservationMask& mask);

/// Observed entries of o with zeros elsewhere.
Tensor3 masked_observation(const Tensor3& o, const ObservationMask& mask);

double inner_product(const Tensor3& a, const Tensor3& b);
double frobenius_norm(const Tensor3& t);
double squared_norm(const Tensor3& t);

}  // namespace nttnn
