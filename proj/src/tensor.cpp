#include "nttnn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "nttnn/kernels.hpp"

namespace nttnn {

namespace {

void require_same_dims(const Dims& a, const Dims& b, const char* what) {
  if (!(a == b)) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

void require_mode(int mode) {
  if (mode < 1 || mode > 3) {
    throw std::invalid_argument("invalid mode index " + std::to_string(mode) + " (expected 1, 2 or 3)");
  }
}

// Column of entry (i, j, k) in the mode-k unfolding.
std::size_t unfold_column(const Dims& d, int mode, std::size_t i, std::size_t j, std::size_t k) {
  switch (mode) {
    case 1: return j + d.n2 * k;
    case 2: return i + d.n1 * k;
    default: return i + d.n1 * j;
  }
}

std::size_t unfold_row(int mode, std::size_t i, std::size_t j, std::size_t k) {
  return mode == 1 ? i : (mode == 2 ? j : k);
}

}  // namespace

std::size_t Dims::operator[](int mode) const {
  require_mode(mode);
  return mode == 1 ? n1 : (mode == 2 ? n2 : n3);
}

Tensor3::Tensor3(Dims dims, double fill) : dims_(dims), data_(dims.numel(), fill) {
  if (dims.n1 == 0 || dims.n2 == 0 || dims.n3 == 0) {
    throw std::invalid_argument("tensor dimensions must be positive");
  }
}

Tensor3::Tensor3(Dims dims, std::vector<double> data) : dims_(dims), data_(std::move(data)) {
  if (dims.n1 == 0 || dims.n2 == 0 || dims.n3 == 0) {
    throw std::invalid_argument("tensor dimensions must be positive");
  }
  if (data_.size() != dims.numel()) {
    throw std::invalid_argument("tensor data length " + std::to_string(data_.size()) +
                                " does not match n1*n2*n3 = " + std::to_string(dims.numel()));
  }
}

Eigen::Map<Matrix> Tensor3::slice(std::size_t k) {
  return {data_.data() + k * dims_.n1 * dims_.n2, static_cast<Eigen::Index>(dims_.n1),
          static_cast<Eigen::Index>(dims_.n2)};
}

Eigen::Map<const Matrix> Tensor3::slice(std::size_t k) const {
  return {data_.data() + k * dims_.n1 * dims_.n2, static_cast<Eigen::Index>(dims_.n1),
          static_cast<Eigen::Index>(dims_.n2)};
}

bool Tensor3::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

Tensor3& Tensor3::operator+=(const Tensor3& other) {
  require_same_dims(dims_, other.dims_, "tensor +=");
  for (std::size_t n = 0; n < data_.size(); ++n) data_[n] += other.data_[n];
  return *this;
}

Tensor3& Tensor3::operator-=(const Tensor3& other) {
  require_same_dims(dims_, other.dims_, "tensor -=");
  for (std::size_t n = 0; n < data_.size(); ++n) data_[n] -= other.data_[n];
  return *this;
}

Tensor3& Tensor3::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
Tensor3 operator*(double s, Tensor3 a) { return a *= s; }

ObservationMask::ObservationMask(Dims dims, bool fill) : dims_(dims), flags_(dims.numel(), fill ? 1 : 0) {}

ObservationMask::ObservationMask(Dims dims, std::vector<char> flags) : dims_(dims), flags_(std::move(flags)) {
  if (flags_.size() != dims.numel()) throw std::invalid_argument("mask length does not match dims");
}

ObservationMask ObservationMask::FromTensor(const Tensor3& t) {
  std::vector<char> flags(t.size());
  auto d = t.data();
  for (std::size_t n = 0; n < flags.size(); ++n) flags[n] = d[n] != 0.0 ? 1 : 0;
  return ObservationMask(t.dims(), std::move(flags));
}

Tensor3 ObservationMask::to_tensor() const {
  Tensor3 t(dims_);
  auto d = t.data();
  for (std::size_t n = 0; n < flags_.size(); ++n) d[n] = flags_[n] ? 1.0 : 0.0;
  return t;
}

std::size_t ObservationMask::count() const {
  return static_cast<std::size_t>(std::count(flags_.begin(), flags_.end(), char{1}));
}

double ObservationMask::sampling_rate() const {
  return flags_.empty() ? 0.0 : static_cast<double>(count()) / static_cast<double>(flags_.size());
}

Matrix unfold(const Tensor3& t, int mode) {
  require_mode(mode);
  const Dims& d = t.dims();
  const std::size_t rows = d[mode];
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(d.numel() / rows));
  for (std::size_t k = 0; k < d.n3; ++k)
    for (std::size_t j = 0; j < d.n2; ++j)
      for (std::size_t i = 0; i < d.n1; ++i)
        m(unfold_row(mode, i, j, k), unfold_column(d, mode, i, j, k)) = t(i, j, k);
  return m;
}

Tensor3 fold(const Matrix& m, int mode, Dims dims) {
  require_mode(mode);
  const std::size_t rows = dims[mode];
  if (static_cast<std::size_t>(m.rows()) != rows ||
      static_cast<std::size_t>(m.cols()) * rows != dims.numel()) {
    throw std::invalid_argument("fold: matrix is " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()) + ", incompatible with mode-" +
                                std::to_string(mode) + " unfolding of the target dims");
  }
  Tensor3 t(dims);
  for (std::size_t k = 0; k < dims.n3; ++k)
    for (std::size_t j = 0; j < dims.n2; ++j)
      for (std::size_t i = 0; i < dims.n1; ++i)
        t(i, j, k) = m(unfold_row(mode, i, j, k), unfold_column(dims, mode, i, j, k));
  return t;
}

Tensor3 mode3_product(const Tensor3& t, const Matrix& d, Exec exec) {
  if (static_cast<std::size_t>(d.cols()) != t.dims().n3) {
    throw std::invalid_argument("mode3_product: matrix has " + std::to_string(d.cols()) +
                                " columns but tensor has n3 = " + std::to_string(t.dims().n3));
  }
  if (d.rows() == 0) throw std::invalid_argument("mode3_product: matrix has no rows");
  return exec == Exec::Serial ? kernels::serial::mode3_product(t, d) : kernels::omp::mode3_product(t, d);
}

Tensor3 project_observed(const Tensor3& x, const Tensor3& o, const ObservationMask& mask) {
  require_same_dims(x.dims(), o.dims(), "project_observed");
  require_same_dims(x.dims(), mask.dims(), "project_observed");
  Tensor3 out = x;
  auto dst = out.data();
  auto src = o.data();
  for (std::size_t n = 0; n < dst.size(); ++n)
    if (mask.observed(n)) dst[n] = src[n];
  return out;
}

Tensor3 masked_observation(const Tensor3& o, const ObservationMask& mask) {
  return project_observed(Tensor3(o.dims()), o, mask);
}

double inner_product(const Tensor3& a, const Tensor3& b) {
  require_same_dims(a.dims(), b.dims(), "inner_product");
  auto x = a.data();
  auto y = b.data();
  return std::inner_product(x.begin(), x.end(), y.begin(), 0.0);
}

double squared_norm(const Tensor3& t) { return inner_product(t, t); }

double frobenius_norm(const Tensor3& t) { return std::sqrt(squared_norm(t)); }

}  // namespace nttnn
