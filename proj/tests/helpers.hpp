#pragma once

#include <random>

#include "nttnn/tensor.hpp"

namespace nttnn::test {

inline Tensor3 random_tensor(Dims dims, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  Tensor3 t(dims);
  for (double& v : t.data()) v = gauss(rng);
  return t;
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = gauss(rng);
  return m;
}

/// r x n with orthonormal rows, r <= n.
inline Matrix random_semi_orthogonal(Eigen::Index r, Eigen::Index n, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(n, r, rng));
  Matrix q = qr.householderQ() * Matrix::Identity(n, r);
  return q.transpose();
}

inline ObservationMask random_mask(Dims dims, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(p);
  ObservationMask m(dims);
  for (std::size_t n = 0; n < dims.numel(); ++n) m.set(n, coin(rng));
  m.set(0, true);
  return m;
}

}  // namespace nttnn::test
