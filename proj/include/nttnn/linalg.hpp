#pragma once

#include <span>
#include <stdexcept>
#include <string>

#include "nttnn/tensor.hpp"

namespace nttnn {

/// Raised when an iterative factorization fails to converge.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thin SVD: a = u * diag(s) * v^T with p = min(rows, cols) columns.
struct SvdFactors {
  Matrix u;
  Vector s;  // descending, nonnegative
  Matrix v;
};

SvdFactors svd(const Matrix& a);

/// Singular value thresholding: the minimizer of tau*||Y||_* + 0.5*||Y - a||_F^2.
Matrix svt(const Matrix& a, double tau);

double nuclear_norm(const Matrix& a);

struct ProcrustesResult {
  Matrix t;                 // r x n, t * t^T = I
  bool unique = true;       // false when the input is (numerically) rank deficient
};

/// Maximizes Tr(m * T) over T with T * T^T = I, for an n x r input (n >= r).
ProcrustesResult procrustes_max_trace(const Matrix& m);

/// Fraction of the total singular-value mass captured by the leading k values.
double acc_egy(std::span<const double> s, std::size_t k);

/// Orthogonal DCT-II matrix of size n (rows are the basis vectors).
Matrix dct_matrix(std::size_t n);

/// max |a * a^T - I|, the semi-orthogonality residual of a wide matrix.
double semi_orthogonality_residual(const Matrix& a);

}  // namespace nttnn
