#include "nttnn/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nttnn {

namespace {

constexpr double kRankTolerance = 1e-12;

std::string shape(const Matrix& a) { return std::to_string(a.rows()) + "x" + std::to_string(a.cols()); }

}  // namespace

SvdFactors svd(const Matrix& a) {
  if (a.rows() == 0 || a.cols() == 0) throw std::invalid_argument("svd: empty matrix");
  if (!a.allFinite()) throw std::invalid_argument("svd: non-finite entry in " + shape(a) + " matrix");
  Eigen::JacobiSVD<Matrix> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (dec.info() != Eigen::Success) throw NumericError("svd did not converge for " + shape(a) + " matrix");
  return {dec.matrixU(), dec.singularValues(), dec.matrixV()};
}

Matrix svt(const Matrix& a, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("svt: threshold must be positive");
  SvdFactors f = svd(a);
  Eigen::Index keep = 0;
  while (keep < f.s.size() && f.s(keep) > tau) ++keep;
  if (keep == 0) return Matrix::Zero(a.rows(), a.cols());
  Vector shrunk = (f.s.head(keep).array() - tau).matrix();
  return f.u.leftCols(keep) * shrunk.asDiagonal() * f.v.leftCols(keep).transpose();
}

double nuclear_norm(const Matrix& a) { return svd(a).s.sum(); }

ProcrustesResult procrustes_max_trace(const Matrix& m) {
  if (m.rows() < m.cols()) {
    throw std::invalid_argument("procrustes_max_trace: expected a tall matrix, got " + shape(m));
  }
  SvdFactors f = svd(m);
  ProcrustesResult out;
  out.t = f.v * f.u.transpose();
  const double smax = f.s(0);
  const double smin = f.s(f.s.size() - 1);
  out.unique = smax > 0.0 && smin > kRankTolerance * smax;
  return out;
}

double acc_egy(std::span<const double> s, std::size_t k) {
  if (k > s.size()) throw std::invalid_argument("acc_egy: k exceeds the number of singular values");
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] < 0.0 || (i > 0 && s[i] > s[i - 1])) {
      throw std::invalid_argument("acc_egy: singular values must be nonnegative and descending");
    }
  }
  if (k == 0) return 0.0;
  double total = 0.0;
  for (double v : s) total += v;
  if (total == 0.0) return 1.0;
  double head = 0.0;
  for (std::size_t i = 0; i < k; ++i) head += s[i];
  return std::min(1.0, head / total);
}

Matrix dct_matrix(std::size_t n) {
  if (n == 0) throw std::invalid_argument("dct_matrix: size must be positive");
  const auto nn = static_cast<Eigen::Index>(n);
  Matrix c(nn, nn);
  const double scale0 = std::sqrt(1.0 / static_cast<double>(n));
  const double scale = std::sqrt(2.0 / static_cast<double>(n));
  for (Eigen::Index k = 0; k < nn; ++k) {
    for (Eigen::Index j = 0; j < nn; ++j) {
      const double angle = std::numbers::pi * static_cast<double>((2 * j + 1) * k) / (2.0 * static_cast<double>(n));
      c(k, j) = (k == 0 ? scale0 : scale) * std::cos(angle);
    }
  }
  return c;
}

double semi_orthogonality_residual(const Matrix& a) {
  Matrix gram = a * a.transpose();
  gram.diagonal().array() -= 1.0;
  return gram.cwiseAbs().maxCoeff();
}

}  // namespace nttnn
