#include "nttnn/kernels.hpp"

#include <omp.h>

#include <cstdint>

#include "nttnn/linalg.hpp"

namespace nttnn::kernels {

namespace {

Dims product_dims(const Tensor3& t, const Matrix& d) {
  return {t.dims().n1, t.dims().n2, static_cast<std::size_t>(d.rows())};
}

// out(p, r) = sum_k d(r, k) * t(p, k), summed in increasing k.
inline double mode3_entry(const double* src, std::size_t pixels, std::size_t n3, const Matrix& d,
                          std::size_t p, Eigen::Index row) {
  double acc = 0.0;
  for (std::size_t k = 0; k < n3; ++k) acc += d(row, static_cast<Eigen::Index>(k)) * src[p + pixels * k];
  return acc;
}

inline bool newton_entry(const NewtonBatch& b, std::size_t n, double* out) {
  ScalarProblem p{b.curvature, b.beta, b.g->data()[n], b.y->data()[n]};
  NewtonResult res = newton_scalar(p, b.z_init->data()[n], b.phi, b.options);
  out[n] = res.z;
  return res.converged;
}

}  // namespace

namespace serial {

Tensor3 mode3_product(const Tensor3& t, const Matrix& d) {
  Tensor3 out(product_dims(t, d));
  const std::size_t pixels = t.dims().n1 * t.dims().n2;
  const std::size_t n3 = t.dims().n3;
  const double* src = t.data().data();
  double* dst = out.data().data();
  for (Eigen::Index row = 0; row < d.rows(); ++row)
    for (std::size_t p = 0; p < pixels; ++p)
      dst[p + pixels * static_cast<std::size_t>(row)] = mode3_entry(src, pixels, n3, d, p, row);
  return out;
}

Tensor3 apply_phi(const Tensor3& t, const NonlinearFn& f) {
  Tensor3 out(t.dims());
  auto src = t.data();
  auto dst = out.data();
  for (std::size_t n = 0; n < src.size(); ++n) dst[n] = f.eval(src[n]);
  return out;
}

Tensor3 slice_svt(const Tensor3& h, double tau) {
  Tensor3 out(h.dims());
  for (std::size_t k = 0; k < h.dims().n3; ++k) out.slice(k) = svt(h.slice(k), tau);
  return out;
}

std::size_t newton_batch(const NewtonBatch& batch, Tensor3& out) {
  double* dst = out.data().data();
  std::size_t failures = 0;
  for (std::size_t n = 0; n < out.size(); ++n)
    if (!newton_entry(batch, n, dst)) ++failures;
  return failures;
}

}  // namespace serial

namespace omp {

Tensor3 mode3_product(const Tensor3& t, const Matrix& d) {
  Tensor3 out(product_dims(t, d));
  const std::int64_t pixels = static_cast<std::int64_t>(t.dims().n1 * t.dims().n2);
  const std::size_t n3 = t.dims().n3;
  const double* src = t.data().data();
  double* dst = out.data().data();
  const Eigen::Index rows = d.rows();
#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < pixels; ++p) {
    const auto pu = static_cast<std::size_t>(p);
    for (Eigen::Index row = 0; row < rows; ++row)
      dst[pu + static_cast<std::size_t>(pixels) * static_cast<std::size_t>(row)] =
          mode3_entry(src, static_cast<std::size_t>(pixels), n3, d, pu, row);
  }
  return out;
}

Tensor3 apply_phi(const Tensor3& t, const NonlinearFn& f) {
  Tensor3 out(t.dims());
  const double* src = t.data().data();
  double* dst = out.data().data();
  const auto n = static_cast<std::int64_t>(t.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t idx = 0; idx < n; ++idx) dst[idx] = f.eval(src[idx]);
  return out;
}

Tensor3 slice_svt(const Tensor3& h, double tau) {
  Tensor3 out(h.dims());
  const auto slices = static_cast<std::int64_t>(h.dims().n3);
  bool failed = false;
  std::string message;
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t k = 0; k < slices; ++k) {
    try {
      Matrix s = svt(h.slice(static_cast<std::size_t>(k)), tau);
      out.slice(static_cast<std::size_t>(k)) = s;
    } catch (const std::exception& e) {
#pragma omp critical
      {
        failed = true;
        message = e.what();
      }
    }
  }
  if (failed) throw NumericError(message);
  return out;
}

std::size_t newton_batch(const NewtonBatch& batch, Tensor3& out) {
  double* dst = out.data().data();
  const auto n = static_cast<std::int64_t>(out.size());
  std::size_t failures = 0;
#pragma omp parallel for schedule(static) reduction(+ : failures)
  for (std::int64_t idx = 0; idx < n; ++idx)
    if (!newton_entry(batch, static_cast<std::size_t>(idx), dst)) ++failures;
  return failures;
}

}  // namespace omp

void set_threads(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace nttnn::kernels
