#pragma once

// Data-parallel inner loops of the solver. Every kernel has a plain serial
// version, kept as the reference for tests and benchmarks, and an OpenMP
// version. Both compute each output element with the same arithmetic, so
// their results are bit-identical for any thread count.

#include <cstddef>

#include "nttnn/newton.hpp"
#include "nttnn/tensor.hpp"
#include "nttnn/transforms.hpp"

namespace nttnn::kernels {

/// Inputs of the entry-wise Z update.
struct NewtonBatch {
  const Tensor3* g = nullptr;       // proximal centres
  const Tensor3* y = nullptr;       // targets for phi(z)
  const Tensor3* z_init = nullptr;  // warm starts
  double curvature = 1.0;
  double beta = 0.0;
  NonlinearFn phi;
  NewtonOptions options;
};

namespace serial {
Tensor3 mode3_product(const Tensor3& t, const Matrix& d);
Tensor3 apply_phi(const Tensor3& t, const NonlinearFn& f);
Tensor3 slice_svt(const Tensor3& h, double tau);
/// Writes the minimizers into `out`; returns the number of non-converged entries.
std::size_t newton_batch(const NewtonBatch& batch, Tensor3& out);
}  // namespace serial

namespace omp {
Tensor3 mode3_product(const Tensor3& t, const Matrix& d);
Tensor3 apply_phi(const Tensor3& t, const NonlinearFn& f);
Tensor3 slice_svt(const Tensor3& h, double tau);
std::size_t newton_batch(const NewtonBatch& batch, Tensor3& out);
}  // namespace omp

/// Sets the OpenMP thread count used by the omp kernels (0 keeps the default).
void set_threads(int threads);
int max_threads();

}  // namespace nttnn::kernels
