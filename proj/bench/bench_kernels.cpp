#include <benchmark/benchmark.h>

#include <random>

#include "nttnn/kernels.hpp"
#include "nttnn/solver.hpp"

using namespace nttnn;

namespace {

Tensor3 random_tensor(Dims dims, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, scale);
  Tensor3 t(dims);
  for (double& v : t.data()) v = gauss(rng);
  return t;
}

Dims cube(const benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  return Dims{n, n, 16};
}

template <bool Parallel>
void BM_Mode3Product(benchmark::State& state) {
  const Tensor3 t = random_tensor(cube(state), 1);
  const Matrix d = Matrix::Random(5, 16);
  for (auto _ : state) {
    Tensor3 out = Parallel ? kernels::omp::mode3_product(t, d) : kernels::serial::mode3_product(t, d);
    benchmark::DoNotOptimize(out.data().data());
  }
}

template <bool Parallel>
void BM_ApplyTanh(benchmark::State& state) {
  const Tensor3 t = random_tensor(cube(state), 2);
  const NonlinearFn f(NonlinearFn::Kind::Tanh);
  for (auto _ : state) {
    Tensor3 out = Parallel ? kernels::omp::apply_phi(t, f) : kernels::serial::apply_phi(t, f);
    benchmark::DoNotOptimize(out.data().data());
  }
}

template <bool Parallel>
void BM_SliceSvt(benchmark::State& state) {
  const Tensor3 h = random_tensor(cube(state), 3);
  for (auto _ : state) {
    Tensor3 out = Parallel ? kernels::omp::slice_svt(h, 0.5) : kernels::serial::slice_svt(h, 0.5);
    benchmark::DoNotOptimize(out.data().data());
  }
}

template <bool Parallel>
void BM_NewtonBatch(benchmark::State& state) {
  const Dims d = cube(state);
  const Tensor3 g = random_tensor(d, 4);
  const Tensor3 y = random_tensor(d, 5, 0.5);
  const Tensor3 z0 = random_tensor(d, 6);
  kernels::NewtonBatch batch{&g, &y, &z0, 10.001, 10.0, NonlinearFn(NonlinearFn::Kind::Tanh), {}};
  Tensor3 out(d);
  for (auto _ : state) {
    const std::size_t failures =
        Parallel ? kernels::omp::newton_batch(batch, out) : kernels::serial::newton_batch(batch, out);
    benchmark::DoNotOptimize(failures);
  }
}

template <bool Parallel>
void BM_SolverSweep(benchmark::State& state) {
  const Dims d = cube(state);
  const Tensor3 truth = random_tensor(d, 7);
  ObservationMask mask(d);
  std::mt19937_64 rng(8);
  std::bernoulli_distribution coin(0.5);
  for (std::size_t n = 0; n < d.numel(); ++n) mask.set(n, coin(rng));
  CompletionProblem p{masked_observation(truth, mask), mask};
  SolverConfig cfg;
  cfg.r = 5;
  cfg.max_iters = 5;
  cfg.exec = Parallel ? Exec::Parallel : Exec::Serial;
  for (auto _ : state) {
    CompletionResult res = run(p, cfg);
    benchmark::DoNotOptimize(res.x_hat.data().data());
  }
}

}  // namespace

BENCHMARK(BM_Mode3Product<false>)->Name("mode3_product/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_Mode3Product<true>)->Name("mode3_product/omp")->Arg(64)->Arg(256);
BENCHMARK(BM_ApplyTanh<false>)->Name("apply_phi_tanh/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_ApplyTanh<true>)->Name("apply_phi_tanh/omp")->Arg(64)->Arg(256);
BENCHMARK(BM_SliceSvt<false>)->Name("slice_svt/serial")->Arg(64)->Arg(128);
BENCHMARK(BM_SliceSvt<true>)->Name("slice_svt/omp")->Arg(64)->Arg(128);
BENCHMARK(BM_NewtonBatch<false>)->Name("newton_batch/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_NewtonBatch<true>)->Name("newton_batch/omp")->Arg(64)->Arg(256);
BENCHMARK(BM_SolverSweep<false>)->Name("solver_5_sweeps/serial")->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SolverSweep<true>)->Name("solver_5_sweeps/omp")->Arg(64)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
