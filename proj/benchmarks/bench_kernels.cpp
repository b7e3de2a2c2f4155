#include <benchmark/benchmark.h>

#include <vector>

#include "s3fn/linalg.hpp"
#include "s3fn/model.hpp"
#include "s3fn/nn/checkpoint.hpp"
#include "s3fn/nn/layers.hpp"
#include "s3fn/pca.hpp"
#include "s3fn/random.hpp"

using namespace s3fn;

static void BM_Conv3dForward(benchmark::State& state) {
  const auto cin = static_cast<std::size_t>(state.range(0));
  const auto filters = static_cast<std::size_t>(state.range(1));
  Rng rng(1);
  nn::Tensor4 x(16, 16, 2, cin);
  for (auto& v : x.values) v = rng.uniform(-1, 1);
  auto p = nn::make_conv_params("c", cin, filters);
  nn::he_uniform_init(p, rng);
  for (auto _ : state) benchmark::DoNotOptimize(nn::conv3d_forward(x, p));
  state.counters["GFLOP/s"] = benchmark::Counter(2.0 * 27 * 16 * 16 * 2 * double(cin * filters),
                                                 benchmark::Counter::kIsIterationInvariantRate, benchmark::Counter::kIs1000);
}
BENCHMARK(BM_Conv3dForward)->Args({32, 64})->Args({64, 128});

static void BM_Conv3dBackward(benchmark::State& state) {
  Rng rng(2);
  nn::Tensor4 x(16, 16, 2, 64);
  for (auto& v : x.values) v = rng.uniform(-1, 1);
  auto p = nn::make_conv_params("c", 64, 128);
  nn::he_uniform_init(p, rng);
  nn::Tensor4 g(16, 16, 2, 128, 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(nn::conv3d_backward(x, p, g, true));
}
BENCHMARK(BM_Conv3dBackward);

static void BM_BackboneStep(benchmark::State& state) {
  const auto cprime = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  const auto bb = build_backbone(cprime, 2, 4);
  nn::Tensor4 x(32, 32, cprime, 1);
  for (auto& v : x.values) v = rng.uniform(-1, 1);
  for (auto _ : state) {
    const auto t = backbone_forward(bb, x, true, &rng);
    benchmark::DoNotOptimize(backbone_backward(bb, t, nn::softmax_cross_entropy_grad(t.probs, 0)));
  }
}
BENCHMARK(BM_BackboneStep)->Arg(2)->Arg(5)->Unit(benchmark::kMillisecond);

static void BM_SymmetricEigen(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(4);
  std::vector<double> a(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) a[i * n + j] = a[j * n + i] = rng.uniform(-1, 1);
  for (auto _ : state) benchmark::DoNotOptimize(symmetric_eigen(a, n));
}
BENCHMARK(BM_SymmetricEigen)->Arg(40)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_FitPca(benchmark::State& state) {
  const auto bands = static_cast<std::size_t>(state.range(0));
  const std::size_t rows = 30 * 4 * 1024;
  Rng rng(5);
  std::vector<double> x(rows * bands);
  for (auto& v : x) v = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(fit_pca_matrix(x, rows, bands));
}
BENCHMARK(BM_FitPca)->Arg(40)->Arg(128)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
