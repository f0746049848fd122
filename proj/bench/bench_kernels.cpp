// Serial reference vs. prefix-block OpenMP kernels for log S_n(t).
//
//   ./bench_kernels --benchmark_filter=Natural

#include <benchmark/benchmark.h>

#include <cmath>

#include "affdim/kernels.hpp"

namespace {

using namespace affdim;

AffineIFS generic_pair() {
  const Matrix a = Matrix::rotation(0.4, 1.0) * Matrix::diagonal({0.45, 0.3});
  const Matrix b = Matrix::rotation(-1.1, 1.0) * Matrix::diagonal({0.42, 0.25});
  return AffineIFS("generic-pair", 2, {{a, {0.0, 0.0}}, {b, {1.0, 0.0}}});
}

void BM_NaturalSerial(benchmark::State& state) {
  const auto cf = CylinderFunction::natural(generic_pair());
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::log_partition_sum(cf, 0.8, n));
  state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << n));
}

void BM_NaturalParallel(benchmark::State& state) {
  const auto cf = CylinderFunction::natural(generic_pair());
  const int n = static_cast<int>(state.range(0));
  const ComputeOptions opts{.workers = static_cast<int>(state.range(1))};
  for (auto _ : state) benchmark::DoNotOptimize(kernels::log_partition_sum(cf, 0.8, n, opts));
  state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << n));
}

void BM_ProductParallel(benchmark::State& state) {
  const auto cf = CylinderFunction::product({0.5, 0.3, 0.2});
  const int n = static_cast<int>(state.range(0));
  const ComputeOptions opts{.workers = static_cast<int>(state.range(1))};
  for (auto _ : state) benchmark::DoNotOptimize(kernels::log_partition_sum(cf, 1.0, n, opts));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(std::pow(3.0, n)));
}

}  // namespace

BENCHMARK(BM_NaturalSerial)->Arg(10)->Arg(14)->Arg(18)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NaturalParallel)->ArgsProduct({{10, 14, 18}, {1, 2, 8}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ProductParallel)->ArgsProduct({{8, 12}, {1, 8}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
