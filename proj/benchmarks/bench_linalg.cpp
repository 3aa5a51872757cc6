#include <benchmark/benchmark.h>

#include "gotedit/linalg.hpp"
#include "gotedit/random.hpp"

namespace {

using namespace gotedit;

Eigen::MatrixXd features(int C, int N) {
  Rng rng(7);
  return gaussian_matrix(C, N, 1.0, rng);
}

void BM_Whiten(benchmark::State& state) {
  const auto X = features(static_cast<int>(state.range(0)), 1024);
  for (auto _ : state) benchmark::DoNotOptimize(whiten(X));
}
BENCHMARK(BM_Whiten)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_Correlation(benchmark::State& state) {
  const auto Z = whiten(features(static_cast<int>(state.range(0)), 1024));
  for (auto _ : state) benchmark::DoNotOptimize(regularized_correlation(Z, 1e-3));
}
BENCHMARK(BM_Correlation)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_Jacobi(benchmark::State& state) {
  const auto C = static_cast<int>(state.range(0));
  const auto M = regularized_correlation(whiten(features(C, 4 * C)), 1e-3);
  for (auto _ : state) benchmark::DoNotOptimize(sym_eig(M));
}
BENCHMARK(BM_Jacobi)->RangeMultiplier(2)->Range(8, 128)->Unit(benchmark::kMicrosecond);

void BM_Tridiagonal(benchmark::State& state) {
  const auto C = static_cast<int>(state.range(0));
  const auto M = regularized_correlation(whiten(features(C, 4 * C)), 1e-3);
  for (auto _ : state) benchmark::DoNotOptimize(sym_eig_tridiagonal(M.M));
}
BENCHMARK(BM_Tridiagonal)->RangeMultiplier(2)->Range(8, 256)->Unit(benchmark::kMicrosecond);

void BM_Projector(benchmark::State& state) {
  const auto X = features(static_cast<int>(state.range(0)), 1024);
  for (auto _ : state) {
    const auto Z = whiten(X);
    benchmark::DoNotOptimize(nullspace_projector(regularized_correlation(Z, default_ridge(Z))));
  }
}
BENCHMARK(BM_Projector)->Arg(16)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace
