#include <benchmark/benchmark.h>

#include "fedcvr/coalition/eigensolver.hpp"
#include "fedcvr/coalition/kernels.hpp"
#include "fedcvr/coalition/spectral.hpp"
#include "fedcvr/rng.hpp"

using namespace fedcvr;
using namespace fedcvr::coalition;

namespace {

// Two noisy groups of scalar models, as seen after a few rounds.
Matrix two_group_params(std::size_t k) {
  CounterRng rng(k);
  Matrix p(static_cast<Eigen::Index>(k), 1);
  for (Eigen::Index i = 0; i < p.rows(); ++i) p(i, 0) = (i % 2 ? 3.0 : -2.0) + 0.5 * rng.normal();
  return p;
}

Matrix normalized_affinity(const Matrix& params) {
  Matrix a = homophily_matrix(params, 1.0).entries;
  a = (0.5 * (a + a.transpose())).eval();
  a.diagonal().setZero();
  const Vector s = a.rowwise().sum().cwiseSqrt().cwiseInverse();
  return s.asDiagonal() * a * s.asDiagonal();
}

void BM_HomophilyMatrix(benchmark::State& state) {
  const Matrix p = two_group_params(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(homophily_matrix(p, 1.0));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_HomophilyMatrix)->RangeMultiplier(2)->Range(50, 400)->Complexity();

void BM_Eigen(benchmark::State& state, EigenMethod method) {
  const Matrix m = normalized_affinity(two_group_params(static_cast<std::size_t>(state.range(0))));
  PartialEigenOptions options;
  options.method = method;
  for (auto _ : state) benchmark::DoNotOptimize(largest_eigenpairs(m, 10, 1, options));
  state.SetComplexityN(state.range(0));
}
BENCHMARK_CAPTURE(BM_Eigen, selected, EigenMethod::selected)->RangeMultiplier(2)->Range(50, 400)->Complexity();
BENCHMARK_CAPTURE(BM_Eigen, dense, EigenMethod::dense)->RangeMultiplier(2)->Range(50, 400)->Complexity();
BENCHMARK_CAPTURE(BM_Eigen, krylov, EigenMethod::krylov)->RangeMultiplier(2)->Range(100, 400);

void BM_SpectralCluster(benchmark::State& state) {
  const auto w = homophily_matrix(two_group_params(static_cast<std::size_t>(state.range(0))), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(spectral_cluster(w, 10, kDefaultKmeansIters, 3));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SpectralCluster)->RangeMultiplier(2)->Range(50, 400)->Complexity();

}  // namespace
