#include <benchmark/benchmark.h>

#include <random>

#include "tcatch/tensor.hpp"

using namespace tcatch;

namespace {

DenseTensor filled(const TensorShape& shape) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  DenseTensor t(shape);
  for (double& v : t.data()) v = z(rng);
  return t;
}

} // namespace

static void BM_ModeProduct(benchmark::State& state) {
  const auto p = static_cast<std::size_t>(state.range(0));
  const DenseTensor t = filled(TensorShape{p, p, p});
  const Matrix m = Matrix::Random(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  const auto mode = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(mode_product(t, mode, m));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(t.size()));
}
BENCHMARK(BM_ModeProduct)->ArgsProduct({{10, 30}, {0, 1, 2}});

static void BM_Tucker(benchmark::State& state) {
  const TensorShape shape{30, 36, 30};
  const DenseTensor t = filled(shape);
  std::vector<Matrix> f;
  for (std::size_t m = 0; m < 3; ++m)
    f.push_back(Matrix::Random(static_cast<Eigen::Index>(shape[m]), static_cast<Eigen::Index>(shape[m])));
  for (auto _ : state) benchmark::DoNotOptimize(tucker(t, f));
}
BENCHMARK(BM_Tucker);
