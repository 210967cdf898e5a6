#include <benchmark/benchmark.h>

#include <vector>

#include "panelmi/pmm.hpp"
#include "panelmi/random.hpp"

namespace {

// One imputation step: n rows, p predictors, a fraction `missing` of holes.
void BM_PmmStep(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const auto p = static_cast<Eigen::Index>(state.range(1));
  const double missing = static_cast<double>(state.range(2)) / 100.0;
  panelmi::Rng rng(3);
  Eigen::MatrixXd x(n, p);
  std::vector<double> y(static_cast<std::size_t>(n));
  std::vector<std::uint8_t> observed(y.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) x(i, j) = rng.normal();
    y[static_cast<std::size_t>(i)] = x.row(i).sum() + rng.normal();
    observed[static_cast<std::size_t>(i)] = rng.uniform01() >= missing;
  }
  const panelmi::PmmSettings settings;
  for (auto _ : state) benchmark::DoNotOptimize(panelmi::pmm_impute(x, y, observed, settings, rng));
}
BENCHMARK(BM_PmmStep)->Args({1230, 54, 7})->Args({1230, 54, 50})->Args({1230, 54, 82})->Args({1000, 4, 30});

}  // namespace
