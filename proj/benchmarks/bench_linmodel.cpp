#include <benchmark/benchmark.h>

#include "panelmi/linmodel.hpp"
#include "panelmi/random.hpp"

namespace {

void BM_FitOls(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const auto q = static_cast<Eigen::Index>(state.range(1));
  panelmi::Rng rng(1);
  Eigen::MatrixXd x(n, q);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < q; ++j) x(i, j) = rng.normal();
    y(i) = x.row(i).sum() + rng.normal();
  }
  for (auto _ : state) benchmark::DoNotOptimize(panelmi::fit_ols(x, y));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_FitOls)->Args({200, 10})->Args({1230, 55})->Args({1230, 150});

void BM_PosteriorDraw(benchmark::State& state) {
  const Eigen::Index n = 1230, q = state.range(0);
  panelmi::Rng rng(2);
  Eigen::MatrixXd x(n, q);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < q; ++j) x(i, j) = rng.normal();
    y(i) = rng.normal();
  }
  const auto fit = panelmi::fit_ols(x, y);
  for (auto _ : state) benchmark::DoNotOptimize(panelmi::draw_posterior(fit, rng));
}
BENCHMARK(BM_PosteriorDraw)->Arg(10)->Arg(55)->Arg(150);

}  // namespace
