#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "panelmi/datamodel.hpp"
#include "panelmi/mice.hpp"
#include "panelmi/random.hpp"

namespace {

// countries x 15 years, `vars` loosely correlated targets, 20% of cells missing.
panelmi::PanelDataset panel(int countries, int vars) {
  panelmi::Rng rng(4);
  std::vector<std::string> codes;
  for (int c = 0; c < countries; ++c) codes.push_back("C" + std::to_string(100 + c));
  std::vector<int> years;
  for (int y = 2005; y < 2020; ++y) years.push_back(y);
  std::vector<panelmi::VariableMeta> meta;
  for (int v = 0; v < vars; ++v)
    meta.push_back({"v" + std::to_string(v), "", panelmi::Capacity::Technology, 1, panelmi::Role::Target});
  std::vector<panelmi::CellRecord> cells;
  for (const auto& c : codes)
    for (int y : years) {
      const double common = rng.normal();
      for (const auto& m : meta)
        if (rng.uniform01() >= 0.2) cells.push_back({c, y, m.code, common + rng.normal()});
    }
  return panelmi::build_panel(codes, years, meta, cells);
}

void BM_MiceSweep(benchmark::State& state) {
  const panelmi::PanelDataset ds = panel(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  panelmi::MiceConfig config;
  config.m = 1;
  config.iterations = 1;
  config.seed = 5;
  config.predictors.country_indicators = state.range(2) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(panelmi::run_mice(ds, config));
}
BENCHMARK(BM_MiceSweep)->Args({20, 10, 1})->Args({82, 20, 0})->Args({82, 20, 1})->Unit(benchmark::kMillisecond);

}  // namespace
