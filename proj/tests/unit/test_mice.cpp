#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <set>

#include "panelmi/ingest.hpp"
#include "panelmi/mice.hpp"
#include "synthetic.hpp"

using namespace panelmi;

namespace {

std::vector<std::uint8_t> random_mask(std::size_t n, double keep, Rng& rng) {
  std::vector<std::uint8_t> m(n);
  for (auto& b : m) b = rng.uniform01() < keep;
  return m;
}

// Small panel: x1..x4 targets with holes, one complete auxiliary.
PanelDataset small_panel(std::uint64_t seed, int countries = 6, int years = 8) {
  testing::CorrelatedSpec spec;
  spec.countries = countries;
  spec.years = years;
  spec.variables = 5;
  spec.rho = 0.6;
  spec.seed = seed;
  PanelDataset ds = testing::correlated_panel(spec);
  auto vars = ds.variables();
  vars[4].role = Role::Auxiliary;
  vars[4].capacity = Capacity::Auxiliary;
  ds = ds.with_variables(vars);
  Rng rng(seed + 100);
  for (std::size_t v = 0; v < 4; ++v) ds = testing::with_mask(ds, v, random_mask(ds.row_count(), 0.75 - 0.1 * v, rng));
  return ds;
}

// Straightforward chain: raw predictor matrix rebuilt every step, pmm_impute
// does its own standardization. Same generator protocol as run_mice.
std::vector<std::vector<double>> reference_chain(const PanelDataset& ds, const MiceConfig& config, int chain) {
  Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(chain)));
  std::vector<std::vector<double>> cols(ds.variable_count());
  for (std::size_t v = 0; v < ds.variable_count(); ++v) cols[v].assign(ds.column(v).begin(), ds.column(v).end());
  for (std::size_t v = 0; v < ds.variable_count(); ++v) {
    if (ds.variables()[v].role != Role::Target || ds.missing_count(v) == 0) continue;
    const auto pool = observed_values(ds, ds.variables()[v].code);
    for (std::size_t i = 0; i < ds.row_count(); ++i)
      if (!ds.observed(i, v)) cols[v][i] = pool[rng.index(pool.size())];
  }
  const auto order = visit_order(ds, config.visit_order);
  const std::size_t n = ds.row_count();
  for (int t = 0; t < config.iterations; ++t) {
    for (const auto& code : order) {
      const std::size_t target = ds.variable_index(code);
      if (ds.missing_count(target) == 0) continue;
      std::vector<std::vector<double>> x;
      for (std::size_t v = 0; v < ds.variable_count(); ++v)
        if (v != target && ds.variables()[v].role == Role::Target) x.push_back(cols[v]);
      for (std::size_t v = 0; v < ds.variable_count(); ++v)
        if (ds.variables()[v].role == Role::Auxiliary) x.push_back(cols[v]);
      if (config.predictors.year && ds.years().size() > 1) {
        std::vector<double> year(n);
        for (std::size_t i = 0; i < n; ++i) year[i] = ds.years()[ds.rows()[i].year];
        x.push_back(year);
      }
      if (config.predictors.country_indicators && ds.countries().size() > 1) {
        std::vector<std::size_t> obs_in(ds.countries().size(), 0);
        std::size_t n_obs = 0;
        for (std::size_t i = 0; i < n; ++i)
          if (ds.observed(i, target)) {
            ++obs_in[ds.rows()[i].country];
            ++n_obs;
          }
        bool reference = false;
        for (std::size_t c = 0; c < obs_in.size(); ++c) {
          if (obs_in[c] == 0) continue;
          if (!reference) {
            reference = true;
            continue;
          }
          if (obs_in[c] == n_obs) continue;
          std::vector<double> ind(n);
          for (std::size_t i = 0; i < n; ++i) ind[i] = ds.rows()[i].country == c ? 1.0 : 0.0;
          x.push_back(ind);
        }
      }
      Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(x.size()));
      for (std::size_t j = 0; j < x.size(); ++j)
        for (std::size_t i = 0; i < n; ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = x[j][i];
      const PmmResult r = pmm_impute(m, ds.column(target), ds.mask(target), config.pmm, rng);
      for (const auto& cell : r.imputed) cols[target][cell.row] = cell.value;
    }
  }
  return cols;
}

}  // namespace

TEST_CASE("run_mice matches the reference chain") {
  const PanelDataset ds = small_panel(3);
  for (const bool countries : {false, true}) {
    MiceConfig config;
    config.m = 3;
    config.iterations = 4;
    config.seed = 42;
    config.predictors.country_indicators = countries;
    const ImputationResult result = run_mice(ds, config);
    for (int c = 0; c < config.m; ++c) {
      const auto expected = reference_chain(ds, config, c);
      const PanelDataset& got = result.completed[static_cast<std::size_t>(c)];
      std::size_t mismatches = 0;
      for (std::size_t v = 0; v < ds.variable_count(); ++v)
        for (std::size_t i = 0; i < ds.row_count(); ++i)
          if (got.column(v)[i] != expected[v][i]) ++mismatches;
      CHECK_MESSAGE(mismatches == 0, "chain " << c << " countries " << countries);
    }
  }
}

TEST_CASE("complete data gives m identical copies") {
  testing::CorrelatedSpec spec;
  spec.countries = 5;
  spec.years = 4;
  spec.variables = 3;
  const PanelDataset ds = testing::correlated_panel(spec);
  MiceConfig config;
  config.m = 4;
  config.iterations = 3;
  config.seed = 1;
  const ImputationResult r = run_mice(ds, config);
  REQUIRE(r.completed.size() == 4);
  for (const auto& c : r.completed) CHECK(c.same_as(ds));
  CHECK(r.imputed_variables.empty());
  CHECK(r.traces.size() == 0);
  for (std::size_t i = 0; i < ds.row_count(); ++i)
    for (std::size_t v = 0; v < ds.variable_count(); ++v) CHECK(r.provenance(i, v) == Provenance::Observed);
}

TEST_CASE("observed cells kept, targets completed, trace shape") {
  const PanelDataset ds = small_panel(5);
  MiceConfig config;
  config.m = 4;
  config.iterations = 5;
  config.seed = 9;
  const ImputationResult r = run_mice(ds, config);
  REQUIRE(r.completed.size() == 4);
  for (const auto& c : r.completed) {
    CHECK(c.missing_count() == 0);
    for (std::size_t v = 0; v < ds.variable_count(); ++v)
      for (std::size_t i = 0; i < ds.row_count(); ++i)
        if (ds.observed(i, v)) CHECK(c.column(v)[i] == ds.column(v)[i]);
  }
  CHECK(r.imputed_variables.size() == 4);
  CHECK(r.traces.size() == 4u * 5u * 4u);
  // imputed values come from the observed set of the same variable
  for (std::size_t v = 0; v < 4; ++v) {
    const auto obs = observed_values(ds, ds.variables()[v].code);
    const std::set<double> allowed(obs.begin(), obs.end());
    for (const auto& c : r.completed)
      for (std::size_t i = 0; i < ds.row_count(); ++i)
        if (!ds.observed(i, v)) CHECK(allowed.count(c.column(v)[i]) == 1);
  }
  CHECK(r.provenance(0, 4) == Provenance::Observed);
}

TEST_CASE("results do not depend on the worker count") {
  const PanelDataset ds = small_panel(7);
  MiceConfig config;
  config.m = 5;
  config.iterations = 3;
  config.seed = 123;
  const ImputationResult serial = run_mice(ds, config);
  config.workers = 4;
  const ImputationResult parallel = run_mice(ds, config);
  for (std::size_t c = 0; c < 5; ++c) CHECK(serial.completed[c].same_as(parallel.completed[c]));
  CHECK(format_trace_csv(serial.traces) == format_trace_csv(parallel.traces));

  config.seed = 124;
  const ImputationResult other = run_mice(ds, config);
  CHECK_FALSE(other.completed[0].same_as(serial.completed[0]));
}

TEST_CASE("initialize_fill draws from the observed values") {
  const std::vector<VariableMeta> vars{{"a", "", Capacity::Technology, 1, Role::Target},
                                       {"b", "", Capacity::Technology, 1, Role::Target}};
  const std::vector<CellRecord> cells{{"A", 2000, "a", 5.0}, {"A", 2000, "b", 1.0}, {"A", 2001, "b", 2.0}};
  const PanelDataset ds = build_panel({"A"}, {2000, 2001, 2002}, vars, cells);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const PanelDataset filled = initialize_fill(ds, rng);
    CHECK(filled.missing_count() == 0);
    CHECK(filled.column(0)[1] == 5.0);
    CHECK(filled.column(0)[2] == 5.0);
    const double b = filled.column(1)[2];
    CHECK((b == 1.0 || b == 2.0));
  }
}

TEST_CASE("visit order") {
  const std::vector<VariableMeta> vars{{"a", "", Capacity::Technology, 1, Role::Target},
                                       {"b", "", Capacity::Technology, 1, Role::Target},
                                       {"c", "", Capacity::Technology, 1, Role::Target},
                                       {"z", "", Capacity::Auxiliary, 1, Role::Auxiliary}};
  std::vector<CellRecord> cells;
  for (int y = 0; y < 10; ++y) {
    if (y < 5) cells.push_back({"A", 2000 + y, "a", 1.0 * y});  // 50% missing
    if (y < 9) cells.push_back({"A", 2000 + y, "b", 1.0 * y});  // 10% missing
    if (y < 9) cells.push_back({"A", 2000 + y, "c", 1.0 * y});  // 10% missing
    cells.push_back({"A", 2000 + y, "z", 1.0 * y});
  }
  const PanelDataset ds = build_panel({"A"}, testing::year_range(2000, 10), vars, cells);
  CHECK(visit_order(ds, VisitOrder::AscendingMissingness) == std::vector<std::string>{"b", "c", "a"});
  CHECK(visit_order(ds, VisitOrder::SchemaOrder) == std::vector<std::string>{"a", "b", "c"});
  CHECK(parse_visit_order("schema-order") == VisitOrder::SchemaOrder);
  CHECK_THROWS_AS(parse_visit_order("random"), ConfigError);
}

TEST_CASE("incomplete auxiliary is rejected") {
  PanelDataset ds = small_panel(2);
  Rng rng(1);
  ds = testing::with_mask(testing::correlated_panel({6, 8, 5, 0.6, false, 2}), 4, random_mask(48, 0.9, rng));
  auto vars = ds.variables();
  vars[4].role = Role::Auxiliary;
  vars[4].capacity = Capacity::Auxiliary;
  ds = ds.with_variables(vars);
  MiceConfig config;
  config.m = 1;
  config.seed = 1;
  CHECK_THROWS_AS(run_mice(ds, config), IncompleteAuxiliary);
}

TEST_CASE("failure policies") {
  // x3 keeps three observed rows: fewer than q + 2 for any design
  PanelDataset ds = small_panel(11);
  std::vector<std::uint8_t> mask(ds.row_count(), 0);
  mask[0] = mask[10] = mask[20] = 1;
  const auto full = testing::correlated_panel({6, 8, 5, 0.6, false, 11});
  ds = ds.with_column(2, std::vector<double>(full.column(2).begin(), full.column(2).end()), mask);

  MiceConfig config;
  config.m = 3;
  config.iterations = 2;
  config.seed = 5;
  try {
    run_mice(ds, config);
    FAIL("expected UnimputableVariable");
  } catch (const UnimputableVariable& e) {
    CHECK(e.code() == "x3");
    CHECK(e.cause() == UnimputableVariable::Cause::InsufficientData);
  }

  config.on_failure = FailurePolicy::Record;
  const ImputationResult r = run_mice(ds, config);
  CHECK(r.failed("x3"));
  CHECK(r.failures.size() == 3);  // once per chain
  CHECK(std::find(r.imputed_variables.begin(), r.imputed_variables.end(), "x3") == r.imputed_variables.end());
  for (const auto& c : r.completed) {
    CHECK(c.missing_count(2) == ds.missing_count(2));
    CHECK(c.missing_count(0) == 0);
  }
  CHECK(r.provenance(1, 2) == Provenance::Missing);
}

TEST_CASE("all-missing target") {
  PanelDataset ds = small_panel(13);
  ds = ds.with_column(1, std::vector<double>(ds.row_count(), 0.0), std::vector<std::uint8_t>(ds.row_count(), 0));
  MiceConfig config;
  config.m = 2;
  config.iterations = 2;
  config.seed = 5;
  CHECK_THROWS_AS(run_mice(ds, config), DataError);
  config.on_failure = FailurePolicy::Record;
  const ImputationResult r = run_mice(ds, config);
  CHECK(r.failed("x2"));
  CHECK(r.completed[0].missing_count(1) == ds.row_count());
}

TEST_CASE("config validation") {
  MiceConfig config;
  config.m = 0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config.m = 1;
  config.iterations = 0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config.iterations = 1;
  config.workers = 0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
}

TEST_CASE("result files") {
  const PanelDataset ds = small_panel(17, 4, 6);
  MiceConfig config;
  config.m = 2;
  config.iterations = 2;
  config.seed = 3;
  config.predictors.country_indicators = false;
  const ImputationResult r = run_mice(ds, config);
  const auto dir = std::filesystem::temp_directory_path() / "panelmi_test_mice_files";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto files = write_imputation_result(r, dir);
  CHECK(files == std::vector<std::string>{"imp_001.csv", "imp_002.csv", "provenance.csv", "trace.csv"});
  const auto back = read_wide_csv(dir / "imp_002.csv", SchemaFile::from_dataset(ds));
  CHECK(back.same_as(r.completed[1]));
  CHECK(imputation_file_name(7, 1000) == "imp_0007.csv");

  const std::string trace = format_trace_csv(r.traces);
  CHECK(trace.rfind("chain,iteration,variable,mean,sd\n", 0) == 0);
  const std::string prov = format_provenance_csv(r);
  CHECK(prov.find(",Imputed\n") != std::string::npos);
  std::filesystem::remove_all(dir);
}
