#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "panelmi/baselines.hpp"
#include "panelmi/error.hpp"
#include "panelmi/pmm.hpp"
#include "synthetic.hpp"

using namespace panelmi;

namespace {

PanelDataset columns(const std::vector<std::vector<double>>& cols) {
  std::vector<VariableMeta> vars;
  std::vector<CellRecord> cells;
  for (std::size_t v = 0; v < cols.size(); ++v) {
    const std::string code = "v" + std::to_string(v + 1);
    vars.push_back({code, code, Capacity::Technology, 1, Role::Target});
    for (std::size_t i = 0; i < cols[v].size(); ++i)
      if (!std::isnan(cols[v][i])) cells.push_back({"AAA", 2000 + static_cast<int>(i), code, cols[v][i]});
  }
  return build_panel({"AAA"}, testing::year_range(2000, static_cast<int>(cols[0].size())), vars, cells);
}

double sample_sd(std::span<const double> v) {
  double mean = 0.0;
  for (double x : v) mean += x / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

}  // namespace

TEST_CASE("mcar amputation hits the rate") {
  testing::CorrelatedSpec spec;
  spec.countries = 1000;
  spec.years = 100;
  spec.variables = 2;
  const PanelDataset truth = testing::correlated_panel(spec);
  AmputationPlan plan;
  plan.rate = 0.3;
  plan.targets = {"x1"};
  plan.seed = 4;
  const Amputation a = ampute(truth, plan);
  // binomial sd at n = 1e5 is 0.00145; 0.01 is about seven of them
  const double realized = static_cast<double>(a.amputed.missing_count(0)) / 1e5;
  CHECK(std::abs(realized - 0.3) < 0.01);
  CHECK(a.deleted.size() == a.amputed.missing_count(0));
  CHECK(a.amputed.missing_count(1) == 0);

  // the record is exactly the complement of the amputed mask, with true values
  const auto again = deleted_cells(truth, a.amputed);
  REQUIRE(again.size() == a.deleted.size());
  for (std::size_t i = 0; i < again.size(); ++i) {
    CHECK(again[i].row == a.deleted[i].row);
    CHECK(again[i].value == truth.column(0)[a.deleted[i].row]);
  }
}

TEST_CASE("mnar removes high values more often") {
  const int n = 4000;
  std::vector<double> rising(n);
  for (int i = 0; i < n; ++i) rising[static_cast<std::size_t>(i)] = i;
  const PanelDataset truth = columns({rising});
  AmputationPlan plan;
  plan.mechanism = Mechanism::MNAR;
  plan.rate = 0.4;
  plan.targets = {"v1"};
  plan.seed = 2;
  const Amputation a = ampute(truth, plan);
  std::size_t low = 0, high = 0;
  for (const auto& d : a.deleted) (d.row < n / 2 ? low : high)++;
  CHECK(high > low);
  // quarter by quarter the removal count never falls
  std::array<int, 4> per_quarter{};
  for (const auto& d : a.deleted) ++per_quarter[d.row / (n / 4)];
  CHECK(std::is_sorted(per_quarter.begin(), per_quarter.end()));
  CHECK(std::abs(static_cast<double>(a.deleted.size()) / n - 0.4) < 0.03);
}

TEST_CASE("mar follows the driver and leaves it alone") {
  testing::CorrelatedSpec spec;
  spec.countries = 200;
  spec.years = 20;
  spec.variables = 2;
  spec.rho = 0.0;
  const PanelDataset truth = testing::correlated_panel(spec);
  AmputationPlan plan;
  plan.mechanism = Mechanism::MAR;
  plan.driver = "x2";
  plan.targets = {"x1"};
  plan.rate = 0.25;
  const Amputation a = ampute(truth, plan);
  CHECK(a.amputed.missing_count(1) == 0);
  double driver_missing = 0.0, driver_all = 0.0;
  for (const auto& d : a.deleted) driver_missing += truth.column(1)[d.row] / static_cast<double>(a.deleted.size());
  for (double x : truth.column(1)) driver_all += x / static_cast<double>(truth.row_count());
  CHECK(driver_missing > driver_all + 0.5);

  plan.driver = "x1";
  CHECK_THROWS_AS(ampute(truth, plan), ConfigError);
  plan.driver = "x2";
  plan.rate = 1.0;
  CHECK_THROWS_AS(ampute(truth, plan), ConfigError);
  plan.rate = 0.0;
  CHECK_THROWS_AS(ampute(truth, plan), ConfigError);
}

TEST_CASE("tiny rate removes almost nothing") {
  const PanelDataset truth = columns({std::vector<double>(500, 1.0)});
  AmputationPlan plan;
  plan.rate = 1e-6;
  plan.targets = {"v1"};
  CHECK(ampute(truth, plan).deleted.size() <= 1);
}

TEST_CASE("listwise deletion") {
  const PanelDataset ds = columns({{1, 2, 3}, {4, kNan, 6}});
  const PanelDataset kept = listwise_delete(ds);
  CHECK(kept.row_count() == 2);
  CHECK(kept.rows()[0].year == 0);
  CHECK(kept.rows()[1].year == 2);
  CHECK(listwise_delete(columns({{1, 2}, {3, 4}})).same_as(columns({{1, 2}, {3, 4}})));
  CHECK(listwise_delete(columns({{kNan, 2}, {3, kNan}})).row_count() == 0);
}

TEST_CASE("mean substitution") {
  const PanelDataset filled = mean_substitute(columns({{1, kNan, 3}}));
  CHECK(filled.missing_count(0) == 0);
  CHECK(filled.column(0)[1] == 2.0);

  Rng rng(3);
  std::vector<double> v(50);
  for (double& x : v) x = rng.normal();
  std::vector<double> holed = v;
  for (std::size_t i = 0; i < holed.size(); i += 3) holed[i] = kNan;
  const PanelDataset ds = columns({holed});
  const auto observed = observed_values(ds, "v1");
  CHECK(sample_sd(mean_substitute(ds).column(0)) < sample_sd(observed));

  const PanelDataset complete = columns({{1, 2}});
  CHECK(mean_substitute(complete).same_as(complete));
  CHECK_THROWS_AS(mean_substitute(columns({{kNan, kNan}, {1, 2}})), DataError);
}

TEST_CASE("regression imputation recovers an exact line") {
  const PanelDataset ds = columns({{2, kNan, 6, 8, kNan, 12}, {1, 2, 3, 4, 5, 6}});
  const PanelDataset filled = regression_impute(ds);
  CHECK(filled.column(0)[1] == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(filled.column(0)[4] == doctest::Approx(10.0).epsilon(1e-12));
  const PanelDataset complete = columns({{1, 2, 3}, {3, 1, 2}});
  CHECK(regression_impute(complete).same_as(complete));
}

TEST_CASE("regression extrapolates where pmm cannot") {
  // observed x in 1..8, one hole at x = 20
  const std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8, 20};
  std::vector<double> y{2.2, 3.9, 6.1, 8.0, 9.8, 12.1, 14.2, 15.9, kNan};
  const PanelDataset ds = columns({y, x});
  const double reg = regression_impute(ds).column(0)[8];
  CHECK(reg > 16.0);  // beyond the largest observed value

  Eigen::MatrixXd design(9, 1);
  for (int i = 0; i < 9; ++i) design(i, 0) = x[static_cast<std::size_t>(i)];
  std::vector<std::uint8_t> mask{1, 1, 1, 1, 1, 1, 1, 1, 0};
  y[8] = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const double v = pmm_impute(design, y, mask, PmmSettings{}, rng).imputed[0].value;
    CHECK(v >= 2.2);
    CHECK(v <= 15.9);
  }
}

TEST_CASE("ks distance") {
  const std::vector<double> a{1, 2, 3}, b{4, 5, 6}, c{1, 2, 3, 4}, d{3, 4, 5, 6};
  CHECK(ks_distance(a, b) == 1.0);
  CHECK(ks_distance(a, a) == 0.0);
  CHECK(ks_distance(c, d) == doctest::Approx(0.5));
  CHECK(ks_distance(d, c) == doctest::Approx(0.5));
}

TEST_CASE("evaluation of perfect and point-mass fills") {
  testing::CorrelatedSpec spec;
  spec.countries = 50;
  spec.years = 10;
  spec.variables = 3;
  spec.rho = 0.5;
  const PanelDataset truth = testing::correlated_panel(spec);
  AmputationPlan plan;
  plan.rate = 0.3;
  plan.targets = {"x1", "x2"};
  plan.seed = 8;
  const Amputation a = ampute(truth, plan);

  const std::vector<PanelDataset> perfect{truth};
  const EvaluationMetrics m = evaluate(truth, a.deleted, perfect);
  REQUIRE(m.find("x1") != nullptr);
  CHECK(m.find("x1")->bias == 0.0);
  CHECK(m.find("x1")->ks == 0.0);
  CHECK(m.max_abs_corr_diff == 0.0);
  CHECK(m.find("x3") == nullptr);

  const std::vector<PanelDataset> mean_filled{mean_substitute(a.amputed)};
  const EvaluationMetrics ms = evaluate(truth, a.deleted, mean_filled);
  CHECK(std::abs(ms.find("x1")->bias) < 0.1);
  // a point mass against a continuous sample: KS at least near one half
  CHECK(ms.find("x1")->ks > 0.4);

  const std::vector<PanelDataset> wrong{columns({{1, 2}})};
  CHECK_THROWS_AS(evaluate(truth, a.deleted, wrong), DataError);
}

TEST_CASE("evaluation csv layout") {
  EvaluationRow row;
  row.method = "mean";
  row.rate = 0.3;
  row.metrics.variables.push_back({"x1", 0.1, 0.5, 0.02});
  const std::vector<EvaluationRow> rows{row};
  const std::string text = format_evaluation_csv(rows);
  CHECK(text.rfind("method,mechanism,rate,replication,variable,bias,ks,max_abs_corr_diff\n", 0) == 0);
  CHECK(text.find("mean,MCAR,") != std::string::npos);
  CHECK(parse_mechanism(to_string(Mechanism::MNAR)) == Mechanism::MNAR);
}
