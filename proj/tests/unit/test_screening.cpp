#include "doctest.h"

#include <cmath>

#include "panelmi/error.hpp"
#include "panelmi/screening.hpp"
#include "synthetic.hpp"

using namespace panelmi;

namespace {

MiceConfig trial_config(int m) {
  MiceConfig c;
  c.m = m;
  c.iterations = 3;
  c.seed = 42;
  c.predictors.country_indicators = false;
  c.predictors.year = false;
  return c;
}

std::vector<std::uint8_t> keep_fraction(std::size_t n, double keep, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::uint8_t> m(n);
  for (auto& b : m) b = rng.uniform01() < keep;
  return m;
}

// x1..x3 complete, x4 a duplicate of x1, x5 half missing. Imputing x5 needs
// x1 and x4 together, which is singular.
PanelDataset collinear_panel() {
  testing::CorrelatedSpec spec;
  spec.countries = 10;
  spec.years = 6;
  spec.seed = 5;
  PanelDataset ds = testing::correlated_panel(spec);
  const std::vector<double> x1(ds.column(0).begin(), ds.column(0).end());
  ds = ds.with_column(3, x1, std::vector<std::uint8_t>(x1.size(), 1));
  return testing::with_mask(ds, 4, keep_fraction(ds.row_count(), 0.5, 9));
}

}  // namespace

TEST_CASE("a duplicated predictor rejects the target that needs it") {
  const PanelDataset ds = collinear_panel();
  const ScreeningVerdict v = screen_variables(ds, trial_config(3));
  REQUIRE(v.variables.size() == 5);
  const VariableVerdict* x5 = v.find("x5");
  REQUIRE(x5 != nullptr);
  CHECK(x5->status == VerdictStatus::RejectedImputationFailure);
  CHECK(x5->detail.find("collinearity") != std::string::npos);
  CHECK(std::isnan(x5->fmi));
  for (const char* code : {"x1", "x2", "x3", "x4"}) {
    const VariableVerdict* c = v.find(code);
    REQUIRE(c != nullptr);
    CHECK(c->status == VerdictStatus::Accepted);
    CHECK(c->fmi == 0.0);
    CHECK(c->missing_fraction == 0.0);
  }
  CHECK(v.count(VerdictStatus::Accepted) == 4);
  CHECK(v.rejected() == std::vector<std::string>{"x5"});

  const PanelDataset kept = restrict_to_accepted(ds, v);
  CHECK(kept.variable_count() == 4);
  CHECK_FALSE(kept.find_variable("x5").has_value());
}

TEST_CASE("fully observed data is accepted without imputation") {
  testing::CorrelatedSpec spec;
  spec.countries = 5;
  spec.years = 4;
  const ScreeningVerdict v = screen_variables(testing::correlated_panel(spec), trial_config(2));
  CHECK(v.count(VerdictStatus::Accepted) == 5);
  CHECK(v.rejected().empty());
}

TEST_CASE("fmi above the threshold rejects the variable") {
  // Pure noise, 80% missing. PMM with uninformative predictors resamples
  // donors almost at random, so its fmi lands near 0.5 rather than at the
  // missing fraction; the threshold here sits below that.
  testing::CorrelatedSpec spec;
  spec.countries = 40;
  spec.years = 10;
  spec.variables = 4;
  spec.rho = 0.0;
  spec.seed = 11;
  const PanelDataset ds = testing::with_mask(testing::correlated_panel(spec), 3, keep_fraction(400, 0.2, 3));
  ScreeningThresholds strict;
  strict.fmi = 0.35;
  const ScreeningVerdict v = screen_variables(ds, trial_config(20), strict);
  const VariableVerdict* x4 = v.find("x4");
  REQUIRE(x4 != nullptr);
  CHECK(x4->fmi > 0.35);
  CHECK(x4->status == VerdictStatus::RejectedHighFmi);
  CHECK(x4->missing_fraction == doctest::Approx(0.8).epsilon(0.1));
  CHECK(v.find("x1")->status == VerdictStatus::Accepted);

  // the same run under the default threshold keeps it
  const ScreeningVerdict lenient = screen_variables(ds, trial_config(20));
  CHECK(lenient.find("x4")->fmi == x4->fmi);
  CHECK(lenient.find("x4")->status != VerdictStatus::RejectedHighFmi);
}

TEST_CASE("a value-driven hole pattern diverges descriptively") {
  // x1 tracks x2 closely and goes missing wherever x2 is above its median,
  // so the completed mean moves well away from the observed one.
  testing::CorrelatedSpec spec;
  spec.countries = 20;
  spec.years = 10;
  spec.variables = 2;
  spec.rho = 0.97;
  spec.seed = 21;
  const PanelDataset full = testing::correlated_panel(spec);
  std::vector<double> driver(full.column(1).begin(), full.column(1).end());
  std::vector<double> sorted = driver;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[sorted.size() / 2];
  std::vector<std::uint8_t> mask(driver.size());
  for (std::size_t i = 0; i < driver.size(); ++i) mask[i] = driver[i] < median;
  const ScreeningVerdict v = screen_variables(testing::with_mask(full, 0, mask), trial_config(5));
  const VariableVerdict* x1 = v.find("x1");
  REQUIRE(x1 != nullptr);
  CHECK(x1->fmi <= 0.6);
  CHECK(x1->std_mean_diff > 0.25);
  CHECK(x1->status == VerdictStatus::RejectedDescriptiveDivergence);
}

TEST_CASE("verdict csv") {
  const ScreeningVerdict v = screen_variables(collinear_panel(), trial_config(2));
  const std::string text = format_verdict_csv(v);
  CHECK(text.rfind("variable,status,fmi,mean_diff,sd_ratio,detail\n", 0) == 0);
  CHECK(text.find("x5,") != std::string::npos);
  CHECK(std::string(to_string(VerdictStatus::RejectedHighFmi)).size() > 0);
}

TEST_CASE("pipeline imputes only accepted targets") {
  const PanelDataset ds = collinear_panel();
  MiceConfig production = trial_config(3);
  production.seed = 7;
  const PipelineReport report = pipeline_run(ds, trial_config(2), production);
  CHECK(report.screening.rejected() == std::vector<std::string>{"x5"});
  CHECK(report.production.m() == 3);
  CHECK_FALSE(report.production.original.find_variable("x5").has_value());
  CHECK(report.comparison_index == 2);
  CHECK(report.fmi.size() == 4);
}
