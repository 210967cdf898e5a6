#include "doctest.h"

#include <cmath>
#include <limits>
#include <numbers>

#include "panelmi/diagnostics.hpp"
#include "panelmi/error.hpp"
#include "synthetic.hpp"

using namespace panelmi;

namespace {

double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
double big_phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// One country, years 2000.., columns given per variable; NaN marks a missing cell.
PanelDataset column_panel(const std::vector<std::vector<double>>& cols) {
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

// Split-chain R-hat written out directly from its definition.
double rhat_oracle(const std::vector<std::vector<double>>& series, int half) {
  std::vector<std::vector<double>> halves;
  for (const auto& chain : series) {
    const int start = static_cast<int>(chain.size()) - 2 * half;
    halves.emplace_back(chain.begin() + start, chain.begin() + start + half);
    halves.emplace_back(chain.begin() + start + half, chain.begin() + start + 2 * half);
  }
  const double n = half;
  double grand = 0.0, w = 0.0;
  std::vector<double> means;
  for (const auto& h : halves) {
    double mean = 0.0;
    for (double x : h) mean += x / n;
    double ss = 0.0;
    for (double x : h) ss += (x - mean) * (x - mean);
    w += ss / (n - 1.0);
    means.push_back(mean);
    grand += mean;
  }
  const double k = static_cast<double>(halves.size());
  w /= k;
  grand /= k;
  double bm = 0.0;
  for (double mu : means) bm += (mu - grand) * (mu - grand);
  const double b = n * bm / (k - 1.0);
  return std::sqrt(((n - 1.0) / n * w + b / n) / w);
}

}  // namespace

TEST_CASE("describe uses the n-1 sd") {
  const std::vector<double> v{1, 2, 3, 4};
  const DescriptiveStats s = describe(v);
  CHECK(s.n == 4);
  CHECK(s.mean == doctest::Approx(2.5));
  CHECK(s.sd == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(s.min == 1.0);
  CHECK(s.max == 4.0);
}

TEST_CASE("describe_compare on a single filled hole") {
  const PanelDataset observed = column_panel({{1.0, std::nan(""), 3.0}});
  const PanelDataset completed = column_panel({{1.0, 2.0, 3.0}});
  const DescriptiveComparison cmp = describe_compare(observed, completed);
  const DescriptiveRow* row = cmp.find("v1");
  REQUIRE(row != nullptr);
  CHECK(row->observed.n == 2);
  CHECK(row->completed.n == 3);
  CHECK(row->observed.sd == doctest::Approx(std::sqrt(2.0)));
  CHECK(row->completed.sd == doctest::Approx(1.0));
  CHECK(row->std_mean_diff == doctest::Approx(0.0));
  CHECK(row->sd_ratio == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(row->missing_fraction == doctest::Approx(1.0 / 3.0));
  CHECK(cmp.find("nope") == nullptr);
  CHECK_THROWS_AS(describe_compare(observed, column_panel({{1.0, 2.0}})), DataError);
}

TEST_CASE("silverman bandwidth") {
  const std::vector<double> v{1, 2, 3, 4, 5};
  // sd = sqrt(2.5), quartiles 2 and 4
  const double h = 0.9 * std::min(std::sqrt(2.5), 2.0 / 1.34) * std::pow(5.0, -0.2);
  CHECK(silverman_bandwidth(v) == doctest::Approx(h).epsilon(1e-12));
  // zero IQR falls back on the sd
  const std::vector<double> flat{0, 0, 0, 0, 0, 0, 0, 1};
  const double sd = std::sqrt((1.0 - 1.0 / 8.0) / 7.0);
  CHECK(silverman_bandwidth(flat) == doctest::Approx(0.9 * sd * std::pow(8.0, -0.2)).epsilon(1e-12));
  const std::vector<double> constant{2, 2, 2};
  CHECK_THROWS_AS(silverman_bandwidth(constant), DataError);
}

TEST_CASE("kde is an average of gaussian bumps") {
  const std::vector<double> v{-1.0, 1.0};
  KdeOptions o;
  o.bandwidth = 1.0;
  o.grid = std::vector<double>{0.0, 1.0};
  const DensityCurve c = kde(v, o);
  CHECK(c.density[0] == doctest::Approx(phi(1.0)).epsilon(1e-12));
  CHECK(c.density[1] == doctest::Approx(0.5 * (phi(2.0) + phi(0.0))).epsilon(1e-12));

  Rng rng(9);
  std::vector<double> sample(20000);
  for (double& x : sample) x = rng.normal();
  const DensityCurve d = kde(sample);
  CHECK(d.grid.size() == static_cast<std::size_t>(kDensityGridPoints));
  CHECK(integrate(d) == doctest::Approx(1.0).epsilon(2e-3));
  KdeOptions at_zero;
  at_zero.grid = std::vector<double>{0.0};
  CHECK(kde(sample, at_zero).density[0] == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(0.02));
}

TEST_CASE("overlap of two unit normals one sd apart") {
  DensityCurve a, b;
  for (int i = 0; i <= 4000; ++i) {
    const double x = -8.0 + 17.0 * i / 4000.0;
    a.grid.push_back(x);
    b.grid.push_back(x);
    a.density.push_back(phi(x));
    b.density.push_back(phi(x - 1.0));
  }
  CHECK(ovl(a, b) == doctest::Approx(2.0 * big_phi(-0.5)).epsilon(1e-4));
  CHECK(ovl(a, a) == doctest::Approx(1.0).epsilon(1e-4));

  // disjoint supports
  DensityCurve c = a;
  for (double& x : c.grid) x += 40.0;
  CHECK(ovl(a, c) < 1e-12);
}

TEST_CASE("density pair shares one grid") {
  Rng rng(2);
  std::vector<double> r(500), c(500);
  for (double& x : r) x = rng.normal();
  for (double& x : c) x = rng.normal() + 0.2;
  const DensityPair p = density_pair(r, c);
  CHECK(p.reference.grid == p.comparison.grid);
  CHECK(p.overlap > 0.8);
  CHECK(p.overlap < 1.0);
}

TEST_CASE("pairwise correlation") {
  const double nan = std::nan("");
  const PanelDataset ds = column_panel({{1, 2, 3, 4, 5}, {2, 4, 6, 8, 11}, {5, 4, 3, 2, 1}, {1, nan, nan, nan, 2}});
  const std::vector<std::string> vars{"v1", "v2", "v3", "v4"};
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> avail;
  const Eigen::MatrixXd r = pairwise_correlation(ds, vars, &avail);
  CHECK(r(0, 0) == doctest::Approx(1.0));
  CHECK(r(0, 2) == doctest::Approx(-1.0));
  // Pearson of 1..5 against 2,4,6,8,11
  const std::vector<double> x{1, 2, 3, 4, 5}, y{2, 4, 6, 8, 11};
  double mx = 3, my = 6.2, cxy = 0, cxx = 0, cyy = 0;
  for (int i = 0; i < 5; ++i) {
    cxy += (x[i] - mx) * (y[i] - my);
    cxx += (x[i] - mx) * (x[i] - mx);
    cyy += (y[i] - my) * (y[i] - my);
  }
  CHECK(r(0, 1) == doctest::Approx(cxy / std::sqrt(cxx * cyy)).epsilon(1e-12));
  CHECK(std::isnan(r(0, 3)));
  CHECK(avail(0, 3) == 0);
  CHECK(avail(0, 1) == 1);
}

TEST_CASE("correlation comparison counts sign flips") {
  const PanelDataset observed = column_panel({{1, 2, 3, 4}, {1, 2, 3, 5}});
  const PanelDataset completed = column_panel({{1, 2, 3, 4}, {5, 3, 2, 1}});
  const std::vector<std::string> vars{"v1", "v2"};
  const CorrelationComparison c = corr_compare(observed, completed, vars);
  CHECK(c.sign_flips == 1);
  CHECK(c.max_abs_diff == doctest::Approx(std::abs(c.observed(0, 1) - c.completed(0, 1))));
  CHECK(c.max_abs_diff > 1.5);
}

TEST_CASE("split R-hat") {
  SUBCASE("identical constant chains") {
    const std::vector<std::vector<double>> s(3, std::vector<double>(10, 4.0));
    CHECK(split_rhat(s) == 1.0);
    // 0.37 is not representable; naive summation leaves a spurious between-chain term
    const std::vector<std::vector<double>> r(4, std::vector<double>(10, 0.37));
    CHECK(split_rhat(r) == 1.0);
  }
  SUBCASE("constant chains at different levels") {
    const std::vector<std::vector<double>> s{std::vector<double>(10, 1.0), std::vector<double>(10, 2.0)};
    CHECK(split_rhat(s) == std::numeric_limits<double>::infinity());
  }
  SUBCASE("hand-sized case against the definition") {
    const std::vector<std::vector<double>> s{{9, 9, 9, 9, 1.0, 2.0, 1.5, 3.0}, {9, 9, 9, 9, 2.5, 2.0, 4.0, 3.5}};
    // discard 4, retain 4, halves of 2
    CHECK(split_rhat(s) == doctest::Approx(rhat_oracle(s, 2)).epsilon(1e-12));
  }
  SUBCASE("odd retained length drops the leading draw") {
    const std::vector<std::vector<double>> s{{0, 0, 0, 5, 1, 2, 4, 3, 2}, {0, 0, 0, 7, 2, 1, 3, 3, 5}};
    // discard floor(4.5) = 4, retain 5, halves of 2 from the last four
    CHECK(split_rhat(s) == doctest::Approx(rhat_oracle(s, 2)).epsilon(1e-12));
  }
  SUBCASE("well-mixed chains sit near one") {
    Rng rng(4);
    std::vector<std::vector<double>> s(4, std::vector<double>(400));
    for (auto& chain : s)
      for (double& x : chain) x = rng.normal();
    CHECK(split_rhat(s) < 1.02);
  }
  SUBCASE("too little data") {
    CHECK_THROWS_AS(split_rhat({std::vector<double>(10, 1.0)}), InsufficientData);
    CHECK_THROWS_AS(split_rhat({{1, 2, 3, 4, 5, 6}, {1, 2, 3, 4, 5, 6}}), InsufficientData);
  }
}

TEST_CASE("comparison index is ceil(m / 2)") {
  CHECK(default_comparison_index(50) == 25);
  CHECK(default_comparison_index(5) == 3);
  CHECK(default_comparison_index(1) == 1);
}
