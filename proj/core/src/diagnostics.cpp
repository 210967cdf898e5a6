#include "panelmi/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "panelmi/csv.hpp"
#include "panelmi/error.hpp"

namespace panelmi {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string real_or_empty(double v) { return std::isnan(v) ? std::string() : (std::isinf(v) ? (v > 0 ? "inf" : "-inf") : csv::format_real(v)); }

std::vector<double> present_values(const PanelDataset& ds, std::size_t v) {
  std::vector<double> out;
  const auto col = ds.column(v);
  const auto mask = ds.mask(v);
  for (std::size_t i = 0; i < col.size(); ++i)
    if (mask[i]) out.push_back(col[i]);
  return out;
}

void check_same_grid(const PanelDataset& a, const PanelDataset& b) {
  if (a.countries() != b.countries() || a.years() != b.years() || a.rows() != b.rows())
    throw DataError("datasets do not share a row grid");
  if (a.variable_count() != b.variable_count()) throw DataError("datasets have different variable sets");
  for (std::size_t v = 0; v < a.variable_count(); ++v)
    if (a.variables()[v].code != b.variables()[v].code) throw DataError("datasets have different variable sets");
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<double> uniform_grid(double lo, double hi, int points) {
  std::vector<double> grid(static_cast<std::size_t>(points));
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = lo + step * i;
  grid.back() = hi;
  return grid;
}

std::vector<double> evaluate_kde(std::span<const double> values, double h, const std::vector<double>& grid) {
  std::vector<double> density(grid.size(), 0.0);
  const double norm = 1.0 / (static_cast<double>(values.size()) * h * std::sqrt(2.0 * std::numbers::pi));
  const double cutoff = 40.0;  // exp(-40) underflows relative to any kernel peak
  for (double x : values) {
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const double z = (grid[g] - x) / h;
      const double e = 0.5 * z * z;
      if (e < cutoff) density[g] += std::exp(-e);
    }
  }
  for (double& d : density) d *= norm;
  return density;
}

double interpolate(const DensityCurve& c, double x) {
  if (c.grid.empty() || x < c.grid.front() || x > c.grid.back()) return 0.0;
  auto it = std::upper_bound(c.grid.begin(), c.grid.end(), x);
  if (it == c.grid.end()) return c.density.back();
  const std::size_t hi = static_cast<std::size_t>(it - c.grid.begin());
  const std::size_t lo = hi - 1;
  const double w = (x - c.grid[lo]) / (c.grid[hi] - c.grid[lo]);
  return c.density[lo] + w * (c.density[hi] - c.density[lo]);
}

double trapezoid_min(const std::vector<double>& grid, const std::vector<double>& a, const std::vector<double>& b) {
  double total = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double left = std::min(a[i - 1], b[i - 1]);
    const double right = std::min(a[i], b[i]);
    total += 0.5 * (left + right) * (grid[i] - grid[i - 1]);
  }
  return total;
}

std::size_t distinct_count(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
}

}  // namespace

DescriptiveStats describe(std::span<const double> values) {
  DescriptiveStats s;
  s.n = values.size();
  if (values.empty()) {
    s.mean = s.sd = s.min = s.max = kNaN;
    return s;
  }
  double sum = 0.0;
  s.min = s.max = values.front();
  for (double v : values) {
    sum += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean = sum / static_cast<double>(s.n);
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.sd = s.n > 1 ? std::sqrt(ss / static_cast<double>(s.n - 1)) : 0.0;
  return s;
}

const DescriptiveRow* DescriptiveComparison::find(std::string_view code) const noexcept {
  for (const auto& r : rows)
    if (r.code == code) return &r;
  return nullptr;
}

DescriptiveComparison describe_compare(const PanelDataset& observed, const PanelDataset& completed) {
  check_same_grid(observed, completed);
  DescriptiveComparison out;
  for (std::size_t v = 0; v < observed.variable_count(); ++v) {
    DescriptiveRow row;
    row.code = observed.variables()[v].code;
    const auto obs = present_values(observed, v);
    const auto comp = present_values(completed, v);
    row.observed = describe(obs);
    row.completed = describe(comp);
    row.missing_fraction =
        observed.row_count() ? static_cast<double>(observed.missing_count(v)) / static_cast<double>(observed.row_count())
                             : 0.0;
    const double diff = std::abs(row.completed.mean - row.observed.mean);
    if (row.observed.n == 0) {
      row.std_mean_diff = kNaN;
      row.sd_ratio = kNaN;
    } else {
      row.std_mean_diff = row.observed.sd > 0.0 ? diff / row.observed.sd
                                                : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
      row.sd_ratio = row.observed.sd > 0.0
                         ? row.completed.sd / row.observed.sd
                         : (row.completed.sd == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

std::string format_descriptive_csv(const DescriptiveComparison& cmp) {
  std::ostringstream out;
  out << "variable,completed_obs,completed_mean,completed_sd,completed_min,completed_max,"
         "observed_obs,observed_mean,observed_sd,observed_min,observed_max,missing_pct,std_mean_diff,sd_ratio\n";
  for (const auto& r : cmp.rows) {
    out << csv::quote(r.code) << ',' << r.completed.n << ',' << real_or_empty(r.completed.mean) << ','
        << real_or_empty(r.completed.sd) << ',' << real_or_empty(r.completed.min) << ','
        << real_or_empty(r.completed.max) << ',' << r.observed.n << ',' << real_or_empty(r.observed.mean) << ','
        << real_or_empty(r.observed.sd) << ',' << real_or_empty(r.observed.min) << ','
        << real_or_empty(r.observed.max) << ',' << csv::format_real(100.0 * r.missing_fraction, 2) << ','
        << real_or_empty(r.std_mean_diff) << ',' << real_or_empty(r.sd_ratio) << '\n';
  }
  return out.str();
}

double silverman_bandwidth(std::span<const double> values) {
  if (distinct_count(values) < 2) throw DataError("bandwidth selection needs at least two distinct values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto s = describe(values);
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  const double spread = iqr > 0.0 ? std::min(s.sd, iqr / 1.34) : s.sd;
  return 0.9 * spread * std::pow(static_cast<double>(values.size()), -0.2);
}

DensityCurve kde(std::span<const double> values, const KdeOptions& options) {
  if (values.empty()) throw DataError("kde of an empty sample");
  DensityCurve curve;
  curve.bandwidth = options.bandwidth ? *options.bandwidth : silverman_bandwidth(values);
  if (!(curve.bandwidth > 0.0)) throw DataError("kde bandwidth must be positive");
  if (options.grid) {
    curve.grid = *options.grid;
  } else {
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    curve.grid = uniform_grid(*lo - 3.0 * curve.bandwidth, *hi + 3.0 * curve.bandwidth, kDensityGridPoints);
  }
  curve.density = evaluate_kde(values, curve.bandwidth, curve.grid);
  return curve;
}

double integrate(const DensityCurve& curve) {
  double total = 0.0;
  for (std::size_t i = 1; i < curve.grid.size(); ++i)
    total += 0.5 * (curve.density[i - 1] + curve.density[i]) * (curve.grid[i] - curve.grid[i - 1]);
  return total;
}

double ovl(const DensityCurve& d1, const DensityCurve& d2) {
  if (d1.grid.size() != d1.density.size() || d2.grid.size() != d2.density.size() || d1.grid.size() < 2 ||
      d2.grid.size() < 2)
    throw DataError("ovl: malformed density curve");
  double value;
  if (d1.grid == d2.grid) {
    value = trapezoid_min(d1.grid, d1.density, d2.density);
  } else {
    const double lo = std::min(d1.grid.front(), d2.grid.front());
    const double hi = std::max(d1.grid.back(), d2.grid.back());
    const auto grid = uniform_grid(lo, hi, kDensityGridPoints);
    std::vector<double> a(grid.size()), b(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      a[i] = interpolate(d1, grid[i]);
      b[i] = interpolate(d2, grid[i]);
    }
    value = trapezoid_min(grid, a, b);
  }
  return std::clamp(value, 0.0, 1.0);
}

DensityPair density_pair(std::span<const double> reference, std::span<const double> comparison) {
  const double h1 = silverman_bandwidth(reference);
  const double h2 = silverman_bandwidth(comparison);
  const auto [lo1, hi1] = std::minmax_element(reference.begin(), reference.end());
  const auto [lo2, hi2] = std::minmax_element(comparison.begin(), comparison.end());
  const auto grid = uniform_grid(std::min(*lo1 - 3.0 * h1, *lo2 - 3.0 * h2), std::max(*hi1 + 3.0 * h1, *hi2 + 3.0 * h2),
                                 kDensityGridPoints);
  DensityPair pair;
  pair.reference = kde(reference, {h1, grid});
  pair.comparison = kde(comparison, {h2, grid});
  pair.overlap = ovl(pair.reference, pair.comparison);
  return pair;
}

DensityPlotData density_plot_data(const PanelDataset& original, const PanelDataset& completed, std::string_view code) {
  check_same_grid(original, completed);
  const std::size_t v = original.variable_index(code);
  const auto obs = present_values(original, v);
  const auto all = present_values(completed, v);
  std::vector<double> imputed;
  for (std::size_t i = 0; i < original.row_count(); ++i)
    if (!original.observed(i, v) && completed.observed(i, v)) imputed.push_back(completed.column(v)[i]);

  DensityPlotData data;
  data.code = std::string(code);
  const double h_obs = silverman_bandwidth(obs);
  const double h_all = silverman_bandwidth(all);
  const bool have_imputed = distinct_count(imputed) >= 2;
  const double h_imp = have_imputed ? silverman_bandwidth(imputed) : 0.0;
  auto lo = std::min(*std::min_element(obs.begin(), obs.end()) - 3.0 * h_obs,
                     *std::min_element(all.begin(), all.end()) - 3.0 * h_all);
  auto hi = std::max(*std::max_element(obs.begin(), obs.end()) + 3.0 * h_obs,
                     *std::max_element(all.begin(), all.end()) + 3.0 * h_all);
  if (have_imputed) {
    lo = std::min(lo, *std::min_element(imputed.begin(), imputed.end()) - 3.0 * h_imp);
    hi = std::max(hi, *std::max_element(imputed.begin(), imputed.end()) + 3.0 * h_imp);
  }
  data.grid = uniform_grid(lo, hi, kDensityGridPoints);
  const auto d_obs = kde(obs, {h_obs, data.grid});
  const auto d_all = kde(all, {h_all, data.grid});
  data.observed = d_obs.density;
  data.completed = d_all.density;
  data.ovl_completed = ovl(d_obs, d_all);
  if (have_imputed) {
    const auto d_imp = kde(imputed, {h_imp, data.grid});
    data.imputed = d_imp.density;
    data.ovl_imputed = ovl(d_obs, d_imp);
  }
  return data;
}

std::string format_density_csv(const DensityPlotData& data) {
  std::ostringstream out;
  out << "x,observed,completed,imputed\n";
  for (std::size_t i = 0; i < data.grid.size(); ++i) {
    out << csv::format_real(data.grid[i]) << ',' << csv::format_real(data.observed[i]) << ','
        << csv::format_real(data.completed[i]) << ',';
    if (!data.imputed.empty()) out << csv::format_real(data.imputed[i]);
    out << '\n';
  }
  return out.str();
}

Eigen::MatrixXd pairwise_correlation(const PanelDataset& ds, std::span<const std::string> variables,
                                     Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>* available) {
  const auto p = static_cast<Eigen::Index>(variables.size());
  std::vector<std::size_t> idx;
  for (const auto& code : variables) idx.push_back(ds.variable_index(code));
  Eigen::MatrixXd rho = Eigen::MatrixXd::Constant(p, p, kNaN);
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> ok =
      Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(p, p);
  for (Eigen::Index a = 0; a < p; ++a) {
    rho(a, a) = 1.0;
    ok(a, a) = 1;
    for (Eigen::Index b = a + 1; b < p; ++b) {
      const auto va = idx[static_cast<std::size_t>(a)];
      const auto vb = idx[static_cast<std::size_t>(b)];
      const auto xa = ds.column(va);
      const auto xb = ds.column(vb);
      std::size_t n = 0;
      double ma = 0.0, mb = 0.0;
      for (std::size_t i = 0; i < ds.row_count(); ++i)
        if (ds.observed(i, va) && ds.observed(i, vb)) {
          ++n;
          ma += xa[i];
          mb += xb[i];
        }
      if (n < 3) continue;
      ma /= static_cast<double>(n);
      mb /= static_cast<double>(n);
      double saa = 0.0, sbb = 0.0, sab = 0.0;
      for (std::size_t i = 0; i < ds.row_count(); ++i)
        if (ds.observed(i, va) && ds.observed(i, vb)) {
          saa += (xa[i] - ma) * (xa[i] - ma);
          sbb += (xb[i] - mb) * (xb[i] - mb);
          sab += (xa[i] - ma) * (xb[i] - mb);
        }
      if (!(saa > 0.0) || !(sbb > 0.0)) continue;
      const double r = std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
      rho(a, b) = rho(b, a) = r;
      ok(a, b) = ok(b, a) = 1;
    }
  }
  if (available) *available = ok;
  return rho;
}

CorrelationComparison corr_compare(const PanelDataset& observed, const PanelDataset& completed,
                                   std::span<const std::string> variables) {
  check_same_grid(observed, completed);
  CorrelationComparison cmp;
  cmp.variables.assign(variables.begin(), variables.end());
  cmp.observed = pairwise_correlation(observed, variables, &cmp.available);
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> completed_ok;
  cmp.completed = pairwise_correlation(completed, variables, &completed_ok);
  const auto p = cmp.observed.rows();
  cmp.abs_diff = Eigen::MatrixXd::Constant(p, p, kNaN);
  for (Eigen::Index a = 0; a < p; ++a) {
    cmp.abs_diff(a, a) = 0.0;
    for (Eigen::Index b = a + 1; b < p; ++b) {
      if (!cmp.available(a, b) || !completed_ok(a, b)) continue;
      const double d = std::abs(cmp.observed(a, b) - cmp.completed(a, b));
      cmp.abs_diff(a, b) = cmp.abs_diff(b, a) = d;
      cmp.max_abs_diff = std::max(cmp.max_abs_diff, d);
      if (std::abs(cmp.observed(a, b)) > 0.1 && (cmp.observed(a, b) > 0) != (cmp.completed(a, b) > 0))
        ++cmp.sign_flips;
    }
  }
  return cmp;
}

std::string format_correlation_csv(const CorrelationComparison& cmp) {
  std::ostringstream out;
  out << "var_a,var_b,observed,completed,abs_diff,available\n";
  const auto p = static_cast<Eigen::Index>(cmp.variables.size());
  for (Eigen::Index a = 0; a < p; ++a)
    for (Eigen::Index b = a + 1; b < p; ++b)
      out << csv::quote(cmp.variables[static_cast<std::size_t>(a)]) << ','
          << csv::quote(cmp.variables[static_cast<std::size_t>(b)]) << ',' << real_or_empty(cmp.observed(a, b)) << ','
          << real_or_empty(cmp.completed(a, b)) << ',' << real_or_empty(cmp.abs_diff(a, b)) << ','
          << (cmp.available(a, b) ? 1 : 0) << '\n';
  return out.str();
}

std::string format_correlation_matrix_csv(const CorrelationComparison& cmp) {
  std::ostringstream out;
  out << "variable";
  for (const auto& v : cmp.variables) out << ',' << csv::quote(v);
  out << '\n';
  const auto p = static_cast<Eigen::Index>(cmp.variables.size());
  for (Eigen::Index a = 0; a < p; ++a) {
    out << csv::quote(cmp.variables[static_cast<std::size_t>(a)]);
    for (Eigen::Index b = 0; b < p; ++b) {
      const double v = a == b ? 1.0 : (b > a ? cmp.observed(a, b) : cmp.completed(a, b));
      out << ',' << real_or_empty(v);
    }
    out << '\n';
  }
  return out.str();
}

double split_rhat(const std::vector<std::vector<double>>& series, double discard) {
  if (series.size() < 2) throw InsufficientData("convergence statistic needs at least two chains");
  if (!(discard >= 0.0 && discard < 1.0)) throw ConfigError("discard fraction must lie in [0, 1)");
  const std::size_t total = series.front().size();
  for (const auto& s : series)
    if (s.size() != total) throw DataError("chains have different lengths");
  const auto dropped = static_cast<std::size_t>(std::floor(discard * static_cast<double>(total)));
  const std::size_t retained = total - dropped;
  if (retained < 4)
    throw InsufficientData("convergence statistic needs at least four retained iterations (have " +
                           std::to_string(retained) + ")");
  const std::size_t half = retained / 2;
  const std::size_t start = total - 2 * half;

  std::vector<double> means;
  double within = 0.0;
  for (const auto& s : series) {
    for (int h = 0; h < 2; ++h) {
      const std::size_t from = start + static_cast<std::size_t>(h) * half;
      // shifted sums keep constant series exact
      const double ref = s[from];
      double shift = 0.0;
      for (std::size_t i = from; i < from + half; ++i) shift += s[i] - ref;
      const double mean = ref + shift / static_cast<double>(half);
      double ss = 0.0;
      for (std::size_t i = from; i < from + half; ++i) ss += (s[i] - mean) * (s[i] - mean);
      within += ss / static_cast<double>(half - 1);
      means.push_back(mean);
    }
  }
  const double k = static_cast<double>(means.size());
  within /= k;
  double grand_shift = 0.0;
  for (double m : means) grand_shift += m - means.front();
  const double grand = means.front() + grand_shift / k;
  double var_means = 0.0;
  for (double m : means) var_means += (m - grand) * (m - grand);
  var_means /= (k - 1.0);
  const double tp = static_cast<double>(half);
  const double between = tp * var_means;

  if (within == 0.0) return between == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(((tp - 1.0) / tp * within + between / tp) / within);
}

ConvergenceStat convergence_stat(const ChainTrace& traces, std::string_view variable, double discard,
                                 double threshold) {
  const auto v = traces.find(variable);
  if (!v) throw UnknownCodeError("traced variable", std::string(variable));
  ConvergenceStat stat;
  stat.code = std::string(variable);
  stat.threshold = threshold;
  stat.rhat_mean = split_rhat(traces.mean_series(*v), discard);
  stat.rhat_sd = split_rhat(traces.sd_series(*v), discard);
  stat.pass = stat.rhat_mean < threshold && stat.rhat_sd < threshold;
  return stat;
}

std::string format_convergence_csv(std::span<const ConvergenceStat> stats) {
  std::ostringstream out;
  out << "variable,rhat_mean,rhat_sd,threshold,pass\n";
  for (const auto& s : stats)
    out << csv::quote(s.code) << ',' << real_or_empty(s.rhat_mean) << ',' << real_or_empty(s.rhat_sd) << ','
        << csv::format_real(s.threshold) << ',' << (s.pass ? "true" : "false") << '\n';
  return out.str();
}

int default_comparison_index(int m) noexcept { return (m + 1) / 2; }

}  // namespace panelmi
