#include "panelmi/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>

#include "panelmi/csv.hpp"
#include "panelmi/diagnostics.hpp"
#include "panelmi/error.hpp"
#include "panelmi/linmodel.hpp"
#include "panelmi/random.hpp"

namespace panelmi {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double logistic(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

std::vector<double> standardized(std::span<const double> x) {
  const auto s = describe(x);
  std::vector<double> z(x.size(), 0.0);
  if (s.sd > 0.0)
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = (x[i] - s.mean) / s.sd;
  return z;
}

double mean_probability(const std::vector<double>& z, double alpha) {
  double sum = 0.0;
  for (double v : z) sum += logistic(alpha + kAmputationSlope * v);
  return sum / static_cast<double>(z.size());
}

double solve_intercept(const std::vector<double>& z, double rate) {
  double lo = -60.0, hi = 60.0;
  double mid = 0.0;
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double p = mean_probability(z, mid);
    if (std::abs(p - rate) <= kAmputationRateTolerance) return mid;
    (p < rate ? lo : hi) = mid;
  }
  throw ConfigError("amputation rate " + csv::format_real(rate) + " cannot be reached");
}

bool is_modelled(const VariableMeta& m) { return m.role != Role::Identifier; }

double mean_of(std::span<const double> values) {
  double s = 0.0;
  for (double v : values) s += v;
  return values.empty() ? kNaN : s / static_cast<double>(values.size());
}

}  // namespace

std::string_view to_string(Mechanism m) noexcept {
  switch (m) {
    case Mechanism::MCAR: return "MCAR";
    case Mechanism::MAR: return "MAR";
    case Mechanism::MNAR: return "MNAR";
  }
  return "?";
}

Mechanism parse_mechanism(std::string_view text) {
  std::string up(text);
  for (char& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (up == "MCAR") return Mechanism::MCAR;
  if (up == "MAR") return Mechanism::MAR;
  if (up == "MNAR") return Mechanism::MNAR;
  throw ConfigError("unknown missingness mechanism '" + std::string(text) + "'");
}

Amputation ampute(const PanelDataset& truth, const AmputationPlan& plan) {
  if (!(plan.rate > 0.0 && plan.rate < 1.0)) throw ConfigError("amputation rate must lie in (0, 1)");
  if (plan.targets.empty()) throw ConfigError("amputation plan names no targets");
  std::vector<double> driver_z;
  if (plan.mechanism == Mechanism::MAR) {
    if (plan.driver.empty()) throw ConfigError("MAR amputation needs a driver variable");
    const std::size_t d = truth.variable_index(plan.driver);
    if (truth.missing_count(d) != 0) throw DataError("driver '" + plan.driver + "' has missing values");
    for (const auto& t : plan.targets)
      if (t == plan.driver) throw ConfigError("MAR driver '" + plan.driver + "' is also an amputation target");
    driver_z = standardized(truth.column(d));
  }

  Amputation out;
  out.amputed = truth;
  for (std::size_t t = 0; t < plan.targets.size(); ++t) {
    const std::string& code = plan.targets[t];
    const std::size_t v = truth.variable_index(code);
    if (truth.missing_count(v) != 0) throw DataError("amputation target '" + code + "' has missing values");
    if (std::count(plan.targets.begin(), plan.targets.begin() + static_cast<std::ptrdiff_t>(t), code))
      throw ConfigError("amputation target '" + code + "' listed twice");
    const auto col = truth.column(v);
    Rng rng(mix_seed(plan.seed, t));

    std::vector<double> prob(col.size(), plan.rate);
    if (plan.mechanism != Mechanism::MCAR) {
      const std::vector<double> z = plan.mechanism == Mechanism::MAR ? driver_z : standardized(col);
      const double alpha = solve_intercept(z, plan.rate);
      for (std::size_t i = 0; i < z.size(); ++i) prob[i] = logistic(alpha + kAmputationSlope * z[i]);
    }
    std::vector<double> values(col.begin(), col.end());
    std::vector<std::uint8_t> mask(col.size(), 1);
    for (std::size_t i = 0; i < col.size(); ++i) {
      if (rng.uniform01() < prob[i]) {
        mask[i] = 0;
        values[i] = 0.0;
        out.deleted.push_back({i, code, col[i]});
      }
    }
    out.amputed = out.amputed.with_column(v, std::move(values), std::move(mask));
  }
  return out;
}

std::vector<DeletedCell> deleted_cells(const PanelDataset& truth, const PanelDataset& amputed) {
  if (truth.rows() != amputed.rows()) throw DataError("truth and amputed datasets have different rows");
  std::vector<DeletedCell> out;
  for (std::size_t v = 0; v < amputed.variable_count(); ++v) {
    const auto& code = amputed.variables()[v].code;
    const std::size_t tv = truth.variable_index(code);
    for (std::size_t i = 0; i < amputed.row_count(); ++i)
      if (!amputed.observed(i, v) && truth.observed(i, tv)) out.push_back({i, code, truth.column(tv)[i]});
  }
  return out;
}

PanelDataset listwise_delete(const PanelDataset& ds) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < ds.row_count(); ++i) {
    bool complete = true;
    for (std::size_t v = 0; v < ds.variable_count() && complete; ++v)
      if (ds.variables()[v].role == Role::Target && !ds.observed(i, v)) complete = false;
    if (complete) keep.push_back(i);
  }
  return ds.select_rows(keep);
}

PanelDataset mean_substitute(const PanelDataset& ds) {
  PanelDataset out = ds;
  for (std::size_t v = 0; v < ds.variable_count(); ++v) {
    const auto& meta = ds.variables()[v];
    if (meta.role != Role::Target || ds.missing_count(v) == 0) continue;
    const auto obs = observed_values(ds, meta.code);
    if (obs.empty()) throw DataError("variable '" + meta.code + "' has no observed value to average");
    const double mean = mean_of(obs);
    std::vector<double> values(ds.column(v).begin(), ds.column(v).end());
    for (std::size_t i = 0; i < values.size(); ++i)
      if (!ds.observed(i, v)) values[i] = mean;
    out = out.with_column(v, std::move(values), std::vector<std::uint8_t>(values.size(), 1));
  }
  return out;
}

PanelDataset regression_impute(const PanelDataset& ds, const std::map<std::string, std::vector<std::string>>& predictors) {
  PanelDataset filled;
  bool have_filled = false;
  PanelDataset out = ds;
  const auto n = static_cast<Eigen::Index>(ds.row_count());
  for (std::size_t v = 0; v < ds.variable_count(); ++v) {
    const auto& meta = ds.variables()[v];
    if (meta.role != Role::Target || ds.missing_count(v) == 0) continue;
    if (!have_filled) {
      filled = mean_substitute(ds);
      have_filled = true;
    }
    std::vector<std::size_t> cols;
    if (auto it = predictors.find(meta.code); it != predictors.end()) {
      for (const auto& code : it->second) {
        const std::size_t p = ds.variable_index(code);
        if (p == v) throw DataError("target '" + meta.code + "' listed as its own predictor");
        cols.push_back(p);
      }
    } else {
      for (std::size_t p = 0; p < ds.variable_count(); ++p)
        if (p != v && is_modelled(ds.variables()[p])) cols.push_back(p);
    }
    const auto q = static_cast<Eigen::Index>(cols.size()) + 1;
    Eigen::MatrixXd design(n, q);
    design.col(0).setOnes();
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const auto col = filled.column(cols[j]);
      for (Eigen::Index i = 0; i < n; ++i) design(i, static_cast<Eigen::Index>(j) + 1) = col[i];
    }
    std::vector<Eigen::Index> donors;
    for (Eigen::Index i = 0; i < n; ++i)
      if (ds.observed(static_cast<std::size_t>(i), v)) donors.push_back(i);
    if (donors.empty()) throw DataError("variable '" + meta.code + "' has no observed value");
    Eigen::MatrixXd x(static_cast<Eigen::Index>(donors.size()), q);
    Eigen::VectorXd y(static_cast<Eigen::Index>(donors.size()));
    for (std::size_t r = 0; r < donors.size(); ++r) {
      x.row(static_cast<Eigen::Index>(r)) = design.row(donors[r]);
      y(static_cast<Eigen::Index>(r)) = ds.column(v)[static_cast<std::size_t>(donors[r])];
    }
    RegressionFit fit;
    try {
      fit = fit_ols(x, y);
    } catch (const CollinearityError& e) {
      throw CollinearityError(meta.code + ": " + e.what(), meta.code);
    } catch (const InsufficientData& e) {
      throw InsufficientData(meta.code + ": " + e.what(), meta.code);
    }
    const Eigen::VectorXd pred = design * fit.beta_hat;
    std::vector<double> values(ds.column(v).begin(), ds.column(v).end());
    for (std::size_t i = 0; i < values.size(); ++i)
      if (!ds.observed(i, v)) values[i] = pred(static_cast<Eigen::Index>(i));
    out = out.with_column(v, std::move(values), std::vector<std::uint8_t>(ds.row_count(), 1));
  }
  return out;
}

std::vector<std::string> correlation_variables(const PanelDataset& ds) {
  std::vector<std::string> out;
  for (const auto& meta : ds.variables())
    if (is_modelled(meta)) out.push_back(meta.code);
  return out;
}

Eigen::MatrixXd pairwise_corr(const PanelDataset& ds) {
  const auto vars = correlation_variables(ds);
  return pairwise_correlation(ds, vars);
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DataError("KS distance of an empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double t = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == t) ++i;
    while (j < y.size() && y[j] == t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return d;
}

const VariableMetrics* EvaluationMetrics::find(std::string_view code) const noexcept {
  for (const auto& v : variables)
    if (v.code == code) return &v;
  return nullptr;
}

EvaluationMetrics evaluate(const PanelDataset& truth, std::span<const DeletedCell> deleted,
                           std::span<const PanelDataset> completed) {
  if (completed.empty()) throw DataError("evaluate needs at least one completed dataset");
  std::vector<std::string> targets;
  for (const auto& cell : deleted) {
    if (cell.row >= truth.row_count()) throw DataError("deleted cell row outside the truth dataset");
    if (std::find(targets.begin(), targets.end(), cell.variable) == targets.end()) targets.push_back(cell.variable);
  }
  const auto corr_vars = correlation_variables(truth);
  const Eigen::MatrixXd truth_corr = pairwise_correlation(truth, corr_vars);

  EvaluationMetrics out;
  for (const auto& t : targets) out.variables.push_back({t, 0.0, 0.0, 0.0});
  std::vector<int> ks_count(targets.size(), 0);

  for (const auto& comp : completed) {
    if (comp.variable_count() != truth.variable_count())
      throw DataError("completed dataset has " + std::to_string(comp.variable_count()) + " variables, truth has " +
                      std::to_string(truth.variable_count()));
    for (std::size_t v = 0; v < truth.variable_count(); ++v)
      if (comp.variables()[v].code != truth.variables()[v].code)
        throw DataError("completed dataset variables differ from the truth");
    // Map completed rows onto truth rows.
    std::vector<std::size_t> to_truth(comp.row_count());
    std::vector<std::ptrdiff_t> from_truth(truth.row_count(), -1);
    if (comp.rows() == truth.rows()) {
      for (std::size_t i = 0; i < comp.row_count(); ++i) to_truth[i] = i, from_truth[i] = static_cast<std::ptrdiff_t>(i);
    } else {
      if (comp.countries() != truth.countries() || comp.years() != truth.years())
        throw DataError("completed dataset rows are not drawn from the truth grid");
      std::unordered_map<std::uint64_t, std::size_t> index;
      auto key = [&](const RowKey& k) {
        return (static_cast<std::uint64_t>(k.country) << 32) | static_cast<std::uint32_t>(k.year);
      };
      for (std::size_t i = 0; i < truth.row_count(); ++i) index.emplace(key(truth.rows()[i]), i);
      for (std::size_t i = 0; i < comp.row_count(); ++i) {
        auto it = index.find(key(comp.rows()[i]));
        if (it == index.end()) throw DataError("completed dataset has a row absent from the truth");
        to_truth[i] = it->second;
        from_truth[it->second] = static_cast<std::ptrdiff_t>(i);
      }
    }

    const Eigen::MatrixXd comp_corr = pairwise_correlation(comp, corr_vars);
    double overall = 0.0;
    for (Eigen::Index a = 0; a < truth_corr.rows(); ++a)
      for (Eigen::Index b = a + 1; b < truth_corr.cols(); ++b)
        if (!std::isnan(truth_corr(a, b)) && !std::isnan(comp_corr(a, b)))
          overall = std::max(overall, std::abs(comp_corr(a, b) - truth_corr(a, b)));
    out.max_abs_corr_diff += overall;

    for (std::size_t t = 0; t < targets.size(); ++t) {
      const std::size_t v = truth.variable_index(targets[t]);
      auto& m = out.variables[t];
      m.bias += mean_of(observed_values(comp, targets[t])) - mean_of(truth.column(v));

      std::vector<double> imputed, actual;
      for (const auto& cell : deleted) {
        if (cell.variable != targets[t]) continue;
        const auto r = from_truth[cell.row];
        if (r < 0 || !comp.observed(static_cast<std::size_t>(r), v)) continue;
        imputed.push_back(comp.column(v)[static_cast<std::size_t>(r)]);
        actual.push_back(cell.value);
      }
      if (!imputed.empty()) {
        m.ks += ks_distance(imputed, actual);
        ++ks_count[t];
      }

      const auto a = static_cast<Eigen::Index>(
          std::find(corr_vars.begin(), corr_vars.end(), targets[t]) - corr_vars.begin());
      double worst = 0.0;
      if (a < truth_corr.rows())
        for (Eigen::Index b = 0; b < truth_corr.cols(); ++b)
          if (b != a && !std::isnan(truth_corr(a, b)) && !std::isnan(comp_corr(a, b)))
            worst = std::max(worst, std::abs(comp_corr(a, b) - truth_corr(a, b)));
      m.max_abs_corr_diff += worst;
    }
  }

  const double k = static_cast<double>(completed.size());
  out.max_abs_corr_diff /= k;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    auto& m = out.variables[t];
    m.bias /= k;
    m.max_abs_corr_diff /= k;
    m.ks = ks_count[t] ? m.ks / ks_count[t] : kNaN;
  }
  return out;
}

std::string format_evaluation_csv(std::span<const EvaluationRow> rows) {
  std::ostringstream out;
  out << "method,mechanism,rate,replication,variable,bias,ks,max_abs_corr_diff\n";
  auto num = [](double v) { return std::isnan(v) ? std::string() : csv::format_real(v); };
  for (const auto& r : rows)
    for (const auto& m : r.metrics.variables)
      out << csv::quote(r.method) << ',' << to_string(r.mechanism) << ',' << csv::format_real(r.rate) << ','
          << r.replication << ',' << csv::quote(m.code) << ',' << num(m.bias) << ',' << num(m.ks) << ','
          << num(m.max_abs_corr_diff) << '\n';
  return out.str();
}

std::string format_deleted_csv(const PanelDataset& ds, std::span<const DeletedCell> deleted) {
  std::ostringstream out;
  out << "country,year,variable,value\n";
  for (const auto& cell : deleted) {
    const auto& key = ds.rows()[cell.row];
    out << csv::quote(ds.countries()[key.country]) << ',' << ds.years()[key.year] << ',' << csv::quote(cell.variable)
        << ',' << csv::format_real(cell.value) << '\n';
  }
  return out.str();
}

}  // namespace panelmi
