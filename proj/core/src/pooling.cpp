#include "panelmi/pooling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "panelmi/csv.hpp"
#include "panelmi/error.hpp"
#include "panelmi/linmodel.hpp"

namespace panelmi {

PooledEstimate pool(std::span<const EstimateWithVariance> estimates) {
  const auto m = static_cast<int>(estimates.size());
  if (m < 2) throw ConfigError("pooling needs at least two imputations (m = " + std::to_string(m) + ")");
  for (const auto& e : estimates) {
    if (!std::isfinite(e.q)) throw DataError("non-finite point estimate");
    if (!(e.u >= 0.0) || !std::isfinite(e.u)) throw DataError("within-imputation variance must be finite and >= 0");
  }
  const double md = m;
  PooledEstimate p;
  p.m = m;
  for (const auto& e : estimates) {
    p.q_bar += e.q;
    p.u_bar += e.u;
  }
  p.q_bar /= md;
  p.u_bar /= md;
  // identical estimates: keep q_bar exact so rounding cannot fake a between variance
  const bool identical =
      std::all_of(estimates.begin(), estimates.end(), [&](const auto& e) { return e.q == estimates[0].q; });
  if (identical) p.q_bar = estimates[0].q;
  else {
    for (const auto& e : estimates) p.b += (e.q - p.q_bar) * (e.q - p.q_bar);
    p.b /= (md - 1.0);
  }

  const double inflated = (1.0 + 1.0 / md) * p.b;
  p.t = p.u_bar + inflated;
  if (p.b == 0.0) {
    p.r = 0.0;
    p.df = std::numeric_limits<double>::infinity();
    p.lambda = 0.0;
    p.fmi = 0.0;
    p.re = 1.0;
    return p;
  }
  p.lambda = inflated / p.t;
  if (p.u_bar == 0.0) {
    // All variance is between imputations.
    p.r = std::numeric_limits<double>::infinity();
    p.df = md - 1.0;
    p.fmi = 1.0;
  } else {
    p.r = inflated / p.u_bar;
    p.df = (md - 1.0) * (1.0 + 1.0 / p.r) * (1.0 + 1.0 / p.r);
    p.fmi = (p.r + 2.0 / (p.df + 3.0)) / (p.r + 1.0);
  }
  p.re = relative_efficiency(p.fmi, m);
  return p;
}

double relative_efficiency(double fmi, int m) {
  return 1.0 / (1.0 + fmi / static_cast<double>(m));
}

std::vector<PooledCoefficient> pooled_regress(std::span<const PanelDataset> completed, std::string_view response,
                                              std::span<const std::string> regressors) {
  if (completed.empty()) throw ConfigError("no completed datasets to pool");
  const std::size_t q = regressors.size() + 1;
  std::vector<std::vector<EstimateWithVariance>> per_coef(q);
  for (std::size_t d = 0; d < completed.size(); ++d) {
    const auto& ds = completed[d];
    const std::size_t yv = ds.variable_index(response);
    std::vector<std::size_t> xv;
    for (const auto& code : regressors) xv.push_back(ds.variable_index(code));
    const auto n = static_cast<Eigen::Index>(ds.row_count());
    Eigen::MatrixXd x(n, static_cast<Eigen::Index>(q));
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto row = static_cast<std::size_t>(i);
      if (!ds.observed(row, yv)) throw DataError("response '" + std::string(response) + "' has missing cells");
      y(i) = ds.column(yv)[row];
      x(i, 0) = 1.0;
      for (std::size_t j = 0; j < xv.size(); ++j) {
        if (!ds.observed(row, xv[j])) throw DataError("regressor '" + regressors[j] + "' has missing cells");
        x(i, static_cast<Eigen::Index>(j + 1)) = ds.column(xv[j])[row];
      }
    }
    RegressionFit fit;
    try {
      fit = fit_ols(x, y);
    } catch (const CollinearityError& e) {
      throw CollinearityError("completed dataset " + std::to_string(d + 1) + ": " + e.what());
    }
    const Eigen::VectorXd var = fit.sigma2_hat * fit.xtx_inverse_diagonal();
    for (std::size_t j = 0; j < q; ++j)
      per_coef[j].push_back({fit.beta_hat(static_cast<Eigen::Index>(j)), var(static_cast<Eigen::Index>(j))});
  }
  std::vector<PooledCoefficient> out;
  for (std::size_t j = 0; j < q; ++j)
    out.push_back({j == 0 ? std::string("(intercept)") : regressors[j - 1], pool(per_coef[j])});
  return out;
}

std::vector<PooledCoefficient> pooled_regress(const ImputationResult& result, std::string_view response,
                                              std::span<const std::string> regressors) {
  return pooled_regress(std::span<const PanelDataset>(result.completed), response, regressors);
}

PooledEstimate per_variable_fmi(std::span<const PanelDataset> completed, std::string_view var) {
  std::vector<EstimateWithVariance> estimates;
  for (const auto& ds : completed) {
    const std::size_t v = ds.variable_index(var);
    if (ds.missing_count(v) != 0) throw DataError("variable '" + std::string(var) + "' is not completely imputed");
    const auto col = ds.column(v);
    const double n = static_cast<double>(col.size());
    if (col.size() < 2) throw InsufficientData("variable '" + std::string(var) + "' has fewer than two rows");
    double mean = 0.0;
    for (double x : col) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : col) ss += (x - mean) * (x - mean);
    estimates.push_back({mean, ss / (n - 1.0) / n});
  }
  return pool(estimates);
}

PooledEstimate per_variable_fmi(const ImputationResult& result, std::string_view var) {
  const auto& meta = result.original.variable(var);
  if (meta.role != Role::Target) throw ConfigError("'" + std::string(var) + "' is not an imputation target");
  return per_variable_fmi(std::span<const PanelDataset>(result.completed), var);
}

std::string format_pooled_csv(std::span<const PooledRow> rows, std::string_view name_column) {
  std::ostringstream out;
  out << name_column << ",q_bar,u_bar,b,t,df,lambda,fmi,re\n";
  auto real = [](double v) { return std::isinf(v) ? std::string(v > 0 ? "inf" : "-inf") : csv::format_real(v); };
  for (const auto& row : rows) {
    const auto& e = row.estimate;
    out << csv::quote(row.name) << ',' << real(e.q_bar) << ',' << real(e.u_bar) << ',' << real(e.b) << ','
        << real(e.t) << ',' << real(e.df) << ',' << real(e.lambda) << ',' << real(e.fmi) << ',' << real(e.re)
        << '\n';
  }
  return out.str();
}

}  // namespace panelmi
