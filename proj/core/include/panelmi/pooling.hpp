#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "panelmi/mice.hpp"

namespace panelmi {

struct EstimateWithVariance {
  double q = 0.0;  ///< point estimate from one completed dataset
  double u = 0.0;  ///< its sampling variance
};

/// Rubin's-rules combination of m estimates.
struct PooledEstimate {
  double q_bar = 0.0;   ///< mean of the point estimates
  double u_bar = 0.0;   ///< mean within-imputation variance
  double b = 0.0;       ///< between-imputation variance, m - 1 denominator
  double t = 0.0;       ///< u_bar + (1 + 1/m) b
  double r = 0.0;       ///< (1 + 1/m) b / u_bar
  double df = 0.0;      ///< (m - 1)(1 + 1/r)^2; +inf when b == 0
  double lambda = 0.0;  ///< (1 + 1/m) b / t
  double fmi = 0.0;     ///< (r + 2/(df + 3)) / (r + 1)
  double re = 1.0;      ///< 1 / (1 + fmi/m)
  int m = 0;
};

/// Throws ConfigError for m < 2 and DataError for a negative or non-finite variance.
PooledEstimate pool(std::span<const EstimateWithVariance> estimates);

/// Relative efficiency of m imputations at a given fraction of missing information.
double relative_efficiency(double fmi, int m);

struct PooledCoefficient {
  std::string name;  ///< "(intercept)" or the regressor code
  PooledEstimate estimate;
};

/// OLS of `response` on an intercept plus `regressors` in every completed
/// dataset, pooling each coefficient with its squared standard error.
/// A fit that fails is rethrown as CollinearityError naming the 1-based dataset index.
std::vector<PooledCoefficient> pooled_regress(const ImputationResult& result, std::string_view response,
                                              std::span<const std::string> regressors);
std::vector<PooledCoefficient> pooled_regress(std::span<const PanelDataset> completed, std::string_view response,
                                              std::span<const std::string> regressors);

/// Pools the variable's mean: Q_i = completed mean, U_i = sample variance / n.
PooledEstimate per_variable_fmi(const ImputationResult& result, std::string_view var);
PooledEstimate per_variable_fmi(std::span<const PanelDataset> completed, std::string_view var);

struct PooledRow {
  std::string name;
  PooledEstimate estimate;
};

/// `name,q_bar,u_bar,b,t,df,lambda,fmi,re` with infinite df written as `inf`.
std::string format_pooled_csv(std::span<const PooledRow> rows, std::string_view name_column = "variable");

}  // namespace panelmi
