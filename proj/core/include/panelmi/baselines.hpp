#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "panelmi/datamodel.hpp"

namespace panelmi {

enum class Mechanism { MCAR, MAR, MNAR };

std::string_view to_string(Mechanism m) noexcept;
Mechanism parse_mechanism(std::string_view text);

/// Logistic slope used by MAR and MNAR amputation.
inline constexpr double kAmputationSlope = 2.0;
/// Bisection stops once the expected missing fraction is this close to the rate.
inline constexpr double kAmputationRateTolerance = 1e-4;

struct AmputationPlan {
  Mechanism mechanism = Mechanism::MCAR;
  double rate = 0.3;
  std::string driver;  ///< MAR only
  std::vector<std::string> targets;
  std::uint64_t seed = 0;
};

struct DeletedCell {
  std::size_t row = 0;
  std::string variable;
  double value = 0.0;
};

struct Amputation {
  PanelDataset amputed;
  std::vector<DeletedCell> deleted;  ///< row-major within each target, targets in plan order
};

/// Target t draws from Rng(mix_seed(plan.seed, t)). MCAR removes each cell with
/// probability `rate`; MAR and MNAR with logistic(alpha + 2 z), z the
/// standardized driver (MAR) or the cell's own standardized value (MNAR),
/// alpha found by bisection so the mean probability equals `rate`.
/// Throws ConfigError for a rate outside (0, 1) or a bad driver and DataError
/// when a target or the driver has missing cells.
Amputation ampute(const PanelDataset& truth, const AmputationPlan& plan);

/// Cells observed in `truth` but missing in `amputed`, with their true values.
std::vector<DeletedCell> deleted_cells(const PanelDataset& truth, const PanelDataset& amputed);

/// Rows with no missing target cell, order preserved.
PanelDataset listwise_delete(const PanelDataset& ds);

/// Missing target cells set to the variable's observed mean.
/// Throws DataError for a target with no observed value.
PanelDataset mean_substitute(const PanelDataset& ds);

/// Conditional-mean imputation: each missing target cell gets the OLS fitted
/// value from an intercept plus predictors. Predictors default to every other
/// target and auxiliary; their own holes are mean-substituted first.
/// Throws CollinearityError tagged with the target.
PanelDataset regression_impute(const PanelDataset& ds,
                               const std::map<std::string, std::vector<std::string>>& predictors = {});

/// Pairwise-complete correlations over targets and auxiliaries (schema order).
Eigen::MatrixXd pairwise_corr(const PanelDataset& ds);
std::vector<std::string> correlation_variables(const PanelDataset& ds);

struct VariableMetrics {
  std::string code;
  double bias = 0.0;               ///< completed mean - true mean
  double ks = 0.0;                 ///< imputed values vs deleted truth; NaN when no cell was filled
  double max_abs_corr_diff = 0.0;  ///< over pairs involving this variable
};

struct EvaluationMetrics {
  std::vector<VariableMetrics> variables;
  double max_abs_corr_diff = 0.0;  ///< over all pairs
  const VariableMetrics* find(std::string_view code) const noexcept;
};

/// Two-sample Kolmogorov-Smirnov distance.
double ks_distance(std::span<const double> a, std::span<const double> b);

/// Metrics for the targets named in `deleted`. Completed datasets may hold a
/// subset of truth's rows (listwise deletion); each must have truth's variables.
/// With several datasets every metric is averaged over them.
/// Throws DataError on a shape mismatch.
EvaluationMetrics evaluate(const PanelDataset& truth, std::span<const DeletedCell> deleted,
                           std::span<const PanelDataset> completed);

struct EvaluationRow {
  std::string method;
  Mechanism mechanism = Mechanism::MCAR;
  double rate = 0.0;
  int replication = 1;
  EvaluationMetrics metrics;
};

/// `method,mechanism,rate,replication,variable,bias,ks,max_abs_corr_diff`.
std::string format_evaluation_csv(std::span<const EvaluationRow> rows);

/// `country,year,variable,value` of the deleted cells.
std::string format_deleted_csv(const PanelDataset& ds, std::span<const DeletedCell> deleted);

}  // namespace panelmi
