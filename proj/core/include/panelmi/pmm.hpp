#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "panelmi/datamodel.hpp"
#include "panelmi/linmodel.hpp"
#include "panelmi/random.hpp"

namespace panelmi {

/// Which coefficient vector produces the predicted values used for matching.
enum class MatchType {
  BothStar,                ///< donors and recipients both predicted with the posterior draw
  ObservedHatMissingStar,  ///< donors with the least-squares fit, recipients with the draw
};

std::string_view to_string(MatchType m) noexcept;
MatchType parse_match_type(std::string_view text);

struct PmmSettings {
  int k = 5;  ///< donor pool size
  MatchType match_type = MatchType::BothStar;
};

struct ImputedCell {
  std::size_t row = 0;
  double value = 0.0;
};

/// Target-column summaries after the fill (trace input).
struct IterationStats {
  double column_mean = 0.0;
  double column_sd = 0.0;
  double imputed_mean = 0.0;  ///< over the recipients only; 0 when there are none
  double imputed_sd = 0.0;    ///< n-1 denominator; 0 with fewer than two recipients
};

struct PmmResult {
  std::vector<ImputedCell> imputed;  ///< one entry per recipient, ascending row order
  IterationStats stats;
};

/// Donor-row normal equations of a design whose column 0 is the intercept.
struct NormalEquations {
  Eigen::MatrixXd xtx;
  Eigen::VectorXd xty;
  double yty = 0.0;
};

/// Returns design * beta for every row, donors and recipients alike.
using RowPredictor = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Fit, posterior draw and matching from precomputed normal equations.
/// The residual variance is recomputed from `predict_rows(beta_hat)` on the
/// donor rows. Same errors and matching rule as pmm_impute.
PmmResult pmm_from_normal_equations(const NormalEquations& ne, const RowPredictor& predict_rows,
                                    std::span<const double> target, std::span<const std::uint8_t> observed,
                                    const PmmSettings& settings, Rng& rng, const OlsOptions& ols = {});

/// One predictive-mean-matching pass over a single target.
///
/// `predictors` holds raw predictor columns for every row (no intercept;
/// rows must be fully filled). Columns are centred and scaled on the donor
/// rows and an intercept is prepended before the least-squares fit.
/// For each recipient, in row order, the pool is the min(k, donors) donors
/// nearest in predicted value plus every donor tied with the farthest of
/// them; one pool member is drawn uniformly and its observed value copied.
///
/// Throws InsufficientData when donors < q + 2 (q = predictors + 1) and
/// CollinearityError from the fit.
PmmResult pmm_impute(const Eigen::Ref<const Eigen::MatrixXd>& predictors, std::span<const double> target,
                     std::span<const std::uint8_t> observed, const PmmSettings& settings, Rng& rng,
                     const OlsOptions& ols = {});

/// Dataset-level form: predictors are variable codes that must be fully observed
/// in `current`; recipients are the target's missing cells. Linear-model errors
/// are rethrown tagged with the target code.
PmmResult impute_variable_pmm(const PanelDataset& current, std::string_view target,
                              std::span<const std::string> predictors, const PmmSettings& settings, Rng& rng,
                              const OlsOptions& ols = {});

}  // namespace panelmi
