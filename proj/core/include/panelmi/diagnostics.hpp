#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "panelmi/datamodel.hpp"
#include "panelmi/mice.hpp"

namespace panelmi {

// ---- descriptive comparison ------------------------------------------------

struct DescriptiveStats {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;  ///< n-1 denominator
  double min = 0.0;
  double max = 0.0;
};

DescriptiveStats describe(std::span<const double> values);

struct DescriptiveRow {
  std::string code;
  DescriptiveStats completed;
  DescriptiveStats observed;
  double missing_fraction = 0.0;
  double std_mean_diff = 0.0;  ///< |mean_completed - mean_observed| / sd_observed
  double sd_ratio = 1.0;       ///< sd_completed / sd_observed
};

struct DescriptiveComparison {
  std::vector<DescriptiveRow> rows;
  const DescriptiveRow* find(std::string_view code) const noexcept;
};

/// One row per variable of `observed`. The observed side uses masked-true
/// cells; the completed side uses every cell the completed dataset holds.
/// Throws DataError when the grids or variable lists differ.
DescriptiveComparison describe_compare(const PanelDataset& observed, const PanelDataset& completed);

/// Table-1 style layout.
std::string format_descriptive_csv(const DescriptiveComparison& cmp);

// ---- kernel densities --------------------------------------------------------

struct DensityCurve {
  std::vector<double> grid;
  std::vector<double> density;
  double bandwidth = 0.0;
};

struct KdeOptions {
  std::optional<double> bandwidth;          ///< default: Silverman's rule
  std::optional<std::vector<double>> grid;  ///< default: 512 points over [min - 3h, max + 3h]
};

inline constexpr int kDensityGridPoints = 512;

/// h = 0.9 min(sd, IQR / 1.34) n^(-1/5); IQR from linearly interpolated
/// quartiles. When the IQR is zero the sd alone is used.
/// Throws DataError with fewer than two distinct values.
double silverman_bandwidth(std::span<const double> values);

/// Gaussian kernel density estimate.
DensityCurve kde(std::span<const double> values, const KdeOptions& options = {});

/// Trapezoid integral of a curve over its grid.
double integrate(const DensityCurve& curve);

/// Overlap coefficient: trapezoid integral of min(d1, d2). Curves on
/// different grids are interpolated linearly onto a common 512-point grid
/// spanning both (zero outside each curve's own range).
double ovl(const DensityCurve& d1, const DensityCurve& d2);

struct DensityPair {
  DensityCurve reference;   ///< observed values
  DensityCurve comparison;  ///< completed or imputed-only values
  double overlap = 0.0;
};

/// Both densities on one grid covering [min - 3h, max + 3h] of either sample.
DensityPair density_pair(std::span<const double> reference, std::span<const double> comparison);

/// Observed / completed / imputed-only densities for one variable on a common grid.
struct DensityPlotData {
  std::string code;
  std::vector<double> grid;
  std::vector<double> observed;
  std::vector<double> completed;
  std::vector<double> imputed;  ///< empty when fewer than two distinct imputed values
  double ovl_completed = 0.0;
  std::optional<double> ovl_imputed;
};

DensityPlotData density_plot_data(const PanelDataset& original, const PanelDataset& completed, std::string_view code);
std::string format_density_csv(const DensityPlotData& data);

// ---- correlations --------------------------------------------------------------

/// Pearson correlations from pairwise-complete rows. Entries with fewer than
/// three joint rows or a zero-variance side are NaN and flagged unavailable.
Eigen::MatrixXd pairwise_correlation(const PanelDataset& ds, std::span<const std::string> variables,
                                     Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>* available = nullptr);

struct CorrelationComparison {
  std::vector<std::string> variables;
  Eigen::MatrixXd observed;
  Eigen::MatrixXd completed;
  Eigen::MatrixXd abs_diff;
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> available;
  int sign_flips = 0;  ///< among available pairs with |rho_observed| > 0.1
  double max_abs_diff = 0.0;
};

CorrelationComparison corr_compare(const PanelDataset& observed, const PanelDataset& completed,
                                   std::span<const std::string> variables);

/// Long layout: var_a, var_b, observed, completed, abs_diff, available.
std::string format_correlation_csv(const CorrelationComparison& cmp);
/// Square layout: observed above the diagonal, completed below.
std::string format_correlation_matrix_csv(const CorrelationComparison& cmp);

// ---- convergence ------------------------------------------------------------

/// Split-chain potential scale reduction over series[chain][iteration].
/// The first floor(discard * T) iterations are dropped and each chain is cut
/// into two halves of T' = floor(retained / 2) (an odd leading draw is
/// dropped). With W the mean within-half variance and B' = T' times the
/// variance of the half means:
///   R = sqrt(((T' - 1)/T' W + B'/T') / W),  R = 1 when W = B' = 0,
///   R = +inf when W = 0 < B'.
/// Throws InsufficientData when fewer than two chains or fewer than four
/// retained iterations.
double split_rhat(const std::vector<std::vector<double>>& series, double discard = 0.5);

struct ConvergenceStat {
  std::string code;
  double rhat_mean = 1.0;
  double rhat_sd = 1.0;
  double threshold = 1.2;
  bool pass = true;
};

ConvergenceStat convergence_stat(const ChainTrace& traces, std::string_view variable, double discard = 0.5,
                                 double threshold = 1.2);

std::string format_convergence_csv(std::span<const ConvergenceStat> stats);

/// 1-based completed-dataset index used for single-imputation comparisons: ceil(m / 2).
int default_comparison_index(int m) noexcept;

}  // namespace panelmi
