#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "panelmi/diagnostics.hpp"
#include "panelmi/mice.hpp"
#include "panelmi/pooling.hpp"

namespace panelmi {

enum class VerdictStatus { Accepted, RejectedImputationFailure, RejectedHighFmi, RejectedDescriptiveDivergence };

std::string_view to_string(VerdictStatus s) noexcept;

struct ScreeningThresholds {
  double fmi = 0.60;
  double std_mean_diff = 0.25;
  double sd_ratio_low = 2.0 / 3.0;
  double sd_ratio_high = 1.5;
  /// 1-based completed dataset used for the descriptive check; 0 picks ceil(m/2).
  int comparison_index = 0;
};

struct VariableVerdict {
  std::string code;
  VerdictStatus status = VerdictStatus::Accepted;
  /// NaN where the statistic could not be computed (failed imputations).
  double fmi = 0.0;
  double std_mean_diff = 0.0;
  double sd_ratio = 1.0;
  double missing_fraction = 0.0;
  std::string detail;
};

struct ScreeningVerdict {
  std::vector<VariableVerdict> variables;  ///< one per imputation target, schema order
  ImputationResult trial;

  const VariableVerdict* find(std::string_view code) const noexcept;
  std::vector<std::string> accepted() const;
  std::vector<std::string> rejected() const;
  std::size_t count(VerdictStatus s) const noexcept;
};

/// One trial run under FailurePolicy::Record, then per-target verdicts.
/// Rejection causes are checked in the order imputation failure, FMI,
/// descriptive divergence. Nothing is re-imputed here.
ScreeningVerdict screen_variables(const PanelDataset& ds, const MiceConfig& trial,
                                  const ScreeningThresholds& thresholds = {});

/// `ds` with every rejected target removed; auxiliaries and identifiers are kept.
PanelDataset restrict_to_accepted(const PanelDataset& ds, const ScreeningVerdict& verdict);

struct StageTimings {
  double screening_seconds = 0.0;
  double production_seconds = 0.0;
  double diagnostics_seconds = 0.0;
};

struct PipelineOptions {
  ScreeningThresholds thresholds;
  double rhat_threshold = 1.2;
  double rhat_discard = 0.5;
};

struct PipelineReport {
  MiceConfig trial_config;
  MiceConfig production_config;
  ScreeningVerdict screening;
  ImputationResult production;
  int comparison_index = 1;  ///< 1-based
  DescriptiveComparison descriptive;
  CorrelationComparison correlations;
  std::vector<ConvergenceStat> convergence;
  std::vector<DensityPlotData> densities;
  std::vector<PooledRow> fmi;  ///< per accepted target; empty when production m < 2
  StageTimings timings;
  std::vector<std::string> notes;  ///< diagnostics that were skipped and why
};

PipelineReport pipeline_run(const PanelDataset& ds, const MiceConfig& trial, const MiceConfig& production,
                            const PipelineOptions& options = {});

/// `variable,status,fmi,mean_diff,sd_ratio,detail`.
std::string format_verdict_csv(const ScreeningVerdict& verdict);

}  // namespace panelmi
