#include "panelmi/screening.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "panelmi/csv.hpp"
#include "panelmi/error.hpp"

namespace panelmi {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string number(double v) {
  if (std::isnan(v)) return {};
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return csv::format_real(v);
}

std::string_view cause_name(UnimputableVariable::Cause c) {
  return c == UnimputableVariable::Cause::Collinearity ? "collinearity" : "insufficient data";
}

int resolve_index(int requested, int m) {
  const int idx = requested > 0 ? requested : default_comparison_index(m);
  if (idx < 1 || idx > m)
    throw ConfigError("comparison index " + std::to_string(idx) + " outside 1.." + std::to_string(m));
  return idx;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::string_view to_string(VerdictStatus s) noexcept {
  switch (s) {
    case VerdictStatus::Accepted: return "Accepted";
    case VerdictStatus::RejectedImputationFailure: return "RejectedImputationFailure";
    case VerdictStatus::RejectedHighFmi: return "RejectedHighFmi";
    case VerdictStatus::RejectedDescriptiveDivergence: return "RejectedDescriptiveDivergence";
  }
  return "?";
}

const VariableVerdict* ScreeningVerdict::find(std::string_view code) const noexcept {
  for (const auto& v : variables)
    if (v.code == code) return &v;
  return nullptr;
}

std::vector<std::string> ScreeningVerdict::accepted() const {
  std::vector<std::string> out;
  for (const auto& v : variables)
    if (v.status == VerdictStatus::Accepted) out.push_back(v.code);
  return out;
}

std::vector<std::string> ScreeningVerdict::rejected() const {
  std::vector<std::string> out;
  for (const auto& v : variables)
    if (v.status != VerdictStatus::Accepted) out.push_back(v.code);
  return out;
}

std::size_t ScreeningVerdict::count(VerdictStatus s) const noexcept {
  std::size_t n = 0;
  for (const auto& v : variables) n += v.status == s;
  return n;
}

ScreeningVerdict screen_variables(const PanelDataset& ds, const MiceConfig& trial,
                                  const ScreeningThresholds& thresholds) {
  trial.validate();
  if (trial.m < 2) throw ConfigError("screening needs a trial run with m >= 2");
  MiceConfig config = trial;
  config.on_failure = FailurePolicy::Record;

  ScreeningVerdict verdict;
  verdict.trial = run_mice(ds, config);
  const ImputationResult& run = verdict.trial;
  const int idx = resolve_index(thresholds.comparison_index, run.m());
  const PanelDataset& chosen = run.completed[static_cast<std::size_t>(idx - 1)];

  for (std::size_t v = 0; v < ds.variable_count(); ++v) {
    const auto& meta = ds.variables()[v];
    if (meta.role != Role::Target) continue;
    VariableVerdict out;
    out.code = meta.code;
    out.missing_fraction =
        ds.row_count() ? static_cast<double>(ds.missing_count(v)) / static_cast<double>(ds.row_count()) : 0.0;

    if (run.failed(meta.code)) {
      out.status = VerdictStatus::RejectedImputationFailure;
      out.fmi = out.std_mean_diff = out.sd_ratio = kNaN;
      int chains = 0;
      const ChainFailure* first = nullptr;
      for (const auto& f : run.failures)
        if (f.code == meta.code) {
          ++chains;
          if (!first) first = &f;
        }
      std::ostringstream detail;
      detail << cause_name(first->cause) << " in " << chains << " of " << run.m() << " chains: " << first->detail;
      out.detail = detail.str();
      verdict.variables.push_back(std::move(out));
      continue;
    }

    out.fmi = per_variable_fmi(run, meta.code).fmi;
    const auto obs = observed_values(ds, meta.code);
    const auto comp = observed_values(chosen, meta.code);
    const auto so = describe(obs);
    const auto sc = describe(comp);
    const double diff = std::abs(sc.mean - so.mean);
    out.std_mean_diff = so.sd > 0.0 ? diff / so.sd : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    out.sd_ratio = so.sd > 0.0 ? sc.sd / so.sd : (sc.sd == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());

    if (ds.missing_count(v) == 0) {
      out.status = VerdictStatus::Accepted;
    } else if (out.fmi > thresholds.fmi) {
      out.status = VerdictStatus::RejectedHighFmi;
      out.detail = "fmi " + csv::format_real(out.fmi, 4) + " above " + csv::format_real(thresholds.fmi);
    } else if (out.std_mean_diff > thresholds.std_mean_diff || out.sd_ratio < thresholds.sd_ratio_low ||
               out.sd_ratio > thresholds.sd_ratio_high) {
      out.status = VerdictStatus::RejectedDescriptiveDivergence;
      out.detail = "standardized mean difference " + csv::format_real(out.std_mean_diff, 4) + ", sd ratio " +
                   csv::format_real(out.sd_ratio, 4);
    }
    verdict.variables.push_back(std::move(out));
  }
  return verdict;
}

PanelDataset restrict_to_accepted(const PanelDataset& ds, const ScreeningVerdict& verdict) {
  std::vector<std::string> keep;
  for (const auto& meta : ds.variables()) {
    if (meta.role == Role::Target) {
      const auto* v = verdict.find(meta.code);
      if (v && v->status != VerdictStatus::Accepted) continue;
    }
    keep.push_back(meta.code);
  }
  return ds.select_variables(keep);
}

PipelineReport pipeline_run(const PanelDataset& ds, const MiceConfig& trial, const MiceConfig& production,
                            const PipelineOptions& options) {
  trial.validate();
  production.validate();
  if (trial.m < 2) throw ConfigError("trial m must be at least 2");
  if (production.m < 2) throw ConfigError("production m must be at least 2");

  PipelineReport report;
  report.trial_config = trial;
  report.production_config = production;

  auto start = std::chrono::steady_clock::now();
  report.screening = screen_variables(ds, trial, options.thresholds);
  report.timings.screening_seconds = seconds_since(start);

  start = std::chrono::steady_clock::now();
  const PanelDataset accepted = restrict_to_accepted(ds, report.screening);
  report.production = run_mice(accepted, production);
  report.timings.production_seconds = seconds_since(start);

  start = std::chrono::steady_clock::now();
  const ImputationResult& run = report.production;
  report.comparison_index = resolve_index(options.thresholds.comparison_index, run.m());
  const PanelDataset& chosen = run.completed[static_cast<std::size_t>(report.comparison_index - 1)];
  report.descriptive = describe_compare(run.original, chosen);

  std::vector<std::string> targets;
  for (const auto& meta : accepted.variables())
    if (meta.role == Role::Target) targets.push_back(meta.code);
  report.correlations = corr_compare(run.original, chosen, targets);

  for (const auto& code : run.imputed_variables) {
    try {
      report.convergence.push_back(
          convergence_stat(run.traces, code, options.rhat_discard, options.rhat_threshold));
    } catch (const InsufficientData& e) {
      report.notes.push_back("convergence for " + code + " skipped: " + e.what());
    }
    try {
      report.densities.push_back(density_plot_data(run.original, chosen, code));
    } catch (const DataError& e) {
      report.notes.push_back("density for " + code + " skipped: " + e.what());
    }
  }
  for (const auto& code : targets) report.fmi.push_back({code, per_variable_fmi(run, code)});
  report.timings.diagnostics_seconds = seconds_since(start);
  return report;
}

std::string format_verdict_csv(const ScreeningVerdict& verdict) {
  std::ostringstream out;
  out << "variable,status,fmi,mean_diff,sd_ratio,detail\n";
  for (const auto& v : verdict.variables)
    out << csv::quote(v.code) << ',' << to_string(v.status) << ',' << number(v.fmi) << ','
        << number(v.std_mean_diff) << ',' << number(v.sd_ratio) << ',' << csv::quote(v.detail) << '\n';
  return out.str();
}

}  // namespace panelmi
