#include "panelmi_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <regex>
#include <sstream>

#include <CLI11.hpp>

#include "panelmi/csv.hpp"
#include "panelmi/diagnostics.hpp"
#include "panelmi/error.hpp"
#include "panelmi/ingest.hpp"
#include "panelmi/pooling.hpp"
#include "panelmi/random.hpp"
#include "panelmi_cli/manifest.hpp"
#include "panelmi_cli/trace_io.hpp"

namespace panelmi::cli {

namespace {

PanelDataset load(const path& input, const SchemaFile& schema, const std::string& layout) {
  if (layout == "wide") return read_wide_csv(input, schema);
  if (layout == "long") return read_long_csv(input, schema);
  throw ConfigError("unknown layout '" + layout + "' (expected wide or long)");
}

PanelDataset load(const InputOptions& in) { return load(in.input, read_schema(in.schema), in.layout); }

std::uint64_t require_seed(const std::optional<std::uint64_t>& seed) {
  if (!seed) throw ConfigError("a seed is required (--seed); runs are never seeded from the clock");
  return *seed;
}

std::vector<std::string> targets_of(const PanelDataset& ds) {
  std::vector<std::string> out;
  for (const auto& v : ds.variables())
    if (v.role == Role::Target) out.push_back(v.code);
  return out;
}

/// imp_*.csv under `dir`, ordered by imputation number.
std::vector<PanelDataset> load_imputations(const path& dir, const SchemaFile& schema) {
  if (!std::filesystem::is_directory(dir)) throw DataError("'" + dir.string() + "' is not a directory");
  static const std::regex pattern(R"(imp_(\d+)\.csv)");
  std::vector<std::pair<long, path>> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, pattern)) files.emplace_back(std::stol(m[1].str()), entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<PanelDataset> out;
  for (const auto& f : files) out.push_back(read_wide_csv(f.second, schema));
  if (out.empty()) throw DataError("no imp_*.csv files in '" + dir.string() + "'");
  return out;
}

std::string profile_csv(const PanelDataset& ds) {
  std::ostringstream out;
  out << "variable,observed,missing,missing_pct\n";
  for (const auto& row : missing_profile(ds))
    out << csv::quote(row.code) << ',' << row.observed << ',' << row.missing << ','
        << csv::format_real(100.0 * row.fraction, 2) << '\n';
  return out.str();
}

std::string config_lines(std::string_view prefix, const MiceConfig& c) {
  std::ostringstream out;
  out << prefix << ".m = " << c.m << '\n'
      << prefix << ".iterations = " << c.iterations << '\n'
      << prefix << ".k = " << c.pmm.k << '\n'
      << prefix << ".match_type = " << to_string(c.pmm.match_type) << '\n'
      << prefix << ".visit_order = " << to_string(c.visit_order) << '\n'
      << prefix << ".ridge_rescue = " << (c.ridge_rescue ? "true" : "false") << '\n'
      << prefix << ".year_predictor = " << (c.predictors.year ? "true" : "false") << '\n'
      << prefix << ".country_indicators = " << (c.predictors.country_indicators ? "true" : "false") << '\n'
      << prefix << ".seed = " << c.seed << '\n';
  return out.str();
}

struct DiagnosticsBundle {
  DescriptiveComparison descriptive;
  CorrelationComparison correlations;
  std::vector<ConvergenceStat> convergence;
  std::vector<DensityPlotData> densities;
  std::vector<PooledRow> fmi;
  std::vector<std::string> notes;
};

void write_diagnostics(OutputSet& out, const DiagnosticsBundle& d) {
  out.write("descriptive.csv", format_descriptive_csv(d.descriptive));
  out.write("correlations.csv", format_correlation_csv(d.correlations));
  out.write("correlation_matrix.csv", format_correlation_matrix_csv(d.correlations));
  if (!d.convergence.empty()) out.write("convergence.csv", format_convergence_csv(d.convergence));
  for (const auto& density : d.densities) out.write("density/" + density.code + ".csv", format_density_csv(density));
  std::ostringstream ovl;
  ovl << "variable,ovl_completed,ovl_imputed\n";
  for (const auto& density : d.densities)
    ovl << csv::quote(density.code) << ',' << csv::format_real(density.ovl_completed) << ','
        << (density.ovl_imputed ? csv::format_real(*density.ovl_imputed) : std::string()) << '\n';
  out.write("ovl.csv", ovl.str());
  if (!d.fmi.empty()) out.write("fmi.csv", format_pooled_csv(d.fmi));
}

}  // namespace

MiceConfig MiceOptions::config(std::uint64_t seed, int workers) const {
  MiceConfig c;
  c.m = m;
  c.iterations = iterations;
  c.pmm.k = k;
  c.pmm.match_type = parse_match_type(match_type);
  c.visit_order = parse_visit_order(visit_order);
  c.ridge_rescue = ridge_rescue;
  c.predictors.year = !no_year;
  c.predictors.country_indicators = !no_country_indicators;
  c.seed = seed;
  c.workers = workers;
  c.validate();
  return c;
}

void cmd_profile(const ProfileOptions& o, std::ostream& out) {
  const PanelDataset ds = load(o.in);
  const std::string text = profile_csv(ds);
  if (!o.out) {
    out << text;
    return;
  }
  OutputSet files(*o.out);
  files.write("missing_profile.csv", text);
  files.finish(true);
  out << "profiled " << ds.variable_count() << " variables over " << ds.row_count() << " rows\n";
}

void cmd_impute(const ImputeOptions& o, std::ostream& out) {
  const std::uint64_t seed = require_seed(o.seed);
  MiceConfig config = o.mice.config(seed, o.workers);
  const PanelDataset ds = load(o.in);

  // Run every chain to the end so that all unimputable variables are reported at once.
  config.on_failure = FailurePolicy::Record;
  const ImputationResult result = run_mice(ds, config);
  if (!result.failures.empty()) {
    std::vector<std::string> seen;
    std::ostringstream msg;
    msg << "variables that cannot be imputed:";
    for (const auto& f : result.failures) {
      if (std::find(seen.begin(), seen.end(), f.code) != seen.end()) continue;
      seen.push_back(f.code);
      msg << "\n  " << f.code << " ("
          << (f.cause == UnimputableVariable::Cause::Collinearity ? "not positive definite" : "insufficient data")
          << "): " << f.detail;
    }
    throw UnimputableVariable(seen.front(), result.failures.front().cause, msg.str());
  }

  OutputSet files(o.out);
  try {
    for (const auto& name : write_imputation_result(result, o.out, o.decimals)) files.add(name);
  } catch (...) {
    files.finish(false);
    throw;
  }
  files.finish(true);
  out << "wrote " << result.m() << " completed dataset" << (result.m() == 1 ? "" : "s") << " ("
      << result.imputed_variables.size() << " imputed variables) to " << o.out.string() << '\n';
}

void cmd_pipeline(const PipelineOptionsCli& o, std::ostream& out) {
  const std::uint64_t seed = require_seed(o.seed);
  MiceOptions trial_opts = o.production;
  trial_opts.m = o.trial_m;
  const MiceConfig trial = trial_opts.config(seed, o.workers);
  const MiceConfig production = o.production.config(mix_seed(seed, 0x7072'6f64), o.workers);
  if (trial.m < 2) throw ConfigError("trial m must be at least 2");
  if (production.m < 2) throw ConfigError("production m must be at least 2");
  const PanelDataset ds = load(o.in);

  PipelineOptions popts;
  popts.thresholds.fmi = o.fmi_threshold;
  popts.thresholds.std_mean_diff = o.mean_diff_threshold;
  popts.thresholds.sd_ratio_low = o.sd_ratio_low;
  popts.thresholds.sd_ratio_high = o.sd_ratio_high;
  popts.thresholds.comparison_index = o.comparison_index;
  popts.rhat_threshold = o.rhat_threshold;
  popts.rhat_discard = o.discard;

  OutputSet files(o.out);
  try {
    const PipelineReport report = pipeline_run(ds, trial, production, popts);
    files.write("verdicts.csv", format_verdict_csv(report.screening));
    if (o.write_imputations)
      for (const auto& name : write_imputation_result(report.production, o.out)) files.add(name);
    else
      files.write("trace.csv", format_trace_csv(report.production.traces));
    DiagnosticsBundle d{report.descriptive, report.correlations, report.convergence, report.densities, report.fmi,
                        report.notes};
    write_diagnostics(files, d);

    const auto& sv = report.screening;
    std::ostringstream text;
    text << config_lines("trial", trial) << config_lines("production", production);
    text << "threshold.fmi = " << csv::format_real(o.fmi_threshold) << '\n'
         << "threshold.mean_diff = " << csv::format_real(o.mean_diff_threshold) << '\n'
         << "threshold.sd_ratio = " << csv::format_real(o.sd_ratio_low) << ", " << csv::format_real(o.sd_ratio_high)
         << '\n'
         << "threshold.rhat = " << csv::format_real(o.rhat_threshold) << '\n'
         << "rhat.discard = " << csv::format_real(o.discard) << '\n'
         << "comparison_index = " << report.comparison_index << '\n'
         << "candidates = " << sv.variables.size() << '\n'
         << "rejected.imputation_failure = " << sv.count(VerdictStatus::RejectedImputationFailure) << '\n'
         << "rejected.high_fmi = " << sv.count(VerdictStatus::RejectedHighFmi) << '\n'
         << "rejected.descriptive_divergence = " << sv.count(VerdictStatus::RejectedDescriptiveDivergence) << '\n'
         << "accepted = " << sv.count(VerdictStatus::Accepted) << '\n';
    int not_converged = 0;
    for (const auto& c : report.convergence) not_converged += !c.pass;
    text << "convergence.failures = " << not_converged << '\n';
    for (const auto& note : report.notes) text << "note = " << note << '\n';
    files.write("report.txt", text.str());
    files.finish(true);

    out << sv.variables.size() << " candidates: " << sv.count(VerdictStatus::RejectedImputationFailure)
        << " imputation failures, " << sv.count(VerdictStatus::RejectedHighFmi) << " high FMI, "
        << sv.count(VerdictStatus::RejectedDescriptiveDivergence) << " descriptive divergence, "
        << sv.count(VerdictStatus::Accepted) << " accepted\n";
    out << std::fixed << std::setprecision(2) << "timings: screening " << report.timings.screening_seconds
        << " s, production " << report.timings.production_seconds << " s, diagnostics "
        << report.timings.diagnostics_seconds << " s\n";
    out.unsetf(std::ios::floatfield);
  } catch (...) {
    files.finish(false);
    throw;
  }
}

void cmd_pool(const PoolOptions& o, std::ostream& out) {
  const SchemaFile schema = read_schema(o.schema);
  const std::vector<PanelDataset> completed = load_imputations(o.dir, schema);
  if (completed.size() < 2)
    throw ConfigError("pooling needs at least two completed datasets, found " + std::to_string(completed.size()));
  std::vector<PooledRow> rows;
  std::string name_column = "variable";
  if (o.estimand == "mean") {
    const auto vars = o.variables.empty() ? targets_of(completed.front()) : o.variables;
    for (const auto& v : vars) rows.push_back({v, per_variable_fmi(completed, v)});
  } else if (o.estimand == "regress") {
    if (o.response.empty() || o.regressors.empty())
      throw ConfigError("the regress estimand needs --response and --regressors");
    for (auto& c : pooled_regress(completed, o.response, o.regressors)) rows.push_back({c.name, c.estimate});
    name_column = "term";
  } else {
    throw ConfigError("unknown estimand '" + o.estimand + "' (expected mean or regress)");
  }
  OutputSet files(o.out);
  files.write("pooled.csv", format_pooled_csv(rows, name_column));
  files.finish(true);
  double min_re = 1.0;
  for (const auto& r : rows) min_re = std::min(min_re, r.estimate.re);
  out << "pooled " << rows.size() << " estimates over m = " << completed.size()
      << "; smallest relative efficiency " << csv::format_real(min_re, 4) << '\n';
}

void cmd_ampute(const AmputeOptions& o, std::ostream& out) {
  AmputationPlan plan;
  plan.seed = require_seed(o.seed);
  plan.mechanism = parse_mechanism(o.mechanism);
  plan.rate = o.rate;
  plan.driver = o.driver;
  const PanelDataset truth = load(o.in);
  plan.targets = o.targets.empty() ? targets_of(truth) : o.targets;
  const Amputation a = ampute(truth, plan);
  OutputSet files(o.out);
  files.write("amputed.csv", format_wide_csv(a.amputed));
  files.write("deleted.csv", format_deleted_csv(truth, a.deleted));
  files.finish(true);
  for (const auto& code : plan.targets) {
    const std::size_t v = a.amputed.variable_index(code);
    out << code << ": " << a.amputed.missing_count(v) << " of " << a.amputed.row_count() << " cells removed ("
        << csv::format_real(100.0 * static_cast<double>(a.amputed.missing_count(v)) /
                                static_cast<double>(a.amputed.row_count()),
                            2)
        << "%)\n";
  }
}

void cmd_evaluate(const EvaluateOptions& o, std::ostream& out) {
  const std::uint64_t seed = require_seed(o.seed);
  const SchemaFile schema = read_schema(o.schema);
  const PanelDataset truth = read_wide_csv(o.truth, schema);
  const Mechanism mechanism = parse_mechanism(o.mechanism);
  for (const auto& m : o.methods)
    if (m != "pmm" && m != "mean" && m != "regression" && m != "listwise")
      throw ConfigError("unknown method '" + m + "' (expected pmm, mean, regression or listwise)");
  if (o.replications < 1) throw ConfigError("replications must be at least 1");

  std::vector<EvaluationRow> rows;
  const int reps = o.amputed ? 1 : o.replications;
  for (int r = 0; r < reps; ++r) {
    PanelDataset amputed;
    std::vector<DeletedCell> deleted;
    if (o.amputed) {
      amputed = read_wide_csv(*o.amputed, schema);
      if (amputed.rows() != truth.rows() || amputed.variable_count() != truth.variable_count())
        throw DataError("amputed file and truth differ in shape");
      deleted = deleted_cells(truth, amputed);
    } else {
      AmputationPlan plan;
      plan.mechanism = mechanism;
      plan.rate = o.rate;
      plan.driver = o.driver;
      plan.targets = o.targets.empty() ? targets_of(truth) : o.targets;
      plan.seed = mix_seed(seed, static_cast<std::uint64_t>(r));
      Amputation a = ampute(truth, plan);
      amputed = std::move(a.amputed);
      deleted = std::move(a.deleted);
    }
    for (const auto& method : o.methods) {
      EvaluationRow row{method, mechanism, o.rate, r + 1, {}};
      if (method == "pmm") {
        const auto result =
            run_mice(amputed, o.mice.config(mix_seed(seed, 0x10000 + static_cast<std::uint64_t>(r)), o.workers));
        row.metrics = evaluate(truth, deleted, result.completed);
      } else {
        PanelDataset single = method == "mean"         ? mean_substitute(amputed)
                              : method == "regression" ? regression_impute(amputed)
                                                       : listwise_delete(amputed);
        row.metrics = evaluate(truth, deleted, std::span<const PanelDataset>(&single, 1));
      }
      rows.push_back(std::move(row));
    }
  }
  OutputSet files(o.out);
  files.write("evaluation.csv", format_evaluation_csv(rows));
  files.finish(true);
  out << "evaluated " << o.methods.size() << " methods over " << reps << " replication" << (reps == 1 ? "" : "s")
      << '\n';
}

void cmd_rank(const RankOptions& o, std::ostream& out) {
  RankingTable ranking;
  if (o.index_table) {
    ranking = rank(read_index_table_csv(o.index_table->string()).table);
  } else {
    if (!o.in) throw ConfigError("rank needs --input and --schema, or --index-table");
    if (o.year == 0) throw ConfigError("rank needs --year");
    const PanelDataset ds = load(*o.in);
    IndexOptions io;
    io.normalization = parse_normalization(o.normalization);
    ranking = rank(capacity_indices(ds, o.year, io));
  }
  OutputSet files(o.out);
  files.write("ranking.csv", format_ranking_csv(ranking, o.decimals));
  files.finish(true);
  if (!ranking.empty())
    out << "ranked " << ranking.size() << " countries; top: " << ranking.front().indices.country << " ("
        << csv::format_real(ranking.front().indices.absorptive) << ")\n";
}

void cmd_diagnose(const DiagnoseOptions& o, std::ostream& out) {
  const SchemaFile schema = read_schema(o.original.schema);
  const PanelDataset original = load(o.original.input, schema, o.original.layout);
  const std::vector<PanelDataset> completed = load_imputations(o.dir, schema);
  const int m = static_cast<int>(completed.size());
  const int idx = o.comparison_index > 0 ? o.comparison_index : default_comparison_index(m);
  if (idx < 1 || idx > m) throw ConfigError("comparison index " + std::to_string(idx) + " outside 1.." + std::to_string(m));
  const PanelDataset& chosen = completed[static_cast<std::size_t>(idx - 1)];

  DiagnosticsBundle d;
  d.descriptive = describe_compare(original, chosen);
  const auto targets = targets_of(original);
  d.correlations = corr_compare(original, chosen, targets);
  for (const auto& code : targets) {
    const std::size_t v = original.variable_index(code);
    if (original.missing_count(v) == 0) continue;
    try {
      d.densities.push_back(density_plot_data(original, chosen, code));
    } catch (const DataError& e) {
      d.notes.push_back("density for " + code + " skipped: " + e.what());
    }
  }
  const path trace_file = o.dir / "trace.csv";
  if (std::filesystem::exists(trace_file)) {
    const ChainTrace trace = read_trace_csv(trace_file);
    for (const auto& code : trace.variables()) {
      try {
        d.convergence.push_back(convergence_stat(trace, code, o.discard, o.rhat_threshold));
      } catch (const InsufficientData& e) {
        d.notes.push_back("convergence for " + code + " skipped: " + e.what());
      }
    }
  }
  if (m >= 2)
    for (const auto& code : targets) d.fmi.push_back({code, per_variable_fmi(completed, code)});

  OutputSet files(o.out);
  write_diagnostics(files, d);
  if (!d.notes.empty()) {
    std::string text;
    for (const auto& n : d.notes) text += n + '\n';
    files.write("notes.txt", text);
  }
  files.finish(true);
  out << "diagnostics for " << targets.size() << " variables against imputation " << idx << " of " << m << '\n';
}

namespace {

void add_input(CLI::App* cmd, InputOptions& in) {
  cmd->add_option("-i,--input", in.input, "Panel CSV")->required()->check(CLI::ExistingFile);
  cmd->add_option("-s,--schema", in.schema, "Schema file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--layout", in.layout, "CSV layout: wide or long")->capture_default_str();
}

void add_mice(CLI::App* cmd, MiceOptions& m, bool with_m = true) {
  if (with_m) cmd->add_option("-m,--m", m.m, "Number of imputations")->capture_default_str();
  cmd->add_option("-t,--iterations", m.iterations, "Sweeps per chain")->capture_default_str();
  cmd->add_option("-k,--donors", m.k, "Donor pool size")->capture_default_str();
  cmd->add_option("--match-type", m.match_type, "both-star or observed-hat-missing-star")->capture_default_str();
  cmd->add_option("--visit-order", m.visit_order, "ascending-missingness or schema-order")->capture_default_str();
  cmd->add_flag("--ridge-rescue", m.ridge_rescue, "Retry singular fits with a small ridge");
  cmd->add_flag("--no-year", m.no_year, "Leave the year out of the predictors");
  cmd->add_flag("--no-country-indicators", m.no_country_indicators, "Leave country indicators out of the predictors");
}

CLI::Option* add_seed(CLI::App* cmd, std::uint64_t& seed) {
  return cmd->add_option("--seed", seed, "Random seed (required)")->required();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"panelmi: multiple imputation for country-year panels"};
  app.set_config("--config", "", "Read option values from an INI/TOML file; flags override it");
  app.require_subcommand(1);
  app.set_version_flag("--version", "panelmi 0.1.0");

  ProfileOptions profile;
  std::string profile_out;
  auto* c_profile = app.add_subcommand("profile", "Missing-value profile per variable");
  add_input(c_profile, profile.in);
  c_profile->add_option("-o,--out", profile_out, "Output directory (stdout when absent)");

  ImputeOptions impute;
  std::uint64_t impute_seed = 0;
  int impute_decimals = -1;
  auto* c_impute = app.add_subcommand("impute", "Chained-equations PMM imputation");
  add_input(c_impute, impute.in);
  c_impute->add_option("-o,--out", impute.out, "Output directory")->required();
  add_mice(c_impute, impute.mice);
  add_seed(c_impute, impute_seed);
  c_impute->add_option("--workers", impute.workers, "Worker threads for chains")->capture_default_str();
  c_impute->add_option("--decimals", impute_decimals, "Fixed decimals in output files (default: round-trip)");

  PipelineOptionsCli pipeline;
  std::uint64_t pipeline_seed = 0;
  bool pipeline_no_imp = false;
  auto* c_pipeline = app.add_subcommand("pipeline", "Screening, production imputation and diagnostics");
  add_input(c_pipeline, pipeline.in);
  c_pipeline->add_option("-o,--out", pipeline.out, "Output directory")->required();
  add_mice(c_pipeline, pipeline.production);
  c_pipeline->add_option("--trial-m", pipeline.trial_m, "Imputations in the screening run")->capture_default_str();
  add_seed(c_pipeline, pipeline_seed);
  c_pipeline->add_option("--workers", pipeline.workers, "Worker threads for chains")->capture_default_str();
  c_pipeline->add_option("--fmi-threshold", pipeline.fmi_threshold)->capture_default_str();
  c_pipeline->add_option("--mean-diff-threshold", pipeline.mean_diff_threshold)->capture_default_str();
  c_pipeline->add_option("--sd-ratio-low", pipeline.sd_ratio_low)->capture_default_str();
  c_pipeline->add_option("--sd-ratio-high", pipeline.sd_ratio_high)->capture_default_str();
  c_pipeline->add_option("--comparison-index", pipeline.comparison_index, "1-based; 0 picks ceil(m/2)")
      ->capture_default_str();
  c_pipeline->add_option("--rhat-threshold", pipeline.rhat_threshold)->capture_default_str();
  c_pipeline->add_option("--discard", pipeline.discard, "Leading fraction of each chain dropped for R-hat")
      ->capture_default_str();
  c_pipeline->add_flag("--no-imputations", pipeline_no_imp, "Skip writing imp_*.csv");

  PoolOptions pool;
  auto* c_pool = app.add_subcommand("pool", "Rubin's-rules pooling over imp_*.csv files");
  c_pool->add_option("-d,--dir", pool.dir, "Directory with imp_*.csv")->required()->check(CLI::ExistingDirectory);
  c_pool->add_option("-s,--schema", pool.schema, "Schema file")->required()->check(CLI::ExistingFile);
  c_pool->add_option("-e,--estimand", pool.estimand, "mean or regress")->capture_default_str();
  c_pool->add_option("--variables", pool.variables, "Variables for the mean estimand")->delimiter(',');
  c_pool->add_option("--response", pool.response, "Response for the regress estimand");
  c_pool->add_option("--regressors", pool.regressors, "Regressors for the regress estimand")->delimiter(',');
  c_pool->add_option("-o,--out", pool.out, "Output directory")->required();

  AmputeOptions amp;
  std::uint64_t amp_seed = 0;
  auto* c_ampute = app.add_subcommand("ampute", "Delete values from a complete panel");
  add_input(c_ampute, amp.in);
  c_ampute->add_option("-o,--out", amp.out, "Output directory")->required();
  c_ampute->add_option("--mechanism", amp.mechanism, "MCAR, MAR or MNAR")->capture_default_str();
  c_ampute->add_option("--rate", amp.rate, "Target missing fraction")->capture_default_str();
  c_ampute->add_option("--driver", amp.driver, "Driver variable for MAR");
  c_ampute->add_option("--targets", amp.targets, "Variables to ampute (default: all targets)")->delimiter(',');
  add_seed(c_ampute, amp_seed);

  EvaluateOptions eval;
  std::uint64_t eval_seed = 0;
  std::string eval_amputed;
  auto* c_eval = app.add_subcommand("evaluate", "Compare imputation methods against a known truth");
  c_eval->add_option("--truth", eval.truth, "Complete panel CSV")->required()->check(CLI::ExistingFile);
  c_eval->add_option("-s,--schema", eval.schema, "Schema file")->required()->check(CLI::ExistingFile);
  c_eval->add_option("--amputed", eval_amputed, "Existing amputed CSV (single replication)")
      ->check(CLI::ExistingFile);
  c_eval->add_option("--mechanism", eval.mechanism, "MCAR, MAR or MNAR")->capture_default_str();
  c_eval->add_option("--rate", eval.rate, "Target missing fraction")->capture_default_str();
  c_eval->add_option("--driver", eval.driver, "Driver variable for MAR");
  c_eval->add_option("--targets", eval.targets, "Variables to ampute")->delimiter(',');
  c_eval->add_option("--replications", eval.replications)->capture_default_str();
  c_eval->add_option("--methods", eval.methods, "pmm, mean, regression, listwise")->delimiter(',');
  eval.mice.m = 10;
  add_mice(c_eval, eval.mice);
  add_seed(c_eval, eval_seed);
  c_eval->add_option("--workers", eval.workers)->capture_default_str();
  c_eval->add_option("-o,--out", eval.out, "Output directory")->required();

  RankOptions rank_opts;
  InputOptions rank_in;
  std::string index_table;
  int rank_decimals = -1;
  auto* c_rank = app.add_subcommand("rank", "Capacity indices and country ranking");
  c_rank->add_option("-i,--input", rank_in.input, "Completed panel CSV")->check(CLI::ExistingFile);
  c_rank->add_option("-s,--schema", rank_in.schema, "Schema file")->check(CLI::ExistingFile);
  c_rank->add_option("--layout", rank_in.layout)->capture_default_str();
  c_rank->add_option("--index-table", index_table, "Rank a table that already holds the indices")
      ->check(CLI::ExistingFile);
  c_rank->add_option("-y,--year", rank_opts.year, "Year to index");
  c_rank->add_option("--normalization", rank_opts.normalization, "per-year or pooled-years")->capture_default_str();
  c_rank->add_option("--decimals", rank_decimals, "Fixed decimals (default: round-trip)");
  c_rank->add_option("-o,--out", rank_opts.out, "Output directory")->required();

  DiagnoseOptions diag;
  auto* c_diag = app.add_subcommand("diagnose", "Diagnostics for existing imputation files");
  add_input(c_diag, diag.original);
  c_diag->add_option("-d,--dir", diag.dir, "Directory with imp_*.csv and trace.csv")
      ->required()
      ->check(CLI::ExistingDirectory);
  c_diag->add_option("-o,--out", diag.out, "Output directory")->required();
  c_diag->add_option("--comparison-index", diag.comparison_index, "1-based; 0 picks ceil(m/2)")->capture_default_str();
  c_diag->add_option("--rhat-threshold", diag.rhat_threshold)->capture_default_str();
  c_diag->add_option("--discard", diag.discard)->capture_default_str();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*c_profile) {
      if (!profile_out.empty()) profile.out = profile_out;
      cmd_profile(profile, out);
    } else if (*c_impute) {
      impute.seed = impute_seed;
      if (impute_decimals >= 0) impute.decimals = impute_decimals;
      cmd_impute(impute, out);
    } else if (*c_pipeline) {
      pipeline.seed = pipeline_seed;
      pipeline.write_imputations = !pipeline_no_imp;
      cmd_pipeline(pipeline, out);
    } else if (*c_pool) {
      cmd_pool(pool, out);
    } else if (*c_ampute) {
      amp.seed = amp_seed;
      cmd_ampute(amp, out);
    } else if (*c_eval) {
      eval.seed = eval_seed;
      if (!eval_amputed.empty()) eval.amputed = eval_amputed;
      cmd_evaluate(eval, out);
    } else if (*c_rank) {
      if (!index_table.empty()) rank_opts.index_table = index_table;
      if (!rank_in.input.empty() || !rank_in.schema.empty()) rank_opts.in = rank_in;
      if (rank_decimals >= 0) rank_opts.decimals = rank_decimals;
      cmd_rank(rank_opts, out);
    } else if (*c_diag) {
      cmd_diagnose(diag, out);
    }
  } catch (const panelmi::Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace panelmi::cli
