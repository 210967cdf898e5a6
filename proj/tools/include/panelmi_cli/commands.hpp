#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "panelmi/baselines.hpp"
#include "panelmi/indices.hpp"
#include "panelmi/mice.hpp"
#include "panelmi/screening.hpp"

namespace panelmi::cli {

using std::filesystem::path;

struct InputOptions {
  path input;
  path schema;
  std::string layout = "wide";  ///< wide | long
};

/// Command-line mirror of MiceConfig.
struct MiceOptions {
  int m = 50;
  int iterations = 10;
  int k = 5;
  std::string match_type = "both-star";
  std::string visit_order = "ascending-missingness";
  bool ridge_rescue = false;
  bool no_year = false;
  bool no_country_indicators = false;

  MiceConfig config(std::uint64_t seed, int workers) const;
};

struct ProfileOptions {
  InputOptions in;
  std::optional<path> out;
};

struct ImputeOptions {
  InputOptions in;
  path out;
  MiceOptions mice;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  std::optional<int> decimals;
};

struct PipelineOptionsCli {
  InputOptions in;
  path out;
  MiceOptions production;
  int trial_m = 20;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  double fmi_threshold = 0.60;
  double mean_diff_threshold = 0.25;
  double sd_ratio_low = 2.0 / 3.0;
  double sd_ratio_high = 1.5;
  int comparison_index = 0;
  double rhat_threshold = 1.2;
  double discard = 0.5;
  bool write_imputations = true;
};

struct PoolOptions {
  path dir;  ///< holds imp_*.csv
  path schema;
  std::string estimand = "mean";  ///< mean | regress
  std::vector<std::string> variables;
  std::string response;
  std::vector<std::string> regressors;
  path out;
};

struct AmputeOptions {
  InputOptions in;
  path out;
  std::string mechanism = "MCAR";
  double rate = 0.3;
  std::string driver;
  std::vector<std::string> targets;
  std::optional<std::uint64_t> seed;
};

struct EvaluateOptions {
  path truth;
  path schema;
  std::optional<path> amputed;  ///< single replication from an existing file
  std::string mechanism = "MCAR";
  double rate = 0.3;
  std::string driver;
  std::vector<std::string> targets;
  int replications = 1;
  std::vector<std::string> methods = {"pmm", "mean", "regression", "listwise"};
  MiceOptions mice;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  path out;
};

struct RankOptions {
  std::optional<InputOptions> in;
  std::optional<path> index_table;
  int year = 0;
  std::string normalization = "per-year";
  std::optional<int> decimals;
  path out;
};

struct DiagnoseOptions {
  InputOptions original;
  path dir;
  path out;
  int comparison_index = 0;
  double rhat_threshold = 1.2;
  double discard = 0.5;
};

void cmd_profile(const ProfileOptions& o, std::ostream& out);
void cmd_impute(const ImputeOptions& o, std::ostream& out);
void cmd_pipeline(const PipelineOptionsCli& o, std::ostream& out);
void cmd_pool(const PoolOptions& o, std::ostream& out);
void cmd_ampute(const AmputeOptions& o, std::ostream& out);
void cmd_evaluate(const EvaluateOptions& o, std::ostream& out);
void cmd_rank(const RankOptions& o, std::ostream& out);
void cmd_diagnose(const DiagnoseOptions& o, std::ostream& out);

/// Parses `args` (args[0] is the program name) and runs one subcommand.
/// Returns the process exit code; errors go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace panelmi::cli
