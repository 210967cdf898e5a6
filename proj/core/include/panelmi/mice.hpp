#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "panelmi/datamodel.hpp"
#include "panelmi/error.hpp"
#include "panelmi/pmm.hpp"
#include "panelmi/random.hpp"

namespace panelmi {

enum class VisitOrder { AscendingMissingness, SchemaOrder };

std::string_view to_string(VisitOrder v) noexcept;
VisitOrder parse_visit_order(std::string_view text);

/// Which columns predict each target.
///
/// By default every other imputation target, every auxiliary, the year as a
/// numeric column and a country indicator block (first country dropped).
/// Identifier-role variables never enter. An indicator whose country has no
/// observed row for the target in question is left out of that step's design,
/// the way least-squares software omits an empty dummy. A year column is only
/// added when the panel spans more than one year.
struct PredictorPolicy {
  bool other_targets = true;
  bool auxiliaries = true;
  bool year = true;
  bool country_indicators = true;
  /// Per-target explicit predictor codes; replaces the target/auxiliary part
  /// of the default (year and country flags still apply).
  std::map<std::string, std::vector<std::string>> overrides;
};

/// What a chain does when a variable step fails.
enum class FailurePolicy {
  Abort,   ///< run_mice throws UnimputableVariable
  Record,  ///< the chain drops the variable and carries on; failures are reported
};

struct MiceConfig {
  int m = 50;
  int iterations = 10;
  PmmSettings pmm;
  VisitOrder visit_order = VisitOrder::AscendingMissingness;
  std::uint64_t seed = 0;
  bool ridge_rescue = false;
  PredictorPolicy predictors;
  FailurePolicy on_failure = FailurePolicy::Abort;
  /// Worker threads for chains; results do not depend on this.
  int workers = 1;

  void validate() const;  ///< throws ConfigError
};

enum class Provenance : std::uint8_t { Observed, Imputed, Missing };

std::string_view to_string(Provenance p) noexcept;

/// Per (chain, iteration, variable) mean and sd of the variable's imputed cells.
class ChainTrace {
public:
  ChainTrace() = default;
  ChainTrace(std::vector<std::string> variables, int chains, int iterations);

  const std::vector<std::string>& variables() const noexcept { return variables_; }
  int chains() const noexcept { return chains_; }
  int iterations() const noexcept { return iterations_; }
  std::size_t size() const noexcept { return mean_.size(); }

  double mean(int chain, int iteration, std::size_t var) const { return mean_[offset(chain, iteration, var)]; }
  double sd(int chain, int iteration, std::size_t var) const { return sd_[offset(chain, iteration, var)]; }
  void set(int chain, int iteration, std::size_t var, double mean, double sd);

  std::optional<std::size_t> find(std::string_view code) const noexcept;
  /// series[chain][iteration] of the mean (or sd) for one variable.
  std::vector<std::vector<double>> mean_series(std::size_t var) const;
  std::vector<std::vector<double>> sd_series(std::size_t var) const;

private:
  std::size_t offset(int chain, int iteration, std::size_t var) const {
    return (static_cast<std::size_t>(chain) * static_cast<std::size_t>(iterations_) +
            static_cast<std::size_t>(iteration)) * variables_.size() + var;
  }
  std::vector<std::string> variables_;
  int chains_ = 0;
  int iterations_ = 0;
  std::vector<double> mean_;
  std::vector<double> sd_;
};

struct ChainFailure {
  int chain = 0;
  int iteration = 0;
  std::string code;
  UnimputableVariable::Cause cause = UnimputableVariable::Cause::Collinearity;
  std::string detail;
};

struct ImputationResult {
  PanelDataset original;
  std::vector<PanelDataset> completed;
  /// Targets with missing cells that every chain imputed, in visit order.
  std::vector<std::string> imputed_variables;
  ChainTrace traces;
  /// Only populated under FailurePolicy::Record.
  std::vector<ChainFailure> failures;

  int m() const noexcept { return static_cast<int>(completed.size()); }
  Provenance provenance(std::size_t row, std::size_t var) const;
  bool failed(std::string_view code) const noexcept;
};

/// Chained-equations PMM. Chain c draws from Rng(mix_seed(config.seed, c)):
/// random-observed initialization, then `iterations` sweeps over the targets
/// with missing cells in visit order; the last sweep is kept.
ImputationResult run_mice(const PanelDataset& ds, const MiceConfig& config);

/// Missing target cells replaced by uniform draws from the same variable's
/// observed values; variables and rows are visited in dataset order. The
/// returned working copy has every target cell marked observed.
/// Throws DataError when a target has no observed value.
PanelDataset initialize_fill(const PanelDataset& ds, Rng& rng);

/// Target codes in visiting order (all targets, including complete ones).
std::vector<std::string> visit_order(const PanelDataset& ds, VisitOrder policy);

/// imp_001.csv ... imp_<m>.csv, provenance.csv and trace.csv under `dir`.
/// Returns the written file names relative to `dir`, in write order.
std::vector<std::string> write_imputation_result(const ImputationResult& result, const std::filesystem::path& dir,
                                                 std::optional<int> decimals = std::nullopt);
std::string imputation_file_name(int index, int m);
std::string format_trace_csv(const ChainTrace& trace);
std::string format_provenance_csv(const ImputationResult& result);

}  // namespace panelmi
