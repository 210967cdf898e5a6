#include "panelmi/mice.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "panelmi/csv.hpp"
#include "panelmi/gram.hpp"
#include "panelmi/ingest.hpp"

namespace panelmi {

std::string_view to_string(VisitOrder v) noexcept {
  return v == VisitOrder::AscendingMissingness ? "ascending-missingness" : "schema-order";
}

VisitOrder parse_visit_order(std::string_view text) {
  if (text == "ascending-missingness" || text == "AscendingMissingness") return VisitOrder::AscendingMissingness;
  if (text == "schema-order" || text == "SchemaOrder") return VisitOrder::SchemaOrder;
  throw ConfigError("unknown visit order '" + std::string(text) + "'");
}

std::string_view to_string(Provenance p) noexcept {
  switch (p) {
    case Provenance::Observed: return "Observed";
    case Provenance::Imputed: return "Imputed";
    case Provenance::Missing: return "Missing";
  }
  return "?";
}

void MiceConfig::validate() const {
  if (m < 1) throw ConfigError("m must be at least 1");
  if (iterations < 1) throw ConfigError("iterations must be at least 1");
  if (pmm.k < 1) throw ConfigError("donor count k must be at least 1");
  if (workers < 1) throw ConfigError("workers must be at least 1");
}

ChainTrace::ChainTrace(std::vector<std::string> variables, int chains, int iterations)
    : variables_(std::move(variables)), chains_(chains), iterations_(iterations) {
  const std::size_t n = static_cast<std::size_t>(chains) * static_cast<std::size_t>(iterations) * variables_.size();
  mean_.assign(n, 0.0);
  sd_.assign(n, 0.0);
}

void ChainTrace::set(int chain, int iteration, std::size_t var, double mean, double sd) {
  const std::size_t i = offset(chain, iteration, var);
  mean_[i] = mean;
  sd_[i] = sd;
}

std::optional<std::size_t> ChainTrace::find(std::string_view code) const noexcept {
  for (std::size_t v = 0; v < variables_.size(); ++v)
    if (variables_[v] == code) return v;
  return std::nullopt;
}

std::vector<std::vector<double>> ChainTrace::mean_series(std::size_t var) const {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(chains_));
  for (int c = 0; c < chains_; ++c)
    for (int t = 0; t < iterations_; ++t) out[c].push_back(mean(c, t, var));
  return out;
}

std::vector<std::vector<double>> ChainTrace::sd_series(std::size_t var) const {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(chains_));
  for (int c = 0; c < chains_; ++c)
    for (int t = 0; t < iterations_; ++t) out[c].push_back(sd(c, t, var));
  return out;
}

Provenance ImputationResult::provenance(std::size_t row, std::size_t var) const {
  if (original.observed(row, var)) return Provenance::Observed;
  if (completed.empty() || !completed.front().observed(row, var)) return Provenance::Missing;
  return Provenance::Imputed;
}

bool ImputationResult::failed(std::string_view code) const noexcept {
  return std::any_of(failures.begin(), failures.end(), [&](const ChainFailure& f) { return f.code == code; });
}

std::vector<std::string> visit_order(const PanelDataset& ds, VisitOrder policy) {
  std::vector<std::size_t> targets;
  for (std::size_t v = 0; v < ds.variable_count(); ++v)
    if (ds.variables()[v].role == Role::Target) targets.push_back(v);
  if (policy == VisitOrder::AscendingMissingness) {
    std::stable_sort(targets.begin(), targets.end(),
                     [&](std::size_t a, std::size_t b) { return ds.missing_count(a) < ds.missing_count(b); });
  }
  std::vector<std::string> out;
  for (std::size_t v : targets) out.push_back(ds.variables()[v].code);
  return out;
}

namespace {

using Columns = std::vector<std::vector<double>>;

// Fills target columns in dataset order; throws for an all-missing target.
void fill_targets(const PanelDataset& ds, Columns& columns, Rng& rng, const std::set<std::size_t>* skip = nullptr) {
  for (std::size_t v = 0; v < ds.variable_count(); ++v) {
    if (ds.variables()[v].role != Role::Target) continue;
    if (skip && skip->count(v)) continue;
    const auto mask = ds.mask(v);
    const auto col = ds.column(v);
    std::vector<double> pool;
    for (std::size_t i = 0; i < col.size(); ++i)
      if (mask[i]) pool.push_back(col[i]);
    if (pool.size() == col.size()) continue;
    if (pool.empty()) throw DataError("variable '" + ds.variables()[v].code + "' has no observed values");
    for (std::size_t i = 0; i < col.size(); ++i)
      if (!mask[i]) columns[v][i] = pool[rng.index(pool.size())];
  }
}

struct TargetRows {
  std::vector<Eigen::Index> donors;
  std::vector<Eigen::Index> recipients;
  std::vector<std::size_t> countries;  // indicator block
};

struct Plan {
  std::vector<std::size_t> visit;       // dataset indices of targets with missing cells
  std::vector<std::size_t> targets;     // all target indices
  std::vector<std::size_t> auxiliaries;
  std::set<std::size_t> all_missing;    // targets with no observed value
  bool use_year = false;
  bool use_countries = false;
  std::vector<TargetRows> rows;         // by dataset index; filled for visited targets
};

struct ChainOutput {
  Columns columns;
  std::vector<ChainFailure> failures;
  std::set<std::size_t> failed;
  // trace[t][visit position] = (mean, sd)
  std::vector<std::vector<std::pair<double, double>>> trace;
};

std::vector<std::size_t> predictor_columns(const PanelDataset& ds, const Plan& plan, const MiceConfig& config,
                                           std::size_t target, const std::set<std::size_t>& failed) {
  std::vector<std::size_t> cols;
  const auto& code = ds.variables()[target].code;
  if (auto it = config.predictors.overrides.find(code); it != config.predictors.overrides.end()) {
    for (const auto& p : it->second) {
      const std::size_t v = ds.variable_index(p);
      if (v == target) throw ConfigError("predictor override for '" + code + "' lists the target itself");
      const auto role = ds.variables()[v].role;
      if (role == Role::Identifier) throw ConfigError("identifier '" + p + "' cannot be a predictor");
      if (!failed.count(v) && !plan.all_missing.count(v)) cols.push_back(v);
    }
    return cols;
  }
  if (config.predictors.other_targets)
    for (std::size_t v : plan.targets)
      if (v != target && !failed.count(v) && !plan.all_missing.count(v)) cols.push_back(v);
  if (config.predictors.auxiliaries)
    for (std::size_t v : plan.auxiliaries) cols.push_back(v);
  return cols;
}

// Countries that get an indicator for this target: those with an observed
// row, minus the first such (reference) and minus one that holds every
// observed row.
std::vector<std::size_t> indicator_countries(const PanelDataset& ds, std::size_t target) {
  const auto mask = ds.mask(target);
  std::vector<std::size_t> observed_in(ds.countries().size(), 0);
  std::size_t n_obs = 0;
  for (std::size_t i = 0; i < ds.row_count(); ++i)
    if (mask[i]) {
      ++observed_in[ds.rows()[i].country];
      ++n_obs;
    }
  std::vector<std::size_t> out;
  bool reference_taken = false;
  for (std::size_t c = 0; c < observed_in.size(); ++c) {
    if (observed_in[c] == 0) continue;
    if (!reference_taken) {
      reference_taken = true;
      continue;
    }
    if (observed_in[c] < n_obs) out.push_back(c);
  }
  return out;
}

// Chain working state. Column 0 of the cache is the intercept; every target,
// auxiliary, the year and each country indicator get a slot, shifted and
// scaled by fixed constants so that cross products stay well conditioned.
// Each step standardizes its predictors on the donor rows from the cross
// products, which gives the same normal equations as pmm_impute.
class ChainState {
public:
  ChainState(const PanelDataset& ds, const Plan& plan, const Columns& columns) : ds_(ds) {
    const auto n = static_cast<Eigen::Index>(ds.row_count());
    slot_.assign(ds.variable_count(), -1);
    std::vector<Eigen::VectorXd> raw;
    raw.emplace_back(Eigen::VectorXd::Ones(n));
    shift_.push_back(0.0);
    scale_.push_back(1.0);
    auto add = [&](Eigen::VectorXd values, double shift, double scale) {
      raw.push_back(std::move(values));
      shift_.push_back(shift);
      scale_.push_back(scale > 0.0 ? scale : 1.0);
      return static_cast<Eigen::Index>(raw.size() - 1);
    };
    auto column_of = [&](const std::vector<double>& c) {
      return Eigen::Map<const Eigen::VectorXd>(c.data(), n).eval();
    };
    for (std::size_t v = 0; v < ds.variable_count(); ++v) {
      const auto role = ds.variables()[v].role;
      if (role == Role::Identifier || plan.all_missing.count(v)) continue;
      const auto [mean, sd] = observed_mean_sd(ds, v);
      slot_[v] = add(column_of(columns[v]), mean, sd);
    }
    if (plan.use_year) {
      Eigen::VectorXd year(n);
      for (Eigen::Index i = 0; i < n; ++i) year(i) = ds.years()[ds.rows()[static_cast<std::size_t>(i)].year];
      const auto [mean, sd] = mean_sd(year);
      year_slot_ = add(std::move(year), mean, sd);
    }
    if (plan.use_countries) {
      for (std::size_t c = 0; c < ds.countries().size(); ++c) {
        Eigen::VectorXd ind(n);
        for (Eigen::Index i = 0; i < n; ++i) ind(i) = ds.rows()[static_cast<std::size_t>(i)].country == c ? 1.0 : 0.0;
        const auto [mean, sd] = mean_sd(ind);
        country_slot_.push_back(add(std::move(ind), mean, sd));
      }
    }
    Eigen::MatrixXd all(n, static_cast<Eigen::Index>(raw.size()));
    for (std::size_t k = 0; k < raw.size(); ++k) all.col(static_cast<Eigen::Index>(k)) = prescale(k, raw[k]);
    cache_ = GramCache(std::move(all));
  }

  PmmResult step(std::size_t target, const std::vector<std::size_t>& cols, const TargetRows& rows,
                 const PmmSettings& settings, Rng& rng, const OlsOptions& ols) const {
    std::vector<Eigen::Index> sel{0};
    for (std::size_t v : cols) sel.push_back(slot_[v]);
    if (year_slot_ >= 0) sel.push_back(year_slot_);
    for (std::size_t c : rows.countries) sel.push_back(country_slot_[c]);
    const auto q = static_cast<Eigen::Index>(sel.size());
    const Eigen::Index t_slot = slot_[target];
    sel.push_back(t_slot);

    const Eigen::Index n_donors = static_cast<Eigen::Index>(rows.donors.size());
    if (rows.recipients.empty() || n_donors < q + 2) return run_direct(target, cols, rows, settings, rng, ols);

    const Eigen::MatrixXd s = cache_.subset(sel, rows.donors, rows.recipients);
    const double nd = static_cast<double>(n_donors);
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(q);
    Eigen::VectorXd scale = Eigen::VectorXd::Ones(q);
    for (Eigen::Index j = 1; j < q; ++j) {
      mu(j) = s(0, j) / nd;
      const double msq = s(j, j) / nd;
      const double var = msq - mu(j) * mu(j);
      // Variance at rounding level relative to the raw second moment is a constant column.
      if (var > 1e-13 * msq) scale(j) = 1.0 / std::sqrt(var);
    }
    // y = shift + scale * f on the donor rows, f being the cached target column.
    const double ct = shift_[static_cast<std::size_t>(t_slot)];
    const double st = scale_[static_cast<std::size_t>(t_slot)];
    const double sum_y = nd * ct + st * s(0, q);

    NormalEquations ne;
    ne.xtx.resize(q, q);
    ne.xty.resize(q);
    ne.xtx(0, 0) = nd;
    ne.xty(0) = sum_y;
    for (Eigen::Index j = 1; j < q; ++j) {
      ne.xtx(0, j) = ne.xtx(j, 0) = 0.0;
      for (Eigen::Index k = j; k < q; ++k)
        ne.xtx(j, k) = ne.xtx(k, j) = (s(j, k) - nd * mu(j) * mu(k)) * scale(j) * scale(k);
      const double fy = ct * s(0, j) + st * s(j, q);
      ne.xty(j) = scale(j) * (fy - mu(j) * sum_y);
    }
    ne.yty = nd * ct * ct + 2.0 * ct * st * s(0, q) + st * st * s(q, q);

    const Eigen::MatrixXd& f = cache_.columns();
    const auto predict_rows = [&](const Eigen::VectorXd& beta) {
      double offset = beta(0);
      for (Eigen::Index j = 1; j < q; ++j) offset -= beta(j) * scale(j) * mu(j);
      Eigen::VectorXd out = Eigen::VectorXd::Constant(f.rows(), offset);
      for (Eigen::Index j = 1; j < q; ++j) out.noalias() += (beta(j) * scale(j)) * f.col(sel[static_cast<std::size_t>(j)]);
      return out;
    };
    return pmm_from_normal_equations(ne, predict_rows, ds_.column(target), ds_.mask(target), settings, rng, ols);
  }

  void update(std::size_t target, const std::vector<double>& values) {
    const Eigen::Index k = slot_[target];
    const auto n = static_cast<Eigen::Index>(values.size());
    cache_.replace_column(k, prescale(static_cast<std::size_t>(k), Eigen::Map<const Eigen::VectorXd>(values.data(), n)));
  }

private:
  static std::pair<double, double> mean_sd(const Eigen::VectorXd& x) {
    const double mean = x.mean();
    const double sd = x.size() > 1 ? std::sqrt((x.array() - mean).square().sum() / static_cast<double>(x.size() - 1)) : 0.0;
    return {mean, sd};
  }

  static std::pair<double, double> observed_mean_sd(const PanelDataset& ds, std::size_t v) {
    const auto col = ds.column(v);
    const auto mask = ds.mask(v);
    std::vector<double> obs;
    for (std::size_t i = 0; i < col.size(); ++i)
      if (mask[i]) obs.push_back(col[i]);
    if (obs.empty()) return {0.0, 1.0};
    return mean_sd(Eigen::Map<const Eigen::VectorXd>(obs.data(), static_cast<Eigen::Index>(obs.size())));
  }

  Eigen::VectorXd prescale(std::size_t k, const Eigen::Ref<const Eigen::VectorXd>& raw) const {
    return (raw.array() - shift_[k]) / scale_[k];
  }

  // Too few donors for the fit or nothing to fill: pmm_impute reports it.
  PmmResult run_direct(std::size_t target, const std::vector<std::size_t>& cols, const TargetRows& rows,
                       const PmmSettings& settings, Rng& rng, const OlsOptions& ols) const {
    const Eigen::MatrixXd& f = cache_.columns();
    std::vector<Eigen::Index> sel;
    for (std::size_t v : cols) sel.push_back(slot_[v]);
    if (year_slot_ >= 0) sel.push_back(year_slot_);
    for (std::size_t c : rows.countries) sel.push_back(country_slot_[c]);
    Eigen::MatrixXd x(f.rows(), static_cast<Eigen::Index>(sel.size()));
    for (std::size_t j = 0; j < sel.size(); ++j) x.col(static_cast<Eigen::Index>(j)) = f.col(sel[j]);
    return pmm_impute(x, ds_.column(target), ds_.mask(target), settings, rng, ols);
  }

  const PanelDataset& ds_;
  GramCache cache_;
  std::vector<Eigen::Index> slot_;
  std::vector<double> shift_;
  std::vector<double> scale_;
  Eigen::Index year_slot_ = -1;
  std::vector<Eigen::Index> country_slot_;
};

ChainOutput run_chain(const PanelDataset& ds, const Plan& plan, const MiceConfig& config, int chain,
                      const std::atomic<int>& first_failed_chain) {
  Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(chain)));
  ChainOutput out;
  out.columns.resize(ds.variable_count());
  for (std::size_t v = 0; v < ds.variable_count(); ++v)
    out.columns[v].assign(ds.column(v).begin(), ds.column(v).end());

  for (std::size_t v : plan.all_missing) {
    out.failed.insert(v);
    out.failures.push_back({chain, 0, ds.variables()[v].code, UnimputableVariable::Cause::InsufficientData,
                            "no observed values"});
  }
  fill_targets(ds, out.columns, rng, &plan.all_missing);

  ChainState state(ds, plan, out.columns);
  const OlsOptions ols{config.ridge_rescue};
  out.trace.assign(static_cast<std::size_t>(config.iterations),
                   std::vector<std::pair<double, double>>(plan.visit.size(),
                                                          {std::numeric_limits<double>::quiet_NaN(),
                                                           std::numeric_limits<double>::quiet_NaN()}));
  for (int t = 0; t < config.iterations; ++t) {
    if (config.on_failure == FailurePolicy::Abort && first_failed_chain.load() < chain) return out;
    for (std::size_t pos = 0; pos < plan.visit.size(); ++pos) {
      const std::size_t target = plan.visit[pos];
      if (out.failed.count(target)) continue;
      const auto cols = predictor_columns(ds, plan, config, target, out.failed);
      PmmResult step;
      try {
        step = state.step(target, cols, plan.rows[target], config.pmm, rng, ols);
      } catch (const CollinearityError& e) {
        if (config.on_failure == FailurePolicy::Abort)
          throw UnimputableVariable(ds.variables()[target].code, UnimputableVariable::Cause::Collinearity, e.what());
        out.failed.insert(target);
        out.failures.push_back(
            {chain, t, ds.variables()[target].code, UnimputableVariable::Cause::Collinearity, e.what()});
        continue;
      } catch (const InsufficientData& e) {
        if (config.on_failure == FailurePolicy::Abort)
          throw UnimputableVariable(ds.variables()[target].code, UnimputableVariable::Cause::InsufficientData,
                                    e.what());
        out.failed.insert(target);
        out.failures.push_back(
            {chain, t, ds.variables()[target].code, UnimputableVariable::Cause::InsufficientData, e.what()});
        continue;
      }
      auto& col = out.columns[target];
      for (const auto& cell : step.imputed) col[cell.row] = cell.value;
      state.update(target, col);
      out.trace[static_cast<std::size_t>(t)][pos] = {step.stats.imputed_mean, step.stats.imputed_sd};
    }
  }
  return out;
}

}  // namespace

PanelDataset initialize_fill(const PanelDataset& ds, Rng& rng) {
  Columns columns(ds.variable_count());
  for (std::size_t v = 0; v < ds.variable_count(); ++v) columns[v].assign(ds.column(v).begin(), ds.column(v).end());
  fill_targets(ds, columns, rng);
  std::vector<std::vector<std::uint8_t>> masks(ds.variable_count());
  for (std::size_t v = 0; v < ds.variable_count(); ++v) {
    if (ds.variables()[v].role == Role::Target) masks[v].assign(ds.row_count(), 1);
    else masks[v].assign(ds.mask(v).begin(), ds.mask(v).end());
  }
  return PanelDataset(ds.countries(), ds.years(), ds.variables(), ds.rows(), std::move(columns), std::move(masks));
}

ImputationResult run_mice(const PanelDataset& ds, const MiceConfig& config) {
  config.validate();

  Plan plan;
  for (std::size_t v = 0; v < ds.variable_count(); ++v) {
    const auto& meta = ds.variables()[v];
    if (meta.role == Role::Target) {
      plan.targets.push_back(v);
      if (ds.missing_count(v) == ds.row_count() && ds.row_count() > 0) {
        if (config.on_failure == FailurePolicy::Abort)
          throw DataError("variable '" + meta.code + "' has no observed values");
        plan.all_missing.insert(v);
      }
    } else if (meta.role == Role::Auxiliary) {
      if (ds.missing_count(v) != 0) throw IncompleteAuxiliary(meta.code);
      plan.auxiliaries.push_back(v);
    }
  }
  for (const auto& code : visit_order(ds, config.visit_order)) {
    const std::size_t v = ds.variable_index(code);
    if (ds.missing_count(v) > 0 && !plan.all_missing.count(v)) plan.visit.push_back(v);
  }
  plan.use_year = config.predictors.year && ds.years().size() > 1;
  plan.use_countries = config.predictors.country_indicators && ds.countries().size() > 1;
  plan.rows.resize(ds.variable_count());
  for (std::size_t v : plan.visit) {
    auto& r = plan.rows[v];
    const auto mask = ds.mask(v);
    for (std::size_t i = 0; i < mask.size(); ++i) (mask[i] ? r.donors : r.recipients).push_back(static_cast<Eigen::Index>(i));
    if (plan.use_countries) r.countries = indicator_countries(ds, v);
  }

  const int m = config.m;
  std::vector<ChainOutput> outputs(static_cast<std::size_t>(m));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(m));
  std::atomic<int> next{0};
  std::atomic<int> first_failed{std::numeric_limits<int>::max()};

  auto worker = [&] {
    for (;;) {
      const int c = next.fetch_add(1);
      if (c >= m) return;
      if (config.on_failure == FailurePolicy::Abort && first_failed.load() < c) continue;
      try {
        outputs[static_cast<std::size_t>(c)] = run_chain(ds, plan, config, c, first_failed);
      } catch (...) {
        errors[static_cast<std::size_t>(c)] = std::current_exception();
        int current = first_failed.load();
        while (c < current && !first_failed.compare_exchange_weak(current, c)) {
        }
      }
    }
  };
  const int n_workers = std::min(config.workers, m);
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  ImputationResult result;
  result.original = ds;

  std::set<std::size_t> failed_anywhere;
  for (const auto& out : outputs) {
    failed_anywhere.insert(out.failed.begin(), out.failed.end());
    result.failures.insert(result.failures.end(), out.failures.begin(), out.failures.end());
  }
  std::vector<std::size_t> traced_positions;
  std::vector<std::string> traced_codes;
  for (std::size_t pos = 0; pos < plan.visit.size(); ++pos) {
    if (failed_anywhere.count(plan.visit[pos])) continue;
    traced_positions.push_back(pos);
    traced_codes.push_back(ds.variables()[plan.visit[pos]].code);
  }
  result.imputed_variables = traced_codes;
  result.traces = ChainTrace(traced_codes, m, config.iterations);

  result.completed.reserve(static_cast<std::size_t>(m));
  for (int c = 0; c < m; ++c) {
    auto& out = outputs[static_cast<std::size_t>(c)];
    for (int t = 0; t < config.iterations; ++t)
      for (std::size_t j = 0; j < traced_positions.size(); ++j) {
        const auto [mean, sd] = out.trace[static_cast<std::size_t>(t)][traced_positions[j]];
        result.traces.set(c, t, j, mean, sd);
      }
    std::vector<std::vector<std::uint8_t>> masks(ds.variable_count());
    for (std::size_t v = 0; v < ds.variable_count(); ++v) {
      const bool imputed = ds.variables()[v].role == Role::Target && !out.failed.count(v);
      if (imputed) {
        masks[v].assign(ds.row_count(), 1);
      } else {
        masks[v].assign(ds.mask(v).begin(), ds.mask(v).end());
        out.columns[v].assign(ds.column(v).begin(), ds.column(v).end());
      }
    }
    result.completed.emplace_back(ds.countries(), ds.years(), ds.variables(), ds.rows(), std::move(out.columns),
                                  std::move(masks));
  }
  return result;
}

std::string imputation_file_name(int index, int m) {
  const int width = std::max<int>(3, static_cast<int>(std::to_string(m).size()));
  std::string number = std::to_string(index);
  if (static_cast<int>(number.size()) < width) number.insert(0, static_cast<std::size_t>(width) - number.size(), '0');
  return "imp_" + number + ".csv";
}

std::string format_trace_csv(const ChainTrace& trace) {
  std::ostringstream out;
  out << "chain,iteration,variable,mean,sd\n";
  for (int c = 0; c < trace.chains(); ++c)
    for (int t = 0; t < trace.iterations(); ++t)
      for (std::size_t v = 0; v < trace.variables().size(); ++v)
        out << (c + 1) << ',' << (t + 1) << ',' << csv::quote(trace.variables()[v]) << ','
            << csv::format_real(trace.mean(c, t, v)) << ',' << csv::format_real(trace.sd(c, t, v)) << '\n';
  return out.str();
}

std::string format_provenance_csv(const ImputationResult& result) {
  std::ostringstream out;
  out << "country,year,variable,flag\n";
  const auto& ds = result.original;
  for (std::size_t i = 0; i < ds.row_count(); ++i) {
    const auto& key = ds.rows()[i];
    for (std::size_t v = 0; v < ds.variable_count(); ++v)
      out << csv::quote(ds.countries()[key.country]) << ',' << ds.years()[key.year] << ','
          << csv::quote(ds.variables()[v].code) << ',' << to_string(result.provenance(i, v)) << '\n';
  }
  return out.str();
}

std::vector<std::string> write_imputation_result(const ImputationResult& result, const std::filesystem::path& dir,
                                                 std::optional<int> decimals) {
  std::vector<std::string> files;
  const int m = result.m();
  for (int c = 0; c < m; ++c) {
    const std::string name = imputation_file_name(c + 1, m);
    write_wide_csv(result.completed[static_cast<std::size_t>(c)], dir / name, decimals);
    files.push_back(name);
  }
  write_text_file(dir / "provenance.csv", format_provenance_csv(result));
  files.emplace_back("provenance.csv");
  write_text_file(dir / "trace.csv", format_trace_csv(result.traces));
  files.emplace_back("trace.csv");
  return files;
}

}  // namespace panelmi
