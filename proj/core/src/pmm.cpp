#include "panelmi/pmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "panelmi/error.hpp"

namespace panelmi {

std::string_view to_string(MatchType m) noexcept {
  switch (m) {
    case MatchType::BothStar: return "both-star";
    case MatchType::ObservedHatMissingStar: return "observed-hat-missing-star";
  }
  return "?";
}

MatchType parse_match_type(std::string_view text) {
  if (text == "both-star" || text == "BothStar") return MatchType::BothStar;
  if (text == "observed-hat-missing-star" || text == "ObservedHatMissingStar") return MatchType::ObservedHatMissingStar;
  throw ConfigError("unknown match type '" + std::string(text) + "'");
}

namespace {

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

template <class Range>
MeanSd mean_sd(const Range& values, std::size_t n) {
  MeanSd out;
  if (n == 0) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(n);
  if (n < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.sd = std::sqrt(ss / static_cast<double>(n - 1));
  return out;
}

}  // namespace

namespace {

void check_pool(Eigen::Index n_donors, Eigen::Index q) {
  if (n_donors < q + 2)
    throw InsufficientData(std::to_string(n_donors) + " observed rows for " + std::to_string(q) +
                           " parameters (need q + 2)");
}

PmmResult no_recipients(std::span<const double> target) {
  PmmResult result;
  auto s = mean_sd(target, target.size());
  result.stats.column_mean = s.mean;
  result.stats.column_sd = s.sd;
  return result;
}

}  // namespace

PmmResult pmm_from_normal_equations(const NormalEquations& ne, const RowPredictor& predict_rows,
                                    std::span<const double> target, std::span<const std::uint8_t> observed,
                                    const PmmSettings& settings, Rng& rng, const OlsOptions& ols) {
  if (observed.size() != target.size()) throw DataError("pmm: target and mask lengths differ");
  if (settings.k < 1) throw ConfigError("donor pool size k must be at least 1");
  const auto n = static_cast<Eigen::Index>(target.size());
  std::vector<Eigen::Index> donors, recipients;
  for (Eigen::Index i = 0; i < n; ++i) (observed[i] ? donors : recipients).push_back(i);
  if (recipients.empty()) return no_recipients(target);

  const Eigen::Index q = ne.xtx.rows();
  const auto n_donors = static_cast<Eigen::Index>(donors.size());
  check_pool(n_donors, q);

  RegressionFit fit = fit_ols_normal(ne.xtx, ne.xty, ne.yty, n_donors, ols);
  // Residual variance from the residuals; the expanded form loses precision on near-perfect fits.
  const Eigen::VectorXd hat = predict_rows(fit.beta_hat);
  if (hat.size() != n) throw DataError("pmm: row predictor returned the wrong length");
  double rss = 0.0;
  double max_resid = 0.0;
  double y_scale = 0.0;
  for (Eigen::Index d : donors) {
    const double r = target[d] - hat(d);
    rss += r * r;
    max_resid = std::max(max_resid, std::abs(r));
    y_scale = std::max(y_scale, std::abs(target[d]));
  }
  fit.sigma2_hat = rss / static_cast<double>(n_donors - q);
  // Residuals at rounding level are an exact fit.
  if (max_resid <= 64.0 * std::numeric_limits<double>::epsilon() * y_scale) fit.sigma2_hat = 0.0;
  const PosteriorDraw draw = draw_posterior(fit, rng);

  const Eigen::VectorXd star = predict_rows(draw.beta_star);
  const Eigen::VectorXd& donor_source = settings.match_type == MatchType::BothStar ? star : hat;
  Eigen::VectorXd donor_pred(n_donors);
  for (Eigen::Index r = 0; r < n_donors; ++r) donor_pred(r) = donor_source(donors[r]);

  // Donors sorted by (prediction, row) so that k-nearest is a contiguous window.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n_donors));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return donor_pred(a) < donor_pred(b); });
  std::vector<double> sorted_pred(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) sorted_pred[i] = donor_pred(order[i]);

  PmmResult result;
  const auto pool_size = static_cast<std::ptrdiff_t>(std::min<Eigen::Index>(settings.k, n_donors));
  const auto total = static_cast<std::ptrdiff_t>(sorted_pred.size());
  result.imputed.reserve(recipients.size());
  for (Eigen::Index rec : recipients) {
    const double y = star(rec);
    std::ptrdiff_t hi = std::lower_bound(sorted_pred.begin(), sorted_pred.end(), y) - sorted_pred.begin();
    std::ptrdiff_t lo = hi - 1;
    double kth = 0.0;
    for (std::ptrdiff_t taken = 0; taken < pool_size; ++taken) {
      const double dl = lo >= 0 ? y - sorted_pred[lo] : std::numeric_limits<double>::infinity();
      const double dr = hi < total ? sorted_pred[hi] - y : std::numeric_limits<double>::infinity();
      if (dl <= dr) {
        kth = dl;
        --lo;
      } else {
        kth = dr;
        ++hi;
      }
    }
    while (lo >= 0 && y - sorted_pred[lo] == kth) --lo;
    while (hi < total && sorted_pred[hi] - y == kth) ++hi;
    const std::size_t window = static_cast<std::size_t>(hi - lo - 1);
    const std::size_t pick = static_cast<std::size_t>(lo + 1) + rng.index(window);
    const Eigen::Index donor_row = donors[order[pick]];
    result.imputed.push_back({static_cast<std::size_t>(rec), target[donor_row]});
  }

  std::vector<double> filled(target.begin(), target.end());
  std::vector<double> imputed_values;
  imputed_values.reserve(result.imputed.size());
  for (const auto& cell : result.imputed) {
    filled[cell.row] = cell.value;
    imputed_values.push_back(cell.value);
  }
  const auto col = mean_sd(filled, filled.size());
  const auto imp = mean_sd(imputed_values, imputed_values.size());
  result.stats = {col.mean, col.sd, imp.mean, imp.sd};
  return result;
}

PmmResult pmm_impute(const Eigen::Ref<const Eigen::MatrixXd>& predictors, std::span<const double> target,
                     std::span<const std::uint8_t> observed, const PmmSettings& settings, Rng& rng,
                     const OlsOptions& ols) {
  const auto n = static_cast<Eigen::Index>(target.size());
  if (predictors.rows() != n || observed.size() != target.size())
    throw DataError("pmm_impute: predictor, target and mask lengths differ");
  if (settings.k < 1) throw ConfigError("donor pool size k must be at least 1");

  std::vector<Eigen::Index> donors;
  for (Eigen::Index i = 0; i < n; ++i)
    if (observed[i]) donors.push_back(i);
  const auto n_donors = static_cast<Eigen::Index>(donors.size());
  if (n_donors == n) return no_recipients(target);

  const Eigen::Index p = predictors.cols();
  const Eigen::Index q = p + 1;
  check_pool(n_donors, q);

  // Design: intercept plus predictors centred and scaled on donor rows.
  Eigen::MatrixXd design(n, q);
  design.col(0).setOnes();
  for (Eigen::Index j = 0; j < p; ++j) {
    double mean = 0.0;
    for (Eigen::Index d : donors) mean += predictors(d, j);
    mean /= static_cast<double>(n_donors);
    double ss = 0.0;
    for (Eigen::Index d : donors) ss += (predictors(d, j) - mean) * (predictors(d, j) - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n_donors));
    const double scale = sd > 0.0 ? 1.0 / sd : 1.0;
    design.col(j + 1) = (predictors.col(j).array() - mean) * scale;
  }

  Eigen::MatrixXd x_obs(n_donors, q);
  Eigen::VectorXd y_obs(n_donors);
  for (Eigen::Index r = 0; r < n_donors; ++r) {
    x_obs.row(r) = design.row(donors[r]);
    y_obs(r) = target[donors[r]];
  }
  NormalEquations ne;
  ne.xtx = Eigen::MatrixXd::Zero(q, q);
  ne.xtx.selfadjointView<Eigen::Lower>().rankUpdate(x_obs.transpose());
  ne.xtx = ne.xtx.selfadjointView<Eigen::Lower>();
  ne.xty = x_obs.transpose() * y_obs;
  ne.yty = y_obs.squaredNorm();
  return pmm_from_normal_equations(
      ne, [&](const Eigen::VectorXd& beta) { return predict(beta, design); }, target, observed, settings, rng, ols);
}

PmmResult impute_variable_pmm(const PanelDataset& current, std::string_view target,
                              std::span<const std::string> predictors, const PmmSettings& settings, Rng& rng,
                              const OlsOptions& ols) {
  const std::size_t t = current.variable_index(target);
  const auto n = static_cast<Eigen::Index>(current.row_count());
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(predictors.size()));
  for (std::size_t j = 0; j < predictors.size(); ++j) {
    const std::size_t v = current.variable_index(predictors[j]);
    if (v == t) throw DataError("target '" + std::string(target) + "' listed as its own predictor");
    if (current.missing_count(v) != 0)
      throw DataError("predictor '" + predictors[j] + "' has missing cells in the working copy");
    const auto col = current.column(v);
    for (Eigen::Index i = 0; i < n; ++i) x(i, static_cast<Eigen::Index>(j)) = col[i];
  }
  try {
    return pmm_impute(x, current.column(t), current.mask(t), settings, rng, ols);
  } catch (const CollinearityError& e) {
    throw CollinearityError(std::string(target) + ": " + e.what(), std::string(target));
  } catch (const InsufficientData& e) {
    throw InsufficientData(std::string(target) + ": " + e.what(), std::string(target));
  }
}

}  // namespace panelmi
