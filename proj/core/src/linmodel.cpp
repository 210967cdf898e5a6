#include "panelmi/linmodel.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>

#include "panelmi/error.hpp"

namespace panelmi {

namespace {

struct Factorization {
  Eigen::MatrixXd lower;  // L with L L' = A
  bool ok = false;
  double min_ratio = 0.0;
};

// Blocked LLT, then every pivot L(j,j)^2 is compared against the tolerance.
Factorization cholesky_checked(const Eigen::MatrixXd& a) {
  Factorization f;
  const double max_diag = a.diagonal().maxCoeff();
  if (!(max_diag > 0.0) || !std::isfinite(max_diag)) return f;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) return f;
  f.lower = llt.matrixL();
  const Eigen::VectorXd pivots = f.lower.diagonal().array().square();
  f.min_ratio = pivots.minCoeff() / max_diag;
  f.ok = std::isfinite(f.min_ratio) && f.min_ratio >= kPivotTolerance;
  return f;
}

}  // namespace

Eigen::VectorXd RegressionFit::xtx_inverse_diagonal() const {
  // (X'X)^-1 = L^-T L^-1, so the diagonal is the column norms of L^-1.
  Eigen::MatrixXd linv = Eigen::MatrixXd::Identity(q, q);
  xtx_cholesky.triangularView<Eigen::Lower>().solveInPlace(linv);
  return linv.colwise().squaredNorm().transpose();
}

Eigen::VectorXd RegressionFit::apply_inverse_factor(const Eigen::Ref<const Eigen::VectorXd>& z) const {
  return xtx_cholesky.transpose().triangularView<Eigen::Upper>().solve(z);
}

RegressionFit fit_ols_normal(const Eigen::Ref<const Eigen::MatrixXd>& xtx, const Eigen::Ref<const Eigen::VectorXd>& xty,
                             double yty, Eigen::Index n_obs, const OlsOptions& options) {
  const Eigen::Index q = xtx.rows();
  if (q < 1) throw InsufficientData("regression needs at least one design column");
  if (n_obs <= q)
    throw InsufficientData("regression has " + std::to_string(n_obs) + " rows for " + std::to_string(q) +
                           " parameters");

  Eigen::MatrixXd a = xtx;
  Factorization f = cholesky_checked(a);
  bool ridged = false;
  if (!f.ok && options.ridge_rescue) {
    const double lambda = 1e-6 * a.trace() / static_cast<double>(q);
    a.diagonal().array() += lambda;
    f = cholesky_checked(a);
    ridged = true;
  }
  if (!f.ok) {
    char ratio[32];
    std::snprintf(ratio, sizeof ratio, "%.3g", f.min_ratio);
    throw CollinearityError(std::string("X'X is not positive definite (smallest relative pivot ") + ratio + ")");
  }

  RegressionFit fit;
  fit.n_obs = n_obs;
  fit.q = q;
  fit.ridged = ridged;
  const auto lower = f.lower.triangularView<Eigen::Lower>();
  const Eigen::VectorXd half = lower.solve(xty);
  fit.beta_hat = f.lower.transpose().triangularView<Eigen::Upper>().solve(half);
  // RSS = y'y - 2 b'X'y + b'X'X b; with ridge the last term uses the unridged X'X.
  const double rss = yty - 2.0 * fit.beta_hat.dot(xty) + fit.beta_hat.dot(xtx * fit.beta_hat);
  fit.sigma2_hat = std::max(0.0, rss) / static_cast<double>(n_obs - q);
  fit.xtx_cholesky = std::move(f.lower);
  return fit;
}

RegressionFit fit_ols(const Eigen::Ref<const Eigen::MatrixXd>& design, const Eigen::Ref<const Eigen::VectorXd>& response,
                      const OlsOptions& options) {
  if (design.rows() != response.size()) throw DataError("fit_ols: design and response lengths differ");
  const Eigen::Index n = design.rows();
  const Eigen::Index q = design.cols();
  if (q < 1) throw InsufficientData("regression needs at least one design column");
  if (n <= q)
    throw InsufficientData("regression has " + std::to_string(n) + " rows for " + std::to_string(q) + " parameters");

  Eigen::MatrixXd xtx(q, q);
  xtx.setZero();
  xtx.selfadjointView<Eigen::Lower>().rankUpdate(design.transpose());
  xtx = xtx.selfadjointView<Eigen::Lower>();
  const Eigen::VectorXd xty = design.transpose() * response;
  RegressionFit fit = fit_ols_normal(xtx, xty, response.squaredNorm(), n, options);
  // Recompute RSS from residuals; the expanded form loses precision on near-perfect fits.
  const Eigen::VectorXd resid = response - design * fit.beta_hat;
  fit.sigma2_hat = resid.squaredNorm() / static_cast<double>(n - q);
  // Residuals at rounding level are an exact fit.
  const double y_scale = response.size() ? response.cwiseAbs().maxCoeff() : 0.0;
  if (resid.cwiseAbs().maxCoeff() <= 64.0 * std::numeric_limits<double>::epsilon() * y_scale) fit.sigma2_hat = 0.0;
  return fit;
}

PosteriorDraw draw_posterior(const RegressionFit& fit, Rng& rng) {
  PosteriorDraw draw;
  if (!(fit.sigma2_hat > 0.0)) {
    draw.beta_star = fit.beta_hat;
    draw.sigma_star = 0.0;
    return draw;
  }
  const double df = static_cast<double>(fit.n_obs - fit.q);
  const double g = rng.chi_squared(df);
  draw.sigma_star = std::sqrt(fit.sigma2_hat * df / g);
  Eigen::VectorXd z(fit.q);
  for (Eigen::Index i = 0; i < fit.q; ++i) z(i) = rng.normal();
  const Eigen::VectorXd shift = fit.apply_inverse_factor(z);
  draw.beta_star = fit.beta_hat + draw.sigma_star * shift;
  return draw;
}

Eigen::VectorXd predict(const Eigen::Ref<const Eigen::VectorXd>& beta, const Eigen::Ref<const Eigen::MatrixXd>& design) {
  if (design.cols() != beta.size())
    throw DataError("predict: design has " + std::to_string(design.cols()) + " columns but beta has " +
                    std::to_string(beta.size()));
  return design * beta;
}

}  // namespace panelmi
