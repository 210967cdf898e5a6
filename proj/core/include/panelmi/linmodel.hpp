#pragma once

#include <Eigen/Dense>

#include "panelmi/random.hpp"

namespace panelmi {

/// Relative Cholesky pivot tolerance: X'X is treated as singular when a pivot
/// falls below this fraction of its largest diagonal entry.
inline constexpr double kPivotTolerance = 1e-10;

struct OlsOptions {
  /// On a failed pivot check, add lambda*I with lambda = 1e-6 * trace(X'X) / q and retry once.
  bool ridge_rescue = false;
};

/// Least-squares fit with what the posterior draw needs.
struct RegressionFit {
  Eigen::VectorXd beta_hat;
  double sigma2_hat = 0.0;  ///< RSS / (n - q)
  /// Lower Cholesky factor L of X'X (L L' = X'X).
  Eigen::MatrixXd xtx_cholesky;
  Eigen::Index n_obs = 0;
  Eigen::Index q = 0;
  bool ridged = false;

  /// Diagonal of (X'X)^-1.
  Eigen::VectorXd xtx_inverse_diagonal() const;
  /// U z with U = L^-T, so that U U' = (X'X)^-1.
  Eigen::VectorXd apply_inverse_factor(const Eigen::Ref<const Eigen::VectorXd>& z) const;
};

struct PosteriorDraw {
  Eigen::VectorXd beta_star;
  double sigma_star = 0.0;
};

/// Normal equations solved through a Cholesky factorization of X'X.
/// Throws InsufficientData when n <= q and CollinearityError when the pivot check fails.
RegressionFit fit_ols(const Eigen::Ref<const Eigen::MatrixXd>& design, const Eigen::Ref<const Eigen::VectorXd>& response,
                      const OlsOptions& options = {});

/// Same as fit_ols but starts from a precomputed X'X, X'y and y'y.
RegressionFit fit_ols_normal(const Eigen::Ref<const Eigen::MatrixXd>& xtx, const Eigen::Ref<const Eigen::VectorXd>& xty,
                             double yty, Eigen::Index n_obs, const OlsOptions& options = {});

/// Draw under the noninformative prior:
///   sigma*^2 = sigma2_hat (n - q) / g,  g ~ chi2(n - q)
///   beta*    = beta_hat + sigma* U z,  z ~ N(0, I)
/// With sigma2_hat == 0 the draw is (beta_hat, 0) and consumes no randomness.
PosteriorDraw draw_posterior(const RegressionFit& fit, Rng& rng);

/// design * beta. Throws DataError on a dimension mismatch.
Eigen::VectorXd predict(const Eigen::Ref<const Eigen::VectorXd>& beta, const Eigen::Ref<const Eigen::MatrixXd>& design);

}  // namespace panelmi
