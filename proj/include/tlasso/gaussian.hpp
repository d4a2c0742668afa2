#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "tlasso/var_model.hpp"

namespace tlasso {

// Penalty configuration for the alternating estimator. Resolution order for
// each of lambda and gamma: a non-empty grid is searched by BIC; otherwise a
// nonnegative fixed value is used directly; a negative sentinel requests a
// data-driven grid searched by BIC.
//
// With fixed penalties and gamma > 0 the omega step loads the residual
// covariance diagonal with a ridge, following a short continuation path from
// ridge_start down to ridge. The loading keeps the covariance well
// conditioned when a few rows carry most of the weight; it is skipped when
// gamma is zero, where the covariance is inverted exactly.
struct RegularizationParams {
  double lambda = 1e-3;
  double gamma = 0.1;
  std::vector<double> lambda_grid;  // strictly descending, all > 0
  std::vector<double> gamma_grid;   // strictly descending, all > 0
  double ridge_start = 0.2;
  double ridge = 0.0125;

  void validate() const;
};

struct GaussianFit {
  Eigen::MatrixXd coefficients;  // (J*P) x J stacked transposed lag matrices
  Eigen::MatrixXd precision;     // J x J
  double objective = 0.0;        // penalized negative log-likelihood, 1/(2N)
                                 // scale, plus the ridge term while active
  std::vector<double> objective_path;  // one entry per outer iteration
  double lambda = 0.0;           // chosen penalties
  double gamma = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Unpenalized least squares: B = (X'X)^{-1} X'Y, Omega = inverse residual
// covariance. Throws SingularDesignError when X is rank deficient.
GaussianFit ls_estimate(const PanelMatrix& panel);

// Coordinate-descent lasso for B given Omega: minimizes
// (1/2N) tr[(Y-XB) Omega (Y-XB)'] + lambda * sum |B_kj|.
Eigen::MatrixXd b_step(const PanelMatrix& panel, const Eigen::MatrixXd& omega,
                       double lambda);
Eigen::MatrixXd b_step(const Eigen::MatrixXd& response, const Eigen::MatrixXd& design,
                       const Eigen::MatrixXd& omega, double lambda,
                       const Eigen::MatrixXd* warm_start = nullptr);

// Graphical lasso for Omega given residuals: minimizes
// (1/2N) tr[E Omega E'] - (1/2) log|Omega| + gamma * sum_{i != j} |omega_ij|.
Eigen::MatrixXd omega_step(const Eigen::MatrixXd& residuals, double gamma);

// Same solver on a precomputed covariance: minimizes
// (1/2)[tr(S Omega) - log|Omega|] + gamma * sum_{i != j} |omega_ij|,
// the standard graphical lasso with off-diagonal penalty rho = 2 * gamma.
Eigen::MatrixXd graphical_lasso(const Eigen::MatrixXd& sample_cov, double gamma);

// -2 * loglik + df * log(n).
double bic(double loglik, int df, double n);

// The joint penalized objective (1/2N) tr[(Y-XB) Omega (Y-XB)'] -
// (1/2) log|Omega| + lambda ||B||_1 + gamma ||Omega||_{1,off}.
double joint_objective(const Eigen::MatrixXd& response, const Eigen::MatrixXd& design,
                       const Eigen::MatrixXd& coefficients, const Eigen::MatrixXd& omega,
                       double lambda, double gamma);

// 20 log-spaced points from lambda_max down three decades, where lambda_max
// is the smallest lambda zeroing every coefficient at Omega = I.
std::vector<double> default_lambda_grid(const Eigen::MatrixXd& response,
                                        const Eigen::MatrixXd& design);
// 10 log-spaced points from the largest off-diagonal |S_ij| down two decades.
std::vector<double> default_gamma_grid(const Eigen::MatrixXd& sample_cov);

// Carries per-grid-point warm starts between gaussian_lasso calls on related
// problems (successive M-steps reweight the same panel). Purely an
// accelerator: results match a cold call up to solver tolerance.
struct GaussianWorkspace {
  GaussianWorkspace();
  ~GaussianWorkspace();
  GaussianWorkspace(GaussianWorkspace&&) noexcept;
  GaussianWorkspace& operator=(GaussianWorkspace&&) noexcept;

  struct Impl;
  std::unique_ptr<Impl> impl;
};

// Alternating estimation of (B, Omega). With fixed penalties: b_step /
// omega_step pairs along the ridge continuation path, each leg stopping when
// the relative objective change drops below epsilon and the coefficients are
// stable; max_iterations applies per leg. With grids: BIC selection of the
// penalties each outer iteration at exact (unridged) covariances.
GaussianFit gaussian_lasso(const PanelMatrix& panel, const RegularizationParams& params,
                           double epsilon = 1e-6, int max_iterations = 100);
GaussianFit gaussian_lasso(const Eigen::MatrixXd& response, const Eigen::MatrixXd& design,
                           const RegularizationParams& params, double epsilon = 1e-6,
                           int max_iterations = 100,
                           const Eigen::MatrixXd* coef_init = nullptr,
                           const Eigen::MatrixXd* omega_init = nullptr,
                           GaussianWorkspace* workspace = nullptr);

}  // namespace tlasso
