#pragma once

#include <Eigen/Dense>
#include <vector>

#include "tlasso/gaussian.hpp"
#include "tlasso/var_model.hpp"

namespace tlasso {

struct TDensityParams {
  double nu = 1.0;
  Eigen::MatrixXd omega;  // inverse scale, SPD

  Eigen::Index dimension() const { return omega.rows(); }
};

struct TlassoFit {
  Eigen::MatrixXd coefficients;
  Eigen::MatrixXd precision;
  double dof = 0.0;         // fixed input or estimated
  Eigen::VectorXd weights;  // final E-step values
  double objective = 0.0;   // weighted penalized negative log-likelihood
  std::vector<double> objective_path;  // objective after each iteration
  // Change in the M-step objective within each iteration, post minus pre,
  // holding that iteration's weights and penalties fixed.  Non-positive up
  // to solver tolerance; the entries of objective_path need not decrease
  // because the weights are refreshed between iterations.
  std::vector<double> objective_drops;
  double lambda = 0.0;
  double gamma = 0.0;
  int iterations = 0;
  bool converged = false;
  bool dof_at_boundary = false;
};

// Log density of the multivariate t with zero location:
// log Gamma((nu+J)/2) - log Gamma(nu/2) - (J/2) log(pi nu)
// + (1/2) log|Omega| - ((nu+J)/2) log(1 + e'Omega e / nu).
double t_log_density(const Eigen::VectorXd& e, const TDensityParams& params);

// Posterior means of the mixing variable: tau_t = (nu+J)/(nu + e_t'Omega e_t).
Eigen::VectorXd e_step_weights(const Eigen::MatrixXd& residuals,
                               const Eigen::MatrixXd& omega, double nu);

// Left-hand side of the degrees-of-freedom estimating equation
// log(nu/2) - digamma(nu/2) + 1 + (1/N) sum(log tau_t - tau_t)
//   + digamma((nu+J)/2) - log((nu+J)/2),
// strictly decreasing in nu for fixed weights.
double nu_equation_lhs(double nu, const Eigen::VectorXd& weights, int dimension);

struct NuSolution {
  double value = 0.0;
  double residual = 0.0;  // lhs at the returned value
  bool at_boundary = false;
};

// Root of nu_equation_lhs on [nu_min, nu_max] by log-grid bracketing and
// bisection; returns the closer bound, flagged, when no sign change exists.
NuSolution solve_nu(const Eigen::VectorXd& weights, int dimension, double nu_min,
                    double nu_max);

// (1/2N) sum_t tau_t e_t'Omega e_t - (1/2) log|Omega|
// + lambda ||B||_1 + gamma ||Omega||_{1,off} with e_t the rows of Y - XB.
double weighted_objective(const Eigen::MatrixXd& response, const Eigen::MatrixXd& design,
                          const Eigen::MatrixXd& coefficients, const Eigen::MatrixXd& omega,
                          const Eigen::VectorXd& weights, double lambda, double gamma);

// EM with known degrees of freedom: alternates the weight update and the
// alternating Gaussian estimator on sqrt(tau)-scaled rows until the weighted
// objective stabilizes.
TlassoFit em_fixed_nu(const PanelMatrix& panel, double nu,
                      const RegularizationParams& params, double epsilon = 1e-6,
                      int max_iterations = 200);

// ECM with estimated degrees of freedom: per iteration one weight update,
// the scaled-data Gaussian estimator, a second weight update on the new
// residuals, and a one-dimensional solve of the dof equation.
TlassoFit ecm_estimate(const PanelMatrix& panel, const RegularizationParams& params,
                       double epsilon = 1e-6, int max_iterations = 200,
                       double dof_min = 0.05, double dof_max = 1000.0);

}  // namespace tlasso
