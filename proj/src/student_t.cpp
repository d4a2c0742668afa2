#include "tlasso/student_t.hpp"

#include <cmath>
#include <limits>

#include "tlasso/errors.hpp"
#include "tlasso/special_functions.hpp"

namespace tlasso {

namespace {

double log_det_spd(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("matrix is not positive definite");
  }
  return 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
}

double l1_off_diagonal(const Eigen::MatrixXd& m) {
  double sum = 0.0;
  for (Eigen::Index a = 0; a < m.rows(); ++a)
    for (Eigen::Index b = 0; b < m.cols(); ++b)
      if (a != b) sum += std::abs(m(a, b));
  return sum;
}

// Stacked [I; ...; I], the B_p = I starting point of the EM iterations.
Eigen::MatrixXd identity_stack(Eigen::Index k, Eigen::Index j) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(k, j);
  for (Eigen::Index r = 0; r < k; ++r) b(r, r % j) = 1.0;
  return b;
}

struct EmState {
  Eigen::MatrixXd coefficients;
  Eigen::MatrixXd precision;
  Eigen::MatrixXd residuals;
};

EmState initial_state(const PanelMatrix& panel) {
  EmState state;
  state.coefficients = identity_stack(panel.design.cols(), panel.series());
  state.precision = Eigen::MatrixXd::Identity(panel.series(), panel.series());
  state.residuals = panel.response - panel.design * state.coefficients;
  return state;
}

// One scaled-data pass of the alternating Gaussian estimator.
GaussianFit weighted_m_step(const PanelMatrix& panel, const Eigen::VectorXd& weights,
                            const RegularizationParams& params,
                            const Eigen::MatrixXd& coef_warm,
                            GaussianWorkspace& workspace) {
  const Eigen::ArrayXd root = weights.array().sqrt();
  const Eigen::MatrixXd scaled_y = panel.response.array().colwise() * root;
  const Eigen::MatrixXd scaled_x = panel.design.array().colwise() * root;
  return gaussian_lasso(scaled_y, scaled_x, params, 1e-6, 100, &coef_warm, nullptr,
                        &workspace);
}

}  // namespace

double t_log_density(const Eigen::VectorXd& e, const TDensityParams& params) {
  const Eigen::Index j = params.dimension();
  if (!(params.nu > 0.0)) {
    throw ParameterError("degrees of freedom must be positive");
  }
  if (params.omega.rows() != params.omega.cols() || e.size() != j) {
    throw DimensionError("residual length does not match the precision matrix");
  }
  const double nu = params.nu;
  const double jd = static_cast<double>(j);
  const double quad = e.dot(params.omega * e);
  return std::lgamma(0.5 * (nu + jd)) - std::lgamma(0.5 * nu) -
         0.5 * jd * std::log(M_PI * nu) + 0.5 * log_det_spd(params.omega) -
         0.5 * (nu + jd) * std::log1p(quad / nu);
}

Eigen::VectorXd e_step_weights(const Eigen::MatrixXd& residuals,
                               const Eigen::MatrixXd& omega, double nu) {
  if (!(nu > 0.0)) {
    throw ParameterError("degrees of freedom must be positive");
  }
  if (omega.rows() != omega.cols() || omega.rows() != residuals.cols()) {
    throw DimensionError("omega dimension does not match the residuals");
  }
  const double jd = static_cast<double>(residuals.cols());
  const Eigen::ArrayXd quad =
      (residuals * omega).cwiseProduct(residuals).rowwise().sum().array();
  return ((nu + jd) / (nu + quad)).matrix();
}

double nu_equation_lhs(double nu, const Eigen::VectorXd& weights, int dimension) {
  if (!(nu > 0.0)) {
    throw ParameterError("degrees of freedom must be positive");
  }
  if (weights.size() < 1 || (weights.array() <= 0.0).any()) {
    throw ParameterError("weights must be positive");
  }
  if (dimension < 1) {
    throw ParameterError("dimension must be at least 1");
  }
  const double jd = static_cast<double>(dimension);
  const double mean_term =
      (weights.array().log() - weights.array()).mean();
  return std::log(0.5 * nu) - digamma(0.5 * nu) + 1.0 + mean_term +
         digamma(0.5 * (nu + jd)) - std::log(0.5 * (nu + jd));
}

NuSolution solve_nu(const Eigen::VectorXd& weights, int dimension, double nu_min,
                    double nu_max) {
  if (!(nu_min > 0.0) || !(nu_max > nu_min)) {
    throw ParameterError("dof search interval must satisfy 0 < nu_min < nu_max");
  }
  auto lhs = [&](double nu) { return nu_equation_lhs(nu, weights, dimension); };

  NuSolution sol;
  const double at_min = lhs(nu_min);
  const double at_max = lhs(nu_max);
  // lhs is strictly decreasing in nu.
  if (at_min <= 0.0) {
    sol.value = nu_min;
    sol.residual = at_min;
    sol.at_boundary = true;
    return sol;
  }
  if (at_max >= 0.0) {
    sol.value = nu_max;
    sol.residual = at_max;
    sol.at_boundary = true;
    return sol;
  }

  // Bracket on a log grid, then bisect.
  const int grid_points = 60;
  double lo = nu_min, hi = nu_max;
  const double log_lo = std::log(nu_min), log_hi = std::log(nu_max);
  double prev_x = nu_min;
  for (int i = 1; i <= grid_points; ++i) {
    const double x = std::exp(log_lo + (log_hi - log_lo) * i / grid_points);
    if (lhs(x) < 0.0) {
      lo = prev_x;
      hi = x;
      break;
    }
    prev_x = x;
  }
  double mid = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    mid = 0.5 * (lo + hi);
    const double val = lhs(mid);
    if (std::abs(val) < 1e-8 || (hi - lo) < 1e-13 * std::max(1.0, hi)) {
      break;
    }
    if (val > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  sol.value = mid;
  sol.residual = lhs(mid);
  sol.at_boundary = false;
  return sol;
}

double weighted_objective(const Eigen::MatrixXd& response, const Eigen::MatrixXd& design,
                          const Eigen::MatrixXd& coefficients, const Eigen::MatrixXd& omega,
                          const Eigen::VectorXd& weights, double lambda, double gamma) {
  if (weights.size() != response.rows()) {
    throw DimensionError("one weight per observation row is required");
  }
  const double n = static_cast<double>(response.rows());
  const Eigen::MatrixXd resid = response - design * coefficients;
  const double trace = (resid * omega)
                           .cwiseProduct(resid)
                           .rowwise()
                           .sum()
                           .dot(weights);
  return 0.5 * trace / n - 0.5 * log_det_spd(omega) +
         lambda * coefficients.cwiseAbs().sum() + gamma * l1_off_diagonal(omega);
}

TlassoFit em_fixed_nu(const PanelMatrix& panel, double nu,
                      const RegularizationParams& params, double epsilon,
                      int max_iterations) {
  if (!(nu > 0.0)) {
    throw ParameterError("degrees of freedom must be positive");
  }
  if (max_iterations < 1) {
    throw ParameterError("max_iterations must be at least 1");
  }
  params.validate();

  EmState state = initial_state(panel);
  TlassoFit fit;
  fit.dof = nu;
  double prev_objective = std::numeric_limits<double>::infinity();
  GaussianWorkspace workspace;

  for (int m = 1; m <= max_iterations; ++m) {
    fit.iterations = m;
    fit.weights = e_step_weights(state.residuals, state.precision, nu);
    const GaussianFit inner =
        weighted_m_step(panel, fit.weights, params, state.coefficients, workspace);
    const double pre_objective =
        weighted_objective(panel.response, panel.design, state.coefficients,
                           state.precision, fit.weights, inner.lambda, inner.gamma);
    state.coefficients = inner.coefficients;
    state.precision = inner.precision;
    state.residuals = panel.response - panel.design * state.coefficients;
    fit.lambda = inner.lambda;
    fit.gamma = inner.gamma;
    fit.objective =
        weighted_objective(panel.response, panel.design, state.coefficients,
                           state.precision, fit.weights, fit.lambda, fit.gamma);
    fit.objective_path.push_back(fit.objective);
    fit.objective_drops.push_back(fit.objective - pre_objective);
    if (m > 1 && std::abs(fit.objective - prev_objective) <=
                     epsilon * std::max(1.0, std::abs(prev_objective))) {
      fit.converged = true;
      break;
    }
    prev_objective = fit.objective;
  }
  fit.coefficients = state.coefficients;
  fit.precision = state.precision;
  return fit;
}

TlassoFit ecm_estimate(const PanelMatrix& panel, const RegularizationParams& params,
                       double epsilon, int max_iterations, double dof_min,
                       double dof_max) {
  if (!(dof_min > 0.0) || dof_max < dof_min) {
    throw ParameterError("dof bounds must satisfy 0 < dof_min <= dof_max");
  }
  if (max_iterations < 1) {
    throw ParameterError("max_iterations must be at least 1");
  }
  params.validate();

  EmState state = initial_state(panel);
  TlassoFit fit;
  fit.dof = std::min(std::max(1000.0, dof_min), dof_max);
  double prev_objective = std::numeric_limits<double>::infinity();
  GaussianWorkspace workspace;

  for (int m = 1; m <= max_iterations; ++m) {
    fit.iterations = m;
    const Eigen::VectorXd tau_half =
        e_step_weights(state.residuals, state.precision, fit.dof);
    const GaussianFit inner =
        weighted_m_step(panel, tau_half, params, state.coefficients, workspace);
    const double pre_objective =
        weighted_objective(panel.response, panel.design, state.coefficients,
                           state.precision, tau_half, inner.lambda, inner.gamma);
    state.coefficients = inner.coefficients;
    state.precision = inner.precision;
    state.residuals = panel.response - panel.design * state.coefficients;
    fit.lambda = inner.lambda;
    fit.gamma = inner.gamma;
    fit.objective_drops.push_back(
        weighted_objective(panel.response, panel.design, state.coefficients,
                           state.precision, tau_half, fit.lambda, fit.gamma) -
        pre_objective);

    fit.weights = e_step_weights(state.residuals, state.precision, fit.dof);
    if (dof_min == dof_max) {
      fit.dof = dof_min;
      fit.dof_at_boundary = true;
    } else {
      const NuSolution sol =
          solve_nu(fit.weights, static_cast<int>(panel.series()), dof_min, dof_max);
      fit.dof = sol.value;
      fit.dof_at_boundary = sol.at_boundary;
    }

    fit.objective =
        weighted_objective(panel.response, panel.design, state.coefficients,
                           state.precision, fit.weights, fit.lambda, fit.gamma);
    fit.objective_path.push_back(fit.objective);
    if (m > 1 && std::abs(fit.objective - prev_objective) <=
                     epsilon * std::max(1.0, std::abs(prev_objective))) {
      fit.converged = true;
      break;
    }
    prev_objective = fit.objective;
  }
  fit.coefficients = state.coefficients;
  fit.precision = state.precision;
  return fit;
}

}  // namespace tlasso
