#include "tlasso/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tlasso/errors.hpp"

namespace tlasso {

namespace {

constexpr double kCoordinateTol = 1e-10;
constexpr double kDiagonalFloor = 1e-12;

double soft_threshold(double x, double threshold) {
  if (x > threshold) return x - threshold;
  if (x < -threshold) return x + threshold;
  return 0.0;
}

void check_grid(const std::vector<double>& grid, const char* name) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i])) {
      throw ParameterError(std::string(name) + " grid entries must be positive and finite");
    }
    if (i > 0 && !(grid[i] < grid[i - 1])) {
      throw ParameterError(std::string(name) + " grid must be strictly descending");
    }
  }
}

double log_det_spd(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("matrix is not positive definite");
  }
  return 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
}

// One coordinate-descent sweep over B for
// (1/2N) tr[(Y-XB) Omega (Y-XB)'] + lambda ||B||_1, given gram = X'X,
// cross = X'Y and gram_b = gram * B maintained incrementally.
double cd_sweep(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& cross,
                const Eigen::MatrixXd& omega, double lambda, double n,
                Eigen::MatrixXd& b, Eigen::MatrixXd& gram_b, bool active_only) {
  const Eigen::Index kd = gram.rows();
  const Eigen::Index jd = omega.rows();
  double max_delta = 0.0;
  for (Eigen::Index k = 0; k < kd; ++k) {
    for (Eigen::Index j = 0; j < jd; ++j) {
      const double cur = b(k, j);
      if (active_only && cur == 0.0) continue;
      const double q = gram(k, k) * omega(j, j) / n;
      if (!(q > 0.0)) {
        if (cur != 0.0) {
          gram_b.col(j) -= gram.col(k) * cur;
          b(k, j) = 0.0;
        }
        continue;
      }
      const double grad = (cross.row(k) - gram_b.row(k)).dot(omega.col(j)) / n;
      const double candidate = cur + grad / q;
      const double next = soft_threshold(candidate, lambda / q);
      const double delta = next - cur;
      if (delta != 0.0) {
        b(k, j) = next;
        gram_b.col(j) += gram.col(k) * delta;
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
  }
  return max_delta;
}

// Solves the KKT system restricted to the current support with signs taken
// from b, then steps toward that solution, stopping at the first sign flip.
// Plain coordinate descent crawls when the weighted gram is dominated by a
// few heavy rows; this jump is exact on the identified support.
bool active_set_jump(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& cross,
                     const Eigen::MatrixXd& omega, double lambda, double n,
                     Eigen::MatrixXd& b, Eigen::MatrixXd& gram_b) {
  std::vector<Eigen::Index> rows, cols;
  for (Eigen::Index k = 0; k < b.rows(); ++k)
    for (Eigen::Index j = 0; j < b.cols(); ++j)
      if (b(k, j) != 0.0) {
        rows.push_back(k);
        cols.push_back(j);
      }
  const std::size_t na = rows.size();
  if (na == 0 || na > 2000) return false;

  Eigen::MatrixXd a(na, na);
  Eigen::VectorXd rhs(na);
  const Eigen::MatrixXd cross_omega = cross * omega;
  for (std::size_t p = 0; p < na; ++p) {
    for (std::size_t q = 0; q < na; ++q) {
      a(p, q) = gram(rows[p], rows[q]) * omega(cols[p], cols[q]) / n;
    }
    const double sign = b(rows[p], cols[p]) > 0.0 ? 1.0 : -1.0;
    rhs(p) = cross_omega(rows[p], cols[p]) / n - lambda * sign;
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success) return false;
  Eigen::VectorXd z = ldlt.solve(rhs);
  z += ldlt.solve(rhs - a * z);
  if (!z.allFinite()) return false;

  // Largest step toward z that keeps every sign; crossers land exactly at 0.
  double step = 1.0;
  for (std::size_t p = 0; p < na; ++p) {
    const double cur = b(rows[p], cols[p]);
    if (cur * z(p) < 0.0 || z(p) == 0.0) {
      step = std::min(step, cur / (cur - z(p)));
    }
  }
  if (!(step > 0.0)) return false;

  bool moved = false;
  for (std::size_t p = 0; p < na; ++p) {
    const double cur = b(rows[p], cols[p]);
    double next = step == 1.0 ? z(p) : cur + step * (z(p) - cur);
    if (cur * z(p) < 0.0 || z(p) == 0.0) {
      if (std::abs(next) <= 1e-14 * std::max(1.0, std::abs(cur))) next = 0.0;
    }
    const double delta = next - cur;
    if (delta != 0.0) {
      b(rows[p], cols[p]) = next;
      gram_b.col(cols[p]) += gram.col(rows[p]) * delta;
      moved = true;
    }
  }
  return moved;
}

Eigen::MatrixXd cd_lasso(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& cross,
                         const Eigen::MatrixXd& omega, double lambda, double n,
                         Eigen::MatrixXd b) {
  Eigen::MatrixXd gram_b = gram * b;
  const int sweep_cap = 10000;
  int sweeps = 0;
  while (sweeps < sweep_cap) {
    const double full_delta = cd_sweep(gram, cross, omega, lambda, n, b, gram_b, false);
    ++sweeps;
    if (full_delta <= kCoordinateTol) break;
    while (sweeps < sweep_cap) {
      active_set_jump(gram, cross, omega, lambda, n, b, gram_b);
      const double active_delta = cd_sweep(gram, cross, omega, lambda, n, b, gram_b, true);
      ++sweeps;
      if (active_delta <= kCoordinateTol) break;
    }
  }
  return b;
}

// Exact minimizer of (1/2) z' Va z - rhs' z on the current support with the
// current signs, damped to the first sign flip. Same acceleration as
// active_set_jump: coordinate descent identifies the support fast but crawls
// on the values when V is badly conditioned.
void subproblem_jump(const Eigen::MatrixXd& v, const Eigen::VectorXd& u, double rho,
                     Eigen::VectorXd& beta, Eigen::VectorXd& v_beta) {
  std::vector<Eigen::Index> act;
  for (Eigen::Index k = 0; k < beta.size(); ++k)
    if (beta(k) != 0.0) act.push_back(k);
  const std::size_t na = act.size();
  if (na == 0) return;

  Eigen::MatrixXd va(na, na);
  Eigen::VectorXd rhs(na);
  for (std::size_t p = 0; p < na; ++p) {
    for (std::size_t q = 0; q < na; ++q) va(p, q) = v(act[p], act[q]);
    rhs(p) = u(act[p]) - rho * (beta(act[p]) > 0.0 ? 1.0 : -1.0);
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(va);
  if (ldlt.info() != Eigen::Success) return;
  Eigen::VectorXd z = ldlt.solve(rhs);
  z += ldlt.solve(rhs - va * z);
  if (!z.allFinite()) return;

  double step = 1.0;
  for (std::size_t p = 0; p < na; ++p) {
    const double cur = beta(act[p]);
    if (cur * z(p) < 0.0 || z(p) == 0.0) step = std::min(step, cur / (cur - z(p)));
  }
  if (!(step > 0.0)) return;

  for (std::size_t p = 0; p < na; ++p) {
    const double cur = beta(act[p]);
    double next = step == 1.0 ? z(p) : cur + step * (z(p) - cur);
    if ((cur * z(p) < 0.0 || z(p) == 0.0) &&
        std::abs(next) <= 1e-14 * std::max(1.0, std::abs(cur))) {
      next = 0.0;
    }
    beta(act[p]) = next;
  }
  v_beta = v * beta;
}

// Coordinate descent for (1/2) beta' V beta - u' beta + rho ||beta||_1.
void glasso_subproblem(const Eigen::MatrixXd& v, const Eigen::VectorXd& u, double rho,
                       Eigen::VectorXd& beta) {
  Eigen::VectorXd v_beta = v * beta;
  const double tol = 1e-12 * std::max(1.0, u.cwiseAbs().maxCoeff());
  for (int sweep = 0; sweep < 1000; ++sweep) {
    double max_delta = 0.0;
    for (Eigen::Index k = 0; k < beta.size(); ++k) {
      const double vkk = v(k, k);
      if (!(vkk > 0.0)) {
        if (beta(k) != 0.0) {
          v_beta -= v.col(k) * beta(k);
          beta(k) = 0.0;
        }
        continue;
      }
      const double partial = u(k) - (v_beta(k) - vkk * beta(k));
      const double next = soft_threshold(partial, rho) / vkk;
      const double delta = next - beta(k);
      if (delta != 0.0) {
        beta(k) = next;
        v_beta += v.col(k) * delta;
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
    if (max_delta <= tol) break;
    subproblem_jump(v, u, rho, beta, v_beta);
  }
}

struct GlassoState {
  Eigen::MatrixXd w;     // working covariance estimate
  Eigen::MatrixXd beta;  // (J-1) column coefficients per target column
  bool initialized = false;
};

Eigen::MatrixXd recover_precision(const Eigen::MatrixXd& w, const Eigen::MatrixXd& beta) {
  const Eigen::Index j = w.rows();
  Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(j, j);
  for (Eigen::Index col = 0; col < j; ++col) {
    double dot = 0.0;
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < j; ++i) {
      if (i == col) continue;
      dot += w(i, col) * beta(r++, col);
    }
    const double denom = w(col, col) - dot;
    if (!(denom > 0.0)) {
      throw NumericalError("graphical lasso produced a non-positive partial variance");
    }
    const double t22 = 1.0 / denom;
    theta(col, col) = t22;
    r = 0;
    for (Eigen::Index i = 0; i < j; ++i) {
      if (i == col) continue;
      theta(i, col) = -beta(r++, col) * t22;
    }
  }
  return 0.5 * (theta + theta.transpose().eval());
}

double duality_gap(const Eigen::MatrixXd& s, const Eigen::MatrixXd& theta, double rho) {
  const Eigen::Index j = s.rows();
  double l1_off = 0.0;
  for (Eigen::Index a = 0; a < j; ++a)
    for (Eigen::Index b = 0; b < j; ++b)
      if (a != b) l1_off += std::abs(theta(a, b));
  return (s * theta).trace() + rho * l1_off - static_cast<double>(j);
}

Eigen::MatrixXd glasso_run(const Eigen::MatrixXd& s, double rho, GlassoState& state) {
  const Eigen::Index j = s.rows();
  const double w_tol = 1e-11 * std::max(1.0, s.cwiseAbs().mean());
  const int pass_cap = 500;
  Eigen::MatrixXd v(j - 1, j - 1);
  Eigen::VectorXd u(j - 1);
  Eigen::VectorXd beta(j - 1);

  for (int pass = 0; pass < pass_cap; ++pass) {
    double w_change = 0.0;
    for (Eigen::Index col = 0; col < j; ++col) {
      Eigen::Index r = 0;
      for (Eigen::Index a = 0; a < j; ++a) {
        if (a == col) continue;
        u(r) = s(a, col);
        Eigen::Index c = 0;
        for (Eigen::Index b = 0; b < j; ++b) {
          if (b == col) continue;
          v(r, c++) = state.w(a, b);
        }
        ++r;
      }
      if (Eigen::LLT<Eigen::MatrixXd>(v).info() != Eigen::Success) {
        throw NumericalError("graphical lasso working matrix lost positive definiteness");
      }
      beta = state.beta.col(col);
      glasso_subproblem(v, u, rho, beta);
      const Eigen::VectorXd w12 = v * beta;
      r = 0;
      for (Eigen::Index a = 0; a < j; ++a) {
        if (a == col) continue;
        w_change = std::max(w_change, std::abs(state.w(a, col) - w12(r)));
        state.w(a, col) = w12(r);
        state.w(col, a) = w12(r);
        ++r;
      }
      state.beta.col(col) = beta;
    }
    if (w_change <= w_tol) {
      const Eigen::MatrixXd theta = recover_precision(state.w, state.beta);
      if (std::abs(duality_gap(s, theta, rho)) <= 1e-6 &&
          Eigen::LLT<Eigen::MatrixXd>(theta).info() == Eigen::Success) {
        return theta;
      }
    } else if (pass >= 1) {
      try {
        const Eigen::MatrixXd theta = recover_precision(state.w, state.beta);
        if (std::abs(duality_gap(s, theta, rho)) <= 1e-8 &&
            Eigen::LLT<Eigen::MatrixXd>(theta).info() == Eigen::Success) {
          return theta;
        }
      } catch (const NumericalError&) {
        // (W, beta) not yet jointly recoverable; keep iterating.
      }
    }
  }
  const Eigen::MatrixXd theta = recover_precision(state.w, state.beta);
  if (std::abs(duality_gap(s, theta, rho)) <= 1e-4 &&
      Eigen::LLT<Eigen::MatrixXd>(theta).info() == Eigen::Success) {
    return theta;
  }
  throw NumericalError("graphical lasso failed to converge");
}

Eigen::MatrixXd glasso_solve(const Eigen::MatrixXd& sample_cov, double rho,
                             GlassoState& state) {
  const Eigen::Index j = sample_cov.rows();
  Eigen::MatrixXd s = sample_cov;
  for (Eigen::Index i = 0; i < j; ++i) s(i, i) = std::max(s(i, i), kDiagonalFloor);

  // A stale W warm start (off-diagonals from the previous, similarly scaled
  // sample covariance) usually lands within a few passes, but nothing keeps
  // it positive definite for the new data; any failure restarts from W = S,
  // which the blockwise updates do keep positive definite.
  const bool have_warm = state.initialized && state.w.rows() == j;
  if (!state.initialized) {
    state.beta = Eigen::MatrixXd::Zero(j - 1, j);
    state.initialized = true;
  }
  if (have_warm) {
    for (Eigen::Index i = 0; i < j; ++i) state.w(i, i) = s(i, i);
    if (Eigen::LLT<Eigen::MatrixXd>(state.w).info() == Eigen::Success) {
      const Eigen::MatrixXd beta_in = state.beta;
      try {
        return glasso_run(s, rho, state);
      } catch (const NumericalError&) {
        state.beta = beta_in;
      }
    }
  }
  state.w = s;
  return glasso_run(s, rho, state);
}

Eigen::MatrixXd invert_spd(const Eigen::MatrixXd& s) {
  Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("covariance matrix is singular or indefinite");
  }
  Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(s.rows(), s.cols()));
  return 0.5 * (inv + inv.transpose().eval());
}

int count_nonzero(const Eigen::MatrixXd& m) {
  return static_cast<int>((m.array() != 0.0).count());
}

int count_nonzero_lower(const Eigen::MatrixXd& m) {
  int count = 0;
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = c + 1; r < m.rows(); ++r)
      if (m(r, c) != 0.0) ++count;
  return count;
}

std::vector<double> log_spaced(double top, double decades, int points) {
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) {
    grid[i] = top * std::pow(10.0, -decades * i / (points - 1));
  }
  return grid;
}

std::vector<double> resolve_grid(const std::vector<double>& grid, double fixed,
                                 const std::vector<double>& fallback) {
  if (!grid.empty()) return grid;
  if (fixed >= 0.0) return {fixed};
  return fallback;
}

}  // namespace

void RegularizationParams::validate() const {
  check_grid(lambda_grid, "lambda");
  check_grid(gamma_grid, "gamma");
  if (lambda_grid.empty() && lambda >= 0.0 && !std::isfinite(lambda)) {
    throw ParameterError("fixed lambda must be finite");
  }
  if (gamma_grid.empty() && gamma >= 0.0 && !std::isfinite(gamma)) {
    throw ParameterError("fixed gamma must be finite");
  }
}

GaussianFit ls_estimate(const PanelMatrix& panel) {
  const Eigen::MatrixXd& y = panel.response;
  const Eigen::MatrixXd& x = panel.design;
  const Eigen::Index n = y.rows();
  const Eigen::Index kd = x.cols();
  if (n <= kd) {
    throw SingularDesignError("least squares needs more rows than regressors");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < kd) {
    throw SingularDesignError("design matrix is rank deficient");
  }
  GaussianFit fit;
  fit.coefficients = qr.solve(y);
  const Eigen::MatrixXd resid = y - x * fit.coefficients;
  const Eigen::MatrixXd s = resid.transpose() * resid / static_cast<double>(n);
  fit.precision = invert_spd(s);
  fit.objective = joint_objective(y, x, fit.coefficients, fit.precision, 0.0, 0.0);
  fit.lambda = 0.0;
  fit.gamma = 0.0;
  fit.iterations = 1;
  fit.converged = true;
  return fit;
}

Eigen::MatrixXd b_step(const Eigen::MatrixXd& response, const Eigen::MatrixXd& design,
                       const Eigen::MatrixXd& omega, double lambda,
                       const Eigen::MatrixXd* warm_start) {
  if (design.rows() != response.rows()) {
    throw DimensionError("response and design row counts differ");
  }
  if (omega.rows() != omega.cols() || omega.rows() != response.cols()) {
    throw DimensionError("omega dimension does not match the response");
  }
  if (lambda < 0.0 || !std::isfinite(lambda)) {
    throw ParameterError("lambda must be nonnegative and finite");
  }
  const Eigen::MatrixXd gram = design.transpose() * design;
  const Eigen::MatrixXd cross = design.transpose() * response;
  Eigen::MatrixXd b = warm_start != nullptr
                          ? *warm_start
                          : Eigen::MatrixXd::Zero(design.cols(), response.cols());
  if (b.rows() != design.cols() || b.cols() != response.cols()) {
    throw DimensionError("warm start has the wrong shape");
  }
  return cd_lasso(gram, cross, omega, lambda, static_cast<double>(response.rows()), b);
}

Eigen::MatrixXd b_step(const PanelMatrix& panel, const Eigen::MatrixXd& omega,
                       double lambda) {
  return b_step(panel.response, panel.design, omega, lambda);
}

Eigen::MatrixXd graphical_lasso(const Eigen::MatrixXd& sample_cov, double gamma) {
  if (sample_cov.rows() != sample_cov.cols() || sample_cov.rows() < 1) {
    throw DimensionError("covariance matrix must be square");
  }
  if (!sample_cov.allFinite()) {
    throw DataError("covariance matrix has non-finite entries");
  }
  if (gamma < 0.0 || !std::isfinite(gamma)) {
    throw ParameterError("gamma must be nonnegative and finite");
  }
  const Eigen::Index j = sample_cov.rows();
  if (j == 1) {
    Eigen::MatrixXd theta(1, 1);
    theta(0, 0) = 1.0 / std::max(sample_cov(0, 0), kDiagonalFloor);
    return theta;
  }
  if (gamma == 0.0) {
    return invert_spd(sample_cov);
  }
  GlassoState state;
  return glasso_solve(sample_cov, 2.0 * gamma, state);
}

Eigen::MatrixXd omega_step(const Eigen::MatrixXd& residuals, double gamma) {
  if (residuals.rows() < 1) {
    throw DimensionError("residual matrix is empty");
  }
  if (!residuals.allFinite()) {
    throw DataError("residuals contain non-finite entries");
  }
  const Eigen::MatrixXd s =
      residuals.transpose() * residuals / static_cast<double>(residuals.rows());
  return graphical_lasso(s, gamma);
}

double bic(double loglik, int df, double n) {
  if (!(n >= 1.0)) {
    throw ParameterError("sample size must be at least 1");
  }
  return -2.0 * loglik + df * std::log(n);
}

double joint_objective(const Eigen::MatrixXd& response, const Eigen::MatrixXd& design,
                       const Eigen::MatrixXd& coefficients, const Eigen::MatrixXd& omega,
                       double lambda, double gamma) {
  const double n = static_cast<double>(response.rows());
  const Eigen::MatrixXd resid = response - design * coefficients;
  const double trace = (resid * omega).cwiseProduct(resid).sum();
  double l1_off = 0.0;
  for (Eigen::Index a = 0; a < omega.rows(); ++a)
    for (Eigen::Index b = 0; b < omega.cols(); ++b)
      if (a != b) l1_off += std::abs(omega(a, b));
  return 0.5 * trace / n - 0.5 * log_det_spd(omega) +
         lambda * coefficients.cwiseAbs().sum() + gamma * l1_off;
}

std::vector<double> default_lambda_grid(const Eigen::MatrixXd& response,
                                        const Eigen::MatrixXd& design) {
  const double lambda_max =
      (design.transpose() * response).cwiseAbs().maxCoeff() /
      static_cast<double>(response.rows());
  if (!(lambda_max > 0.0)) return {1e-8};
  return log_spaced(lambda_max, 3.0, 20);
}

std::vector<double> default_gamma_grid(const Eigen::MatrixXd& sample_cov) {
  double max_off = 0.0;
  for (Eigen::Index a = 0; a < sample_cov.rows(); ++a)
    for (Eigen::Index b = 0; b < sample_cov.cols(); ++b)
      if (a != b) max_off = std::max(max_off, std::abs(sample_cov(a, b)));
  if (!(max_off > 0.0)) return {1e-8};
  return log_spaced(max_off, 2.0, 10);
}

struct GaussianWorkspace::Impl {
  std::vector<Eigen::MatrixXd> b_warm;
  std::vector<GlassoState> glasso_states;
  bool warm_ready = false;
};

GaussianWorkspace::GaussianWorkspace() : impl(new Impl) {}
GaussianWorkspace::~GaussianWorkspace() = default;
GaussianWorkspace::GaussianWorkspace(GaussianWorkspace&&) noexcept = default;
GaussianWorkspace& GaussianWorkspace::operator=(GaussianWorkspace&&) noexcept = default;

GaussianFit gaussian_lasso(const Eigen::MatrixXd& response, const Eigen::MatrixXd& design,
                           const RegularizationParams& params, double epsilon,
                           int max_iterations, const Eigen::MatrixXd* coef_init,
                           const Eigen::MatrixXd* omega_init,
                           GaussianWorkspace* workspace) {
  params.validate();
  const Eigen::Index n = response.rows();
  const Eigen::Index jd = response.cols();
  const Eigen::Index kd = design.cols();
  if (design.rows() != n || n < 1 || jd < 1 || kd < 1) {
    throw DimensionError("response and design shapes are inconsistent");
  }
  if (max_iterations < 1) {
    throw ParameterError("max_iterations must be at least 1");
  }

  const Eigen::MatrixXd gram = design.transpose() * design;
  const Eigen::MatrixXd cross = design.transpose() * response;
  const std::vector<double> lambda_grid =
      resolve_grid(params.lambda_grid, params.lambda, default_lambda_grid(response, design));
  std::vector<double> gamma_grid =
      resolve_grid(params.gamma_grid, params.gamma, {});

  GaussianFit fit;
  fit.coefficients = coef_init != nullptr
                         ? *coef_init
                         : Eigen::MatrixXd::Zero(kd, jd);
  fit.precision = omega_init != nullptr ? *omega_init
                                        : Eigen::MatrixXd::Identity(jd, jd);
  if (fit.coefficients.rows() != kd || fit.coefficients.cols() != jd ||
      fit.precision.rows() != jd || fit.precision.cols() != jd) {
    throw DimensionError("initial values have the wrong shape");
  }

  GaussianWorkspace local;
  GaussianWorkspace::Impl& ws = workspace != nullptr ? *workspace->impl : *local.impl;
  std::vector<Eigen::MatrixXd>& b_warm = ws.b_warm;
  std::vector<GlassoState>& glasso_states = ws.glasso_states;
  if (b_warm.size() != lambda_grid.size() ||
      (ws.warm_ready && (b_warm[0].rows() != kd || b_warm[0].cols() != jd))) {
    b_warm.assign(lambda_grid.size(), Eigen::MatrixXd());
    glasso_states.clear();
    ws.warm_ready = false;
  }
  const double log_n = std::log(static_cast<double>(n));
  double prev_objective = std::numeric_limits<double>::infinity();
  bool& warm_ready = ws.warm_ready;

  for (int iter = 1; iter <= max_iterations; ++iter) {
    fit.iterations = iter;

    // B given Omega: BIC over the lambda grid, warm-started along the grid on
    // the first pass and from the previous outer iteration afterwards.
    double best_bic = std::numeric_limits<double>::infinity();
    std::size_t best_idx = 0;
    for (std::size_t gi = 0; gi < lambda_grid.size(); ++gi) {
      Eigen::MatrixXd start = warm_ready ? b_warm[gi]
                              : gi == 0  ? fit.coefficients
                                         : b_warm[gi - 1];
      b_warm[gi] = cd_lasso(gram, cross, fit.precision, lambda_grid[gi],
                            static_cast<double>(n), std::move(start));
      const Eigen::MatrixXd resid = response - design * b_warm[gi];
      const double trace = (resid * fit.precision).cwiseProduct(resid).sum();
      const double crit = trace + count_nonzero(b_warm[gi]) * log_n;
      if (crit < best_bic) {
        best_bic = crit;
        best_idx = gi;
      }
    }
    warm_ready = true;
    fit.coefficients = b_warm[best_idx];
    fit.lambda = lambda_grid[best_idx];

    // Omega given B: BIC over the gamma grid on the current residuals.
    const Eigen::MatrixXd resid = response - design * fit.coefficients;
    const Eigen::MatrixXd s = resid.transpose() * resid / static_cast<double>(n);
    if (gamma_grid.empty()) gamma_grid = default_gamma_grid(s);
    if (glasso_states.size() != gamma_grid.size()) {
      glasso_states.assign(gamma_grid.size(), GlassoState());
    }

    best_bic = std::numeric_limits<double>::infinity();
    Eigen::MatrixXd best_omega;
    for (std::size_t gi = 0; gi < gamma_grid.size(); ++gi) {
      Eigen::MatrixXd omega =
          gamma_grid[gi] == 0.0
              ? invert_spd(s)
              : glasso_solve(s, 2.0 * gamma_grid[gi], glasso_states[gi]);
      const double trace = static_cast<double>(n) * (s * omega).trace();
      const double crit = trace - static_cast<double>(n) * log_det_spd(omega) +
                          count_nonzero_lower(omega) * log_n;
      if (crit < best_bic) {
        best_bic = crit;
        best_omega = std::move(omega);
        fit.gamma = gamma_grid[gi];
      }
    }
    fit.precision = best_omega;

    fit.objective = joint_objective(response, design, fit.coefficients, fit.precision,
                                    fit.lambda, fit.gamma);
    if (iter > 1 && std::abs(fit.objective - prev_objective) <=
                        epsilon * std::max(1.0, std::abs(prev_objective))) {
      fit.converged = true;
      break;
    }
    prev_objective = fit.objective;
  }
  return fit;
}

GaussianFit gaussian_lasso(const PanelMatrix& panel, const RegularizationParams& params,
                           double epsilon, int max_iterations) {
  return gaussian_lasso(panel.response, panel.design, params, epsilon, max_iterations);
}

}  // namespace tlasso
