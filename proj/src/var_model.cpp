#include "tlasso/var_model.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "tlasso/errors.hpp"

namespace tlasso {

namespace {

void check_coefficients(const std::vector<Eigen::MatrixXd>& coefficients) {
  if (coefficients.empty()) {
    throw ParameterError("VAR order must be at least 1");
  }
  const Eigen::Index j = coefficients.front().rows();
  for (const auto& b : coefficients) {
    if (b.rows() != j || b.cols() != j) {
      throw DimensionError("coefficient matrices must be square with a common dimension");
    }
  }
}

}  // namespace

ErrorDistribution::ErrorDistribution(ErrorKind kind, double nu,
                                     const Eigen::MatrixXd& scale)
    : kind_(kind), nu_(nu), scale_(scale) {
  if (scale_.rows() != scale_.cols() || scale_.rows() < 1) {
    throw DimensionError("scale matrix must be square and non-empty");
  }
  if (!scale_.allFinite()) {
    throw DataError("scale matrix has non-finite entries");
  }
  if ((scale_ - scale_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + scale_.cwiseAbs().maxCoeff())) {
    throw NumericalError("scale matrix is not symmetric");
  }
  scale_ = 0.5 * (scale_ + scale_.transpose().eval());
  Eigen::LLT<Eigen::MatrixXd> llt(scale_);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("scale matrix is not positive definite");
  }
  chol_ = llt.matrixL();
  inverse_scale_ = llt.solve(Eigen::MatrixXd::Identity(scale_.rows(), scale_.cols()));
  inverse_scale_ = 0.5 * (inverse_scale_ + inverse_scale_.transpose().eval());
}

ErrorDistribution ErrorDistribution::gaussian(const Eigen::MatrixXd& scale) {
  return ErrorDistribution(ErrorKind::gaussian,
                           std::numeric_limits<double>::infinity(), scale);
}

ErrorDistribution ErrorDistribution::student_t(double nu, const Eigen::MatrixXd& scale) {
  if (!(nu > 0.0)) {
    throw ParameterError("degrees of freedom must be positive");
  }
  return ErrorDistribution(ErrorKind::student_t, nu, scale);
}

Eigen::MatrixXd ErrorDistribution::covariance() const {
  if (kind_ == ErrorKind::gaussian) {
    return scale_;
  }
  if (!(nu_ > 2.0)) {
    throw ParameterError("covariance undefined for degrees of freedom <= 2");
  }
  if (std::isinf(nu_)) {
    return scale_;
  }
  return scale_ * (nu_ / (nu_ - 2.0));
}

Eigen::MatrixXd stack_coefficients(const std::vector<Eigen::MatrixXd>& coefficients) {
  check_coefficients(coefficients);
  const Eigen::Index j = coefficients.front().rows();
  const Eigen::Index p = static_cast<Eigen::Index>(coefficients.size());
  Eigen::MatrixXd stacked(j * p, j);
  for (Eigen::Index lag = 0; lag < p; ++lag) {
    stacked.middleRows(lag * j, j) = coefficients[lag].transpose();
  }
  return stacked;
}

std::vector<Eigen::MatrixXd> unstack_coefficients(const Eigen::MatrixXd& stacked, int order) {
  if (order < 1 || stacked.rows() != stacked.cols() * order) {
    throw DimensionError("stacked coefficients must be (J*P) x J");
  }
  const Eigen::Index j = stacked.cols();
  std::vector<Eigen::MatrixXd> coefficients;
  coefficients.reserve(order);
  for (int lag = 0; lag < order; ++lag) {
    coefficients.push_back(stacked.middleRows(lag * j, j).transpose());
  }
  return coefficients;
}

Eigen::MatrixXd companion_matrix(const std::vector<Eigen::MatrixXd>& coefficients) {
  check_coefficients(coefficients);
  const Eigen::Index j = coefficients.front().rows();
  const Eigen::Index p = static_cast<Eigen::Index>(coefficients.size());
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(j * p, j * p);
  for (Eigen::Index lag = 0; lag < p; ++lag) {
    companion.block(0, lag * j, j, j) = coefficients[lag];
  }
  if (p > 1) {
    companion.block(j, 0, j * (p - 1), j * (p - 1)) =
        Eigen::MatrixXd::Identity(j * (p - 1), j * (p - 1));
  }
  return companion;
}

PanelMatrix build_panel(const Eigen::MatrixXd& series, int order, bool center) {
  const Eigen::Index t_len = series.rows();
  const Eigen::Index j = series.cols();
  if (order < 1) {
    throw ParameterError("lag order must be at least 1");
  }
  if (j < 1) {
    throw DimensionError("series must have at least one column");
  }
  if (t_len <= order) {
    throw DataError("insufficient data: series length must exceed the lag order");
  }
  if (!series.allFinite()) {
    throw DataError("series contains non-finite entries");
  }

  PanelMatrix panel;
  panel.order = order;
  panel.centered = center;
  panel.means = Eigen::VectorXd::Zero(j);

  Eigen::MatrixXd working = series;
  if (center) {
    panel.means = series.colwise().mean();
    working.rowwise() -= panel.means.transpose();
  }

  const Eigen::Index n = t_len - order;
  panel.response = working.bottomRows(n);
  panel.design.resize(n, j * order);
  for (int lag = 1; lag <= order; ++lag) {
    panel.design.middleCols(static_cast<Eigen::Index>(lag - 1) * j, j) =
        working.middleRows(order - lag, n);
  }
  return panel;
}

bool stationary(const std::vector<Eigen::MatrixXd>& coefficients) {
  const Eigen::MatrixXd companion = companion_matrix(coefficients);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("companion eigenvalue computation failed");
  }
  return solver.eigenvalues().cwiseAbs().maxCoeff() < 1.0 - 1e-10;
}

bool stationary(const VarModel& model) {
  check_coefficients(model.coefficients);
  if (model.coefficients.front().rows() != model.error.dimension()) {
    throw DimensionError("coefficient dimension does not match the error distribution");
  }
  return stationary(model.coefficients);
}

VmaCoefficients to_vma(const VarModel& model, int horizon) {
  if (horizon < 1) {
    throw ParameterError("horizon must be at least 1");
  }
  check_coefficients(model.coefficients);
  const Eigen::Index j = model.dimension();
  const int p = model.order();

  VmaCoefficients vma;
  vma.horizon = horizon;
  vma.thetas.reserve(horizon);
  vma.thetas.push_back(Eigen::MatrixXd::Identity(j, j));
  for (int s = 1; s < horizon; ++s) {
    Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(j, j);
    for (int i = 1; i <= std::min(s, p); ++i) {
      theta.noalias() += model.coefficients[i - 1] * vma.thetas[s - i];
    }
    vma.thetas.push_back(std::move(theta));
  }
  return vma;
}

Eigen::MatrixXd forecast(const VarModel& model, const Eigen::MatrixXd& history,
                         int horizon, const Eigen::VectorXd& means) {
  check_coefficients(model.coefficients);
  const Eigen::Index j = model.dimension();
  const int p = model.order();
  if (horizon < 1) {
    throw ParameterError("horizon must be at least 1");
  }
  if (history.rows() != p || history.cols() != j) {
    throw DimensionError("history must hold exactly P rows of J series");
  }
  if (means.size() != 0 && means.size() != j) {
    throw DimensionError("means length does not match the series dimension");
  }

  // state row 0 = most recent observation.
  Eigen::MatrixXd state = history.colwise().reverse();
  Eigen::MatrixXd out(horizon, j);
  for (int h = 0; h < horizon; ++h) {
    Eigen::VectorXd next = Eigen::VectorXd::Zero(j);
    for (int lag = 1; lag <= p; ++lag) {
      next.noalias() += model.coefficients[lag - 1] * state.row(lag - 1).transpose();
    }
    for (int lag = p - 1; lag >= 1; --lag) {
      state.row(lag) = state.row(lag - 1);
    }
    state.row(0) = next.transpose();
    out.row(h) = next.transpose();
  }
  if (means.size() != 0) {
    out.rowwise() += means.transpose();
  }
  return out;
}

Eigen::MatrixXd sample_mvt(int n, const ErrorDistribution& dist, std::uint64_t seed) {
  if (n < 0) {
    throw ParameterError("sample count must be nonnegative");
  }
  const Eigen::Index j = dist.dimension();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Eigen::MatrixXd out(n, j);
  Eigen::VectorXd z(j);
  if (dist.kind() == ErrorKind::gaussian || std::isinf(dist.dof())) {
    for (int i = 0; i < n; ++i) {
      for (Eigen::Index k = 0; k < j; ++k) z(k) = gauss(rng);
      out.row(i) = (dist.scale_cholesky() * z).transpose();
    }
    return out;
  }

  const double nu = dist.dof();
  // tau ~ Gamma(shape nu/2, rate nu/2), so E[tau] = 1.
  std::gamma_distribution<double> mixing(nu / 2.0, 2.0 / nu);
  for (int i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < j; ++k) z(k) = gauss(rng);
    const double tau = mixing(rng);
    out.row(i) = (dist.scale_cholesky() * z).transpose() / std::sqrt(tau);
  }
  return out;
}

Eigen::MatrixXd simulate_var(const VarModel& model, int length, int burn_in,
                             std::uint64_t seed) {
  if (length < 1) {
    throw ParameterError("simulation length must be at least 1");
  }
  if (burn_in < 0) {
    throw ParameterError("burn-in must be nonnegative");
  }
  if (!stationary(model)) {
    throw NumericalError("refusing to simulate from a non-stationary model");
  }
  const Eigen::Index j = model.dimension();
  const int p = model.order();
  const int total = burn_in + length;

  const Eigen::MatrixXd errors = sample_mvt(total, model.error, seed);
  Eigen::MatrixXd path(total, j);
  for (int t = 0; t < total; ++t) {
    Eigen::VectorXd y = errors.row(t).transpose();
    for (int lag = 1; lag <= p; ++lag) {
      if (t - lag >= 0) {
        y.noalias() += model.coefficients[lag - 1] * path.row(t - lag).transpose();
      }
    }
    path.row(t) = y.transpose();
  }
  return path.bottomRows(length);
}

}  // namespace tlasso
