#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "tlasso/errors.hpp"
#include "tlasso/gaussian.hpp"
#include "tlasso/var_model.hpp"

using namespace tlasso;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = gauss(rng);
  return m;
}

// A panel that is only a regression pair; ls/b_step/omega_step read Y and X.
PanelMatrix regression_pair(const Eigen::MatrixXd& y, const Eigen::MatrixXd& x) {
  PanelMatrix panel;
  panel.response = y;
  panel.design = x;
  panel.order = 1;
  panel.centered = false;
  panel.means = Eigen::VectorXd::Zero(y.cols());
  return panel;
}

Eigen::MatrixXd kms_scale(int j, double rho) {
  Eigen::MatrixXd psi(j, j);
  for (int r = 0; r < j; ++r)
    for (int c = 0; c < j; ++c) psi(r, c) = std::pow(rho, std::abs(r - c));
  return psi;
}

}  // namespace

TEST_CASE("least squares interpolates noiseless data") {
  const Eigen::MatrixXd x = random_matrix(40, 4, 1);
  Eigen::MatrixXd b_true(4, 2);
  b_true << 0.5, 0.0, -0.2, 0.1, 0.0, 0.3, 0.7, -0.4;
  const Eigen::MatrixXd y = x * b_true + 1e-8 * random_matrix(40, 2, 2);
  const GaussianFit fit = ls_estimate(regression_pair(y, x));
  CHECK((fit.coefficients - b_true).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("least squares matches the scalar AR(1) slope") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd series(60, 1);
  series(0, 0) = 0.0;
  for (int t = 1; t < 60; ++t) series(t, 0) = 0.6 * series(t - 1, 0) + gauss(rng);
  const PanelMatrix panel = build_panel(series, 1, false);
  const GaussianFit fit = ls_estimate(panel);
  double num = 0.0, den = 0.0;
  for (int t = 1; t < 60; ++t) {
    num += series(t, 0) * series(t - 1, 0);
    den += series(t - 1, 0) * series(t - 1, 0);
  }
  CHECK(fit.coefficients(0, 0) == doctest::Approx(num / den).epsilon(1e-12));
}

TEST_CASE("least squares rejects rank-deficient designs") {
  Eigen::MatrixXd x = random_matrix(30, 3, 5);
  x.col(2) = x.col(0) + x.col(1);
  const Eigen::MatrixXd y = random_matrix(30, 2, 6);
  CHECK_THROWS_AS(ls_estimate(regression_pair(y, x)), SingularDesignError);
  CHECK_THROWS_AS(ls_estimate(regression_pair(random_matrix(3, 2, 7), random_matrix(3, 4, 8))),
                  SingularDesignError);
}

TEST_CASE("b_step at lambda zero equals least squares under any SPD omega") {
  const Eigen::MatrixXd x = random_matrix(80, 6, 9);
  const Eigen::MatrixXd y = random_matrix(80, 3, 10);
  const PanelMatrix panel = regression_pair(y, x);
  const Eigen::MatrixXd ols = ls_estimate(panel).coefficients;

  Eigen::MatrixXd omega(3, 3);
  omega << 2.0, 0.3, -0.1, 0.3, 1.5, 0.2, -0.1, 0.2, 1.0;
  const Eigen::MatrixXd b = b_step(panel, omega, 0.0);
  CHECK((b - ols).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("b_step shrinks everything to zero at lambda_max") {
  const Eigen::MatrixXd x = random_matrix(50, 4, 11);
  const Eigen::MatrixXd y = random_matrix(50, 2, 12);
  const PanelMatrix panel = regression_pair(y, x);
  const double lambda_max = (x.transpose() * y).cwiseAbs().maxCoeff() / 50.0;
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(2, 2);
  CHECK(b_step(panel, eye, lambda_max).cwiseAbs().maxCoeff() == 0.0);
  CHECK(b_step(panel, eye, 2.0 * lambda_max).cwiseAbs().maxCoeff() == 0.0);
  CHECK(b_step(panel, eye, 0.99 * lambda_max).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("scalar b_step matches a fine grid search") {
  const Eigen::MatrixXd x = random_matrix(30, 1, 13);
  const Eigen::MatrixXd y = 0.4 * x + 0.3 * random_matrix(30, 1, 14);
  const PanelMatrix panel = regression_pair(y, x);
  const Eigen::MatrixXd one = Eigen::MatrixXd::Identity(1, 1);
  const double n = 30.0;

  for (double lambda : {0.01, 0.05, 0.2}) {
    CAPTURE(lambda);
    const double b_cd = b_step(panel, one, lambda)(0, 0);
    auto objective = [&](double b) {
      return 0.5 * (y.array() - b * x.array()).square().sum() / n + lambda * std::abs(b);
    };
    double best_b = 0.0, best_val = objective(0.0);
    for (double b = -2.0; b <= 2.0; b += 1e-6) {
      const double val = objective(b);
      if (val < best_val) {
        best_val = val;
        best_b = b;
      }
    }
    CHECK(std::abs(b_cd - best_b) <= 2e-6);
    CHECK(objective(b_cd) <= best_val + 1e-12);
  }
}

TEST_CASE("b_step sparsity is monotone in lambda") {
  const Eigen::MatrixXd x = random_matrix(60, 8, 15);
  const Eigen::MatrixXd y = random_matrix(60, 4, 16);
  const PanelMatrix panel = regression_pair(y, x);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(4, 4);
  const double lambda_max = (x.transpose() * y).cwiseAbs().maxCoeff() / 60.0;

  Eigen::Index prev_nnz = 8 * 4 + 1;
  for (int i = 0; i <= 10; ++i) {
    const Eigen::MatrixXd b = b_step(panel, eye, lambda_max * i / 10.0);
    const Eigen::Index nnz = (b.array() != 0.0).count();
    CHECK(nnz <= prev_nnz);
    prev_nnz = nnz;
  }
}

TEST_CASE("omega_step with huge penalty is diagonal 1/S_ii") {
  const Eigen::MatrixXd resid = random_matrix(200, 4, 17);
  const Eigen::MatrixXd s = resid.transpose() * resid / 200.0;
  const Eigen::MatrixXd omega = omega_step(resid, 1e6);
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      if (a == b) {
        CHECK(omega(a, a) == doctest::Approx(1.0 / s(a, a)).epsilon(1e-10));
      } else {
        CHECK(omega(a, b) == 0.0);
      }
    }
  }
}

TEST_CASE("omega_step at gamma zero inverts the sample covariance") {
  const Eigen::MatrixXd resid = random_matrix(300, 2, 18);
  const Eigen::MatrixXd s = resid.transpose() * resid / 300.0;
  const Eigen::MatrixXd omega = omega_step(resid, 0.0);
  CHECK((omega * s - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("omega_step output is symmetric positive definite") {
  const Eigen::MatrixXd resid = random_matrix(150, 5, 19);
  for (double gamma : {0.0, 0.01, 0.05, 0.2}) {
    CAPTURE(gamma);
    const Eigen::MatrixXd omega = omega_step(resid, gamma);
    CHECK((omega - omega.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(omega);
    CHECK(eig.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("graphical lasso satisfies the stationarity conditions") {
  const Eigen::MatrixXd resid = random_matrix(120, 5, 20);
  const Eigen::MatrixXd s = resid.transpose() * resid / 120.0;
  const double gamma = 0.04;
  const double rho = 2.0 * gamma;
  const Eigen::MatrixXd theta = graphical_lasso(s, gamma);
  const Eigen::MatrixXd w = theta.llt().solve(Eigen::MatrixXd::Identity(5, 5));
  for (int a = 0; a < 5; ++a) {
    for (int b = 0; b < 5; ++b) {
      if (a == b) continue;
      // inverse(theta) = S + rho * sign(theta) on the support, within rho off it.
      if (theta(a, b) != 0.0) {
        CHECK(std::abs(w(a, b) - s(a, b) - rho * (theta(a, b) > 0 ? 1.0 : -1.0)) <= 1e-5);
      } else {
        CHECK(std::abs(w(a, b) - s(a, b)) <= rho + 1e-5);
      }
    }
  }
}

TEST_CASE("graphical lasso recovers the tridiagonal precision of a banded scale") {
  const int j = 10;
  const Eigen::MatrixXd psi = kms_scale(j, 0.1);
  const ErrorDistribution dist = ErrorDistribution::gaussian(psi);
  const Eigen::MatrixXd draws = sample_mvt(1000, dist, 21);
  const Eigen::MatrixXd s = draws.transpose() * draws / 1000.0;

  // The inverse of a first-order autoregressive correlation matrix is
  // tridiagonal, so everything off the band is a true zero.
  int best_correct = 0;
  for (double gamma : default_gamma_grid(s)) {
    const Eigen::MatrixXd omega = graphical_lasso(s, gamma);
    int correct = 0, total = 0;
    for (int a = 0; a < j; ++a) {
      for (int b = 0; b < j; ++b) {
        if (std::abs(a - b) <= 1) continue;
        ++total;
        if (omega(a, b) == 0.0) ++correct;
      }
    }
    best_correct = std::max(best_correct, correct * 100 / total);
  }
  CHECK(best_correct >= 80);
}

TEST_CASE("bic formula") {
  CHECK(bic(0.0, 0, 10) == 0.0);
  CHECK(bic(-10.0, 3, std::exp(2.0)) == doctest::Approx(26.0).epsilon(1e-12));
  // a parameter with no likelihood gain strictly increases the criterion
  CHECK(bic(-5.0, 4, 50) > bic(-5.0, 3, 50));
}

TEST_CASE("alternating half-steps never increase the joint objective") {
  std::mt19937_64 rng(22);
  const Eigen::MatrixXd psi = kms_scale(3, 0.4);
  Eigen::MatrixXd b1(3, 3);
  b1 << 0.5, 0.2, 0.0, 0.0, 0.4, 0.1, 0.1, 0.0, 0.3;
  const VarModel model{{b1}, ErrorDistribution::gaussian(psi)};
  const Eigen::MatrixXd series = simulate_var(model, 150, 200, 23);
  const PanelMatrix panel = build_panel(series, 1, true);

  const double lambda = 0.02, gamma = 0.02;
  Eigen::MatrixXd omega = Eigen::MatrixXd::Identity(3, 3);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(3, 3);
  double prev = joint_objective(panel.response, panel.design, b, omega, lambda, gamma);
  for (int it = 0; it < 5; ++it) {
    b = b_step(panel, omega, lambda);
    double obj = joint_objective(panel.response, panel.design, b, omega, lambda, gamma);
    CHECK(obj <= prev + 1e-10);
    prev = obj;
    omega = omega_step(panel.response - panel.design * b, gamma);
    obj = joint_objective(panel.response, panel.design, b, omega, lambda, gamma);
    CHECK(obj <= prev + 1e-10);
    prev = obj;
  }
}

TEST_CASE("gaussian_lasso with zero penalties reproduces least squares") {
  Eigen::MatrixXd b1(3, 3);
  b1 << 0.5, 0.2, 0.0, 0.0, 0.4, 0.1, 0.1, 0.0, 0.3;
  const VarModel model{{b1}, ErrorDistribution::gaussian(kms_scale(3, 0.3))};
  const Eigen::MatrixXd series = simulate_var(model, 200, 200, 24);
  const PanelMatrix panel = build_panel(series, 1, true);

  RegularizationParams params;
  params.lambda = 0.0;
  params.gamma = 0.0;
  const GaussianFit fit = gaussian_lasso(panel, params);
  const GaussianFit ls = ls_estimate(panel);
  CHECK(fit.converged);
  CHECK((fit.coefficients - ls.coefficients).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK((fit.precision - ls.precision).cwiseAbs().maxCoeff() <= 1e-5);
}

TEST_CASE("gaussian_lasso objective settles under fixed penalties") {
  Eigen::MatrixXd b1(4, 4);
  b1.setZero();
  b1.diagonal().setConstant(0.5);
  const VarModel model{{b1}, ErrorDistribution::gaussian(kms_scale(4, 0.2))};
  const Eigen::MatrixXd series = simulate_var(model, 120, 200, 25);
  const PanelMatrix panel = build_panel(series, 1, true);

  RegularizationParams params;
  params.lambda = 0.05;
  params.gamma = 0.05;
  double prev = std::numeric_limits<double>::infinity();
  for (int iters = 1; iters <= 4; ++iters) {
    const GaussianFit fit = gaussian_lasso(panel, params, 0.0, iters);
    CHECK(fit.objective <= prev + 1e-10);
    prev = fit.objective;
  }
  const GaussianFit fit = gaussian_lasso(panel, params);
  CHECK(fit.converged);
  CHECK(fit.lambda == 0.05);
  CHECK(fit.gamma == 0.05);
}

TEST_CASE("gaussian_lasso keeps a pure-noise panel nearly empty") {
  int all_zero = 0;
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    CAPTURE(seed);
    const VarModel noise{{Eigen::MatrixXd::Zero(10, 10)},
                         ErrorDistribution::gaussian(Eigen::MatrixXd::Identity(10, 10))};
    const Eigen::MatrixXd series = simulate_var(noise, 100, 0, seed);
    const PanelMatrix panel = build_panel(series, 1, true);
    const GaussianFit fit = gaussian_lasso(panel, RegularizationParams{});
    const int nnz = static_cast<int>((fit.coefficients.array() != 0.0).count());
    CHECK(nnz <= 5);
    CHECK(fit.coefficients.cwiseAbs().maxCoeff() < 0.2);
    if (nnz == 0) ++all_zero;
  }
  CHECK(all_zero >= 5);
}

TEST_CASE("default grids are strictly descending and anchored") {
  const Eigen::MatrixXd x = random_matrix(70, 6, 26);
  const Eigen::MatrixXd y = random_matrix(70, 3, 27);
  const std::vector<double> lgrid = default_lambda_grid(y, x);
  REQUIRE(lgrid.size() == 20);
  CHECK(lgrid.front() == doctest::Approx((x.transpose() * y).cwiseAbs().maxCoeff() / 70.0));
  CHECK(lgrid.back() == doctest::Approx(lgrid.front() / 1000.0));
  for (std::size_t i = 1; i < lgrid.size(); ++i) CHECK(lgrid[i] < lgrid[i - 1]);
  // the top point zeroes everything
  const PanelMatrix panel = regression_pair(y, x);
  CHECK(b_step(panel, Eigen::MatrixXd::Identity(3, 3), lgrid.front()).cwiseAbs().maxCoeff() == 0.0);

  const Eigen::MatrixXd s = y.transpose() * y / 70.0;
  const std::vector<double> ggrid = default_gamma_grid(s);
  REQUIRE(ggrid.size() == 10);
  for (std::size_t i = 1; i < ggrid.size(); ++i) CHECK(ggrid[i] < ggrid[i - 1]);
  CHECK(ggrid.back() == doctest::Approx(ggrid.front() / 100.0));
}

TEST_CASE("regularization grids are validated") {
  RegularizationParams params;
  params.lambda_grid = {0.1, 0.2};  // ascending
  CHECK_THROWS_AS(params.validate(), ParameterError);
  params.lambda_grid = {0.2, 0.0};  // non-positive entry
  CHECK_THROWS_AS(params.validate(), ParameterError);
  params.lambda_grid = {0.2, 0.1};
  CHECK_NOTHROW(params.validate());
}
