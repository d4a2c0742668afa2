#pragma once

#include <Eigen/Dense>
#include <vector>

namespace tlasso {

enum class ErrorKind { gaussian, student_t };

// Innovation distribution of the VAR: either N(0, Psi) or a multivariate
// Student-t with dof nu and scale matrix Psi. The inverse scale
// Omega = Psi^{-1} and the Cholesky factor of Psi are cached on construction.
class ErrorDistribution {
 public:
  static ErrorDistribution gaussian(const Eigen::MatrixXd& scale);
  static ErrorDistribution student_t(double nu, const Eigen::MatrixXd& scale);

  ErrorKind kind() const { return kind_; }
  double dof() const { return nu_; }
  Eigen::Index dimension() const { return scale_.rows(); }
  const Eigen::MatrixXd& scale() const { return scale_; }
  const Eigen::MatrixXd& inverse_scale() const { return inverse_scale_; }
  // Lower-triangular L with Psi = L L^T, used for sampling.
  const Eigen::MatrixXd& scale_cholesky() const { return chol_; }

  // Sigma = Psi * nu / (nu - 2); requires nu > 2 for student_t.
  Eigen::MatrixXd covariance() const;

 private:
  ErrorDistribution(ErrorKind kind, double nu, const Eigen::MatrixXd& scale);

  ErrorKind kind_;
  double nu_;
  Eigen::MatrixXd scale_;
  Eigen::MatrixXd inverse_scale_;
  Eigen::MatrixXd chol_;
};

// VAR(P): y_t = B_1 y_{t-1} + ... + B_P y_{t-P} + e_t.
struct VarModel {
  std::vector<Eigen::MatrixXd> coefficients;  // B_1..B_P, each J x J
  ErrorDistribution error;

  int order() const { return static_cast<int>(coefficients.size()); }
  Eigen::Index dimension() const { return error.dimension(); }
};

// Stacked response/design pair for Y = X B + E. Row i of the design holds
// [y_{t-1}^T, ..., y_{t-P}^T] for t = P + i (0-based into the raw series).
struct PanelMatrix {
  Eigen::MatrixXd response;  // N x J
  Eigen::MatrixXd design;    // N x (J*P)
  int order = 0;
  bool centered = false;
  Eigen::VectorXd means;  // column means subtracted from the raw series

  Eigen::Index rows() const { return response.rows(); }
  Eigen::Index series() const { return response.cols(); }
};

struct VmaCoefficients {
  int horizon = 0;
  std::vector<Eigen::MatrixXd> thetas;  // theta_0..theta_{H-1}, theta_0 = I
};

// [B_1^T; ...; B_P^T] stacked into a (J*P) x J matrix, matching Y = X B.
Eigen::MatrixXd stack_coefficients(const std::vector<Eigen::MatrixXd>& coefficients);
std::vector<Eigen::MatrixXd> unstack_coefficients(const Eigen::MatrixXd& stacked, int order);

// Companion form of the lag polynomial: (J*P) x (J*P).
Eigen::MatrixXd companion_matrix(const std::vector<Eigen::MatrixXd>& coefficients);

PanelMatrix build_panel(const Eigen::MatrixXd& series, int order, bool center);

// Spectral radius of the companion matrix < 1 - 1e-10.
bool stationary(const VarModel& model);
bool stationary(const std::vector<Eigen::MatrixXd>& coefficients);

// Moving-average representation: theta_0 = I, theta_s = sum_i B_i theta_{s-i}.
VmaCoefficients to_vma(const VarModel& model, int horizon);

// Iterated point forecasts for horizons 1..h. history holds the last P
// observations in time order (oldest first) on the model's own scale; means,
// when non-empty, are added back to every forecast row.
Eigen::MatrixXd forecast(const VarModel& model, const Eigen::MatrixXd& history,
                         int horizon,
                         const Eigen::VectorXd& means = Eigen::VectorXd());

// n i.i.d. rows from the innovation distribution. The t draw uses the scale
// mixture e = phi / sqrt(tau), phi ~ N(0, Psi), tau ~ Gamma(nu/2, rate nu/2).
Eigen::MatrixXd sample_mvt(int n, const ErrorDistribution& dist, std::uint64_t seed);

// Simulates burn_in + length steps from zero initial values and drops the
// first burn_in rows. Refuses non-stationary models.
Eigen::MatrixXd simulate_var(const VarModel& model, int length, int burn_in,
                             std::uint64_t seed);

}  // namespace tlasso
