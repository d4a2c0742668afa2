#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tlasso/var_model.hpp"

namespace tlasso {

inline constexpr int kDefaultHorizon = 5;

struct SpilloverResult {
  int horizon = 0;
  Eigen::MatrixXd fevd;        // w_{jk}: share of j's forecast-error variance due to k
  Eigen::MatrixXd normalized;  // fevd with each row rescaled to sum to one
  Eigen::MatrixXd spillovers;  // 100 * normalized; row = receiver, column = source
  double index = 0.0;          // sum of off-diagonal spillover entries
  Eigen::MatrixXd dispersion;  // covariance used, or the scale matrix when the
                               // error has no finite covariance
  bool stationary_model = true;
};

struct NetworkEdge {
  std::string source;
  std::string target;
  double weight = 0.0;
};

struct NetworkExport {
  std::vector<std::string> nodes;
  std::vector<NetworkEdge> edges;
  double retention_quantile = 0.0;
};

// Generalized forecast-error variance decomposition over horizons 0..h-1.
// Shocks are not orthogonalized, so the result is invariant to series order.
SpilloverResult gfevd(const VarModel& model, int horizon);

// Responses theta_p * Sigma * delta_k / sqrt(sigma_kk) for p = 0..h-1.
std::vector<Eigen::VectorXd> generalized_impulse(const VarModel& model,
                                                 int shock_index, int horizon);

// Keeps the top ceil(quantile * J*(J-1)) off-diagonal spillovers by weight;
// ties at the cutoff are all kept, zero-weight entries never become edges.
// Empty labels default to y1..yJ.
NetworkExport extract_network(const SpilloverResult& result, double quantile,
                              const std::vector<std::string>& labels = {});

// {nodes: [...], edges: [{source, target, weight}], retention_quantile}
// with weights rounded to six significant digits.
std::string to_json(const NetworkExport& network);

// Directed graphviz digraph; penwidth scales linearly with edge weight.
std::string to_dot(const NetworkExport& network);

}  // namespace tlasso
