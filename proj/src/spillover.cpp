#include "tlasso/spillover.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "tlasso/errors.hpp"

namespace tlasso {

namespace {

Eigen::MatrixXd dispersion_for(const ErrorDistribution& error) {
  if (error.kind() == ErrorKind::student_t && error.dof() <= 2.0) {
    return error.scale();
  }
  return error.covariance();
}

void check_model(const VarModel& model, const Eigen::MatrixXd& sigma) {
  const Eigen::Index j_dim = sigma.rows();
  for (const Eigen::MatrixXd& b : model.coefficients) {
    if (b.rows() != j_dim || b.cols() != j_dim) {
      throw DimensionError("coefficient matrices must match the error dimension");
    }
  }
  for (Eigen::Index k = 0; k < j_dim; ++k) {
    if (!(sigma(k, k) > 0.0)) {
      throw NumericalError("dispersion matrix has a non-positive diagonal entry");
    }
  }
}

double round_significant(double x, int digits) {
  if (x == 0.0 || !std::isfinite(x)) {
    return x;
  }
  const int shift = digits - 1 - static_cast<int>(std::floor(std::log10(std::abs(x))));
  const double mag = std::pow(10.0, shift);
  return std::round(x * mag) / mag;
}

std::string dot_quote(const std::string& name) {
  std::string out = "\"";
  for (const char c : name) {
    if (c == '"' || c == '\\') {
      out.push_back('\\');
    }
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

SpilloverResult gfevd(const VarModel& model, int horizon) {
  if (horizon < 1) {
    throw ParameterError("horizon must be at least 1");
  }
  SpilloverResult result;
  result.horizon = horizon;
  result.dispersion = dispersion_for(model.error);
  check_model(model, result.dispersion);
  result.stationary_model = model.coefficients.empty() || stationary(model);

  const Eigen::Index j_dim = result.dispersion.rows();
  const VmaCoefficients vma = to_vma(model, horizon);
  Eigen::MatrixXd numerator = Eigen::MatrixXd::Zero(j_dim, j_dim);
  Eigen::ArrayXd denominator = Eigen::ArrayXd::Zero(j_dim);
  for (const Eigen::MatrixXd& theta : vma.thetas) {
    const Eigen::MatrixXd ts = theta * result.dispersion;
    numerator.array() += ts.array().square();
    denominator += (ts.array() * theta.array()).rowwise().sum();
  }

  result.fevd = numerator;
  result.fevd.array().rowwise() /= result.dispersion.diagonal().transpose().array();
  result.fevd.array().colwise() /= denominator;

  result.normalized = result.fevd;
  result.normalized.array().colwise() /= result.fevd.rowwise().sum().array();
  result.spillovers = 100.0 * result.normalized;
  result.index = result.spillovers.sum() - result.spillovers.trace();
  return result;
}

std::vector<Eigen::VectorXd> generalized_impulse(const VarModel& model,
                                                 int shock_index, int horizon) {
  if (horizon < 1) {
    throw ParameterError("horizon must be at least 1");
  }
  const Eigen::MatrixXd sigma = dispersion_for(model.error);
  check_model(model, sigma);
  if (shock_index < 0 || shock_index >= sigma.rows()) {
    throw ParameterError("shock index out of range");
  }
  const double root = std::sqrt(sigma(shock_index, shock_index));
  const VmaCoefficients vma = to_vma(model, horizon);
  std::vector<Eigen::VectorXd> responses;
  responses.reserve(vma.thetas.size());
  for (const Eigen::MatrixXd& theta : vma.thetas) {
    responses.push_back(theta * sigma.col(shock_index) / root);
  }
  return responses;
}

NetworkExport extract_network(const SpilloverResult& result, double quantile,
                              const std::vector<std::string>& labels) {
  if (!(quantile > 0.0) || quantile > 1.0) {
    throw ParameterError("retention quantile must lie in (0, 1]");
  }
  const Eigen::Index j_dim = result.spillovers.rows();
  if (result.spillovers.cols() != j_dim) {
    throw DimensionError("spillover matrix must be square");
  }

  NetworkExport network;
  network.retention_quantile = quantile;
  if (labels.empty()) {
    for (Eigen::Index k = 0; k < j_dim; ++k) {
      network.nodes.push_back("y" + std::to_string(k + 1));
    }
  } else {
    if (static_cast<Eigen::Index>(labels.size()) != j_dim) {
      throw DimensionError("one label per series is required");
    }
    network.nodes = labels;
  }

  struct Entry {
    double weight;
    Eigen::Index source;
    Eigen::Index target;
  };
  std::vector<Entry> entries;
  for (Eigen::Index j = 0; j < j_dim; ++j) {
    for (Eigen::Index k = 0; k < j_dim; ++k) {
      if (j != k && result.spillovers(j, k) > 0.0) {
        entries.push_back({result.spillovers(j, k), k, j});
      }
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return std::tie(b.weight, a.source, a.target) <
           std::tie(a.weight, b.source, b.target);
  });

  const auto retained = static_cast<std::size_t>(
      std::ceil(quantile * static_cast<double>(j_dim * (j_dim - 1))));
  std::size_t count = entries.size();
  if (count > retained) {
    const double cutoff = entries[retained - 1].weight;
    while (count > retained && entries[count - 1].weight < cutoff) {
      --count;
    }
  }
  for (std::size_t i = 0; i < count; ++i) {
    network.edges.push_back({network.nodes[entries[i].source],
                             network.nodes[entries[i].target],
                             entries[i].weight});
  }
  return network;
}

std::string to_json(const NetworkExport& network) {
  nlohmann::ordered_json doc;
  doc["nodes"] = network.nodes;
  doc["edges"] = nlohmann::ordered_json::array();
  for (const NetworkEdge& edge : network.edges) {
    doc["edges"].push_back({{"source", edge.source},
                            {"target", edge.target},
                            {"weight", round_significant(edge.weight, 6)}});
  }
  doc["retention_quantile"] = network.retention_quantile;
  return doc.dump(2);
}

std::string to_dot(const NetworkExport& network) {
  double max_weight = 0.0;
  for (const NetworkEdge& edge : network.edges) {
    max_weight = std::max(max_weight, edge.weight);
  }
  const double pen_scale = max_weight > 0.0 ? 4.0 / max_weight : 0.0;

  std::ostringstream out;
  out << "digraph spillovers {\n";
  for (const std::string& node : network.nodes) {
    out << "  " << dot_quote(node) << ";\n";
  }
  for (const NetworkEdge& edge : network.edges) {
    out << "  " << dot_quote(edge.source) << " -> " << dot_quote(edge.target)
        << " [label=" << round_significant(edge.weight, 6)
        << ", penwidth=" << round_significant(pen_scale * edge.weight, 6)
        << "];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace tlasso
