#pragma once

#include "signvar/model.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace signvar {

inline constexpr int kDefaultBatchSize = 100;
inline constexpr double kRankDropTol = 1e-14;

/// N x d, one row per stored draw.
using DrawsMatrix = Eigen::MatrixXd;

/// Row k holds vec of the impact responses L_0 = chol(Sigma) Q restricted to
/// the given shock columns (all shocks when `shocks` is empty).
DrawsMatrix contemporaneous_irf_matrix(const std::vector<OrthogonalParams>& draws,
                                       const std::vector<int>& shocks = {});

struct MessResult {
  double mess = 0.0;
  int dims_used = 0;
  std::vector<int> dropped;  // coordinates removed before the determinant
  std::vector<std::string> warnings;
};

/// Batch-means multivariate ESS, N (det Lambda / det Sigma_bm)^{1/d}.
/// Near-constant or collinear coordinates are dropped with a warning. Throws
/// NumericalError when nothing is left and ConfigError when N < 2 batch_size.
MessResult multivariate_ess_detail(const DrawsMatrix& draws, int batch_size = kDefaultBatchSize);
double multivariate_ess(const DrawsMatrix& draws, int batch_size = kDefaultBatchSize);

/// Per-coordinate batch-means ESS; 0 for constant coordinates.
Eigen::VectorXd univariate_ess(const DrawsMatrix& draws, int batch_size = kDefaultBatchSize);

double draws_per_iid(double n_draws, double mess);
double minutes_per_1000_effective(double wall_minutes, double mess);

struct DiagnosticsReport {
  long long draws = 0;
  int dims = 0;
  int dims_used = 0;
  int batch_size = kDefaultBatchSize;
  double mess = 0.0;
  Eigen::VectorXd per_dim_ess;
  double draws_per_iid = 0.0;
  std::optional<double> wall_minutes;
  std::optional<double> minutes_per_1000_effective;
  std::vector<std::string> warnings;
};

DiagnosticsReport diagnose(const DrawsMatrix& draws, int batch_size = kDefaultBatchSize,
                           std::optional<double> wall_minutes = std::nullopt);

nlohmann::json to_json(const DiagnosticsReport& report);

/// Type-7 (linear interpolation) sample quantile of an ascending sorted range.
double sorted_quantile(const std::vector<double>& sorted, double q);

struct IrfBands {
  std::vector<double> quantiles;
  int variables = 0;
  int shocks = 0;
  int horizon = 0;
  std::vector<double> values;  // [((h * shocks + s) * variables + v) * nq + k]

  [[nodiscard]] double operator()(int variable, int shock, int h, std::size_t k) const {
    const auto idx = ((static_cast<std::size_t>(h) * static_cast<std::size_t>(shocks) +
                       static_cast<std::size_t>(shock)) *
                          static_cast<std::size_t>(variables) +
                      static_cast<std::size_t>(variable)) *
                         quantiles.size() +
                     k;
    return values[idx];
  }
};

inline const std::vector<double> kDefaultBandQuantiles{0.16, 0.50, 0.84};

/// Point-wise quantiles per (variable, shock, horizon). Throws ConfigError on
/// empty input or quantile levels outside [0, 1].
IrfBands irf_bands(const std::vector<ImpulseResponses>& draws,
                   const std::vector<double>& quantiles = kDefaultBandQuantiles);

/// CSV with columns variable, shock, horizon, q<level>...; one row per cell.
void write_bands_csv(std::ostream& out, const IrfBands& bands,
                     const std::vector<std::string>& variable_names = {});

}  // namespace signvar
