#pragma once
//
// JSON run configuration (schema_version 1). Minimal example:
//
//   {
//     "schema_version": 1,
//     "data_path": "data.csv",
//     "model": {"lags": 2, "deterministic": ["constant"]},
//     "prior": {"kind": "minnesota"},
//     "restrictions": [{"kind": "sign", "shock": 0, "variable": "gdp", "horizon": [0, 2], "sign": 1}],
//     "sampler": {"algorithm": "gibbs", "iterations": 100000, "seed": 7},
//     "output": {"directory": "out", "irf_horizon": 20}
//   }
//
// Relative paths are resolved against the directory of the config file.

#include "signvar/conjugate.hpp"
#include "signvar/gibbs.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace signvar {

inline constexpr int kSchemaVersion = 1;

enum class Algorithm { Gibbs, AcceptReject };

struct DeterministicTerm {
  enum class Kind { Constant, Trend, Seasonal, Exogenous };
  Kind kind = Kind::Constant;
  int period = 0;      // Seasonal: period - 1 dummies
  std::string column;  // Exogenous: CSV column name
};

struct PriorConfig {
  enum class Kind { Minnesota, Flat, Niw };
  Kind kind = Kind::Minnesota;
  MinnesotaHyper minnesota;
  // Flat: improper on B, IW(nu, phi_scale * I) on Sigma.
  std::optional<int> flat_nu;
  double flat_phi_scale = 1e-4;
  // Explicit NIW.
  NiwParams niw;
};

struct SamplerSection {
  Algorithm algorithm = Algorithm::Gibbs;
  SamplerConfig gibbs;
  int chains = 1;
  long long draws = 1000;  // accept-reject: accepted draws
  long long proposal_budget = 10'000'000;
};

struct OutputConfig {
  std::filesystem::path directory = "output";
  std::string draws_path = "draws.bin";
  std::string summary_path = "irf_bands.csv";
  std::string diagnostics_path = "diagnostics.json";
  std::string config_echo_path = "config.resolved.json";
  int irf_horizon = 20;
  bool draws_csv = false;
  bool record_timing = true;
  int batch_size = 100;
  std::vector<double> quantiles{0.16, 0.50, 0.84};
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  std::filesystem::path data_path;
  std::vector<std::string> columns;  // empty: every numeric column
  int lags = 1;
  std::vector<DeterministicTerm> deterministic{DeterministicTerm{}};
  PriorConfig prior;
  nlohmann::json restrictions = nlohmann::json::array();
  bool normalize_shocks = false;
  SamplerSection sampler;
  OutputConfig output;
};

/// Throws ConfigError with the offending key on any schema violation.
RunConfig parse_config(const nlohmann::json& j,
                       const std::filesystem::path& base_dir = std::filesystem::path());
RunConfig load_config(const std::filesystem::path& path);

/// Canonical form with every default filled in.
nlohmann::json to_json(const RunConfig& config);

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& what);
nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);

}  // namespace signvar
