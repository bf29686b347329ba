#include "signvar/diagnostics.hpp"

#include "signvar/error.hpp"
#include "signvar/format.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace signvar {

namespace {

constexpr double kCollinearTol = 1e-10;

void check_shape(const DrawsMatrix& draws, int batch_size) {
  if (batch_size < 1) throw ConfigError("diagnostics: batch_size must be >= 1");
  if (draws.rows() < 2LL * batch_size) {
    throw ConfigError("diagnostics: need at least 2 * batch_size = " +
                      std::to_string(2LL * batch_size) + " draws, got " +
                      std::to_string(draws.rows()));
  }
  if (!draws.allFinite()) throw NumericalError("diagnostics: draws contain non-finite values");
}

/// Batch means of the first a * b rows, a = floor(N / b).
Eigen::MatrixXd batch_means(const DrawsMatrix& draws, int b) {
  const Eigen::Index a = draws.rows() / b;
  Eigen::MatrixXd means(a, draws.cols());
  for (Eigen::Index k = 0; k < a; ++k) {
    means.row(k) = draws.middleRows(k * b, b).colwise().mean();
  }
  return means;
}

Eigen::MatrixXd batch_covariance(const Eigen::MatrixXd& means, int b) {
  const Eigen::Index a = means.rows();
  const Eigen::MatrixXd c = means.rowwise() - means.colwise().mean();
  return (static_cast<double>(b) / static_cast<double>(a - 1)) * (c.transpose() * c);
}

Eigen::MatrixXd sample_covariance(const DrawsMatrix& draws) {
  const Eigen::MatrixXd c = draws.rowwise() - draws.colwise().mean();
  return (c.transpose() * c) / static_cast<double>(draws.rows() - 1);
}

double log_det_spd(const Eigen::MatrixXd& m, bool& ok) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  ok = llt.info() == Eigen::Success;
  if (!ok) return 0.0;
  const Eigen::VectorXd d = llt.matrixLLT().diagonal();
  if ((d.array() <= 0.0).any()) {
    ok = false;
    return 0.0;
  }
  return 2.0 * d.array().log().sum();
}

Eigen::MatrixXd select(const Eigen::MatrixXd& m, const std::vector<int>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t j = 0; j < idx.size(); ++j) out(i, j) = m(idx[i], idx[j]);
  }
  return out;
}

}  // namespace

DrawsMatrix contemporaneous_irf_matrix(const std::vector<OrthogonalParams>& draws,
                                       const std::vector<int>& shocks) {
  if (draws.empty()) return {};
  const int n = static_cast<int>(draws.front().Sigma.rows());
  std::vector<int> cols = shocks;
  if (cols.empty()) {
    for (int j = 0; j < n; ++j) cols.push_back(j);
  }
  for (int s : cols) {
    if (s < 0 || s >= n) throw ConfigError("diagnostics: shock index out of range");
  }
  DrawsMatrix out(static_cast<Eigen::Index>(draws.size()),
                  static_cast<Eigen::Index>(cols.size()) * n);
  for (std::size_t k = 0; k < draws.size(); ++k) {
    const Eigen::MatrixXd L0 = chol_factor(draws[k].Sigma) * draws[k].Q;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      out.block(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c) * n, 1, n) =
          L0.col(cols[c]).transpose();
    }
  }
  return out;
}

MessResult multivariate_ess_detail(const DrawsMatrix& draws, int batch_size) {
  check_shape(draws, batch_size);
  const Eigen::Index N = draws.rows();
  const Eigen::Index d = draws.cols();
  if (d == 0) throw ConfigError("diagnostics: draws matrix has no columns");

  const Eigen::MatrixXd lambda = sample_covariance(draws);
  const double max_var = lambda.diagonal().maxCoeff();
  MessResult out;
  if (!(max_var > 0.0)) {
    throw NumericalError("diagnostics: every coordinate is constant; ESS is undefined");
  }

  std::vector<int> keep;
  for (int j = 0; j < d; ++j) {
    if (lambda(j, j) < kRankDropTol * max_var) {
      out.dropped.push_back(j);
      continue;
    }
    // Keep j only if it is not (numerically) a linear combination of the kept set.
    std::vector<int> trial = keep;
    trial.push_back(j);
    Eigen::MatrixXd sub = select(lambda, trial);
    const Eigen::VectorXd sd = sub.diagonal().cwiseSqrt();
    sub = sd.cwiseInverse().asDiagonal() * sub * sd.cwiseInverse().asDiagonal();
    Eigen::LLT<Eigen::MatrixXd> llt(sub);
    const double pivot = llt.info() == Eigen::Success ? llt.matrixLLT().diagonal().minCoeff() : 0.0;
    if (pivot * pivot > kCollinearTol) {
      keep = std::move(trial);
    } else {
      out.dropped.push_back(j);
    }
  }
  if (!out.dropped.empty()) {
    std::ostringstream msg;
    msg << "dropped " << out.dropped.size() << " of " << d
        << " coordinates with (near-)singular covariance before computing mESS";
    out.warnings.push_back(msg.str());
  }

  Eigen::MatrixXd reduced(N, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) reduced.col(static_cast<Eigen::Index>(c)) = draws.col(keep[c]);
  const Eigen::MatrixXd lam = select(lambda, keep);
  const Eigen::MatrixXd sbm = batch_covariance(batch_means(reduced, batch_size), batch_size);

  bool ok = false;
  const double ld_lam = log_det_spd(lam, ok);
  if (!ok) throw NumericalError("diagnostics: sample covariance is singular after reduction");
  const double ld_bm = log_det_spd(sbm, ok);
  if (!ok) {
    throw NumericalError("diagnostics: batch-means covariance is singular; use more draws or a "
                         "smaller batch size (need more batches than dimensions)");
  }
  out.dims_used = static_cast<int>(keep.size());
  out.mess = static_cast<double>(N) * std::exp((ld_lam - ld_bm) / out.dims_used);
  return out;
}

double multivariate_ess(const DrawsMatrix& draws, int batch_size) {
  return multivariate_ess_detail(draws, batch_size).mess;
}

Eigen::VectorXd univariate_ess(const DrawsMatrix& draws, int batch_size) {
  check_shape(draws, batch_size);
  const Eigen::MatrixXd means = batch_means(draws, batch_size);
  const double N = static_cast<double>(draws.rows());
  Eigen::VectorXd out(draws.cols());
  for (Eigen::Index j = 0; j < draws.cols(); ++j) {
    const Eigen::VectorXd x = draws.col(j);
    const double var = (x.array() - x.mean()).square().sum() / (N - 1.0);
    const Eigen::VectorXd mu = means.col(j);
    const double a = static_cast<double>(mu.size());
    const double bm = batch_size / (a - 1.0) * (mu.array() - mu.mean()).square().sum();
    out(j) = (var > 0.0 && bm > 0.0) ? N * var / bm : 0.0;
  }
  return out;
}

double draws_per_iid(double n_draws, double mess) {
  if (!(mess > 0.0)) throw NumericalError("draws_per_iid: mESS must be positive");
  return n_draws / mess;
}

double minutes_per_1000_effective(double wall_minutes, double mess) {
  if (!(mess > 0.0)) throw NumericalError("minutes_per_1000_effective: mESS must be positive");
  return 1000.0 * wall_minutes / mess;
}

DiagnosticsReport diagnose(const DrawsMatrix& draws, int batch_size,
                           std::optional<double> wall_minutes) {
  DiagnosticsReport r;
  r.draws = draws.rows();
  r.dims = static_cast<int>(draws.cols());
  r.batch_size = batch_size;
  MessResult m = multivariate_ess_detail(draws, batch_size);
  r.mess = m.mess;
  r.dims_used = m.dims_used;
  r.warnings = std::move(m.warnings);
  r.per_dim_ess = univariate_ess(draws, batch_size);
  r.draws_per_iid = draws_per_iid(static_cast<double>(r.draws), r.mess);
  if (r.mess > 1.05 * static_cast<double>(r.draws)) {
    r.warnings.push_back("mESS exceeds the number of draws by more than 5%; too few batches for a "
                         "stable estimate");
  }
  r.wall_minutes = wall_minutes;
  if (wall_minutes) r.minutes_per_1000_effective = minutes_per_1000_effective(*wall_minutes, r.mess);
  return r;
}

nlohmann::json to_json(const DiagnosticsReport& report) {
  nlohmann::json j;
  j["draws"] = report.draws;
  j["dims"] = report.dims;
  j["dims_used"] = report.dims_used;
  j["batch_size"] = report.batch_size;
  j["mess"] = report.mess;
  j["draws_per_iid"] = report.draws_per_iid;
  j["per_dim_ess"] = std::vector<double>(report.per_dim_ess.data(),
                                         report.per_dim_ess.data() + report.per_dim_ess.size());
  j["wall_minutes"] = report.wall_minutes ? nlohmann::json(*report.wall_minutes) : nlohmann::json();
  j["minutes_per_1000_effective"] = report.minutes_per_1000_effective
                                        ? nlohmann::json(*report.minutes_per_1000_effective)
                                        : nlohmann::json();
  j["warnings"] = report.warnings;
  return j;
}

double sorted_quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw ConfigError("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

IrfBands irf_bands(const std::vector<ImpulseResponses>& draws, const std::vector<double>& quantiles) {
  if (draws.empty()) throw ConfigError("irf_bands: no draws");
  if (quantiles.empty()) throw ConfigError("irf_bands: no quantile levels");
  for (double q : quantiles) {
    if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("irf_bands: quantile levels must lie in [0, 1]");
  }
  IrfBands bands;
  bands.quantiles = quantiles;
  bands.horizon = draws.front().horizon();
  bands.variables = static_cast<int>(draws.front().L.front().rows());
  bands.shocks = static_cast<int>(draws.front().L.front().cols());
  for (const auto& d : draws) {
    if (d.horizon() != bands.horizon) throw ConfigError("irf_bands: draws differ in horizon");
  }
  const std::size_t nq = quantiles.size();
  bands.values.resize(static_cast<std::size_t>(bands.horizon + 1) *
                      static_cast<std::size_t>(bands.shocks * bands.variables) * nq);
  std::vector<double> cell(draws.size());
  std::size_t idx = 0;
  for (int h = 0; h <= bands.horizon; ++h) {
    for (int s = 0; s < bands.shocks; ++s) {
      for (int v = 0; v < bands.variables; ++v) {
        for (std::size_t k = 0; k < draws.size(); ++k) cell[k] = draws[k](v, s, h);
        std::sort(cell.begin(), cell.end());
        for (double q : quantiles) bands.values[idx++] = sorted_quantile(cell, q);
      }
    }
  }
  return bands;
}

namespace {

void write_csv_field(std::ostream& out, const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) {
    out << field;
    return;
  }
  out << '"';
  for (char c : field) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

}  // namespace

void write_bands_csv(std::ostream& out, const IrfBands& bands,
                     const std::vector<std::string>& variable_names) {
  out << "variable,shock,horizon";
  for (double q : bands.quantiles) out << ",q" << format_short(q);
  out << '\n';
  for (int h = 0; h <= bands.horizon; ++h) {
    for (int s = 0; s < bands.shocks; ++s) {
      for (int v = 0; v < bands.variables; ++v) {
        if (static_cast<std::size_t>(v) < variable_names.size()) {
          write_csv_field(out, variable_names[static_cast<std::size_t>(v)]);
        } else {
          out << v;
        }
        out << ',' << s << ',' << h;
        for (std::size_t k = 0; k < bands.quantiles.size(); ++k) {
          out << ',' << format_double(bands(v, s, h, k));
        }
        out << '\n';
      }
    }
  }
}

}  // namespace signvar
