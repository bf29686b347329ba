#include "signvar/model.hpp"

#include "signvar/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>

namespace signvar {

int ModelSpec::exogenous_count() const {
  return static_cast<int>(
      std::count(deterministic.begin(), deterministic.end(), DeterministicKind::Exogenous));
}

void ModelSpec::validate() const {
  if (n < 1) throw ConfigError("model: n must be >= 1");
  if (p < 0) throw ConfigError("model: p must be >= 0");
}

TimeSeriesData build_regressors(const Eigen::MatrixXd& raw, const ModelSpec& spec,
                                const std::optional<Eigen::MatrixXd>& exogenous) {
  spec.validate();
  if (raw.cols() != spec.n) {
    throw DataError("build_regressors: raw data has " + std::to_string(raw.cols()) +
                    " columns, model expects " + std::to_string(spec.n));
  }
  const Eigen::Index t_raw = raw.rows();
  if (t_raw <= spec.p) {
    throw DataError("build_regressors: need more than p=" + std::to_string(spec.p) +
                    " rows, got " + std::to_string(t_raw));
  }
  if (!raw.allFinite()) throw DataError("build_regressors: raw data contains non-finite values");

  const int k = spec.exogenous_count();
  if (k > 0) {
    if (!exogenous || exogenous->cols() != k) {
      throw DataError("build_regressors: expected " + std::to_string(k) + " exogenous columns");
    }
    if (exogenous->rows() != t_raw) {
      throw DataError("build_regressors: exogenous rows do not match data rows");
    }
    if (!exogenous->allFinite()) {
      throw DataError("build_regressors: exogenous data contains non-finite values");
    }
  } else if (exogenous && exogenous->cols() != 0) {
    throw DataError("build_regressors: exogenous columns supplied but model declares none");
  }

  const Eigen::Index T = t_raw - spec.p;
  const int n = spec.n;
  TimeSeriesData out;
  out.Y = raw.bottomRows(T);
  out.X.resize(T, spec.m());
  for (int lag = 1; lag <= spec.p; ++lag) {
    out.X.middleCols((lag - 1) * n, n) = raw.middleRows(spec.p - lag, T);
  }
  int col = n * spec.p;
  int exo = 0;
  for (auto kind : spec.deterministic) {
    if (kind == DeterministicKind::Constant) {
      out.X.col(col).setOnes();
    } else {
      out.X.col(col) = exogenous->col(exo++).tail(T);
    }
    ++col;
  }
  return out;
}

Eigen::MatrixXd chol_factor(const Eigen::MatrixXd& Sigma) {
  if (Sigma.rows() != Sigma.cols() || Sigma.rows() == 0) {
    throw NumericalError("chol_factor: matrix must be square and nonempty");
  }
  const double scale = std::max(1.0, Sigma.cwiseAbs().maxCoeff());
  if ((Sigma - Sigma.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale) {
    throw NumericalError("chol_factor: matrix is not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(Sigma);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("chol_factor: matrix is not positive definite");
  }
  Eigen::MatrixXd L = llt.matrixL();
  if (!L.allFinite() || (L.diagonal().array() <= 0.0).any()) {
    throw NumericalError("chol_factor: matrix is not positive definite");
  }
  return L;
}

double orthogonality_error(const Eigen::MatrixXd& Q) {
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(Q.cols(), Q.cols());
  return (Q.transpose() * Q - I).cwiseAbs().maxCoeff();
}

void validate(const OrthogonalParams& params) {
  const Eigen::Index n = params.Sigma.rows();
  if (params.Sigma.cols() != n || params.Q.rows() != n || params.Q.cols() != n ||
      params.B.cols() != n) {
    throw NumericalError("OrthogonalParams: inconsistent dimensions");
  }
  chol_factor(params.Sigma);
  if (orthogonality_error(params.Q) >= kOrthogonalityTol) {
    throw NumericalError("OrthogonalParams: Q is not orthogonal");
  }
}

StructuralParams map_f(const OrthogonalParams& params) {
  const Eigen::MatrixXd L = chol_factor(params.Sigma);
  // h(Sigma)^{-1} Q = (L')^{-1} Q
  StructuralParams out;
  out.A0 = L.transpose().triangularView<Eigen::Upper>().solve(params.Q);
  out.Aplus = params.B * out.A0;
  return out;
}

OrthogonalParams map_f_inverse(const StructuralParams& params) {
  const Eigen::Index n = params.A0.rows();
  if (params.A0.cols() != n || params.Aplus.cols() != n) {
    throw NumericalError("map_f_inverse: inconsistent dimensions");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(params.A0);
  const auto& sv = svd.singularValues();
  if (!(sv.minCoeff() > 1e-12 * sv.maxCoeff())) {
    throw NumericalError("map_f_inverse: A0 is singular");
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(params.A0);
  const Eigen::MatrixXd A0_inv = lu.inverse();

  OrthogonalParams out;
  out.Sigma = A0_inv.transpose() * A0_inv;  // (A0 A0')^{-1}
  out.Sigma = 0.5 * (out.Sigma + out.Sigma.transpose()).eval();
  const Eigen::MatrixXd L = chol_factor(out.Sigma);
  out.Q = L.transpose() * params.A0;
  out.B = params.Aplus * A0_inv;
  return out;
}

ImpulseResponses compute_irfs_from_impact(const Eigen::MatrixXd& B, const Eigen::MatrixXd& L0,
                                          int p, int H) {
  if (H < 0) throw ConfigError("compute_irfs: horizon must be nonnegative");
  const Eigen::Index n = L0.rows();
  ImpulseResponses out;
  out.L.reserve(static_cast<std::size_t>(H) + 1);
  out.L.push_back(L0);
  for (int h = 1; h <= H; ++h) {
    Eigen::MatrixXd Lh = Eigen::MatrixXd::Zero(n, L0.cols());
    for (int k = 1; k <= std::min(h, p); ++k) {
      Lh.noalias() += B.middleRows((k - 1) * n, n).transpose() *
                      out.L[static_cast<std::size_t>(h - k)];
    }
    out.L.push_back(std::move(Lh));
  }
  return out;
}

ImpulseResponses compute_irfs(const OrthogonalParams& params, const ModelSpec& spec, int H) {
  if (H < 0) throw ConfigError("compute_irfs: horizon must be nonnegative");
  const Eigen::MatrixXd L0 = chol_factor(params.Sigma) * params.Q;
  return compute_irfs_from_impact(params.B, L0, spec.p, H);
}

}  // namespace signvar
