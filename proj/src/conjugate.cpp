#include "signvar/conjugate.hpp"

#include "signvar/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <string>

namespace signvar {

namespace {

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& A) { return 0.5 * (A + A.transpose()); }

Eigen::LLT<Eigen::MatrixXd> checked_llt(const Eigen::MatrixXd& A, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(std::string(what) + " is not positive definite");
  }
  return llt;
}

}  // namespace

void NiwParams::validate() const {
  const int n_ = n();
  if (Phi.cols() != n_ || Psi.cols() != n_) throw ConfigError("NIW: inconsistent dimensions");
  if (nu < n_) throw ConfigError("NIW: nu must be >= n");
  checked_llt(Phi, "NIW Phi");
  if (!flat_coefficients) {
    if (Omega.rows() != m() || Omega.cols() != m()) {
      throw ConfigError("NIW: Omega must be m x m");
    }
    if (m() > 0) checked_llt(Omega, "NIW Omega");
  }
}

NiwFactors factorize(const NiwParams& params) {
  if (params.flat_coefficients) {
    throw NumericalError("factorize: cannot sample from an improper flat-coefficient NIW");
  }
  NiwFactors out;
  const int m = params.m();
  if (m > 0) {
    auto llt = checked_llt(params.Omega, "Omega");
    out.omega_chol = llt.matrixL();
    out.omega_inv = symmetrized(llt.solve(Eigen::MatrixXd::Identity(m, m)));
  } else {
    out.omega_chol.resize(0, 0);
    out.omega_inv.resize(0, 0);
  }
  auto phi = checked_llt(params.Phi, "Phi");
  const Eigen::MatrixXd L = phi.matrixL();
  // (L')^{-1} (L')^{-T} = (L L')^{-1}
  out.phi_inv_root = L.transpose().triangularView<Eigen::Upper>().solve(
      Eigen::MatrixXd::Identity(params.n(), params.n()));
  return out;
}

Eigen::Index OrthogonalLatent::offset(int j) const {
  // sum_{k<j} (n - k)
  return static_cast<Eigen::Index>(j) * n - static_cast<Eigen::Index>(j) * (j - 1) / 2;
}

NiwParams posterior_update(const NiwParams& prior, const TimeSeriesData& data) {
  prior.validate();
  const int n = prior.n();
  const int m = prior.m();
  if (data.Y.cols() != n || data.X.cols() != m || data.X.rows() != data.Y.rows()) {
    throw DataError("posterior_update: data dimensions do not match the prior");
  }
  if (data.T() == 0) return prior;

  Eigen::MatrixXd omega_inv = Eigen::MatrixXd::Zero(m, m);
  if (!prior.flat_coefficients && m > 0) {
    omega_inv = symmetrized(
        checked_llt(prior.Omega, "prior Omega").solve(Eigen::MatrixXd::Identity(m, m)));
  }

  const Eigen::MatrixXd XtX = data.X.transpose() * data.X;
  const Eigen::MatrixXd precision = symmetrized(XtX + omega_inv);
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (m > 0 && llt.info() != Eigen::Success) {
    throw NumericalError("posterior_update: X'X + Omega^{-1} is singular");
  }

  NiwParams post;
  post.nu = prior.nu + static_cast<int>(data.T());
  if (m > 0) {
    post.Omega = symmetrized(llt.solve(Eigen::MatrixXd::Identity(m, m)));
    post.Psi = llt.solve(data.X.transpose() * data.Y + omega_inv * prior.Psi);
  } else {
    post.Omega.resize(0, 0);
    post.Psi.resize(0, n);
  }
  post.Phi = symmetrized(data.Y.transpose() * data.Y + prior.Phi +
                         prior.Psi.transpose() * omega_inv * prior.Psi -
                         post.Psi.transpose() * precision * post.Psi);
  post.validate();
  return post;
}

Eigen::MatrixXd sample_orthogonal_haar(const OrthogonalLatent& latent) {
  const int n = latent.n;
  if (n < 1 || latent.values.size() != OrthogonalLatent::size_for(n)) {
    throw NumericalError("gamma: latent has the wrong size");
  }
  Eigen::MatrixXd Q(n, n);
  Eigen::MatrixXd basis = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd y;
  Eigen::VectorXd w;
  Eigen::Index offset = 0;
  for (int j = 0; j < n; ++j) {
    const int k = n - j;
    const auto seg = latent.values.segment(offset, k);
    const double norm = seg.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw NumericalError("gamma: latent column " + std::to_string(j) + " has zero norm");
    }
    y = seg / norm;
    Q.col(j).noalias() = basis * y;
    if (k > 1) {
      // Householder H with H e_1 = +-y; its trailing columns span y's complement.
      w = y;
      if (y(0) > 0.0) {
        w(0) += 1.0;
      } else {
        w = -w;
        w(0) += 1.0;
      }
      const double beta = 2.0 / w.squaredNorm();
      const Eigen::VectorXd bw = basis * w;
      Eigen::MatrixXd next = basis.rightCols(k - 1);
      next.noalias() -= beta * bw * w.tail(k - 1).transpose();
      basis = std::move(next);
    }
    offset += k;
  }
  return Q;
}

OrthogonalLatent orthogonal_latent_from(const Eigen::MatrixXd& Q) {
  const int n = static_cast<int>(Q.rows());
  if (Q.cols() != n || orthogonality_error(Q) >= 1e-8) {
    throw NumericalError("orthogonal_latent_from: Q is not orthogonal");
  }
  OrthogonalLatent out{n, Eigen::VectorXd(OrthogonalLatent::size_for(n))};
  Eigen::MatrixXd basis = Eigen::MatrixXd::Identity(n, n);
  Eigen::Index offset = 0;
  for (int j = 0; j < n; ++j) {
    const int k = n - j;
    Eigen::VectorXd y = basis.transpose() * Q.col(j);
    y.normalize();
    out.values.segment(offset, k) = y;
    if (k > 1) {
      Eigen::VectorXd w = y;
      if (y(0) > 0.0) {
        w(0) += 1.0;
      } else {
        w = -w;
        w(0) += 1.0;
      }
      const double beta = 2.0 / w.squaredNorm();
      const Eigen::VectorXd bw = basis * w;
      Eigen::MatrixXd next = basis.rightCols(k - 1);
      next.noalias() -= beta * bw * w.tail(k - 1).transpose();
      basis = std::move(next);
    }
    offset += k;
  }
  return out;
}

Eigen::MatrixXd sample_inverse_wishart(const WishartLatent& latent) {
  const Eigen::Index n = latent.r.rows();
  if (latent.r.cols() < n) throw NumericalError("varsigma: R needs at least n columns");
  Eigen::MatrixXd precision = Eigen::MatrixXd::Zero(n, n);
  precision.selfadjointView<Eigen::Lower>().rankUpdate(latent.r);
  Eigen::LLT<Eigen::MatrixXd> llt(precision.selfadjointView<Eigen::Lower>());
  if (llt.info() != Eigen::Success) throw NumericalError("varsigma: R R' is singular");
  Eigen::MatrixXd Sigma = symmetrized(llt.solve(Eigen::MatrixXd::Identity(n, n)));
  if (!Sigma.allFinite()) throw NumericalError("varsigma: R R' is singular");
  return Sigma;
}

WishartLatent wishart_latent_from(const Eigen::MatrixXd& Sigma, int nu) {
  const Eigen::Index n = Sigma.rows();
  if (nu < n) throw ConfigError("wishart_latent_from: nu must be >= n");
  const Eigen::MatrixXd L = chol_factor(Sigma);
  // C C' = Sigma^{-1} with C = (L')^{-1}
  WishartLatent out{Eigen::MatrixXd::Zero(n, nu)};
  out.r.leftCols(n) =
      L.transpose().triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(n, n));
  return out;
}

Eigen::MatrixXd matrix_normal_from_factors(const Eigen::MatrixXd& mean,
                                           const Eigen::MatrixXd& omega_chol,
                                           const Eigen::MatrixXd& sigma_chol,
                                           const Eigen::MatrixXd& noise) {
  if (noise.rows() != mean.rows() || noise.cols() != mean.cols()) {
    throw NumericalError("matrix normal: noise has the wrong shape");
  }
  if (mean.rows() == 0) return mean;
  Eigen::MatrixXd out = mean;
  out.noalias() += omega_chol.triangularView<Eigen::Lower>() * noise *
                   sigma_chol.transpose().triangularView<Eigen::Upper>();
  return out;
}

Eigen::MatrixXd sample_matrix_normal_b(const Eigen::MatrixXd& mean, const Eigen::MatrixXd& Sigma,
                                       const Eigen::MatrixXd& Omega, const Eigen::MatrixXd& noise) {
  const Eigen::MatrixXd sigma_chol = chol_factor(Sigma);
  if (mean.rows() == 0) return mean;
  const Eigen::MatrixXd omega_chol = chol_factor(Omega);
  return matrix_normal_from_factors(mean, omega_chol, sigma_chol, noise);
}

double log_density_b(const Eigen::MatrixXd& B, const Eigen::MatrixXd& Psi,
                     const Eigen::MatrixXd& Sigma, const Eigen::MatrixXd& Omega) {
  const Eigen::MatrixXd sigma_chol = chol_factor(Sigma);
  const auto m = static_cast<double>(B.rows());
  const double log_det_sigma = 2.0 * sigma_chol.diagonal().array().log().sum();
  if (B.rows() == 0) return -0.5 * m * log_det_sigma;
  const Eigen::MatrixXd omega_chol = chol_factor(Omega);
  // tr(Sigma^{-1} E' Omega^{-1} E) = || L_Sigma^{-1} E' L_Omega^{-T} ||_F^2
  const Eigen::MatrixXd W = omega_chol.triangularView<Eigen::Lower>().solve(B - Psi);
  const Eigen::MatrixXd V =
      sigma_chol.triangularView<Eigen::Lower>().solve(W.transpose());
  return -0.5 * m * log_det_sigma - 0.5 * V.squaredNorm();
}

OrthogonalLatent draw_orthogonal_latent(int n, Rng& rng) {
  return OrthogonalLatent{n, rng.normal_vector(OrthogonalLatent::size_for(n))};
}

WishartLatent draw_wishart_latent(const NiwFactors& factors, int nu, Rng& rng) {
  const Eigen::Index n = factors.phi_inv_root.rows();
  const Eigen::MatrixXd Z = rng.normal_matrix(n, nu);
  return WishartLatent{factors.phi_inv_root.triangularView<Eigen::Upper>() * Z};
}

ReducedFormParams draw_niw(const NiwParams& params, const NiwFactors& factors, Rng& rng) {
  ReducedFormParams out;
  out.Sigma = sample_inverse_wishart(draw_wishart_latent(factors, params.nu, rng));
  const Eigen::MatrixXd Z = rng.normal_matrix(params.m(), params.n());
  out.B = matrix_normal_from_factors(params.Psi, factors.omega_chol, chol_factor(out.Sigma), Z);
  return out;
}

NiwParams minnesota_niw(const ModelSpec& spec, const TimeSeriesData& data,
                        const MinnesotaHyper& hyper) {
  const int n = spec.n;
  const int p = spec.p;
  const int m = spec.m();
  if (data.T() == 0) throw DataError("minnesota_niw: data is empty");
  if (data.Y.cols() != n || data.X.cols() != m) {
    throw DataError("minnesota_niw: data dimensions do not match the model");
  }
  if (!(hyper.tightness > 0.0) || !(hyper.deterministic_scale > 0.0)) {
    throw ConfigError("minnesota_niw: tightness and deterministic_scale must be positive");
  }
  const int n_det = static_cast<int>(spec.deterministic.size());
  const Eigen::Index T = data.T();

  // Univariate AR(p) residual variances: own lags plus deterministic terms.
  Eigen::VectorXd scale(n);
  for (int j = 0; j < n; ++j) {
    const int k = p + n_det;
    Eigen::MatrixXd Z(T, k);
    for (int lag = 1; lag <= p; ++lag) Z.col(lag - 1) = data.X.col((lag - 1) * n + j);
    if (n_det > 0) Z.rightCols(n_det) = data.X.rightCols(n_det);
    const Eigen::VectorXd y = data.Y.col(j);
    Eigen::VectorXd resid = y;
    if (k > 0) {
      const Eigen::VectorXd coef = Z.colPivHouseholderQr().solve(y);
      resid = y - Z * coef;
    }
    const double dof = static_cast<double>(T > k ? T - k : T);
    scale(j) = resid.squaredNorm() / dof;
    const double level = std::max(y.squaredNorm() / static_cast<double>(T), 1e-300);
    if (!(scale(j) > 1e-20 * level) || !std::isfinite(scale(j))) {
      throw DataError("minnesota_niw: series " + std::to_string(j) +
                      " has zero residual variance");
    }
  }

  NiwParams prior;
  prior.nu = hyper.nu.value_or(n + 2);
  if (prior.nu < n) throw ConfigError("minnesota_niw: nu must be >= n");
  const double phi_scale = std::max(1, prior.nu - n - 1);
  prior.Phi = phi_scale * scale.asDiagonal().toDenseMatrix();
  prior.Psi = Eigen::MatrixXd::Zero(m, n);
  prior.Omega = Eigen::MatrixXd::Zero(m, m);
  const double lambda2 = hyper.tightness * hyper.tightness;
  for (int lag = 1; lag <= p; ++lag) {
    const double decay = std::pow(static_cast<double>(lag), 2.0 * hyper.lag_decay);
    for (int j = 0; j < n; ++j) {
      const int row = (lag - 1) * n + j;
      prior.Omega(row, row) = lambda2 / (decay * scale(j));
      if (lag == 1) prior.Psi(row, j) = hyper.own_lag_mean;
    }
  }
  for (int d = 0; d < n_det; ++d) {
    const int row = n * p + d;
    prior.Omega(row, row) = lambda2 * hyper.deterministic_scale * hyper.deterministic_scale;
  }
  return prior;
}

}  // namespace signvar
