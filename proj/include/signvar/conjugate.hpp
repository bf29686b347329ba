#pragma once
//
// Normal-inverse-Wishart machinery and the latent Gaussian representations
// used by the samplers:
//
//   Q     = gamma(X),  X = (x_1, ..., x_n), x_j in R^{n+1-j} i.i.d. N(0, 1)
//           gives Q Haar-distributed on O(n).
//   Sigma = varsigma(R) = (R R')^{-1},  R n x nu, columns i.i.d. N(0, Phi^{-1})
//           gives Sigma ~ IW(nu, Phi).
//   B     = Psi + chol(Omega) Z chol(Sigma)',  Z m x n i.i.d. N(0, 1)
//           gives vec(B) ~ N(vec(Psi), Sigma (x) Omega).

#include "signvar/model.hpp"
#include "signvar/rng.hpp"

#include <Eigen/Core>

#include <optional>

namespace signvar {

struct NiwParams {
  int nu = 0;
  Eigen::MatrixXd Phi;    // n x n SPD
  Eigen::MatrixXd Psi;    // m x n
  Eigen::MatrixXd Omega;  // m x m SPD; ignored when flat_coefficients is set
  /// Represents Omega^{-1} = 0 exactly (improper flat prior on B). Only
  /// meaningful for priors; posteriors are always proper.
  bool flat_coefficients = false;

  [[nodiscard]] int n() const { return static_cast<int>(Phi.rows()); }
  [[nodiscard]] int m() const { return static_cast<int>(Psi.rows()); }
  void validate() const;
};

/// Factorizations of a (posterior) NiwParams reused by every draw.
struct NiwFactors {
  Eigen::MatrixXd omega_chol;    // lower, L L' = Omega
  Eigen::MatrixXd omega_inv;     // Omega^{-1}
  Eigen::MatrixXd phi_inv_root;  // C with C C' = Phi^{-1}
};

NiwFactors factorize(const NiwParams& params);

/// Ragged latent x_1..x_n stored contiguously: x_j occupies n+1-j entries.
struct OrthogonalLatent {
  int n = 0;
  Eigen::VectorXd values;  // length n(n+1)/2

  static Eigen::Index size_for(int n) { return static_cast<Eigen::Index>(n) * (n + 1) / 2; }
  [[nodiscard]] Eigen::Index offset(int j) const;  // 0-based column index j
  [[nodiscard]] auto x(int j) const { return values.segment(offset(j), n - j); }
};

struct WishartLatent {
  Eigen::MatrixXd r;  // n x nu
};

/// Conjugate update. T = 0 returns the prior unchanged.
NiwParams posterior_update(const NiwParams& prior, const TimeSeriesData& data);

/// gamma: latent -> orthogonal matrix. Column j is N_j x_j / |x_j|, where N_j
/// is an orthonormal basis of the complement of columns 0..j-1 obtained by
/// successive Householder completion. Throws NumericalError if some x_j = 0.
Eigen::MatrixXd sample_orthogonal_haar(const OrthogonalLatent& latent);

/// A latent with gamma(latent) == Q (unit-norm x_j). Used to start a chain
/// from a user-supplied state.
OrthogonalLatent orthogonal_latent_from(const Eigen::MatrixXd& Q);

/// varsigma: Sigma = (R R')^{-1}. Throws NumericalError if R R' is singular.
Eigen::MatrixXd sample_inverse_wishart(const WishartLatent& latent);

/// A latent with varsigma(latent) == Sigma, padded to nu columns with zeros.
WishartLatent wishart_latent_from(const Eigen::MatrixXd& Sigma, int nu);

/// B = mean + chol(Omega) Z chol(Sigma)'.
Eigen::MatrixXd sample_matrix_normal_b(const Eigen::MatrixXd& mean, const Eigen::MatrixXd& Sigma,
                                       const Eigen::MatrixXd& Omega, const Eigen::MatrixXd& noise);

/// Same as above with both Cholesky factors precomputed.
Eigen::MatrixXd matrix_normal_from_factors(const Eigen::MatrixXd& mean,
                                           const Eigen::MatrixXd& omega_chol,
                                           const Eigen::MatrixXd& sigma_chol,
                                           const Eigen::MatrixXd& noise);

/// log N(B; Psi, Sigma (x) Omega) up to a constant free of (B, Sigma):
///   -(m/2) log det Sigma - 1/2 tr(Sigma^{-1} (B - Psi)' Omega^{-1} (B - Psi)).
double log_density_b(const Eigen::MatrixXd& B, const Eigen::MatrixXd& Psi,
                     const Eigen::MatrixXd& Sigma, const Eigen::MatrixXd& Omega);

OrthogonalLatent draw_orthogonal_latent(int n, Rng& rng);
WishartLatent draw_wishart_latent(const NiwFactors& factors, int nu, Rng& rng);

/// One joint draw (B, Sigma) ~ NIW(params).
ReducedFormParams draw_niw(const NiwParams& params, const NiwFactors& factors, Rng& rng);

struct MinnesotaHyper {
  double tightness = 0.2;           // overall standard deviation scale
  double lag_decay = 1.0;           // prior sd on lag l shrinks like l^{-lag_decay}
  double own_lag_mean = 1.0;        // prior mean of each first own lag
  double deterministic_scale = 100.0;  // relative sd for deterministic terms
  std::optional<int> nu;            // default n + 2
};

/// Random-walk-centred NIW prior with scales from univariate AR(p) residual
/// variances. Throws DataError on a series with zero residual variance.
NiwParams minnesota_niw(const ModelSpec& spec, const TimeSeriesData& data,
                        const MinnesotaHyper& hyper = {});

}  // namespace signvar
