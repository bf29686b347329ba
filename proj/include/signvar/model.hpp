#pragma once
//
// SVAR parameterizations and the maps between them.
//
//   structural:        y_t' A0 = x_t' A+ + e_t'
//   reduced form:      y_t' = x_t' B + u_t',   E[u u'] = Sigma = (A0 A0')^{-1}
//   orthogonal RF:     y_t' = x_t' B + e_t' Q' h(Sigma)
//
// h(Sigma) is the upper-triangular Cholesky factor, h(Sigma)' h(Sigma) = Sigma.
// We store its transpose, the lower factor `sigma_tr` with
// sigma_tr * sigma_tr' = Sigma.
//
// Impulse responses: L_0 = sigma_tr * Q, and entry (i, j) of L_h is the
// response of variable i to shock j, h periods after impact.

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <vector>

namespace signvar {

inline constexpr double kOrthogonalityTol = 1e-10;
inline constexpr double kSymmetryTol = 1e-10;

enum class DeterministicKind { Constant, Exogenous };

struct ModelSpec {
  int n = 1;  // endogenous variables
  int p = 0;  // lags
  /// Columns appended after the lag blocks, in order. Each Exogenous entry
  /// consumes one column of the exogenous matrix passed to build_regressors.
  std::vector<DeterministicKind> deterministic{DeterministicKind::Constant};

  [[nodiscard]] int m() const { return n * p + static_cast<int>(deterministic.size()); }
  [[nodiscard]] int exogenous_count() const;
  void validate() const;
};

struct TimeSeriesData {
  Eigen::MatrixXd Y;  // T x n
  Eigen::MatrixXd X;  // T x m

  [[nodiscard]] Eigen::Index T() const { return Y.rows(); }
};

struct ReducedFormParams {
  Eigen::MatrixXd B;      // m x n
  Eigen::MatrixXd Sigma;  // n x n SPD
};

struct StructuralParams {
  Eigen::MatrixXd A0;     // n x n
  Eigen::MatrixXd Aplus;  // m x n
};

struct OrthogonalParams {
  Eigen::MatrixXd B;
  Eigen::MatrixXd Sigma;
  Eigen::MatrixXd Q;
};

/// L[h] for h = 0..H.
struct ImpulseResponses {
  std::vector<Eigen::MatrixXd> L;

  [[nodiscard]] int horizon() const { return static_cast<int>(L.size()) - 1; }
  [[nodiscard]] double operator()(int variable, int shock, int h) const {
    return L[static_cast<std::size_t>(h)](variable, shock);
  }
};

/// Stacks Y (rows p..T_raw-1 of raw) and X = [y_{t-1}' ... y_{t-p}' det_t'].
/// `exogenous` must have T_raw rows and one column per Exogenous entry in
/// spec.deterministic; only its rows p..T_raw-1 are used.
TimeSeriesData build_regressors(const Eigen::MatrixXd& raw, const ModelSpec& spec,
                                const std::optional<Eigen::MatrixXd>& exogenous = std::nullopt);

/// Lower Cholesky factor sigma_tr (= h(Sigma)'). Throws NumericalError when
/// Sigma is not symmetric positive definite.
Eigen::MatrixXd chol_factor(const Eigen::MatrixXd& Sigma);

/// Checks the OrthogonalParams invariants (dimensions, symmetry, SPD, Q'Q = I).
void validate(const OrthogonalParams& params);

/// f(B, Sigma, Q) = (h(Sigma)^{-1} Q, B h(Sigma)^{-1} Q).
StructuralParams map_f(const OrthogonalParams& params);

/// Inverse of map_f: Sigma = (A0 A0')^{-1}, Q = h(Sigma) A0, B = A+ A0^{-1}.
OrthogonalParams map_f_inverse(const StructuralParams& params);

/// IRFs L_0..L_H. Only the first n*p rows of B (the lag blocks) enter the
/// recursion.
ImpulseResponses compute_irfs(const OrthogonalParams& params, const ModelSpec& spec, int H);

/// Same recursion starting from a precomputed impact matrix L_0.
ImpulseResponses compute_irfs_from_impact(const Eigen::MatrixXd& B, const Eigen::MatrixXd& L0,
                                          int p, int H);

/// Maximum absolute entry of Q'Q - I.
double orthogonality_error(const Eigen::MatrixXd& Q);

}  // namespace signvar
