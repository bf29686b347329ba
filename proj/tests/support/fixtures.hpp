#pragma once
// Synthetic models shared by the unit and acceptance tests.

#include "oracles.hpp"

#include "signvar/conjugate.hpp"
#include "signvar/model.hpp"
#include "signvar/restrictions.hpp"

namespace fixture {

struct Model {
  signvar::ModelSpec spec;
  signvar::TimeSeriesData data;
  signvar::NiwParams prior;
  signvar::NiwParams posterior;
};

/// Weakly informative NIW prior: nu = n + 2, Phi = I, Psi = 0, Omega = 10 I.
inline signvar::NiwParams weak_prior(const signvar::ModelSpec& spec) {
  signvar::NiwParams p;
  p.nu = spec.n + 2;
  p.Phi = Eigen::MatrixXd::Identity(spec.n, spec.n);
  p.Psi = Eigen::MatrixXd::Zero(spec.m(), spec.n);
  p.Omega = 10.0 * Eigen::MatrixXd::Identity(spec.m(), spec.m());
  return p;
}

/// VAR with the given structural impact matrix, lag matrix A (y_t = A y_{t-1} + L0 e_t),
/// constant term, T observations.
inline Model simulate(const Eigen::MatrixXd& impact, const Eigen::MatrixXd& A, int T,
                      std::uint64_t seed) {
  const int n = static_cast<int>(impact.rows());
  oracle::Gen g(seed);
  Model m;
  m.spec = signvar::ModelSpec{n, 1, {signvar::DeterministicKind::Constant}};
  const Eigen::MatrixXd raw = oracle::simulate_var(A.transpose(), Eigen::VectorXd::Zero(n),
                                                   impact * impact.transpose(), 1, T, g);
  m.data = signvar::build_regressors(raw, m.spec);
  m.prior = weak_prior(m.spec);
  m.posterior = signvar::posterior_update(m.prior, m.data);
  return m;
}

/// n = 2, p = 1, T = 100.
inline Model bivariate(std::uint64_t seed = 11) {
  Eigen::MatrixXd impact(2, 2);
  impact << 1.0, -0.4, 0.6, 0.8;
  Eigen::MatrixXd A(2, 2);
  A << 0.5, 0.1, 0.2, 0.4;
  return simulate(impact, A, 100, seed);
}

/// Impact matrix of the five-variable model; column j is the sign pattern
/// used for shock j.
inline Eigen::MatrixXd five_variable_impact() {
  Eigen::MatrixXd L0(5, 5);
  L0 << 1.0, 0.5, -0.4, 0.2, 0.1,
        0.6, 1.0, 0.5, -0.1, 0.2,
        0.5, -0.6, 1.0, 0.3, -0.2,
        0.4, 0.5, -0.5, 1.0, 0.1,
       -0.5, 0.4, 0.6, 0.2, 1.0;
  return L0;
}

/// n = 5, p = 1, T = 200.
inline Model five_variable(std::uint64_t seed = 3) {
  return simulate(five_variable_impact(), 0.5 * Eigen::MatrixXd::Identity(5, 5), 200, seed);
}

/// Impact sign restrictions on every variable for shocks 0..blocks-1, with
/// the signs of five_variable_impact().
inline signvar::RestrictionSet sign_blocks(int blocks) {
  const Eigen::MatrixXd L0 = five_variable_impact();
  signvar::RestrictionSet set;
  for (int b = 0; b < blocks; ++b)
    for (int v = 0; v < 5; ++v) set.signs.push_back({b, v, {0, 0}, L0(v, b) > 0 ? 1 : -1});
  return set;
}

/// l_11 > 0 and l_21 > 0: about a third of the Haar mass for bivariate().
inline signvar::RestrictionSet bivariate_impact_signs() {
  signvar::RestrictionSet set;
  set.signs.push_back({0, 0, {0, 0}, 1});
  set.signs.push_back({0, 1, {0, 0}, 1});
  return set;
}

}  // namespace fixture
