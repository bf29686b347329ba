#pragma once
//
// Gibbs sampler over the orthogonal reduced-form parameters conditional on
// the restrictions. Each sweep updates Q, then Sigma, then B, each by one
// elliptical slice step on its latent Gaussian representation:
//
//   Q     = gamma(X)       target  [S > 0] N(X; 0, I)
//   Sigma = varsigma(R)    target  [S > 0] N(B; Psi, Sigma (x) Omega) N(R; 0, Phi^{-1})
//   B                      target  [S > 0] N(B; Psi, Sigma (x) Omega)
//
// The latents X and R are the state of record and persist across sweeps.

#include "signvar/conjugate.hpp"
#include "signvar/ess.hpp"
#include "signvar/model.hpp"
#include "signvar/restrictions.hpp"
#include "signvar/rng.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace signvar {

struct SamplerConfig {
  long long iterations = 1000;
  int thin = 100;
  std::optional<long long> burn_in;  // default: 10% of iterations
  std::uint64_t seed = 0;
  int max_shrink_iterations = kDefaultMaxShrink;
  long long max_init_attempts = 10'000'000;
  /// Re-check the restriction indicator after every sweep, not only on
  /// stored draws.
  bool validate_each_iteration = false;

  [[nodiscard]] long long resolved_burn_in() const { return burn_in.value_or(iterations / 10); }
  [[nodiscard]] long long stored_count() const;
  void validate() const;
};

struct ChainState {
  Eigen::MatrixXd b;
  OrthogonalLatent x_latent;
  WishartLatent r_latent;
  // Cached images of the latents.
  Eigen::MatrixXd sigma;
  Eigen::MatrixXd sigma_chol;
  Eigen::MatrixXd q;

  [[nodiscard]] OrthogonalParams params() const { return {b, sigma, q}; }
};

struct StepCounters {
  long long steps = 0;
  long long trials = 0;

  void add(int t) {
    ++steps;
    trials += t;
  }
  [[nodiscard]] double mean_trials() const {
    return steps == 0 ? 0.0 : static_cast<double>(trials) / static_cast<double>(steps);
  }
};

struct PosteriorDraws {
  std::vector<OrthogonalParams> draws;
  StepCounters q_step;
  StepCounters sigma_step;
  StepCounters b_step;
  long long iterations = 0;       // Gibbs sweeps, burn-in included
  long long init_attempts = 0;    // joint draws spent finding a valid start
  long long proposals = 0;        // accept-reject proposals
  double wall_seconds = 0.0;
};

struct InitResult {
  ChainState state;
  long long attempts = 0;
};

class GibbsSampler {
 public:
  GibbsSampler(NiwParams posterior, RestrictionSet restrictions, ModelSpec spec,
               int max_shrink = kDefaultMaxShrink);

  /// Each step returns the number of ESS proposals it evaluated.
  int step_q(ChainState& state, Rng& rng) const;
  int step_sigma(ChainState& state, Rng& rng) const;
  int step_b(ChainState& state, Rng& rng) const;

  /// Joint unconstrained draws of (X, R, B) until the restrictions hold.
  /// Throws InfeasibleError after max_attempts failures.
  InitResult initialize(Rng& rng, long long max_attempts) const;

  /// Chain state reproducing a user-supplied (B, Sigma, Q). Throws
  /// InfeasibleError if the restrictions do not hold there.
  ChainState state_from(const OrthogonalParams& params) const;

  [[nodiscard]] bool satisfied(const ChainState& state) const;

  PosteriorDraws run(const SamplerConfig& config, Rng& rng,
                     std::optional<ChainState> initial = std::nullopt) const;

  [[nodiscard]] const NiwParams& posterior() const { return posterior_; }
  [[nodiscard]] const RestrictionSet& restrictions() const { return restrictions_; }
  [[nodiscard]] const ModelSpec& spec() const { return spec_; }
  [[nodiscard]] const NiwFactors& factors() const { return factors_; }

 private:
  NiwParams posterior_;
  NiwFactors factors_;
  RestrictionSet restrictions_;
  ModelSpec spec_;
  int max_shrink_;
  bool b_enters_restrictions_;
};

/// Convenience wrapper: build a sampler and run one chain.
PosteriorDraws run_chain(const NiwParams& posterior, const RestrictionSet& restrictions,
                         const ModelSpec& spec, const SamplerConfig& config, Rng& rng);

}  // namespace signvar
