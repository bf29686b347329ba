#pragma once
//
// Baseline sampler: draw (B, Sigma, Q) from the unrestricted NIW x Haar
// posterior and keep the draws that satisfy the restrictions. Draws are
// i.i.d. from the restricted posterior.

#include "signvar/conjugate.hpp"
#include "signvar/gibbs.hpp"
#include "signvar/model.hpp"
#include "signvar/restrictions.hpp"
#include "signvar/rng.hpp"

namespace signvar {

inline constexpr long long kDefaultProposalBudget = 10'000'000;
inline constexpr int kAcceptRejectBlockSize = 256;

struct ArStats {
  long long proposals = 0;
  long long accepted = 0;
  double wall_seconds = 0.0;

  [[nodiscard]] double proposals_per_accept() const {
    return accepted == 0 ? 0.0 : static_cast<double>(proposals) / static_cast<double>(accepted);
  }
};

struct ArRun {
  PosteriorDraws draws;
  ArStats stats;
};

struct ArDraw {
  OrthogonalParams params;
  long long proposals = 0;
};

/// One accepted draw. Throws InfeasibleError after `budget` rejected
/// proposals (the error carries the count).
ArDraw ar_draw(const NiwParams& posterior, const NiwFactors& factors,
               const RestrictionSet& restrictions, const ModelSpec& spec, Rng& rng,
               long long budget = kDefaultProposalBudget);

/// `count` accepted draws from a single stream.
ArRun ar_run(const NiwParams& posterior, const RestrictionSet& restrictions,
             const ModelSpec& spec, long long count, Rng& rng,
             long long budget = kDefaultProposalBudget);

/// `count` accepted draws split into blocks of kAcceptRejectBlockSize, block b
/// drawn from stream (seed, kAcceptRejectStreamBase + b). The result is the
/// same for every worker count.
ArRun ar_run_blocked(const NiwParams& posterior, const RestrictionSet& restrictions,
                     const ModelSpec& spec, long long count, std::uint64_t seed,
                     int workers = 1, long long budget = kDefaultProposalBudget);

}  // namespace signvar
