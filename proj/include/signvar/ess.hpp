#pragma once
//
// Elliptical slice sampling for targets of the form
//   pi(x) ∝ exp(log_likelihood(x)) N(x; prior_mean, prior_cov),
// where the prior enters only through draws. log_likelihood may return
// -infinity, which turns the step into uniform sampling over the support.

#include "signvar/rng.hpp"

#include <Eigen/Core>

#include <functional>
#include <optional>

namespace signvar {

struct EssTarget {
  Eigen::VectorXd prior_mean;
  /// A fresh draw from the Gaussian prior (mean included): the auxiliary
  /// point nu_aux that defines the ellipse.
  std::function<Eigen::VectorXd(Rng&)> prior_sample;
  std::function<double(const Eigen::VectorXd&)> log_likelihood;

  [[nodiscard]] Eigen::Index latent_dim() const { return prior_mean.size(); }
};

struct EssResult {
  Eigen::VectorXd latent;
  double log_likelihood = 0.0;
  int trials = 0;  // proposals evaluated, including the accepted one
};

inline constexpr int kDefaultMaxShrink = 200;

/// One ESS transition from `current`. `current_log_likelihood`, when given,
/// must equal target.log_likelihood(current); it saves one evaluation.
/// Throws NumericalError if the current point has zero likelihood or the
/// bracket is shrunk more than `max_shrink` times.
EssResult ess_step(const EssTarget& target, const Eigen::VectorXd& current, Rng& rng,
                   int max_shrink = kDefaultMaxShrink,
                   std::optional<double> current_log_likelihood = std::nullopt);

}  // namespace signvar
