#include "signvar/ess.hpp"

#include "signvar/error.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace signvar {

EssResult ess_step(const EssTarget& target, const Eigen::VectorXd& current, Rng& rng,
                   int max_shrink, std::optional<double> current_log_likelihood) {
  const double ll0 = current_log_likelihood ? *current_log_likelihood
                                            : target.log_likelihood(current);
  if (!(ll0 > -std::numeric_limits<double>::infinity())) {
    throw NumericalError("ess_step: current point has zero likelihood");
  }
  constexpr double two_pi = 2.0 * std::numbers::pi;

  const Eigen::VectorXd nu_aux = target.prior_sample(rng);
  if (nu_aux.size() != current.size() || target.prior_mean.size() != current.size()) {
    throw NumericalError("ess_step: dimension mismatch between state and prior");
  }
  const Eigen::VectorXd centred = current - target.prior_mean;
  const Eigen::VectorXd aux_centred = nu_aux - target.prior_mean;
  const double threshold = ll0 + std::log(rng.uniform());

  double theta = rng.uniform(0.0, two_pi);
  double lo = theta - two_pi;
  double hi = theta;

  EssResult result;
  for (int shrinks = 0;; ++shrinks) {
    result.latent = target.prior_mean + centred * std::cos(theta) + aux_centred * std::sin(theta);
    ++result.trials;
    const double ll = target.log_likelihood(result.latent);
    if (ll > threshold) {
      result.log_likelihood = ll;
      return result;
    }
    if (shrinks >= max_shrink) {
      std::ostringstream msg;
      msg << "ess_step: bracket shrunk " << shrinks << " times without acceptance (threshold "
          << threshold << ", bracket [" << lo << ", " << hi << "], dim " << current.size()
          << ")";
      throw NumericalError(msg.str());
    }
    if (theta < 0.0) {
      lo = theta;
    } else {
      hi = theta;
    }
    theta = rng.uniform(lo, hi);
  }
}

}  // namespace signvar
