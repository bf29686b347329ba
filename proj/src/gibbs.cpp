#include "signvar/gibbs.hpp"

#include "signvar/error.hpp"

#include <Eigen/Cholesky>

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace signvar {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Eigen::VectorXd flatten(const Eigen::MatrixXd& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

}  // namespace

long long SamplerConfig::stored_count() const {
  const long long burn = resolved_burn_in();
  if (iterations <= burn) return 0;
  return (iterations - burn) / thin;
}

void SamplerConfig::validate() const {
  if (iterations < 1) throw ConfigError("sampler: iterations must be >= 1");
  if (thin < 1) throw ConfigError("sampler: thin must be >= 1");
  if (burn_in && (*burn_in < 0 || *burn_in >= iterations)) {
    throw ConfigError("sampler: burn_in must lie in [0, iterations)");
  }
  if (max_shrink_iterations < 1) throw ConfigError("sampler: max_shrink_iterations must be >= 1");
  if (max_init_attempts < 1) throw ConfigError("sampler: max_init_attempts must be >= 1");
}

GibbsSampler::GibbsSampler(NiwParams posterior, RestrictionSet restrictions, ModelSpec spec,
                           int max_shrink)
    : posterior_(std::move(posterior)),
      restrictions_(std::move(restrictions)),
      spec_(std::move(spec)),
      max_shrink_(max_shrink) {
  spec_.validate();
  posterior_.validate();
  if (posterior_.flat_coefficients) {
    throw ConfigError("gibbs: the posterior coefficient covariance must be proper");
  }
  if (posterior_.n() != spec_.n || posterior_.m() != spec_.m()) {
    throw ConfigError("gibbs: posterior dimensions do not match the model");
  }
  restrictions_.validate(spec_.n);
  factors_ = factorize(posterior_);
  b_enters_restrictions_ = spec_.p > 0 && required_horizon(restrictions_) > 0;
}

bool GibbsSampler::satisfied(const ChainState& state) const {
  return indicator_with_factor(restrictions_, state.b, state.sigma_chol, state.q, spec_.p);
}

int GibbsSampler::step_q(ChainState& state, Rng& rng) const {
  const int n = spec_.n;
  OrthogonalLatent probe{n, state.x_latent.values};
  Eigen::MatrixXd last_q;

  EssTarget target;
  target.prior_mean = Eigen::VectorXd::Zero(state.x_latent.values.size());
  target.prior_sample = [&](Rng& r) { return r.normal_vector(target.prior_mean.size()); };
  target.log_likelihood = [&](const Eigen::VectorXd& x) {
    probe.values = x;
    try {
      last_q = sample_orthogonal_haar(probe);
    } catch (const NumericalError&) {
      return kNegInf;
    }
    return indicator_with_factor(restrictions_, state.b, state.sigma_chol, last_q, spec_.p)
               ? 0.0
               : kNegInf;
  };

  const EssResult res = ess_step(target, state.x_latent.values, rng, max_shrink_, 0.0);
  state.x_latent.values = res.latent;
  state.q = std::move(last_q);
  return res.trials;
}

int GibbsSampler::step_sigma(ChainState& state, Rng& rng) const {
  const int n = spec_.n;
  const int nu = posterior_.nu;
  const double half_m = 0.5 * spec_.m();

  const Eigen::MatrixXd E = state.b - posterior_.Psi;
  const Eigen::MatrixXd G = E.transpose() * factors_.omega_inv * E;

  Eigen::MatrixXd last_sigma;
  Eigen::MatrixXd last_chol;

  auto log_lik = [&](const Eigen::VectorXd& flat) {
    const Eigen::Map<const Eigen::MatrixXd> R(flat.data(), n, nu);
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
    P.selfadjointView<Eigen::Lower>().rankUpdate(R);
    P = P.selfadjointView<Eigen::Lower>();
    Eigen::LLT<Eigen::MatrixXd> llt_p(P);
    if (llt_p.info() != Eigen::Success) return kNegInf;
    const Eigen::MatrixXd lp = llt_p.matrixL();
    const double log_det_p = 2.0 * lp.diagonal().array().log().sum();
    if (!std::isfinite(log_det_p)) return kNegInf;

    last_sigma = llt_p.solve(Eigen::MatrixXd::Identity(n, n));
    last_sigma = 0.5 * (last_sigma + last_sigma.transpose()).eval();
    Eigen::LLT<Eigen::MatrixXd> llt_s(last_sigma);
    if (llt_s.info() != Eigen::Success) return kNegInf;
    last_chol = llt_s.matrixL();

    if (!indicator_with_factor(restrictions_, state.b, last_chol, state.q, spec_.p)) {
      return kNegInf;
    }
    return half_m * log_det_p - 0.5 * P.cwiseProduct(G).sum();
  };

  EssTarget target;
  target.prior_mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n) * nu);
  target.prior_sample = [&](Rng& r) {
    return flatten(factors_.phi_inv_root * r.normal_matrix(n, nu));
  };
  target.log_likelihood = log_lik;

  const Eigen::VectorXd current = flatten(state.r_latent.r);
  const double ll0 = log_lik(current);
  const EssResult res = ess_step(target, current, rng, max_shrink_, ll0);
  state.r_latent.r = Eigen::Map<const Eigen::MatrixXd>(res.latent.data(), n, nu);
  state.sigma = std::move(last_sigma);
  state.sigma_chol = std::move(last_chol);
  return res.trials;
}

int GibbsSampler::step_b(ChainState& state, Rng& rng) const {
  const int n = spec_.n;
  const int m = spec_.m();
  if (m == 0) return 0;

  // Without lags in the restricted horizons the indicator does not involve B
  // and the conditional is the unrestricted matrix normal.
  if (!b_enters_restrictions_) {
    state.b = matrix_normal_from_factors(posterior_.Psi, factors_.omega_chol, state.sigma_chol,
                                         rng.normal_matrix(m, n));
    return 1;
  }

  Eigen::MatrixXd probe(m, n);
  EssTarget target;
  target.prior_mean = flatten(posterior_.Psi);
  target.prior_sample = [&](Rng& r) {
    return flatten(matrix_normal_from_factors(posterior_.Psi, factors_.omega_chol,
                                              state.sigma_chol, r.normal_matrix(m, n)));
  };
  target.log_likelihood = [&](const Eigen::VectorXd& flat) {
    probe = Eigen::Map<const Eigen::MatrixXd>(flat.data(), m, n);
    return indicator_with_factor(restrictions_, probe, state.sigma_chol, state.q, spec_.p)
               ? 0.0
               : kNegInf;
  };

  const EssResult res = ess_step(target, flatten(state.b), rng, max_shrink_, 0.0);
  state.b = Eigen::Map<const Eigen::MatrixXd>(res.latent.data(), m, n);
  return res.trials;
}

InitResult GibbsSampler::initialize(Rng& rng, long long max_attempts) const {
  const int n = spec_.n;
  const int m = spec_.m();
  InitResult out;
  for (out.attempts = 1; out.attempts <= max_attempts; ++out.attempts) {
    ChainState& s = out.state;
    s.x_latent = draw_orthogonal_latent(n, rng);
    s.r_latent = draw_wishart_latent(factors_, posterior_.nu, rng);
    try {
      s.q = sample_orthogonal_haar(s.x_latent);
      s.sigma = sample_inverse_wishart(s.r_latent);
      s.sigma_chol = chol_factor(s.sigma);
    } catch (const NumericalError&) {
      continue;
    }
    s.b = matrix_normal_from_factors(posterior_.Psi, factors_.omega_chol, s.sigma_chol,
                                     rng.normal_matrix(m, n));
    if (satisfied(s)) return out;
  }
  std::ostringstream msg;
  msg << "no parameter draw satisfied the restrictions in " << max_attempts
      << " attempts; the restrictions may be mutually inconsistent or have negligible "
         "posterior probability";
  throw InfeasibleError(msg.str(), max_attempts);
}

ChainState GibbsSampler::state_from(const OrthogonalParams& params) const {
  validate(params);
  if (params.B.rows() != spec_.m() || params.B.cols() != spec_.n) {
    throw ConfigError("gibbs: initial state dimensions do not match the model");
  }
  ChainState s;
  s.b = params.B;
  s.x_latent = orthogonal_latent_from(params.Q);
  s.r_latent = wishart_latent_from(params.Sigma, posterior_.nu);
  s.q = sample_orthogonal_haar(s.x_latent);
  s.sigma = sample_inverse_wishart(s.r_latent);
  s.sigma_chol = chol_factor(s.sigma);
  if (!satisfied(s)) throw InfeasibleError("the supplied initial state violates the restrictions", 0);
  return s;
}

PosteriorDraws GibbsSampler::run(const SamplerConfig& config, Rng& rng,
                                 std::optional<ChainState> initial) const {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  PosteriorDraws out;

  ChainState state;
  if (initial) {
    state = std::move(*initial);
    if (!satisfied(state)) {
      throw InfeasibleError("the supplied initial state violates the restrictions", 0);
    }
  } else {
    InitResult init = initialize(rng, config.max_init_attempts);
    state = std::move(init.state);
    out.init_attempts = init.attempts;
  }

  const long long burn = config.resolved_burn_in();
  out.draws.reserve(static_cast<std::size_t>(config.stored_count()));
  for (long long it = 0; it < config.iterations; ++it) {
    out.q_step.add(step_q(state, rng));
    out.sigma_step.add(step_sigma(state, rng));
    if (spec_.m() > 0) out.b_step.add(step_b(state, rng));
    ++out.iterations;

    const bool store = it >= burn && (it - burn + 1) % config.thin == 0;
    if (store || config.validate_each_iteration) {
      if (!satisfied(state)) {
        throw NumericalError("gibbs: chain left the restricted region at iteration " +
                             std::to_string(it));
      }
      if (config.validate_each_iteration) validate(state.params());
    }
    if (store) out.draws.push_back(state.params());
  }
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

PosteriorDraws run_chain(const NiwParams& posterior, const RestrictionSet& restrictions,
                         const ModelSpec& spec, const SamplerConfig& config, Rng& rng) {
  const GibbsSampler sampler(posterior, restrictions, spec, config.max_shrink_iterations);
  return sampler.run(config, rng);
}

}  // namespace signvar
