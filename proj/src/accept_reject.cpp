#include "signvar/accept_reject.hpp"

#include "signvar/error.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace signvar {

namespace {

void check_inputs(const NiwParams& posterior, const RestrictionSet& restrictions,
                  const ModelSpec& spec) {
  spec.validate();
  posterior.validate();
  if (posterior.flat_coefficients) {
    throw ConfigError("accept-reject: the posterior coefficient covariance must be proper");
  }
  if (posterior.n() != spec.n || posterior.m() != spec.m()) {
    throw ConfigError("accept-reject: posterior dimensions do not match the model");
  }
  restrictions.validate(spec.n);
}

}  // namespace

ArDraw ar_draw(const NiwParams& posterior, const NiwFactors& factors,
               const RestrictionSet& restrictions, const ModelSpec& spec, Rng& rng,
               long long budget) {
  const int n = spec.n;
  ArDraw out;
  while (out.proposals < budget) {
    ++out.proposals;
    Eigen::MatrixXd Q;
    ReducedFormParams rf;
    Eigen::MatrixXd sigma_chol;
    try {
      Q = sample_orthogonal_haar(draw_orthogonal_latent(n, rng));
      rf = draw_niw(posterior, factors, rng);
      sigma_chol = chol_factor(rf.Sigma);
    } catch (const NumericalError&) {
      continue;
    }
    if (indicator_with_factor(restrictions, rf.B, sigma_chol, Q, spec.p)) {
      out.params = {std::move(rf.B), std::move(rf.Sigma), std::move(Q)};
      return out;
    }
  }
  std::ostringstream msg;
  msg << "accept-reject: no proposal satisfied the restrictions within the budget of " << budget
      << " proposals";
  throw InfeasibleError(msg.str(), out.proposals);
}

ArRun ar_run(const NiwParams& posterior, const RestrictionSet& restrictions,
             const ModelSpec& spec, long long count, Rng& rng, long long budget) {
  check_inputs(posterior, restrictions, spec);
  const auto start = std::chrono::steady_clock::now();
  const NiwFactors factors = factorize(posterior);
  PosteriorDraws out;
  out.draws.reserve(static_cast<std::size_t>(std::max(0LL, count)));
  for (long long i = 0; i < count; ++i) {
    ArDraw d = ar_draw(posterior, factors, restrictions, spec, rng, budget);
    out.proposals += d.proposals;
    out.draws.push_back(std::move(d.params));
  }
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const ArStats stats{out.proposals, static_cast<long long>(out.draws.size()), out.wall_seconds};
  return {std::move(out), stats};
}

ArRun ar_run_blocked(const NiwParams& posterior, const RestrictionSet& restrictions,
                     const ModelSpec& spec, long long count, std::uint64_t seed,
                     int workers, long long budget) {
  check_inputs(posterior, restrictions, spec);
  const auto start = std::chrono::steady_clock::now();
  const NiwFactors factors = factorize(posterior);
  const long long blocks = (count + kAcceptRejectBlockSize - 1) / kAcceptRejectBlockSize;

  std::vector<std::vector<OrthogonalParams>> block_draws(static_cast<std::size_t>(blocks));
  std::vector<long long> block_proposals(static_cast<std::size_t>(blocks), 0);
  std::atomic<long long> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      const long long b = next.fetch_add(1);
      if (b >= blocks || failed.load()) return;
      try {
        Rng rng(seed, kAcceptRejectStreamBase + static_cast<std::uint64_t>(b));
        const long long lo = b * kAcceptRejectBlockSize;
        const long long hi = std::min(count, lo + kAcceptRejectBlockSize);
        auto& dst = block_draws[static_cast<std::size_t>(b)];
        dst.reserve(static_cast<std::size_t>(hi - lo));
        for (long long i = lo; i < hi; ++i) {
          ArDraw d = ar_draw(posterior, factors, restrictions, spec, rng, budget);
          block_proposals[static_cast<std::size_t>(b)] += d.proposals;
          dst.push_back(std::move(d.params));
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
        return;
      }
    }
  };

  const int nthreads = static_cast<int>(std::clamp<long long>(workers, 1, std::max(1LL, blocks)));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  PosteriorDraws out;
  out.draws.reserve(static_cast<std::size_t>(std::max(0LL, count)));
  for (long long b = 0; b < blocks; ++b) {
    out.proposals += block_proposals[static_cast<std::size_t>(b)];
    for (auto& d : block_draws[static_cast<std::size_t>(b)]) out.draws.push_back(std::move(d));
  }
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const ArStats stats{out.proposals, static_cast<long long>(out.draws.size()), out.wall_seconds};
  return {std::move(out), stats};
}

}  // namespace signvar
