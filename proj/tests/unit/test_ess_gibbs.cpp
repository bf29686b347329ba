#include <doctest.h>

#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"

#include "signvar/error.hpp"
#include "signvar/ess.hpp"
#include "signvar/gibbs.hpp"

#include <cmath>
#include <limits>
#include <numbers>

using namespace signvar;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double max_abs(const MatrixXd& a) { return a.cwiseAbs().maxCoeff(); }

// Standard error of a mean from 50 non-overlapping batch means.
double batch_se(const std::vector<double>& x) {
  const std::size_t a = 50, b = x.size() / a;
  std::vector<double> means;
  for (std::size_t k = 0; k < a; ++k) {
    double s = 0.0;
    for (std::size_t i = k * b; i < (k + 1) * b; ++i) s += x[i];
    means.push_back(s / b);
  }
  return std::sqrt(oracle::variance(means) / a);
}

EssTarget gaussian_target(const VectorXd& mean, const MatrixXd& chol) {
  EssTarget t;
  t.prior_mean = mean;
  t.prior_sample = [mean, chol](Rng& r) -> VectorXd { return mean + chol * r.normal_vector(mean.size()); };
  return t;
}

MatrixXd lower_chol(const MatrixXd& S) { return S.llt().matrixL(); }

}  // namespace

TEST_CASE("ess_step: zero log likelihood accepts the first proposal and leaves the prior invariant") {
  oracle::Gen g(1);
  const VectorXd mean = oracle::gaussian(3, 1, g);
  const MatrixXd cov = oracle::random_spd(3, g);
  auto target = gaussian_target(mean, lower_chol(cov));
  target.log_likelihood = [](const VectorXd&) { return 0.0; };
  Rng rng(1);
  VectorXd x = mean;
  const int N = 100000;
  VectorXd sum = VectorXd::Zero(3);
  MatrixXd outer = MatrixXd::Zero(3, 3);
  std::vector<double> x0;
  for (int k = 0; k < N; ++k) {
    const auto res = ess_step(target, x, rng);
    REQUIRE(res.trials == 1);
    x = res.latent;
    sum += x;
    outer += (x - mean) * (x - mean).transpose();
    x0.push_back(x(0));
  }
  const VectorXd m = sum / N;
  CHECK(std::abs(m(0) - mean(0)) < 4.0 * batch_se(x0));
  CHECK(max_abs(outer / N - cov) < 0.05 * max_abs(cov));
}

TEST_CASE("ess_step: Gaussian likelihood gives the conjugate posterior") {
  // prior N(0, 1), likelihood N(1; x, 1) -> posterior N(0.5, 0.5)
  auto target = gaussian_target(VectorXd::Zero(1), MatrixXd::Identity(1, 1));
  target.log_likelihood = [](const VectorXd& x) { return -0.5 * (x(0) - 1.0) * (x(0) - 1.0); };
  Rng rng(2);
  VectorXd x = VectorXd::Zero(1);
  std::vector<double> xs;
  for (int k = 0; k < 100000; ++k) {
    x = ess_step(target, x, rng).latent;
    xs.push_back(x(0));
  }
  CHECK(std::abs(oracle::mean(xs) - 0.5) < 4.0 * batch_se(xs));
  CHECK(oracle::variance(xs) == doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("ess_step: indicator target stays in the support") {
  auto target = gaussian_target(VectorXd::Zero(2), MatrixXd::Identity(2, 2));
  target.log_likelihood = [](const VectorXd& x) { return x(0) > 1.0 && x(1) < 0.0 ? 0.0 : kNegInf; };
  Rng rng(3);
  VectorXd x(2);
  x << 1.5, -0.5;
  long long trials = 0;
  for (int k = 0; k < 20000; ++k) {
    const auto res = ess_step(target, x, rng);
    x = res.latent;
    trials += res.trials;
    REQUIRE(x(0) > 1.0);
    REQUIRE(x(1) < 0.0);
    REQUIRE(res.log_likelihood == 0.0);
  }
  CHECK(trials > 20000);
}

TEST_CASE("ess_step: zero-likelihood start and shrink cap are errors") {
  auto target = gaussian_target(VectorXd::Zero(2), MatrixXd::Identity(2, 2));
  target.log_likelihood = [](const VectorXd&) { return kNegInf; };
  Rng rng(4);
  CHECK_THROWS_AS(ess_step(target, VectorXd::Ones(2), rng), NumericalError);

  const VectorXd current = VectorXd::Ones(2);
  int calls = 0;
  target.log_likelihood = [&](const VectorXd& x) {
    ++calls;
    return x == current ? 0.0 : kNegInf;
  };
  CHECK_THROWS_AS(ess_step(target, current, rng, 5, 0.0), NumericalError);
  CHECK(calls == 6);
}

TEST_CASE("ess_step: shrinkage converges to the current point") {
  // Support is a tiny ball around the current point; the bracket must shrink
  // towards theta = 0 and accept.
  auto target = gaussian_target(VectorXd::Zero(3), MatrixXd::Identity(3, 3));
  const VectorXd current = VectorXd::Constant(3, 0.3);
  target.log_likelihood = [&](const VectorXd& x) { return (x - current).norm() < 1e-6 ? 0.0 : kNegInf; };
  Rng rng(5);
  for (int k = 0; k < 200; ++k) {
    const auto res = ess_step(target, current, rng);
    CHECK((res.latent - current).norm() < 1e-6);
    CHECK(res.trials > 1);
  }
}

TEST_CASE("initialize: empty restrictions succeed at once") {
  const auto m = fixture::bivariate();
  GibbsSampler s(m.posterior, RestrictionSet{}, m.spec);
  Rng rng(6);
  for (int k = 0; k < 20; ++k) CHECK(s.initialize(rng, 10).attempts == 1);
}

TEST_CASE("initialize: arc of length pi/4 needs 8 attempts on average") {
  // Sigma pinned near I by a very tight inverse Wishart; restrictions keep
  // the first column angle in (pi/4, pi/2).
  ModelSpec spec{2, 0, {}};
  NiwParams post;
  post.nu = 2000;
  post.Phi = post.nu * MatrixXd::Identity(2, 2);
  post.Psi = MatrixXd::Zero(0, 2);
  post.Omega = MatrixXd::Zero(0, 0);
  RestrictionSet set;
  set.signs.push_back({0, 0, {0, 0}, 1});
  set.ratios.push_back({0, 1, 0, 0, 1.0, std::numeric_limits<double>::infinity()});
  GibbsSampler s(post, set, spec);
  Rng rng(7);
  const int N = 4000;
  double total = 0.0;
  for (int k = 0; k < N; ++k) total += static_cast<double>(s.initialize(rng, 10000).attempts);
  // geometric(1/8): sd = sqrt(56) per draw
  CHECK(std::abs(total / N - 8.0) < 4.0 * std::sqrt(56.0 / N));
}

TEST_CASE("initialize: contradictory restrictions are infeasible") {
  const auto m = fixture::bivariate();
  RestrictionSet set;
  set.signs.push_back({0, 0, {0, 0}, 1});
  set.signs.push_back({0, 0, {0, 0}, -1});
  GibbsSampler s(m.posterior, set, m.spec);
  Rng rng(8);
  try {
    (void)s.initialize(rng, 500);
    FAIL("expected InfeasibleError");
  } catch (const InfeasibleError& e) {
    CHECK(e.attempts() == 500);
    CHECK(e.exit_code() == 4);
    CHECK(std::string(e.what()).find("inconsistent") != std::string::npos);
  }
  SamplerConfig cfg;
  cfg.iterations = 10;
  cfg.thin = 1;
  cfg.max_init_attempts = 100;
  CHECK_THROWS_AS(run_chain(m.posterior, set, m.spec, cfg, rng), InfeasibleError);
}

TEST_CASE("step_q: empty set gives Haar draws") {
  const auto m = fixture::bivariate();
  GibbsSampler s(m.posterior, RestrictionSet{}, m.spec);
  Rng rng(9);
  auto state = s.initialize(rng, 10).state;
  std::vector<double> q11sq;
  for (int k = 0; k < 20000; ++k) {
    CHECK(s.step_q(state, rng) == 1);
    q11sq.push_back(state.q(0, 0) * state.q(0, 0));
  }
  // n = 2: q11^2 ~ Beta(1/2, 1/2)
  CHECK(oracle::ks_one_sample(q11sq, [](double v) { return oracle::beta_cdf(0.5, 0.5, v); }) < 0.02);
}

TEST_CASE("step_q: toy circle draws stay on the red arc") {
  ModelSpec spec{2, 0, {}};
  NiwParams post;
  post.nu = 10;
  post.Phi = MatrixXd::Identity(2, 2);
  post.Psi = MatrixXd::Zero(0, 2);
  post.Omega = MatrixXd::Zero(0, 0);
  RestrictionSet set;
  set.signs.push_back({0, 0, {0, 0}, 1});
  set.signs.push_back({0, 1, {0, 0}, 1});
  GibbsSampler s(post, set, spec);
  MatrixXd Sigma(2, 2);
  Sigma << 1, -0.9, -0.9, 1.81;
  MatrixXd Q(2, 2);
  Q << 0.5, -0.866, 0.866, 0.5;
  Q = Eigen::HouseholderQR<MatrixXd>(Q).householderQ();
  if (Q(0, 0) < 0) Q.col(0) *= -1.0;
  if (Q(1, 0) < 0.9 * Q(0, 0)) Q.col(0) << 0.5, std::sqrt(0.75);
  Q.col(1) << -Q(1, 0), Q(0, 0);
  auto state = s.state_from({MatrixXd::Zero(0, 2), Sigma, Q});
  Rng rng(10);
  for (int k = 0; k < 20000; ++k) {
    s.step_q(state, rng);
    REQUIRE(state.q(0, 0) > 0.0);
    REQUIRE(state.q(1, 0) > 0.9 * state.q(0, 0));
  }
}

TEST_CASE("step_q: conditional marginal of q11 matches accept-reject under a 50% restriction") {
  const auto m = fixture::bivariate();
  RestrictionSet set;
  set.signs.push_back({0, 0, {0, 0}, 1});
  GibbsSampler s(m.posterior, set, m.spec);
  Rng rng(11);
  auto state = s.initialize(rng, 100).state;
  std::vector<double> gibbs, ar;
  const int N = 40000, thin = 5;
  for (int k = 0; k < N * thin; ++k) {
    s.step_q(state, rng);
    if (k % thin == 0) gibbs.push_back(state.q(0, 0));
  }
  oracle::Gen g(11);
  while (static_cast<int>(ar.size()) < N) {
    const MatrixXd Q = oracle::haar_qr(2, g);
    if ((state.sigma_chol * Q)(0, 0) > 0.0) ar.push_back(Q(0, 0));
  }
  CHECK(oracle::ks_two_sample(gibbs, ar) < 0.02);
}

TEST_CASE("step_sigma: m = 0 and no restrictions gives the inverse Wishart law") {
  ModelSpec spec{2, 0, {}};
  oracle::Gen g(12);
  NiwParams post;
  post.nu = 8;
  post.Phi = oracle::random_spd(2, g);
  post.Psi = MatrixXd::Zero(0, 2);
  post.Omega = MatrixXd::Zero(0, 0);
  GibbsSampler s(post, RestrictionSet{}, spec);
  Rng rng(12);
  auto state = s.initialize(rng, 10).state;
  std::vector<std::vector<double>> entries(3);
  for (int k = 0; k < 100000; ++k) {
    s.step_sigma(state, rng);
    entries[0].push_back(state.sigma(0, 0));
    entries[1].push_back(state.sigma(1, 0));
    entries[2].push_back(state.sigma(1, 1));
  }
  const MatrixXd expected = post.Phi / (post.nu - 3);
  CHECK(std::abs(oracle::mean(entries[0]) - expected(0, 0)) < 3.0 * batch_se(entries[0]));
  CHECK(std::abs(oracle::mean(entries[1]) - expected(1, 0)) < 3.0 * batch_se(entries[1]));
  CHECK(std::abs(oracle::mean(entries[2]) - expected(1, 1)) < 3.0 * batch_se(entries[2]));
}

TEST_CASE("step_sigma: conditional matches restricted IW(nu + m, Phi + E' Omega^{-1} E)") {
  const auto m = fixture::bivariate();
  Rng rng(13);
  // Fix (B, Q) at a draw and pick a ratio bound near the conditional median.
  GibbsSampler probe(m.posterior, RestrictionSet{}, m.spec);
  const auto start = probe.initialize(rng, 10).state;
  const MatrixXd E = start.b - m.posterior.Psi;
  const MatrixXd Phi_c = m.posterior.Phi + E.transpose() * m.posterior.Omega.inverse() * E;
  const int nu_c = m.posterior.nu + m.spec.m();
  oracle::Gen g(13);
  auto ratio = [&](const MatrixXd& S) {
    const MatrixXd L0 = lower_chol(S) * start.q;
    return L0(1, 0) / L0(0, 0);
  };
  std::vector<double> pilot;
  for (int k = 0; k < 2001; ++k) pilot.push_back(ratio(oracle::bartlett_iw(nu_c, Phi_c, g)));
  std::sort(pilot.begin(), pilot.end());
  RestrictionSet set;
  set.ratios.push_back({0, 1, 0, 0, pilot[1000], std::numeric_limits<double>::infinity()});

  GibbsSampler s(m.posterior, set, m.spec);
  auto state = start;
  while (!s.satisfied(state)) state = probe.initialize(rng, 10).state;
  const MatrixXd E2 = state.b - m.posterior.Psi;
  const MatrixXd Phi_s = m.posterior.Phi + E2.transpose() * m.posterior.Omega.inverse() * E2;

  const int N = 20000, thin = 5;
  std::vector<double> g00, g10, a00, a10;
  for (int k = 0; k < N * thin; ++k) {
    s.step_sigma(state, rng);
    if (k % thin == 0) {
      g00.push_back(state.sigma(0, 0));
      g10.push_back(state.sigma(1, 0));
    }
  }
  while (static_cast<int>(a00.size()) < 2 * N) {
    const MatrixXd S = oracle::bartlett_iw(nu_c, Phi_s, g);
    const MatrixXd L0 = lower_chol(S) * state.q;
    if (L0(1, 0) / L0(0, 0) > set.ratios[0].lower) {
      a00.push_back(S(0, 0));
      a10.push_back(S(1, 0));
    }
  }
  CHECK(oracle::ks_two_sample(g00, a00) < 0.02);
  CHECK(oracle::ks_two_sample(g10, a10) < 0.02);
}

TEST_CASE("step_b: empty and impact-only restrictions give exact conjugate draws") {
  const auto m = fixture::bivariate();
  RestrictionSet impact;
  impact.signs.push_back({0, 0, {0, 0}, 1});
  for (const auto& set : {RestrictionSet{}, impact}) {
    GibbsSampler s(m.posterior, set, m.spec);
    Rng rng(14);
    auto state = s.initialize(rng, 100).state;
    const MatrixXd cov = oracle::kron(state.sigma, m.posterior.Omega);
    const int N = 40000;
    VectorXd sum = VectorXd::Zero(6);
    std::vector<double> b11;
    for (int k = 0; k < N; ++k) {
      CHECK(s.step_b(state, rng) == 1);
      sum += oracle::vec(state.b - m.posterior.Psi);
      b11.push_back(state.b(1, 1));
    }
    for (int i = 0; i < 6; ++i) CHECK(std::abs(sum(i) / N) < 4.0 * std::sqrt(cov(i, i) / N));
    const double sd = std::sqrt(cov(4, 4));
    const double mu = m.posterior.Psi(1, 1);
    CHECK(oracle::ks_one_sample(b11, [&](double v) { return oracle::normal_cdf((v - mu) / sd); }) <
          0.01);
  }
}

TEST_CASE("step_b: horizon-1 restriction holds on every draw and matches accept-reject") {
  const auto m = fixture::bivariate();
  Rng rng(15);
  GibbsSampler probe(m.posterior, RestrictionSet{}, m.spec);
  const auto start = probe.initialize(rng, 10).state;
  const MatrixXd L0 = start.sigma_chol * start.q;
  oracle::Gen g(15);
  // L_1 = B_1' L_0 recomputed directly.
  auto ratio = [&](const MatrixXd& B) {
    const MatrixXd L1 = B.topRows(2).transpose() * L0;
    return L1(1, 0) / L1(0, 0);
  };
  auto draw_b = [&] {
    return oracle::kron_matrix_normal(m.posterior.Psi, start.sigma, m.posterior.Omega, g);
  };
  std::vector<double> pilot;
  for (int k = 0; k < 2001; ++k) pilot.push_back(ratio(draw_b()));
  std::sort(pilot.begin(), pilot.end());
  const double lower = pilot[1000];

  RestrictionSet set;
  set.ratios.push_back({0, 1, 0, 1, lower, std::numeric_limits<double>::infinity()});
  GibbsSampler s(m.posterior, set, m.spec);
  auto state = start;
  while (!s.satisfied(state)) state.b = draw_b();

  const int N = 20000, thin = 5;
  std::vector<double> gb, ab;
  for (int k = 0; k < N * thin; ++k) {
    s.step_b(state, rng);
    REQUIRE(ratio(state.b) > lower);
    REQUIRE(state.sigma == start.sigma);
    if (k % thin == 0) gb.push_back(state.b(0, 1));
  }
  while (static_cast<int>(ab.size()) < 2 * N) {
    const MatrixXd B = draw_b();
    if (ratio(B) > lower) ab.push_back(B(0, 1));
  }
  CHECK(oracle::ks_two_sample(gb, ab) < 0.02);
}

TEST_CASE("run: one iteration, one stored draw") {
  const auto m = fixture::bivariate();
  SamplerConfig cfg;
  cfg.iterations = 1;
  cfg.thin = 1;
  cfg.burn_in = 0;
  Rng rng(16);
  const auto out = run_chain(m.posterior, RestrictionSet{}, m.spec, cfg, rng);
  CHECK(out.draws.size() == 1);
  CHECK(out.iterations == 1);
  CHECK(out.q_step.steps == 1);
  CHECK(out.wall_seconds >= 0.0);
}

TEST_CASE("SamplerConfig: stored count, burn-in default and validation") {
  SamplerConfig cfg;
  cfg.iterations = 1000;
  cfg.thin = 10;
  CHECK(cfg.resolved_burn_in() == 100);
  CHECK(cfg.stored_count() == 90);
  cfg.burn_in = 0;
  CHECK(cfg.stored_count() == 100);
  cfg.thin = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.thin = 1;
  cfg.burn_in = 1000;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.burn_in = std::nullopt;
  cfg.iterations = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("run: unrestricted chain matches direct NIW and Haar sampling") {
  const auto m = fixture::bivariate();
  SamplerConfig cfg;
  cfg.iterations = 110000;
  cfg.burn_in = 10000;
  cfg.thin = 5;
  Rng rng(17);
  const auto out = run_chain(m.posterior, RestrictionSet{}, m.spec, cfg, rng);
  REQUIRE(out.draws.size() == 20000);
  const auto f = factorize(m.posterior);
  Rng direct(18);
  oracle::Gen g(18);
  std::vector<std::vector<double>> gs(5), ds(5);
  auto push = [](std::vector<std::vector<double>>& v, const MatrixXd& B, const MatrixXd& S,
                 const MatrixXd& Q) {
    v[0].push_back(S(0, 0));
    v[1].push_back(S(1, 0));
    v[2].push_back(B(0, 0));
    v[3].push_back(B(2, 1));
    v[4].push_back(Q(1, 0));
  };
  for (const auto& d : out.draws) push(gs, d.B, d.Sigma, d.Q);
  for (int k = 0; k < 60000; ++k) {
    const auto rf = draw_niw(m.posterior, f, direct);
    push(ds, rf.B, rf.Sigma, oracle::haar_qr(2, g));
  }
  for (int i = 0; i < 5; ++i) CHECK(oracle::ks_two_sample(gs[i], ds[i]) < 0.02);
}

TEST_CASE("run: scalar model matches direct conjugate sampling") {
  MatrixXd impact(1, 1), A(1, 1);
  impact << 0.7;
  A << 0.6;
  const auto m = fixture::simulate(impact, A, 80, 19);
  SamplerConfig cfg;
  cfg.iterations = 220000;
  cfg.burn_in = 20000;
  cfg.thin = 10;
  Rng rng(19);
  const auto out = run_chain(m.posterior, RestrictionSet{}, m.spec, cfg, rng);
  const auto f = factorize(m.posterior);
  Rng direct(20);
  std::vector<double> gs, gb, ds, db;
  for (const auto& d : out.draws) {
    gs.push_back(d.Sigma(0, 0));
    gb.push_back(d.B(0, 0));
  }
  for (int k = 0; k < 100000; ++k) {
    const auto rf = draw_niw(m.posterior, f, direct);
    ds.push_back(rf.Sigma(0, 0));
    db.push_back(rf.B(0, 0));
  }
  CHECK(oracle::ks_two_sample(gs, ds) < 0.02);
  CHECK(oracle::ks_two_sample(gb, db) < 0.02);
}

TEST_CASE("run: restricted chain keeps every draw valid and is reproducible") {
  const auto m = fixture::bivariate();
  RestrictionSet set;
  set.signs.push_back({0, 0, {0, 2}, 1});
  set.signs.push_back({0, 1, {0, 0}, 1});
  set.rankings.push_back({1, 1, 0, 1, 1});
  SamplerConfig cfg;
  cfg.iterations = 3000;
  cfg.thin = 3;
  cfg.validate_each_iteration = true;
  Rng a(21), b(21);
  const auto out = run_chain(m.posterior, set, m.spec, cfg, a);
  const auto again = run_chain(m.posterior, set, m.spec, cfg, b);
  REQUIRE(out.draws.size() == static_cast<std::size_t>(cfg.stored_count()));
  for (std::size_t k = 0; k < out.draws.size(); ++k) {
    REQUIRE(indicator(set, out.draws[k], m.spec));
    REQUIRE(out.draws[k].B == again.draws[k].B);
    REQUIRE(out.draws[k].Q == again.draws[k].Q);
  }
  CHECK(out.b_step.mean_trials() >= 1.0);
  CHECK(out.q_step.steps == 3000);
}

TEST_CASE("state_from: reproduces a supplied state and rejects a violating one") {
  const auto m = fixture::bivariate();
  RestrictionSet set;
  set.signs.push_back({0, 0, {0, 0}, 1});
  GibbsSampler s(m.posterior, set, m.spec);
  oracle::Gen g(22);
  MatrixXd Q = oracle::haar_qr(2, g);
  const MatrixXd Sigma = m.posterior.Phi / (m.posterior.nu - 3);
  if ((lower_chol(Sigma) * Q)(0, 0) < 0) Q.col(0) *= -1.0;
  const OrthogonalParams p{m.posterior.Psi, Sigma, Q};
  const auto st = s.state_from(p);
  CHECK(max_abs(st.q - Q) < 1e-12);
  CHECK(max_abs(st.sigma - Sigma) < 1e-10);
  SamplerConfig cfg;
  cfg.iterations = 50;
  cfg.thin = 1;
  Rng rng(22);
  const auto out = s.run(cfg, rng, st);
  CHECK(out.init_attempts == 0);
  CHECK(out.draws.size() == 45);

  OrthogonalParams bad = p;
  bad.Q.col(0) *= -1.0;
  CHECK_THROWS_AS(s.state_from(bad), InfeasibleError);
}

TEST_CASE("GibbsSampler: rejects flat or mismatched posteriors") {
  const auto m = fixture::bivariate();
  auto flat = m.posterior;
  flat.flat_coefficients = true;
  CHECK_THROWS_AS(GibbsSampler(flat, RestrictionSet{}, m.spec), ConfigError);
  CHECK_THROWS_AS(GibbsSampler(m.posterior, RestrictionSet{}, ModelSpec{2, 2}), ConfigError);
  RestrictionSet bad;
  bad.signs.push_back({3, 0, {0, 0}, 1});
  CHECK_THROWS_AS(GibbsSampler(m.posterior, bad, m.spec), ConfigError);
}
