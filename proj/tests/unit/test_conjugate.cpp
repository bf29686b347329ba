#include <doctest.h>

#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"

#include "signvar/conjugate.hpp"
#include "signvar/error.hpp"

#include <cmath>

using namespace signvar;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double max_abs(const MatrixXd& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

// 1% two-sided KS critical values.
double ks_crit(std::size_t n) { return 1.63 / std::sqrt(static_cast<double>(n)); }
double ks_crit2(std::size_t a, std::size_t b) {
  return 1.63 * std::sqrt(static_cast<double>(a + b) / static_cast<double>(a * b));
}

// Posterior by least squares on data augmented with prior dummy observations.
NiwParams dummy_observation_posterior(const NiwParams& prior, const TimeSeriesData& d) {
  const int m = prior.m();
  const MatrixXd omega_inv = prior.Omega.inverse();
  const MatrixXd root = Eigen::LLT<MatrixXd>(omega_inv).matrixU();  // root' root = Omega^{-1}
  MatrixXd Xa(d.T() + m, m), Ya(d.T() + m, prior.n());
  Xa << d.X, root;
  Ya << d.Y, root * prior.Psi;
  NiwParams post;
  post.Psi = oracle::ols(Xa, Ya);
  const MatrixXd E = Ya - Xa * post.Psi;
  post.Phi = prior.Phi + E.transpose() * E;
  post.Omega = (Xa.transpose() * Xa).inverse();
  post.nu = prior.nu + static_cast<int>(d.T());
  return post;
}

}  // namespace

TEST_CASE("posterior_update: T = 0 returns the prior") {
  const auto m = fixture::bivariate();
  TimeSeriesData empty{MatrixXd(0, 2), MatrixXd(0, 3)};
  const auto post = posterior_update(m.prior, empty);
  CHECK(post.nu == m.prior.nu);
  CHECK(post.Phi == m.prior.Phi);
  CHECK(post.Psi == m.prior.Psi);
  CHECK(post.Omega == m.prior.Omega);
}

TEST_CASE("posterior_update: agrees with the dummy-observation regression") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto m = fixture::bivariate(seed);
    auto prior = m.prior;
    oracle::Gen g(seed);
    prior.Psi = oracle::gaussian(prior.m(), prior.n(), g);
    prior.Omega = oracle::random_spd(prior.m(), g);
    prior.Phi = oracle::random_spd(prior.n(), g);
    const auto post = posterior_update(prior, m.data);
    const auto ref = dummy_observation_posterior(prior, m.data);
    CHECK(post.nu == ref.nu);
    CHECK(max_abs(post.Psi - ref.Psi) < 1e-9);
    CHECK(max_abs(post.Omega - ref.Omega) < 1e-9);
    CHECK(max_abs(post.Phi - ref.Phi) < 1e-8 * (1.0 + max_abs(ref.Phi)));
  }
}

TEST_CASE("posterior_update: flat coefficient prior gives OLS") {
  const auto m = fixture::five_variable();
  NiwParams prior;
  prior.nu = 7;
  prior.Phi = 1e-4 * MatrixXd::Identity(5, 5);
  prior.Psi = MatrixXd::Zero(m.spec.m(), 5);
  prior.flat_coefficients = true;
  const auto post = posterior_update(prior, m.data);
  const MatrixXd b_ols = oracle::ols(m.data.X, m.data.Y);
  const MatrixXd E = m.data.Y - m.data.X * b_ols;
  CHECK(max_abs(post.Psi - b_ols) < 1e-9);
  CHECK(max_abs(post.Omega - MatrixXd((m.data.X.transpose() * m.data.X).inverse())) < 1e-10);
  CHECK(max_abs(post.Phi - (prior.Phi + E.transpose() * E)) < 1e-8);
  CHECK(post.nu == 7 + 200);
  CHECK_FALSE(post.flat_coefficients);
}

TEST_CASE("posterior_update: diffuse proper prior approaches OLS") {
  const auto m = fixture::bivariate();
  auto prior = m.prior;
  const MatrixXd b_ols = oracle::ols(m.data.X, m.data.Y);
  double previous = 1e300;
  for (double scale : {1e2, 1e4, 1e6, 1e8}) {
    prior.Omega = scale * MatrixXd::Identity(3, 3);
    const double gap = max_abs(posterior_update(prior, m.data).Psi - b_ols);
    CHECK(gap < previous);
    previous = gap;
  }
  CHECK(previous < 1e-6);
}

TEST_CASE("posterior_update: dimension mismatch") {
  const auto m = fixture::bivariate();
  TimeSeriesData bad{m.data.Y, m.data.X.leftCols(2)};
  CHECK_THROWS_AS(posterior_update(m.prior, bad), DataError);
}

TEST_CASE("NiwParams::validate") {
  auto p = fixture::weak_prior(ModelSpec{2, 1});
  CHECK_NOTHROW(p.validate());
  auto bad = p;
  bad.nu = 1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = p;
  bad.Phi(0, 0) = -1.0;
  CHECK_THROWS_AS(bad.validate(), NumericalError);
  bad = p;
  bad.Omega = MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = p;
  bad.flat_coefficients = true;
  CHECK_THROWS_AS(factorize(bad), NumericalError);
}

TEST_CASE("gamma: output is orthogonal and the latent round trip holds") {
  Rng rng(1);
  for (int n = 1; n <= 8; ++n) {
    for (int k = 0; k < 25; ++k) {
      const auto x = draw_orthogonal_latent(n, rng);
      const MatrixXd Q = sample_orthogonal_haar(x);
      CHECK(orthogonality_error(Q) < 1e-12);
      const MatrixXd back = sample_orthogonal_haar(orthogonal_latent_from(Q));
      CHECK(max_abs(back - Q) < 1e-12);
    }
  }
}

TEST_CASE("gamma: first column is x_1 / |x_1| and scale invariance") {
  Rng rng(2);
  const auto x = draw_orthogonal_latent(4, rng);
  const MatrixXd Q = sample_orthogonal_haar(x);
  const VectorXd x1 = x.values.head(4);
  CHECK(max_abs(Q.col(0) - x1 / x1.norm()) < 1e-14);
  OrthogonalLatent scaled = x;
  scaled.values.head(4) *= 3.0;
  scaled.values.segment(4, 3) *= 0.2;
  CHECK(max_abs(sample_orthogonal_haar(scaled) - Q) < 1e-13);
}

TEST_CASE("gamma: zero column is rejected") {
  OrthogonalLatent x{3, VectorXd::Ones(6)};
  x.values.segment(3, 2).setZero();
  CHECK_THROWS_AS(sample_orthogonal_haar(x), NumericalError);
  OrthogonalLatent wrong{3, VectorXd::Ones(5)};
  CHECK_THROWS_AS(sample_orthogonal_haar(wrong), NumericalError);
}

TEST_CASE("gamma: Haar marginals, q11^2 ~ Beta(1/2, (n-1)/2)") {
  const int n = 4;
  const std::size_t N = 20000;
  Rng rng(3);
  std::vector<double> q11, q22, q_ref;
  oracle::Gen g(3);
  for (std::size_t k = 0; k < N; ++k) {
    const MatrixXd Q = sample_orthogonal_haar(draw_orthogonal_latent(n, rng));
    q11.push_back(Q(0, 0) * Q(0, 0));
    q22.push_back(Q(1, 1));
    q_ref.push_back(oracle::haar_qr(n, g)(1, 1));
  }
  const double d = oracle::ks_one_sample(q11, [](double v) { return oracle::beta_cdf(0.5, 1.5, v); });
  CHECK(d < ks_crit(N));
  CHECK(oracle::ks_two_sample(q22, q_ref) < ks_crit2(N, N));
}

TEST_CASE("gamma: left invariance, P Q has the same law as Q") {
  const int n = 3;
  const std::size_t N = 20000;
  Rng rng(4);
  oracle::Gen g(4);
  const MatrixXd P = oracle::haar_qr(n, g);
  std::vector<double> a, b;
  for (std::size_t k = 0; k < N; ++k) {
    a.push_back(sample_orthogonal_haar(draw_orthogonal_latent(n, rng))(2, 1));
    b.push_back((P * sample_orthogonal_haar(draw_orthogonal_latent(n, rng)))(2, 1));
  }
  CHECK(oracle::ks_two_sample(a, b) < ks_crit2(N, N));
}

TEST_CASE("varsigma: inverse Wishart moments and Bartlett agreement") {
  const int n = 3, nu = 9;
  const std::size_t N = 40000;
  oracle::Gen g(5);
  NiwParams params = fixture::weak_prior(ModelSpec{n, 0});
  params.nu = nu;
  params.Phi = oracle::random_spd(n, g);
  const auto f = factorize(params);
  Rng rng(5);
  MatrixXd sum = MatrixXd::Zero(n, n);
  MatrixXd sum_sq = MatrixXd::Zero(n, n);
  std::vector<double> s12, s12_ref, s33, s33_ref;
  for (std::size_t k = 0; k < N; ++k) {
    const MatrixXd S = sample_inverse_wishart(draw_wishart_latent(f, nu, rng));
    sum += S;
    sum_sq += S.cwiseProduct(S);
    s12.push_back(S(0, 1));
    s33.push_back(S(2, 2));
    const MatrixXd R = oracle::bartlett_iw(nu, params.Phi, g);
    s12_ref.push_back(R(0, 1));
    s33_ref.push_back(R(2, 2));
  }
  const MatrixXd mean = sum / N;
  const MatrixXd sd = ((sum_sq / N - mean.cwiseProduct(mean)) / N).cwiseSqrt();
  const MatrixXd expected = params.Phi / (nu - n - 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) CHECK(std::abs(mean(i, j) - expected(i, j)) < 5.0 * sd(i, j));
  CHECK(oracle::ks_two_sample(s12, s12_ref) < ks_crit2(N, N));
  CHECK(oracle::ks_two_sample(s33, s33_ref) < ks_crit2(N, N));
}

TEST_CASE("varsigma: round trip through wishart_latent_from") {
  oracle::Gen g(6);
  for (int k = 0; k < 20; ++k) {
    const MatrixXd S = oracle::random_spd(4, g);
    const auto latent = wishart_latent_from(S, 7);
    CHECK(latent.r.cols() == 7);
    CHECK(max_abs(sample_inverse_wishart(latent) - S) < 1e-10);
  }
  CHECK_THROWS_AS(wishart_latent_from(MatrixXd::Identity(3, 3), 2), ConfigError);
  CHECK_THROWS_AS(sample_inverse_wishart(WishartLatent{MatrixXd::Zero(2, 4)}), NumericalError);
}

TEST_CASE("matrix normal: vec(B) covariance is Sigma (x) Omega") {
  const int m = 3, n = 2;
  const std::size_t N = 60000;
  oracle::Gen g(7);
  const MatrixXd Psi = oracle::gaussian(m, n, g);
  const MatrixXd Sigma = oracle::random_spd(n, g);
  const MatrixXd Omega = oracle::random_spd(m, g);
  const MatrixXd cov = oracle::kron(Sigma, Omega);
  Rng rng(7);
  VectorXd sum = VectorXd::Zero(m * n);
  MatrixXd outer = MatrixXd::Zero(m * n, m * n);
  std::vector<double> b21, b21_ref;
  for (std::size_t k = 0; k < N; ++k) {
    const MatrixXd B = sample_matrix_normal_b(Psi, Sigma, Omega, rng.normal_matrix(m, n));
    const VectorXd v = oracle::vec(B) - oracle::vec(Psi);
    sum += v;
    outer += v * v.transpose();
    b21.push_back(B(1, 0) + B(2, 1));
    const MatrixXd R = oracle::kron_matrix_normal(Psi, Sigma, Omega, g);
    b21_ref.push_back(R(1, 0) + R(2, 1));
  }
  const MatrixXd emp = outer / N;
  for (int i = 0; i < m * n; ++i) {
    CHECK(std::abs(sum(i) / N) < 5.0 * std::sqrt(cov(i, i) / N));
    for (int j = 0; j < m * n; ++j) {
      const double se = std::sqrt((cov(i, i) * cov(j, j) + cov(i, j) * cov(i, j)) / N);
      CHECK(std::abs(emp(i, j) - cov(i, j)) < 5.0 * se);
    }
  }
  CHECK(oracle::ks_two_sample(b21, b21_ref) < ks_crit2(N, N));
}

TEST_CASE("log_density_b: differences match the Kronecker Gaussian density") {
  const int m = 3, n = 2;
  oracle::Gen g(8);
  const MatrixXd Psi = oracle::gaussian(m, n, g);
  const MatrixXd Omega = oracle::random_spd(m, g);
  auto full = [&](const MatrixXd& B, const MatrixXd& S) {
    const MatrixXd cov = oracle::kron(S, Omega);
    const VectorXd e = oracle::vec(B - Psi);
    // log N without the constant and without -n/2 log det Omega
    return -0.5 * std::log(cov.determinant()) + 0.5 * n * std::log(Omega.determinant()) -
           0.5 * e.dot(cov.ldlt().solve(e));
  };
  for (int k = 0; k < 20; ++k) {
    const MatrixXd B = oracle::gaussian(m, n, g);
    const MatrixXd S = oracle::random_spd(n, g);
    CHECK(log_density_b(B, Psi, S, Omega) == doctest::Approx(full(B, S)).epsilon(1e-10));
  }
}

TEST_CASE("draw_niw: Sigma marginal and conditional B mean") {
  const auto model = fixture::bivariate();
  const auto f = factorize(model.posterior);
  Rng rng(9);
  const std::size_t N = 20000;
  MatrixXd sum_b = MatrixXd::Zero(3, 2);
  MatrixXd sum_s = MatrixXd::Zero(2, 2);
  for (std::size_t k = 0; k < N; ++k) {
    const auto d = draw_niw(model.posterior, f, rng);
    sum_b += d.B;
    sum_s += d.Sigma;
  }
  const MatrixXd expected_s = model.posterior.Phi / (model.posterior.nu - 3);
  CHECK(max_abs(sum_s / N - expected_s) < 0.02 * max_abs(expected_s));
  const double sd = std::sqrt(expected_s.maxCoeff() * model.posterior.Omega.maxCoeff());
  CHECK(max_abs(sum_b / N - model.posterior.Psi) < 5.0 * sd / std::sqrt(double(N)));
}

TEST_CASE("minnesota_niw: structure") {
  const auto model = fixture::five_variable();
  const auto prior = minnesota_niw(model.spec, model.data);
  CHECK(prior.nu == 7);
  CHECK(prior.Psi.rows() == 6);
  for (int j = 0; j < 5; ++j) {
    CHECK(prior.Psi(j, j) == 1.0);
    CHECK(prior.Phi(j, j) > 0.0);
  }
  CHECK(prior.Psi.cwiseAbs().sum() == 5.0);
  CHECK(max_abs(MatrixXd(prior.Omega.diagonal().asDiagonal()) - prior.Omega) == 0.0);
  CHECK(prior.Omega(5, 5) == doctest::Approx(0.04 * 1e4));
  CHECK_NOTHROW(prior.validate());

  MinnesotaHyper hyper;
  hyper.own_lag_mean = 0.0;
  hyper.nu = 12;
  const auto p2 = minnesota_niw(model.spec, model.data, hyper);
  CHECK(p2.nu == 12);
  CHECK(max_abs(p2.Psi) == 0.0);
}

TEST_CASE("minnesota_niw: tighter prior pulls the posterior mean to the prior mean") {
  const auto model = fixture::bivariate();
  MinnesotaHyper loose, tight;
  loose.tightness = 10.0;
  tight.tightness = 1e-4;
  const auto pl = posterior_update(minnesota_niw(model.spec, model.data, loose), model.data);
  const auto pt = posterior_update(minnesota_niw(model.spec, model.data, tight), model.data);
  const auto prior = minnesota_niw(model.spec, model.data, tight);
  CHECK(max_abs(pt.Psi.topRows(2) - prior.Psi.topRows(2)) < 1e-3);
  CHECK(max_abs(pl.Psi - oracle::ols(model.data.X, model.data.Y)) < 0.05);
}

TEST_CASE("minnesota_niw: constant series is a data error") {
  ModelSpec spec{2, 1};
  MatrixXd raw(20, 2);
  raw.col(0).setConstant(3.0);
  oracle::Gen g(10);
  raw.col(1) = oracle::gaussian(20, 1, g);
  CHECK_THROWS_AS(minnesota_niw(spec, build_regressors(raw, spec)), DataError);
}
