#include <doctest.h>

#include <cmath>

#include "gpgrad/gauss.hpp"
#include "gpgrad/kernel.hpp"
#include "oracles.hpp"

using namespace gpgrad;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("chol_jitter basics") {
  CholFactor f = chol_jitter(MatrixXd::Identity(3, 3), 0.0);
  CHECK((f.lower() - MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(f.logdet() == 0.0);

  MatrixXd A(1, 1);
  A << 4.0;
  CholFactor g = chol_jitter(A, 0.0);
  CHECK(g.lower()(0, 0) == doctest::Approx(2.0));
  CHECK(g.logdet() == doctest::Approx(std::log(4.0)));

  MatrixXd B(2, 2);
  B << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3 and -1
  CHECK_THROWS_AS(chol_jitter(B, 0.0), NotPositiveDefinite);
  CHECK_NOTHROW(chol_jitter(B, 1.5));
}

TEST_CASE("mvn_condition interpolates and decays to the prior") {
  MatrixXd X(3, 1);
  X << 0.1, 0.5, 0.9;
  VectorXd th = VectorXd::Constant(1, 1.0);
  VectorXd y(3);
  y << 0.3, -1.0, 2.0;
  const double tau2 = 1.7;
  CholFactor Ktt = chol_jitter(k_block(0, 0, X, X, th), 1e-8);

  SUBCASE("at training locations") {
    CondResult r = mvn_condition(k_block(0, 0, X, X, th),
                                 k_block(0, 0, X, X, th), Ktt, y, tau2);
    CHECK((r.mean - y).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(r.var.maxCoeff() <= 1e-6 * tau2);
  }
  SUBCASE("far away") {
    MatrixXd far(1, 1);
    far << 500.0;
    CondResult r = mvn_condition(k_block(0, 0, far, far, th),
                                 k_block(0, 0, far, X, th), Ktt, y, tau2);
    CHECK(std::abs(r.mean[0]) < 1e-12);
    CHECK(r.var[0] == doctest::Approx(tau2).epsilon(1e-10));
  }
}

TEST_CASE("mvn_condition matches the hand-evaluated 2-point kriging formula") {
  MatrixXd X(2, 1);
  X << 0.0, 1.0;
  VectorXd th = VectorXd::Constant(1, 1.0);
  VectorXd y(2);
  y << 1.0, -1.0;
  MatrixXd Xp(1, 1);
  Xp << 0.5;
  const double tau2 = 2.3;
  CholFactor Ktt = chol_jitter(k_block(0, 0, X, X, th), 0.0);
  CondResult r = mvn_condition(k_block(0, 0, Xp, Xp, th),
                               k_block(0, 0, Xp, X, th), Ktt, y, tau2);
  // by hand: k = e^{-1/4}, a = e^{-1}; mu = k(1-1)/(1-a) = 0,
  // var = tau2 (1 - 2k^2/(1+a))
  const double k = std::exp(-0.25), a = std::exp(-1.0);
  CHECK(std::abs(r.mean[0] - 0.0) < 1e-10);
  CHECK(r.var[0] ==
        doctest::Approx(tau2 * (1.0 - 2.0 * k * k / (1.0 + a))).epsilon(1e-10));
}

TEST_CASE("conditioning equals brute-force stacked MVN oracle") {
  RngEngine rng = make_stream(21, 0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  // a mild jitter keeps the shared linear systems well away from the
  // conditioning limit, so two independent solve routes agree tightly
  const double eps = 1e-5;
  for (int rep = 0; rep < 20; ++rep) {
    const int D = 1 + rep % 3, n = 3 + rep % 4, np = 2 + rep % 4;
    MatrixXd X = oracle::separated_points(n, D, rng);
    MatrixXd Xp(np, D);
    for (int i = 0; i < np; ++i)
      for (int d = 0; d < D; ++d) Xp(i, d) = unif(rng);
    VectorXd th(D);
    for (int d = 0; d < D; ++d) th[d] = 0.5 + 2.0 * unif(rng);
    VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = 2.0 * unif(rng) - 1.0;

    CholFactor Ktt = chol_jitter(k_block(0, 0, X, X, th), eps);
    CondResult r = mvn_condition(k_block(0, 0, Xp, Xp, th),
                                 k_block(0, 0, Xp, X, th), Ktt, y, 1.4);
    auto o = oracle::condition(oracle::stacked_obs(X, 0), y,
                               oracle::stacked_obs(Xp, 0), th, eps, 1.4);
    CHECK((r.mean - o.mean).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((*r.cov - o.cov).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((*r.cov - r.cov->transpose()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(r.var.minCoeff() >= 0.0);

    CondResult lite =
        mvn_condition_lite(VectorXd::Ones(np), k_block(0, 0, Xp, X, th), Ktt,
                           y, 1.4);
    CHECK((lite.mean - r.mean).cwiseAbs().maxCoeff() == 0.0);
    CHECK((lite.var - r.var).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("loglik_profiled values and scaling identity") {
  const double eps = 1e-8;
  MatrixXd K1(1, 1);
  K1 << 1.0;
  VectorXd y1(1);
  y1 << 1.0;
  CHECK(loglik_profiled(chol_jitter(K1, eps), y1) ==
        doctest::Approx(0.0).epsilon(1e-12));

  RngEngine rng = make_stream(22, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd X(4, 1);
  X << 0.1, 0.3, 0.6, 0.95;
  VectorXd th = VectorXd::Constant(1, 0.8);
  CholFactor K = chol_jitter(k_block(0, 0, X, X, th), eps);
  VectorXd y(4);
  for (int i = 0; i < 4; ++i) y[i] = normal(rng);
  const double c = 3.7;
  const double shift = loglik_profiled(K, (c * y).eval()) - loglik_profiled(K, y);
  CHECK(shift == doctest::Approx(-0.5 * 4.0 * std::log(c * c)).epsilon(1e-12));

  CHECK_THROWS_AS(loglik_profiled(K, VectorXd::Zero(4)), std::domain_error);
}

TEST_CASE("loglik_profiled matches 1-D quadrature over the scale") {
  // integrate N(y; 0, tau2 K) / tau2 dtau2 by Simpson in u = log tau2
  MatrixXd X(3, 1);
  X << 0.2, 0.5, 0.8;
  VectorXd th = VectorXd::Constant(1, 1.3);
  const double eps = 1e-8;
  CholFactor K = chol_jitter(k_block(0, 0, X, X, th), eps);
  VectorXd y(3);
  y << 0.7, -0.4, 1.1;

  const double N = 3.0;
  const double logdet = K.logdet();
  const double quad = K.quad(y);
  auto log_integrand = [&](double u) {
    return -0.5 * N * (u + std::log(2.0 * M_PI)) - 0.5 * logdet -
           0.5 * std::exp(-u) * quad;
  };
  const int steps = 200000;
  const double lo = -40.0, hi = 40.0, h = (hi - lo) / steps;
  double acc = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * std::exp(log_integrand(lo + i * h));
  }
  const double log_integral = std::log(acc * h / 3.0);

  const double ll = loglik_profiled(K, y);
  const double expected_shift =
      -0.5 * N * std::log(2.0 * M_PI) + std::lgamma(0.5 * N) +
      0.5 * N * std::log(2.0);
  CHECK(log_integral == doctest::Approx(ll + expected_shift).epsilon(1e-6));
}

TEST_CASE("loglik_profiled is permutation invariant") {
  RngEngine rng = make_stream(23, 0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  MatrixXd X(5, 2);
  VectorXd y(5);
  for (int i = 0; i < 5; ++i) {
    X(i, 0) = unif(rng);
    X(i, 1) = unif(rng);
    y[i] = unif(rng) - 0.5;
  }
  VectorXd th = VectorXd::Constant(2, 1.0);
  const double base =
      loglik_profiled(chol_jitter(k_block(0, 0, X, X, th), 1e-8), y);
  std::vector<int> p{4, 2, 0, 3, 1};
  MatrixXd Xp(5, 2);
  VectorXd yp(5);
  for (int i = 0; i < 5; ++i) {
    Xp.row(i) = X.row(p[i]);
    yp[i] = y[p[i]];
  }
  const double perm =
      loglik_profiled(chol_jitter(k_block(0, 0, Xp, Xp, th), 1e-8), yp);
  CHECK(perm == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("tau2_hat") {
  VectorXd y(4);
  y << 1.0, -1.0, 1.0, 1.0;  // sum of squares = 4 = N
  CholFactor I4 = chol_jitter(MatrixXd::Identity(4, 4), 0.0);
  CHECK(tau2_hat(I4, y) == doctest::Approx(1.0));
  CHECK(tau2_hat(I4, VectorXd::Zero(4)) == 0.0);

  RngEngine rng = make_stream(24, 0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  MatrixXd X(4, 1);
  VectorXd yy(4);
  for (int i = 0; i < 4; ++i) {
    X(i, 0) = unif(rng);
    yy[i] = unif(rng);
  }
  VectorXd th = VectorXd::Constant(1, 0.7);
  CholFactor K = chol_jitter(k_block(0, 0, X, X, th), 1e-8);
  const double direct =
      oracle::tau2_direct(oracle::stacked_obs(X, 0), yy, th, 1e-8);
  CHECK(tau2_hat(K, yy) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("mvn_sample moments") {
  CholFactor zero = CholFactor::from_lower(MatrixXd::Zero(2, 2));
  VectorXd mu(2);
  mu << 3.0, -1.0;
  RngEngine rng = make_stream(25, 0);
  CHECK((mvn_sample(mu, zero, rng) - mu).cwiseAbs().maxCoeff() == 0.0);

  MatrixXd A(2, 2);
  A << 2.0, 0.6, 0.6, 1.0;
  CholFactor f = chol_jitter(A, 0.0);
  const int n = 100000;
  Eigen::MatrixXd draws(n, 2);
  for (int i = 0; i < n; ++i) draws.row(i) = mvn_sample(mu, f, rng).transpose();
  Eigen::RowVectorXd m = draws.colwise().mean();
  for (int j = 0; j < 2; ++j) {
    const double se = std::sqrt(A(j, j) / n);
    CHECK(std::abs(m[j] - mu[j]) < 4.0 * se);
  }
  Eigen::MatrixXd centered = draws.rowwise() - m;
  Eigen::MatrixXd S = centered.transpose() * centered / (n - 1.0);
  CHECK((S - A).cwiseAbs().maxCoeff() < 0.05 * A.cwiseAbs().maxCoeff());
}
