#include <doctest.h>

#include <cmath>
#include <set>

#include "gpgrad/bench.hpp"
#include "oracles.hpp"

using namespace gpgrad;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

void check_fd(const TestFunction& fn, int points, double rtol, RngEngine& rng) {
  std::uniform_real_distribution<double> unif(0.05, 0.95);
  int done = 0;
  while (done < points) {
    VectorXd x(fn.D);
    for (int d = 0; d < fn.D; ++d)
      x[d] = fn.lo[d] + unif(rng) * (fn.hi[d] - fn.lo[d]);
    if (fn.excluded && fn.excluded(x)) continue;
    const VectorXd g = fn(x).grad;
    for (int d = 0; d < fn.D; ++d) {
      const double h = 1e-5 * (fn.hi[d] - fn.lo[d]);
      VectorXd xp = x, xm = x;
      xp[d] += h;
      xm[d] -= h;
      const double fd = (fn(xp).y - fn(xm).y) / (2.0 * h);
      CHECK(std::abs(fd - g[d]) <= rtol * std::max(1.0, std::abs(g[d])));
    }
    ++done;
  }
}

}  // namespace

TEST_CASE("step function values") {
  auto r = step_fn(0.5);
  CHECK(r.y == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(r.grad[0] == doctest::Approx(0.3989422804014327 / 0.065).epsilon(1e-12));
  CHECK(std::abs(step_fn(0.0).y - 0.0) < 1e-10);
  CHECK(std::abs(step_fn(1.0).y - 1.0) < 1e-10);
}

TEST_CASE("squiggle zeros and gradient") {
  VectorXd x(2);
  x << 0.0, 0.7;
  CHECK(squiggle_fn(x, 0.05).y == 0.0);
  x << 0.4, 0.0;
  CHECK(squiggle_fn(x, 0.05).y == 0.0);
  CHECK_THROWS_AS(squiggle_fn(x, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(squiggle_fn(x, -1.0), std::invalid_argument);

  RngEngine rng = make_stream(31, 0);
  TestFunction fn = make_test_function("squiggle", 2, 0.05);
  check_fd(fn, 50, 1e-5, rng);
}

TEST_CASE("plateau structure and gradient") {
  VectorXd x(3);
  x << 0.5, -1.0, 0.3;
  auto r = plateau_fn(x);
  CHECK(r.grad[0] == r.grad[1]);
  CHECK(r.grad[1] == r.grad[2]);

  // sum = -4/3 puts the CDF argument at zero
  VectorXd x0 = VectorXd::Constant(2, -2.0 / 3.0);
  CHECK(plateau_fn(x0).y == doctest::Approx(0.0).epsilon(1e-14));

  RngEngine rng = make_stream(32, 0);
  TestFunction fn = make_test_function("plateau", 3);
  check_fd(fn, 50, 1e-5, rng);
}

TEST_CASE("ignition values, singularity, gradient") {
  VectorXd e1 = VectorXd::Zero(6);
  e1[0] = 1.0;
  // r = 1: t = Phi(-10 sqrt(2)) < 1e-44, so q = 1 and y = 0
  CHECK(std::abs(ignition_fn(e1).y) < 1e-12);
  CHECK_THROWS_AS(ignition_fn(VectorXd::Zero(6)), std::domain_error);

  RngEngine rng = make_stream(33, 0);
  TestFunction fn = make_test_function("ignition", 6);
  check_fd(fn, 50, 1e-4, rng);
}

TEST_CASE("test function registry") {
  CHECK_THROWS_AS(make_test_function("nope", 2), std::invalid_argument);
  CHECK_THROWS_AS(make_test_function("step", 2), std::invalid_argument);
  CHECK_THROWS_AS(make_test_function("squiggle", 3), std::invalid_argument);
  CHECK(make_test_function("plateau", 5).D == 5);
}

TEST_CASE("lhs bin property and determinism") {
  RngEngine rng = make_stream(34, 0);
  MatrixXd one = lhs(1, 3, rng);
  CHECK(one.minCoeff() >= 0.0);
  CHECK(one.maxCoeff() <= 1.0);

  const std::vector<std::pair<int, int>> sizes{{7, 2}, {50, 4}, {500, 10}};
  for (auto [n, D] : sizes) {
    MatrixXd X = lhs(n, D, rng);
    for (int d = 0; d < D; ++d) {
      std::set<int> bins;
      for (int i = 0; i < n; ++i)
        bins.insert(static_cast<int>(std::floor(X(i, d) * n)));
      CHECK(static_cast<int>(bins.size()) == n);
      CHECK(*bins.begin() == 0);
      CHECK(*bins.rbegin() == n - 1);
    }
  }

  RngEngine a = make_stream(7, 1), b = make_stream(7, 1), c = make_stream(7, 2);
  MatrixXd Xa = lhs(20, 3, a), Xb = lhs(20, 3, b), Xc = lhs(20, 3, c);
  CHECK((Xa - Xb).cwiseAbs().maxCoeff() == 0.0);
  CHECK((Xa - Xc).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("rmse") {
  VectorXd a(3), b(3);
  a << 1.0, 2.0, 3.0;
  CHECK(rmse(a, a) == 0.0);
  b = a.array() + 0.4;
  CHECK(rmse(a, b) == doctest::Approx(0.4).epsilon(1e-12));
  b << 0.0, 1.0, 5.0;
  const double direct =
      std::sqrt(((a - b).array().square().sum()) / 3.0);
  CHECK(rmse(a, b) == doctest::Approx(direct).epsilon(1e-15));
}

TEST_CASE("crps_gaussian closed form") {
  // truth at the mean: sigma (2 phi(0) - 1/sqrt(pi))
  const double expected = 2.0 * 0.3989422804014327 - 1.0 / std::sqrt(M_PI);
  CHECK(crps_gaussian(1.0, 2.5, 1.0) ==
        doctest::Approx(2.5 * expected).epsilon(1e-12));
  CHECK(crps_gaussian(1.0, 0.0, 3.0) == doctest::Approx(2.0));

  // translation invariance and nonnegativity
  RngEngine rng = make_stream(35, 0);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (int i = 0; i < 50; ++i) {
    const double mu = unif(rng), tr = unif(rng), s = std::abs(unif(rng)) + 0.1;
    const double c = unif(rng);
    CHECK(crps_gaussian(mu, s, tr) >= 0.0);
    CHECK(crps_gaussian(mu + c, s, tr + c) ==
          doctest::Approx(crps_gaussian(mu, s, tr)).epsilon(1e-12));
  }
}

TEST_CASE("crps_gaussian matches Monte Carlo estimate") {
  const double mu = 0.4, sigma = 1.3, truth = 1.1;
  RngEngine rng = make_stream(36, 0);
  std::normal_distribution<double> normal(mu, sigma);
  const int n = 4000000;
  double e_abs = 0.0, e_pair = 0.0;
  for (int i = 0; i < n; ++i) {
    const double a = normal(rng), b = normal(rng);
    e_abs += 0.5 * (std::abs(a - truth) + std::abs(b - truth));
    e_pair += std::abs(a - b);
  }
  const double mc = e_abs / n - 0.5 * e_pair / n;
  CHECK(std::abs(crps_gaussian(mu, sigma, truth) - mc) < 1e-3);
}
