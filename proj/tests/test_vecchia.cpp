#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "gpgrad/gauss.hpp"
#include "gpgrad/kernel.hpp"
#include "gpgrad/vecchia.hpp"
#include "oracles.hpp"

using namespace gpgrad;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// ordering with the identity permutation, response block first
std::vector<VecchiaObs> identity_order(int n, int blocks) {
  std::vector<VecchiaObs> order;
  for (int d = 0; d <= blocks; ++d)
    for (int i = 0; i < n; ++i) order.push_back({i, d});
  return order;
}

std::set<int> as_set(const std::vector<int>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST_CASE("order_grad layout") {
  RngEngine rng = make_stream(41, 0);
  auto order = order_grad(5, 2, rng);
  REQUIRE(order.size() == 15);
  // response block first, then each derivative block in the same permutation
  for (int i = 0; i < 5; ++i) {
    CHECK(order[i].deriv == 0);
    CHECK(order[5 + i].loc == order[i].loc);
    CHECK(order[5 + i].deriv == 1);
    CHECK(order[10 + i].loc == order[i].loc);
    CHECK(order[10 + i].deriv == 2);
  }
  auto plain = order_grad(7, 0, rng);
  CHECK(plain.size() == 7);
  std::set<int> locs;
  for (const auto& o : plain) {
    CHECK(o.deriv == 0);
    locs.insert(o.loc);
  }
  CHECK(locs.size() == 7);
}

TEST_CASE("conditioning sets reproduce the five-point derivative example") {
  // 1-D layout with dyadic spacing: y2 is nearer y1 than y3, and y2/y4/dy2
  // tie at distance 0.5 from y3's location
  MatrixXd X(5, 1);
  X << 0.0, 0.25, 0.75, 1.25, 1.5;
  auto sets = cond_sets(identity_order(5, 1), X, 3);

  CHECK(sets[0].empty());
  CHECK(as_set(sets[1]) == std::set<int>{0});
  CHECK(as_set(sets[2]) == std::set<int>{0, 1});
  CHECK(as_set(sets[3]) == std::set<int>{0, 1, 2});
  CHECK(as_set(sets[4]) == std::set<int>{1, 2, 3});
  // dy1 conditions on the nearest responses only
  CHECK(as_set(sets[5]) == std::set<int>{0, 1, 2});
  // dy2 picks dy1 over the farther y3 (and y1 over dy1 on the exact tie)
  CHECK(as_set(sets[6]) == std::set<int>{1, 0, 5});
  // dy3: three-way tie among y2, y4, dy2 resolves in favor of the responses
  CHECK(as_set(sets[7]) == std::set<int>{2, 1, 3});
  // dy4 and dy5 follow suit
  CHECK(as_set(sets[8]) == std::set<int>{3, 4, 2});
  CHECK(as_set(sets[9]) == std::set<int>{4, 3, 8});

  CHECK_THROWS_AS(cond_sets(identity_order(5, 1), X, 0),
                  std::invalid_argument);
}

TEST_CASE("full-budget conditioning takes all earlier positions") {
  RngEngine rng = make_stream(42, 0);
  MatrixXd X = oracle::separated_points(6, 2, rng);
  auto order = order_grad(6, 2, rng);
  auto sets = cond_sets(order, X, 1000);
  for (std::size_t i = 0; i < sets.size(); ++i) {
    CHECK(sets[i].size() == i);
    for (int p : sets[i]) CHECK(p < static_cast<int>(i));
  }
}

TEST_CASE("vecchia_loglik at full budget equals dense profiled loglik") {
  RngEngine rng = make_stream(43, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int rep = 0; rep < 6; ++rep) {
    const int D = 1 + rep % 2;
    const int n = 4 + 3 * (rep % 3);
    const bool ge = rep % 2 == 1;
    const int N = n * (1 + (ge ? D : 0));
    MatrixXd X = oracle::separated_points(n, D, rng);
    VectorXd th = VectorXd::Constant(D, 0.5 + 0.3 * rep);
    VectorXd y(N);
    for (int i = 0; i < N; ++i) y[i] = normal(rng);
    const double eps = 1e-6;

    auto plan = build_plan(order_grad(n, ge ? D : 0, rng), X, N - 1);
    const VectorXd y_ord = to_ordered(y, plan.order, n);
    const double vl = vecchia_loglik(plan, X, th, eps, y_ord);

    const MatrixXd K =
        ge ? assemble_grad_cov(X, th, 0.0) : k_block(0, 0, X, X, th);
    const double dl = loglik_profiled(chol_jitter(K, eps), y);
    CHECK(vl == doctest::Approx(dl).epsilon(1e-10));

    // and the implied factor matches the dense inverse
    const VecchiaFactor f = vecchia_factor(plan, X, th, eps);
    CHECK(f.logdet() == doctest::Approx(chol_jitter(K, eps).logdet()));
    CHECK(f.nnz() <= static_cast<std::size_t>(N) * (plan.m + 1));
  }
}

TEST_CASE("single observation likelihood") {
  MatrixXd X(1, 1);
  X << 0.3;
  VectorXd th = VectorXd::Constant(1, 1.0);
  VectorXd y(1);
  y << 0.8;
  auto plan = build_plan(identity_order(1, 0), X, 1);
  const double vl = vecchia_loglik(plan, X, th, 1e-8, y);
  const double dl = loglik_profiled(
      chol_jitter(k_block(0, 0, X, X, th), 1e-8), y);
  CHECK(vl == doctest::Approx(dl).epsilon(1e-14));
}

TEST_CASE("monotone refinement toward the dense likelihood") {
  std::normal_distribution<double> normal(0.0, 1.0);
  int better = 0;
  for (int seed = 0; seed < 20; ++seed) {
    RngEngine rng = make_stream(44, seed);
    const int n = 30, D = 2;
    MatrixXd X = oracle::separated_points(n, D, rng, 0.05);
    VectorXd th = VectorXd::Constant(D, 0.6);
    VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = normal(rng);
    const double eps = 1e-8;
    const double dense =
        loglik_profiled(chol_jitter(k_block(0, 0, X, X, th), eps), y);
    auto order = order_grad(n, 0, rng);
    const VectorXd y_ord = to_ordered(y, order, n);
    const double l3 =
        vecchia_loglik(build_plan(order, X, 3), X, th, eps, y_ord);
    const double l10 =
        vecchia_loglik(build_plan(order, X, 10), X, th, eps, y_ord);
    if (std::abs(l10 - dense) <= std::abs(l3 - dense)) ++better;
  }
  CHECK(better >= 16);
}

TEST_CASE("vecchia sampling matches the implied covariance") {
  RngEngine rng = make_stream(45, 0);
  const int n = 4;
  MatrixXd X = oracle::separated_points(n, 1, rng, 0.15);
  VectorXd th = VectorXd::Constant(1, 0.5);
  auto plan = build_plan(identity_order(n, 0), X, n - 1);  // exact
  const VecchiaFactor f = vecchia_factor(plan, X, th, 1e-8);
  MatrixXd K = k_block(0, 0, X, X, th);
  K.diagonal().array() += 1e-8;

  const int reps = 200000;
  MatrixXd draws(reps, n);
  for (int i = 0; i < reps; ++i) draws.row(i) = f.sample(rng).transpose();
  MatrixXd S = draws.transpose() * draws / static_cast<double>(reps);
  CHECK((S - K).cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("vecchia_predict: full budget equals dense kriging") {
  RngEngine rng = make_stream(46, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int geflag = 0; geflag < 2; ++geflag) {
    const int n = 6, D = 2, np = 4;
    const bool ge = geflag == 1;
    const int blocks = ge ? D : 0;
    const int N = n * (1 + blocks);
    MatrixXd X = oracle::separated_points(n, D, rng);
    MatrixXd Xp = oracle::separated_points(np, D, rng);
    VectorXd th = VectorXd::Constant(D, 0.8);
    VectorXd y(N);
    for (int i = 0; i < N; ++i) y[i] = normal(rng);
    const double eps = 1e-6, tau2 = 1.9;

    VecchiaPredictor vp{X, X, blocks, y, th, eps, N, tau2};
    VectorXd mean, var;
    vecchia_predict(vp, Xp, Xp, D, mean, var);

    const MatrixXd K =
        ge ? assemble_grad_cov(X, th, 0.0) : k_block(0, 0, X, X, th);
    const CholFactor Ktt = chol_jitter(K, eps);
    const MatrixXd cross =
        assemble_cross(Xp, X, th, deriv_all(D),
                       ge ? deriv_all(D) : std::vector<int>{0});
    VectorXd pd(np * (1 + D));
    pd.head(np).setOnes();
    for (int d = 1; d <= D; ++d)
      pd.segment(d * np, np).setConstant(2.0 / th[d - 1]);
    const CondResult r = mvn_condition_lite(pd, cross, Ktt, y, tau2);
    CHECK((mean - r.mean).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((var - r.var).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("vecchia_predict interpolates at a training row") {
  RngEngine rng = make_stream(47, 0);
  const int n = 8;
  MatrixXd X = oracle::separated_points(n, 2, rng);
  VectorXd th = VectorXd::Constant(2, 0.7);
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = normal(rng);

  VecchiaPredictor vp{X, X, 0, y, th, 1e-8, 4, 1.0};
  MatrixXd Xp = X.row(3);
  VectorXd mean, var;
  vecchia_predict(vp, Xp, Xp, 0, mean, var);
  CHECK(std::abs(mean[0] - y[3]) < 1e-5);
}

TEST_CASE("plan dump lists one row per position") {
  RngEngine rng = make_stream(48, 0);
  MatrixXd X = oracle::separated_points(3, 1, rng, 0.2);
  auto plan = build_plan(identity_order(3, 1), X, 2);
  const std::string dump = plan_dump(plan);
  CHECK(std::count(dump.begin(), dump.end(), '\n') == 7);  // header + 6 rows
}
