#include "gpgrad/bench.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gpgrad {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInvSqrt2Pi = 0.3989422804014327;
}  // namespace

double norm_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double norm_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

EvalResult step_fn(double x) {
  const double z = (x - 0.5) / 0.065;
  EvalResult r;
  r.y = norm_cdf(z);
  r.grad = Eigen::VectorXd::Constant(1, norm_pdf(z) / 0.065);
  return r;
}

EvalResult squiggle_fn(const Eigen::VectorXd& x, double sigma) {
  if (!(sigma > 0.0))
    throw std::invalid_argument("squiggle_fn: sigma must be positive");
  if (x.size() != 2) throw std::invalid_argument("squiggle_fn: needs D = 2");
  const double x1 = x[0], x2 = x[1];
  const double s2 = sigma * sigma;
  const double mu = 0.25 * std::sin(2.0 * M_PI * x1 * x1) - 0.1 * x1 + 0.5;
  const double dmu = M_PI * x1 * std::cos(2.0 * M_PI * x1 * x1) - 0.1;
  const double c = 1.0 / std::sqrt(2.0 * M_PI * s2);
  const double e = std::exp(-0.5 * (x2 - mu) * (x2 - mu) / s2);
  EvalResult r;
  r.y = c * x1 * x2 * e;
  r.grad.resize(2);
  r.grad[0] = c * x1 * x2 * e * (x2 - mu) / s2 * dmu + c * x2 * e;
  r.grad[1] = c * x1 * x2 * e * (mu - x2) / s2 + c * x1 * e;
  return r;
}

EvalResult plateau_fn(const Eigen::VectorXd& x) {
  const double z = kSqrt2 * (-4.0 - 3.0 * x.sum());
  EvalResult r;
  r.y = 2.0 * norm_cdf(z) - 1.0;
  // chain rule: d/dx_i of 2*Phi(sqrt(2)(-4 - 3 sum)) is -6 sqrt(2) phi,
  // identical across dimensions
  r.grad = Eigen::VectorXd::Constant(x.size(), -6.0 * kSqrt2 * norm_pdf(z));
  return r;
}

EvalResult ignition_fn(const Eigen::VectorXd& x) {
  const double r2 = x.squaredNorm();
  const double rad = std::sqrt(r2);
  if (rad < 1e-9)
    throw std::domain_error("ignition_fn: undefined at the origin");
  const double z = 10.0 * kSqrt2 * (rad - 2.0);
  const double t = norm_cdf(z);
  const double r4 = r2 * r2;
  const double r5 = r4 * rad;
  const double q = r5 * (1.0 + 200000.0 * t);
  const double dtdr = 10.0 * kSqrt2 * norm_pdf(z);
  const double dqdr = r5 * 200000.0 * dtdr + (1.0 + 200000.0 * t) * 5.0 * r4;
  EvalResult out;
  out.y = std::log10(q);
  out.grad = (dqdr / (q * std::log(10.0)) / rad) * x;
  return out;
}

namespace {

void validate_gradient(const TestFunction& fn) {
  RngEngine rng = make_stream(0x5eedf00dULL, 17);
  std::uniform_real_distribution<double> unif(0.03, 0.97);
  int checked = 0;
  while (checked < 50) {
    Eigen::VectorXd u(fn.D);
    for (int d = 0; d < fn.D; ++d) u[d] = unif(rng);
    const Eigen::VectorXd x = fn.lo + u.cwiseProduct(fn.hi - fn.lo);
    if (fn.excluded && fn.excluded(x)) continue;
    const Eigen::VectorXd g = fn.eval(x).grad;
    for (int d = 0; d < fn.D; ++d) {
      const double h = 1e-5 * (fn.hi[d] - fn.lo[d]);
      Eigen::VectorXd xp = x, xm = x;
      xp[d] += h;
      xm[d] -= h;
      const double fd = (fn.eval(xp).y - fn.eval(xm).y) / (2.0 * h);
      const double tol = 1e-4 * std::max(1.0, std::abs(g[d]));
      if (std::abs(fd - g[d]) > tol)
        throw std::logic_error("test function '" + fn.name +
                               "' failed gradient validation");
    }
    ++checked;
  }
}

}  // namespace

TestFunction make_test_function(const std::string& name, int D, double sigma) {
  TestFunction fn;
  fn.name = name;
  fn.D = D;
  if (name == "step") {
    if (D != 1) throw std::invalid_argument("step is one-dimensional");
    fn.lo = Eigen::VectorXd::Zero(1);
    fn.hi = Eigen::VectorXd::Ones(1);
    fn.eval = [](const Eigen::VectorXd& x) { return step_fn(x[0]); };
  } else if (name == "squiggle") {
    if (D != 2) throw std::invalid_argument("squiggle is two-dimensional");
    fn.sigma = sigma;
    fn.lo = Eigen::VectorXd::Zero(2);
    fn.hi = Eigen::VectorXd::Ones(2);
    fn.eval = [sigma](const Eigen::VectorXd& x) {
      return squiggle_fn(x, sigma);
    };
  } else if (name == "plateau") {
    if (D < 1) throw std::invalid_argument("plateau needs D >= 1");
    fn.lo = Eigen::VectorXd::Constant(D, -2.0);
    fn.hi = Eigen::VectorXd::Constant(D, 2.0);
    fn.eval = [](const Eigen::VectorXd& x) { return plateau_fn(x); };
  } else if (name == "ignition") {
    if (D < 1) throw std::invalid_argument("ignition needs D >= 1");
    fn.lo = Eigen::VectorXd::Zero(D);
    fn.hi = Eigen::VectorXd::Ones(D);
    fn.eval = [](const Eigen::VectorXd& x) { return ignition_fn(x); };
    // the radial cliff makes finite differences unreliable near r = 2, and
    // the origin is singular
    fn.excluded = [](const Eigen::VectorXd& x) {
      const double r = x.norm();
      return r < 1e-3 || std::abs(r - 2.0) < 0.15;
    };
  } else {
    throw std::invalid_argument("unknown test function: " + name);
  }
  validate_gradient(fn);
  return fn;
}

Eigen::MatrixXd lhs(int n, int D, RngEngine& rng) {
  if (n < 1 || D < 1) throw std::invalid_argument("lhs: n and D must be >= 1");
  Eigen::MatrixXd X(n, D);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<int> bins(n);
  for (int d = 0; d < D; ++d) {
    std::iota(bins.begin(), bins.end(), 0);
    std::shuffle(bins.begin(), bins.end(), rng);
    for (int i = 0; i < n; ++i)
      X(i, d) = (static_cast<double>(bins[i]) + unif(rng)) / n;
  }
  return X;
}

double rmse(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
  if (pred.size() != truth.size())
    throw std::invalid_argument("rmse: dimension mismatch");
  return std::sqrt((pred - truth).squaredNorm() /
                   static_cast<double>(pred.size()));
}

double crps_gaussian(double mu, double sigma, double truth) {
  if (sigma <= 0.0) return std::abs(truth - mu);
  const double z = (truth - mu) / sigma;
  return sigma * (z * (2.0 * norm_cdf(z) - 1.0) + 2.0 * norm_pdf(z) -
                  1.0 / std::sqrt(M_PI));
}

}  // namespace gpgrad
