#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

#include "gpgrad/rng.hpp"

namespace gpgrad {

double norm_pdf(double z);
double norm_cdf(double z);

struct EvalResult {
  double y;
  Eigen::VectorXd grad;
};

// step: y = Phi((x - 0.5)/0.065) on [0, 1]
EvalResult step_fn(double x);

// squiggle: narrow S-shaped ridge on [0, 1]^2; sigma controls ridge width
EvalResult squiggle_fn(const Eigen::VectorXd& x, double sigma);

// plateau: two flat shelves with a steep drop, on [-2, 2]^D
EvalResult plateau_fn(const Eigen::VectorXd& x);

// ignition: log10 yield with a cliff at radius 2, on [0, 1]^D; undefined at
// the origin
EvalResult ignition_fn(const Eigen::VectorXd& x);

// Benchmark function plus its input box and declared singular/rough set
// (excluded from gradient validation).
struct TestFunction {
  std::string name;
  int D = 0;
  Eigen::VectorXd lo, hi;
  double sigma = 0.0;  // squiggle parameter
  std::function<EvalResult(const Eigen::VectorXd&)> eval;
  std::function<bool(const Eigen::VectorXd&)> excluded;

  EvalResult operator()(const Eigen::VectorXd& x) const { return eval(x); }
};

// Builds a registered function by name (step, squiggle, plateau, ignition)
// and verifies its gradient against central finite differences on interior
// points before returning.
TestFunction make_test_function(const std::string& name, int D,
                                double sigma = 0.05);

// Latin hypercube sample on [0, 1]^D: one point per width-1/n bin in every
// dimension, jittered uniformly within bins.
Eigen::MatrixXd lhs(int n, int D, RngEngine& rng);

double rmse(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth);

// Closed-form CRPS of a Gaussian forecast N(mu, sigma^2); sigma = 0
// degenerates to absolute error.
double crps_gaussian(double mu, double sigma, double truth);

}  // namespace gpgrad
