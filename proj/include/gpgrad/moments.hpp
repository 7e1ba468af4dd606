#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

namespace gpgrad {

// Streaming accumulator for per-iteration predictive moments.  Combines
// within-iteration variance with the spread of means across iterations
// (population form):
//   mean = avg_t mean_t
//   var  = avg_t var_t + avg_t (mean_t - mean)^2
// Accumulators over disjoint iteration ranges merge associatively, so chunked
// parallel reduction in fixed chunk order stays deterministic.
class MomentAccumulator {
 public:
  void add(const Eigen::VectorXd& mean, const Eigen::VectorXd& var);
  void add_cov(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov);
  void merge(const MomentAccumulator& other);

  long count() const { return count_; }
  Eigen::VectorXd mean() const;
  Eigen::VectorXd var() const;
  Eigen::MatrixXd cov() const;  // law of total covariance; needs add_cov
  bool has_cov() const { return sum_cov_.size() > 0; }

 private:
  long count_ = 0;
  Eigen::VectorXd sum_mean_, sum_mean_sq_, sum_var_;
  Eigen::MatrixXd sum_cov_, sum_outer_;
};

// Aggregates a finite sequence of per-iteration (mean, var) pairs.
// Throws on an empty sequence.
std::pair<Eigen::VectorXd, Eigen::VectorXd> aggregate_moments(
    const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& per_t);

}  // namespace gpgrad
