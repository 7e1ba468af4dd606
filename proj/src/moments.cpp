#include "gpgrad/moments.hpp"

#include <stdexcept>

namespace gpgrad {

void MomentAccumulator::add(const Eigen::VectorXd& mean,
                            const Eigen::VectorXd& var) {
  if (count_ == 0) {
    sum_mean_ = Eigen::VectorXd::Zero(mean.size());
    sum_mean_sq_ = Eigen::VectorXd::Zero(mean.size());
    sum_var_ = Eigen::VectorXd::Zero(mean.size());
  }
  if (mean.size() != sum_mean_.size() || var.size() != sum_mean_.size())
    throw std::invalid_argument("MomentAccumulator: dimension mismatch");
  sum_mean_ += mean;
  sum_mean_sq_ += mean.cwiseProduct(mean);
  sum_var_ += var;
  ++count_;
}

void MomentAccumulator::add_cov(const Eigen::VectorXd& mean,
                                const Eigen::MatrixXd& cov) {
  add(mean, cov.diagonal().cwiseMax(0.0));
  if (sum_cov_.size() == 0) {
    sum_cov_ = Eigen::MatrixXd::Zero(cov.rows(), cov.cols());
    sum_outer_ = Eigen::MatrixXd::Zero(cov.rows(), cov.cols());
  }
  sum_cov_ += cov;
  sum_outer_ += mean * mean.transpose();
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  sum_mean_ += other.sum_mean_;
  sum_mean_sq_ += other.sum_mean_sq_;
  sum_var_ += other.sum_var_;
  if (sum_cov_.size() > 0 && other.sum_cov_.size() > 0) {
    sum_cov_ += other.sum_cov_;
    sum_outer_ += other.sum_outer_;
  }
  count_ += other.count_;
}

Eigen::VectorXd MomentAccumulator::mean() const {
  if (count_ == 0) throw std::logic_error("MomentAccumulator: empty");
  return sum_mean_ / static_cast<double>(count_);
}

Eigen::VectorXd MomentAccumulator::var() const {
  if (count_ == 0) throw std::logic_error("MomentAccumulator: empty");
  const double c = static_cast<double>(count_);
  const Eigen::VectorXd m = sum_mean_ / c;
  return (sum_var_ / c + sum_mean_sq_ / c - m.cwiseProduct(m)).cwiseMax(0.0);
}

Eigen::MatrixXd MomentAccumulator::cov() const {
  if (count_ == 0 || sum_cov_.size() == 0)
    throw std::logic_error("MomentAccumulator: no covariance accumulated");
  const double c = static_cast<double>(count_);
  const Eigen::VectorXd m = sum_mean_ / c;
  Eigen::MatrixXd out = sum_cov_ / c + sum_outer_ / c - m * m.transpose();
  return 0.5 * (out + out.transpose());
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> aggregate_moments(
    const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& per_t) {
  if (per_t.empty())
    throw std::invalid_argument("aggregate_moments: empty sequence");
  MomentAccumulator acc;
  for (const auto& [m, v] : per_t) acc.add(m, v);
  return {acc.mean(), acc.var()};
}

}  // namespace gpgrad
