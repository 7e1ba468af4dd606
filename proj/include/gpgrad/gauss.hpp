#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>

#include "gpgrad/rng.hpp"

namespace gpgrad {

struct NotPositiveDefinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Lower-triangular Cholesky factor of a symmetric matrix, with the
// log-determinant cached.  No jitter escalation: a failed factorization is
// surfaced and the caller decides.
class CholFactor {
 public:
  static CholFactor from_lower(Eigen::MatrixXd L);

  const Eigen::MatrixXd& lower() const { return L_; }
  double logdet() const { return logdet_; }
  Eigen::Index size() const { return L_.rows(); }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;   // (LL')^{-1} b
  Eigen::MatrixXd solve(const Eigen::MatrixXd& B) const;
  Eigen::MatrixXd half_solve(const Eigen::MatrixXd& B) const;  // L^{-1} B
  double quad(const Eigen::VectorXd& y) const;             // y' (LL')^{-1} y

 private:
  friend CholFactor chol_jitter(const Eigen::MatrixXd& A, double eps);
  Eigen::MatrixXd L_;
  double logdet_ = 0.0;
};

// Factor of A + eps*I; throws NotPositiveDefinite on failure.
CholFactor chol_jitter(const Eigen::MatrixXd& A, double eps);

// Conditional moments from MVN conditioning.  var holds the clamped
// diagonal; cov is present only when a full covariance was requested.
struct CondResult {
  Eigen::VectorXd mean;
  Eigen::VectorXd var;
  std::optional<Eigen::MatrixXd> cov;
};

// mean = Kpt (Ktt)^{-1} y,  cov = tau2 (Kpp - Kpt (Ktt)^{-1} Kpt').
// Ktt is the factor of the training covariance (jitter already inside).
CondResult mvn_condition(const Eigen::MatrixXd& Kpp, const Eigen::MatrixXd& Kpt,
                         const CholFactor& Ktt, const Eigen::VectorXd& y,
                         double tau2);

// Diagonal-only variant; kpp_diag carries the prior variances.
CondResult mvn_condition_lite(const Eigen::VectorXd& kpp_diag,
                              const Eigen::MatrixXd& Kpt, const CholFactor& Ktt,
                              const Eigen::VectorXd& y, double tau2);

// Log-likelihood with the scale integrated out under a 1/tau2 reference
// prior, dropping constants that do not involve the kernel:
//   -0.5 logdet(K) - (N/2) log(y' K^{-1} y)
double loglik_profiled(const CholFactor& K, const Eigen::VectorXd& y);

// Plug-in scale estimate y' K^{-1} y / N.
double tau2_hat(const CholFactor& K, const Eigen::VectorXd& y);

// Zero-mean MVN log-density with unit scale (all constants included).
double mvn_logpdf(const CholFactor& K, const Eigen::VectorXd& y);

Eigen::VectorXd mvn_sample(const Eigen::VectorXd& mean, const CholFactor& chol,
                           RngEngine& rng);

}  // namespace gpgrad
