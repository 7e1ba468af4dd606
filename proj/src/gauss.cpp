#include "gpgrad/gauss.hpp"

#include <cmath>

namespace gpgrad {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

CholFactor CholFactor::from_lower(Eigen::MatrixXd L) {
  CholFactor f;
  f.logdet_ = 2.0 * L.diagonal().array().abs().log().sum();
  f.L_ = std::move(L);
  return f;
}

Eigen::VectorXd CholFactor::solve(const Eigen::VectorXd& b) const {
  Eigen::VectorXd x = L_.triangularView<Eigen::Lower>().solve(b);
  L_.triangularView<Eigen::Lower>().transpose().solveInPlace(x);
  return x;
}

Eigen::MatrixXd CholFactor::solve(const Eigen::MatrixXd& B) const {
  Eigen::MatrixXd X = L_.triangularView<Eigen::Lower>().solve(B);
  L_.triangularView<Eigen::Lower>().transpose().solveInPlace(X);
  return X;
}

Eigen::MatrixXd CholFactor::half_solve(const Eigen::MatrixXd& B) const {
  return L_.triangularView<Eigen::Lower>().solve(B);
}

double CholFactor::quad(const Eigen::VectorXd& y) const {
  return L_.triangularView<Eigen::Lower>().solve(y).squaredNorm();
}

CholFactor chol_jitter(const Eigen::MatrixXd& A, double eps) {
  if (A.rows() != A.cols())
    throw std::invalid_argument("chol_jitter: matrix must be square");
  Eigen::MatrixXd B = A;
  if (eps != 0.0) B.diagonal().array() += eps;
  Eigen::LLT<Eigen::MatrixXd> llt(B);
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefinite("chol_jitter: matrix not positive definite");
  CholFactor f;
  f.L_ = llt.matrixL();
  f.logdet_ = 2.0 * f.L_.diagonal().array().log().sum();
  return f;
}

CondResult mvn_condition(const Eigen::MatrixXd& Kpp, const Eigen::MatrixXd& Kpt,
                         const CholFactor& Ktt, const Eigen::VectorXd& y,
                         double tau2) {
  if (Kpt.cols() != Ktt.size() || y.size() != Ktt.size() ||
      Kpp.rows() != Kpt.rows() || Kpp.rows() != Kpp.cols())
    throw std::invalid_argument("mvn_condition: dimension mismatch");
  CondResult r;
  r.mean = Kpt * Ktt.solve(y);
  const Eigen::MatrixXd V = Ktt.half_solve(Kpt.transpose());
  Eigen::MatrixXd cov = tau2 * (Kpp - V.transpose() * V);
  cov = 0.5 * (cov + cov.transpose()).eval();
  r.var = cov.diagonal().cwiseMax(0.0);
  r.cov = std::move(cov);
  return r;
}

CondResult mvn_condition_lite(const Eigen::VectorXd& kpp_diag,
                              const Eigen::MatrixXd& Kpt, const CholFactor& Ktt,
                              const Eigen::VectorXd& y, double tau2) {
  if (Kpt.cols() != Ktt.size() || y.size() != Ktt.size() ||
      kpp_diag.size() != Kpt.rows())
    throw std::invalid_argument("mvn_condition_lite: dimension mismatch");
  CondResult r;
  r.mean = Kpt * Ktt.solve(y);
  const Eigen::MatrixXd V = Ktt.half_solve(Kpt.transpose());
  r.var = (tau2 * (kpp_diag.array() - V.colwise().squaredNorm().transpose().array()))
              .cwiseMax(0.0);
  return r;
}

double loglik_profiled(const CholFactor& K, const Eigen::VectorXd& y) {
  if (y.size() != K.size())
    throw std::invalid_argument("loglik_profiled: dimension mismatch");
  const double q = K.quad(y);
  if (!(q > 0.0))
    throw std::domain_error("loglik_profiled: nonpositive quadratic form");
  const double n = static_cast<double>(y.size());
  return -0.5 * K.logdet() - 0.5 * n * std::log(q);
}

double tau2_hat(const CholFactor& K, const Eigen::VectorXd& y) {
  if (y.size() != K.size())
    throw std::invalid_argument("tau2_hat: dimension mismatch");
  return K.quad(y) / static_cast<double>(y.size());
}

double mvn_logpdf(const CholFactor& K, const Eigen::VectorXd& y) {
  if (y.size() != K.size())
    throw std::invalid_argument("mvn_logpdf: dimension mismatch");
  const double n = static_cast<double>(y.size());
  return -0.5 * (K.logdet() + K.quad(y) + n * kLog2Pi);
}

Eigen::VectorXd mvn_sample(const Eigen::VectorXd& mean, const CholFactor& chol,
                           RngEngine& rng) {
  if (mean.size() != chol.size())
    throw std::invalid_argument("mvn_sample: dimension mismatch");
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
  return mean + chol.lower().triangularView<Eigen::Lower>() * z;
}

}  // namespace gpgrad
