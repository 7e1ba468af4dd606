#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "gpgrad/gauss.hpp"
#include "gpgrad/rng.hpp"

namespace gpgrad {

// One observation in a gradient-augmented data set: base location index plus
// derivative index (0 = response, d >= 1 = d/dx^d).  Its slot in the stacked
// vector [y; dy/dx^1; ...] is deriv*n + loc.
struct VecchiaObs {
  int loc = 0;
  int deriv = 0;
};

// Ordering for gradient-aware Vecchia: a random permutation of the n
// responses, then each derivative block appended in the same permutation.
// deriv_blocks = 0 gives a plain permutation of responses.
std::vector<VecchiaObs> order_grad(int n, int deriv_blocks, RngEngine& rng);

// Nearest-neighbor conditioning sets over earlier-ordered observations.
// Distance is Euclidean between base locations; exact ties resolve by
// response-before-derivative, then lower derivative dimension, then earlier
// ordering position.  Sets are returned sorted by position.
std::vector<std::vector<int>> cond_sets(const std::vector<VecchiaObs>& order,
                                        const Eigen::MatrixXd& X, int m);

struct VecchiaPlan {
  std::vector<VecchiaObs> order;
  std::vector<std::vector<int>> cond;
  int m = 0;

  Eigen::Index size() const { return static_cast<Eigen::Index>(order.size()); }
};

VecchiaPlan build_plan(std::vector<VecchiaObs> order, const Eigen::MatrixXd& X,
                       int m);

// Sparse upper-triangular factor U of the implied precision, K^{-1} ~ U U',
// stored column-wise: column i holds -b_i/sd_i on cond(i) and 1/sd_i on the
// diagonal, where b_i are the kriging weights of observation i on its
// conditioning set.
class VecchiaFactor {
 public:
  VecchiaFactor(const VecchiaPlan& plan, std::vector<Eigen::VectorXd> weights,
                Eigen::VectorXd sd);

  double logdet() const;                          // log|K~|
  double quad(const Eigen::VectorXd& y_ordered) const;  // y' U U' y
  Eigen::VectorXd sample(RngEngine& rng) const;   // draw from N(0, K~), ordered
  std::size_t nnz() const;
  const VecchiaPlan& plan() const { return *plan_; }

 private:
  const VecchiaPlan* plan_;
  std::vector<Eigen::VectorXd> weights_;
  Eigen::VectorXd sd_;
};

// Builds the factor for kernel points P (one row per base location) under
// theta with eps jitter on every observation.  Kernel entries follow each
// observation's derivative index.
VecchiaFactor vecchia_factor(const VecchiaPlan& plan, const Eigen::MatrixXd& P,
                             const Eigen::VectorXd& theta, double eps);

// Sum of univariate conditional log-densities with the scale profiled out
// globally, matching loglik_profiled at full conditioning.
double vecchia_loglik(const VecchiaFactor& f, const Eigen::VectorXd& y_ordered);

// Convenience form mirroring the factorized definition directly.
double vecchia_loglik(const VecchiaPlan& plan, const Eigen::MatrixXd& P,
                      const Eigen::VectorXd& theta, double eps,
                      const Eigen::VectorXd& y_ordered);

// Unit-scale MVN log-density under the Vecchia-implied covariance.
double vecchia_logpdf_unit(const VecchiaFactor& f,
                           const Eigen::VectorXd& y_ordered);

// Reorders a stacked vector into plan order and back.
Eigen::VectorXd to_ordered(const Eigen::VectorXd& stacked,
                           const std::vector<VecchiaObs>& order, int n);
Eigen::VectorXd from_ordered(const Eigen::VectorXd& ordered,
                             const std::vector<VecchiaObs>& order, int n);

// Independent per-target prediction: each target conditions on its m nearest
// training observations (response-priority ties).  geom carries the base
// locations used for neighbor search; kernel_pts the coordinates fed to the
// kernel (these differ in the warped layer of a DGP).
struct VecchiaPredictor {
  const Eigen::MatrixXd& geom;
  const Eigen::MatrixXd& kernel_pts;
  int deriv_blocks = 0;  // 0 = responses only, D = gradient-augmented data
  const Eigen::VectorXd& y_stacked;
  const Eigen::VectorXd& theta;
  double eps = 0.0;
  int m = 0;
  double tau2 = 1.0;
};

// Predicts targets with derivative indices 0..target_deriv_blocks at each row
// of geom_p/kernel_p; means and clamped variances in stacked block layout.
void vecchia_predict(const VecchiaPredictor& vp, const Eigen::MatrixXd& geom_p,
                     const Eigen::MatrixXd& kernel_p, int target_deriv_blocks,
                     Eigen::VectorXd& mean, Eigen::VectorXd& var);

// Debug dump: one row per ordered position with its conditioning set.
std::string plan_dump(const VecchiaPlan& plan);

}  // namespace gpgrad
