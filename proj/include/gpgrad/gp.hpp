#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>

#include "gpgrad/gauss.hpp"
#include "gpgrad/moments.hpp"
#include "gpgrad/rng.hpp"

namespace gpgrad {

// Inputs are expected pre-scaled to [0,1]^D by the caller.
struct TrainingSet {
  Eigen::MatrixXd X;                  // n x D
  Eigen::VectorXd y;                  // n
  std::optional<Eigen::MatrixXd> grad;  // n x D partial derivatives

  int n() const { return static_cast<int>(X.rows()); }
  int D() const { return static_cast<int>(X.cols()); }
  bool has_grad() const { return grad.has_value(); }
};

// [v; dv/dx^1; ...; dv/dx^D] stacking used throughout the gradient-enhanced
// covariance layout.
Eigen::VectorXd grad_stack(const Eigen::VectorXd& v, const Eigen::MatrixXd& G);

struct GammaPrior {
  double shape = 1.5;
  double rate = 4.0;
  // unnormalized; shape = 1, rate = 0 degenerates to a flat prior on (0, inf)
  double logpdf(double x) const;
  double mean() const { return rate > 0.0 ? shape / rate : 1.0; }
};

struct McmcSettings {
  int nmcmc = 5000;
  int burn = 3000;
  int thin = 2;
  double eps = 1e-8;
  GammaPrior theta_prior_inner{1.5, 4.0};
  GammaPrior theta_prior_outer{1.5, 4.0};
  double prop_l = 1.0;  // sliding window [l*theta/u, u*theta/l]
  double prop_u = 2.0;
  // starting lengthscale on unit-scaled inputs; keeps the sampler out of the
  // spurious near-singular mode at large theta
  double theta_init = 0.1;
  bool vecchia = false;
  int m = 25;
  bool latent_identity_prior_mean = false;  // DGP inner layer prior mean
  bool sample_warp = false;  // DGP warp transfer: sample instead of mean

  static McmcSettings shallow_defaults() { return {}; }
  static McmcSettings deep_defaults() {
    McmcSettings s;
    s.nmcmc = 10000;
    s.burn = 8000;
    return s;
  }
  int n_retained() const { return (nmcmc - burn) / thin; }
  void validate() const;
};

struct GpChain {
  TrainingSet data;
  double y_offset = 0.0;      // mean removed before fitting
  Eigen::MatrixXd theta;      // retained x D lengthscale samples
  McmcSettings settings;
  bool gradient_enhanced = false;

  int n_retained() const { return static_cast<int>(theta.rows()); }
};

struct PredictRequest {
  Eigen::MatrixXd Xp;       // n_p x D
  bool want_gradient = false;
  bool lite = true;         // diagonal-only covariance
  int joint_samples = 0;    // optional joint posterior draws
};

// Moments aggregated over retained iterations; block layout [y] or
// [y; dy/dx^1; ...; dy/dx^D] when gradients were requested.
struct PosteriorMoments {
  Eigen::VectorXd mean;
  Eigen::VectorXd var;
  std::optional<Eigen::MatrixXd> cov;      // lite = false only
  std::optional<Eigen::MatrixXd> samples;  // joint_samples x dim
  int n_blocks = 1;
};

// One sliding-window Metropolis-Hastings step for a positive scalar under a
// Gamma prior.  loglik_prev caches the current log-likelihood; the accepted
// value's log-likelihood is written to *loglik_out.
double mh_lengthscale(double theta_prev, double loglik_prev,
                      const std::function<double(double)>& loglik_fn,
                      const GammaPrior& prior, double l, double u,
                      RngEngine& rng, double* loglik_out);

// Lengthscale posteriors by MH sweeps against the profiled log-likelihood.
GpChain fit_gp(const TrainingSet& data, const McmcSettings& settings,
               RngEngine& rng);
GpChain fit_gegp(const TrainingSet& data, const McmcSettings& settings,
                 RngEngine& rng);

// Kriging under each retained lengthscale sample, aggregated over iterations.
PosteriorMoments predict_gp(const GpChain& chain, const PredictRequest& req,
                            RngEngine* rng = nullptr);
PosteriorMoments predict_gp_all(const GpChain& chain, const PredictRequest& req,
                                RngEngine* rng = nullptr);
PosteriorMoments predict_gegp(const GpChain& chain, const PredictRequest& req,
                              RngEngine* rng = nullptr);
PosteriorMoments predict_gegp_all(const GpChain& chain,
                                  const PredictRequest& req,
                                  RngEngine* rng = nullptr);

struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gpgrad
