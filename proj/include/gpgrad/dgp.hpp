#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "gpgrad/gauss.hpp"
#include "gpgrad/gp.hpp"
#include "gpgrad/moments.hpp"
#include "gpgrad/rng.hpp"

namespace gpgrad {

struct IllConditioned : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// State of the latent warping.  W holds the n x D warped inputs.  In the
// gradient-enhanced model, W_all is the N x D column-bind of
// [w_d; dw_d/dx^1; ...; dw_d/dx^D] whose first n rows equal W, and
// y_tilde_all stacks the centered responses with the solved-for derivatives
// of y with respect to each node.
struct LatentState {
  Eigen::MatrixXd W;
  std::optional<Eigen::MatrixXd> W_all;
  std::optional<Eigen::VectorXd> y_tilde_all;
};

// Identity-map initialization: W = X, and in the gradient-enhanced case the
// derivative block of node d is the indicator of dimension d.
LatentState init_latent(const Eigen::MatrixXd& X, bool gradient_enhanced);

enum class ChainDir { to_w, to_x };

// Multivariate chain rule as a D x D linear system:
//   (grad_x W) (grad_w y) = grad_x y
// to_x multiplies through; to_w solves, rejecting near-singular systems.
Eigen::VectorXd solve_chain(const Eigen::MatrixXd& grad_x_W,
                            const Eigen::VectorXd& rhs, ChainDir dir);

// Row-wise to_w solve across all observations: W_all supplies each
// observation's grad_x W block, grad_x_y is n x D, the result is n x D with
// row j = grad_w y_j.
Eigen::MatrixXd solve_chain_rows(const Eigen::MatrixXd& W_all,
                                 const Eigen::MatrixXd& grad_x_y);

// Point on the ellipse through prev and a prior draw, around the prior mean.
Eigen::VectorXd ess_propose(const Eigen::VectorXd& prev,
                            const Eigen::VectorXd& draw,
                            const Eigen::VectorXd& prior_mean, double gamma);

struct EssResult {
  LatentState state;
  double loglik = 0.0;
  int proposals = 0;
};

// One elliptical slice sampling update of node d.  loglik_eval receives the
// candidate state (column d replaced) and may fill in derived fields such as
// y_tilde_all; IllConditioned and NotPositiveDefinite from the evaluation
// count as -inf (reject, shrink the bracket).  Always terminates: the
// bracket shrinks toward gamma = 0, which reproduces the previous state.
EssResult ess_node(int d, const LatentState& state, double state_loglik,
                   const std::function<Eigen::VectorXd(RngEngine&)>& prior_draw,
                   const Eigen::VectorXd& prior_mean,
                   const std::function<double(LatentState&)>& loglik_eval,
                   RngEngine& rng);

// Convenience overload drawing from N(prior_mean, prior_chol).
EssResult ess_node(int d, const LatentState& state, double state_loglik,
                   const CholFactor& prior_chol,
                   const Eigen::VectorXd& prior_mean,
                   const std::function<double(LatentState&)>& loglik_eval,
                   RngEngine& rng);

struct DgpChain {
  TrainingSet data;
  double y_offset = 0.0;
  std::vector<LatentState> states;  // retained iterations
  Eigen::MatrixXd theta_in;         // retained x D (isotropic per node)
  Eigen::VectorXd theta_out;        // retained
  McmcSettings settings;
  bool gradient_enhanced = false;
  // Debug/diagnostic mode: warp transfer is bypassed, predictive locations
  // map to themselves with unit Jacobian, collapsing every predictor onto
  // its shallow counterpart.
  bool pinned_identity = false;

  int n_retained() const { return static_cast<int>(states.size()); }
};

// Gibbs sampler: ESS sweep over latent nodes, then MH sweeps for the D inner
// lengthscales (against the inner-layer prior) and the outer lengthscale
// (against the profiled outer likelihood).
DgpChain fit_dgp(const TrainingSet& data, const McmcSettings& settings,
                 RngEngine& rng);
DgpChain fit_gedgp(const TrainingSet& data, const McmcSettings& settings,
                   RngEngine& rng);

// Prediction modes.  *_grad variants return [y; dy/dx^1; ...; dy/dx^D]
// blocks, combining outer-layer moments with the imputed warp Jacobian per
// predictive row.
PosteriorMoments predict_dgp(const DgpChain& chain, const PredictRequest& req,
                             RngEngine* rng = nullptr);
PosteriorMoments predict_dgp_grad(const DgpChain& chain,
                                  const PredictRequest& req,
                                  RngEngine* rng = nullptr);
PosteriorMoments predict_gedgp(const DgpChain& chain, const PredictRequest& req,
                               RngEngine* rng = nullptr);
PosteriorMoments predict_gedgp_grad(const DgpChain& chain,
                                    const PredictRequest& req,
                                    RngEngine* rng = nullptr);

// Chain pinned at the identity warp with fixed lengthscales; used for
// collapse diagnostics and tests.
DgpChain make_pinned_identity_chain(const TrainingSet& data,
                                    const McmcSettings& settings,
                                    const Eigen::MatrixXd& theta_in,
                                    const Eigen::VectorXd& theta_out,
                                    bool gradient_enhanced);

}  // namespace gpgrad
