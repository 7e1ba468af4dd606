#include "gpgrad/gp.hpp"

#include <cmath>
#include <limits>

#include "gpgrad/kernel.hpp"
#include "gpgrad/vecchia.hpp"
#include "predict_util.hpp"

namespace gpgrad {

Eigen::VectorXd grad_stack(const Eigen::VectorXd& v, const Eigen::MatrixXd& G) {
  if (G.rows() != v.size())
    throw std::invalid_argument("grad_stack: dimension mismatch");
  const Eigen::Index n = v.size(), D = G.cols();
  Eigen::VectorXd out(n * (1 + D));
  out.head(n) = v;
  for (Eigen::Index d = 0; d < D; ++d) out.segment((d + 1) * n, n) = G.col(d);
  return out;
}

double GammaPrior::logpdf(double x) const {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  return (shape - 1.0) * std::log(x) - rate * x;
}

void McmcSettings::validate() const {
  if (nmcmc < 1 || burn < 0 || burn >= nmcmc)
    throw std::invalid_argument("mcmc settings: need 0 <= burn < nmcmc");
  if (thin < 1) throw std::invalid_argument("mcmc settings: thin must be >= 1");
  if (n_retained() < 1)
    throw std::invalid_argument("mcmc settings: no retained iterations");
  if (eps < 0.0) throw std::invalid_argument("mcmc settings: eps must be >= 0");
  if (!(prop_l > 0.0) || prop_u < prop_l)
    throw std::invalid_argument("mcmc settings: need 0 < l <= u");
  if (vecchia && m < 1)
    throw std::invalid_argument("mcmc settings: vecchia budget m must be >= 1");
}

double mh_lengthscale(double theta_prev, double loglik_prev,
                      const std::function<double(double)>& loglik_fn,
                      const GammaPrior& prior, double l, double u,
                      RngEngine& rng, double* loglik_out) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double lo = l * theta_prev / u;
  const double hi = u * theta_prev / l;
  const double theta_star = lo + (hi - lo) * unif(rng);
  const double ru = unif(rng);
  const double ll_star = loglik_fn(theta_star);
  // uniform window density is 1/(c*theta), so the proposal correction is
  // log(theta_prev) - log(theta_star)
  const double log_alpha = ll_star + prior.logpdf(theta_star) +
                           std::log(theta_prev) - loglik_prev -
                           prior.logpdf(theta_prev) - std::log(theta_star);
  if (std::log(ru) < log_alpha) {
    if (loglik_out) *loglik_out = ll_star;
    return theta_star;
  }
  if (loglik_out) *loglik_out = loglik_prev;
  return theta_prev;
}

namespace {

GpChain fit_shallow(const TrainingSet& data, const McmcSettings& s,
                    RngEngine& rng, bool gradient_enhanced, const char* who) {
  s.validate();
  const int n = data.n(), D = data.D();
  if (n < 1 || D < 1) throw std::invalid_argument(std::string(who) + ": empty data");
  if (gradient_enhanced) {
    if (!data.has_grad())
      throw std::invalid_argument(std::string(who) + ": gradients required");
    if (data.grad->rows() != n || data.grad->cols() != D)
      throw std::invalid_argument(std::string(who) + ": gradient shape must be n x D");
  }

  GpChain chain;
  chain.data = data;
  chain.settings = s;
  chain.gradient_enhanced = gradient_enhanced;
  chain.y_offset = data.y.mean();
  const Eigen::VectorXd yc = data.y.array() - chain.y_offset;
  const Eigen::VectorXd yvec =
      gradient_enhanced ? grad_stack(yc, *data.grad) : yc;

  std::optional<VecchiaPlan> plan;
  Eigen::VectorXd y_ord;
  if (s.vecchia) {
    plan = build_plan(order_grad(n, gradient_enhanced ? D : 0, rng), data.X,
                      s.m);
    y_ord = to_ordered(yvec, plan->order, n);
  }

  auto loglik = [&](const Eigen::VectorXd& th) {
    if (plan) return vecchia_loglik(*plan, data.X, th, s.eps, y_ord);
    const Eigen::MatrixXd K = gradient_enhanced
                                  ? assemble_grad_cov(data.X, th, 0.0)
                                  : k_block(0, 0, data.X, data.X, th);
    return loglik_profiled(chol_jitter(K, s.eps), yvec);
  };

  Eigen::VectorXd theta = Eigen::VectorXd::Constant(D, s.theta_init);
  chain.theta.resize(s.n_retained(), D);
  double cur;
  try {
    cur = loglik(theta);
  } catch (const std::exception& e) {
    throw FitError(std::string(who) + ": initial likelihood: " + e.what());
  }
  int kept = 0;
  for (int it = 1; it <= s.nmcmc; ++it) {
    try {
      for (int d = 0; d < D; ++d) {
        auto lld = [&](double td) {
          Eigen::VectorXd t2 = theta;
          t2[d] = td;
          return loglik(t2);
        };
        theta[d] = mh_lengthscale(theta[d], cur, lld, s.theta_prior_inner,
                                  s.prop_l, s.prop_u, rng, &cur);
      }
    } catch (const std::exception& e) {
      throw FitError(std::string(who) + ": iteration " + std::to_string(it) +
                     ": " + e.what());
    }
    if (it > s.burn && (it - s.burn) % s.thin == 0 &&
        kept < chain.theta.rows())
      chain.theta.row(kept++) = theta;
  }
  return chain;
}

// Shared kriging core for the four shallow predictors.  target_blocks is 0
// for response-only prediction and D when gradient blocks are requested.
PosteriorMoments predict_shallow(const GpChain& chain, const PredictRequest& req,
                                 int target_blocks, RngEngine* rng) {
  const int n = chain.data.n(), D = chain.data.D();
  if (req.Xp.cols() != D)
    throw std::invalid_argument("predict: Xp dimension mismatch");
  const Eigen::Index np = req.Xp.rows();
  if (np < 1) throw std::invalid_argument("predict: empty Xp");
  const bool ge = chain.gradient_enhanced;
  const double eps = chain.settings.eps;

  const Eigen::VectorXd yc = chain.data.y.array() - chain.y_offset;
  const Eigen::VectorXd yvec = ge ? grad_stack(yc, *chain.data.grad) : yc;
  const std::vector<int> rows = deriv_all(target_blocks);
  const std::vector<int> cols = ge ? deriv_all(D) : std::vector<int>{0};

  auto prior_diag = [&](const Eigen::VectorXd& th) {
    Eigen::VectorXd pd(np * (1 + target_blocks));
    pd.head(np).setOnes();
    for (int d = 1; d <= target_blocks; ++d)
      pd.segment(d * np, np).setConstant(2.0 / th[d - 1]);
    return pd;
  };

  std::optional<VecchiaPlan> plan;
  Eigen::VectorXd y_ord;
  if (chain.settings.vecchia) {
    RngEngine order_rng = make_stream(0x76ecc1a5ULL, 0);
    plan = build_plan(order_grad(n, ge ? D : 0, order_rng), chain.data.X,
                      chain.settings.m);
    y_ord = to_ordered(yvec, plan->order, n);
  }

  auto lite_fn = [&](int t, Eigen::VectorXd& m, Eigen::VectorXd& v) {
    const Eigen::VectorXd th = chain.theta.row(t);
    if (plan) {
      const VecchiaFactor f = vecchia_factor(*plan, chain.data.X, th, eps);
      const double tau2 = f.quad(y_ord) / static_cast<double>(y_ord.size());
      VecchiaPredictor vp{chain.data.X, chain.data.X, ge ? D : 0,
                          yvec,         th,           eps,
                          chain.settings.m, tau2};
      vecchia_predict(vp, req.Xp, req.Xp, target_blocks, m, v);
      return;
    }
    const Eigen::MatrixXd K = ge ? assemble_grad_cov(chain.data.X, th, 0.0)
                                 : k_block(0, 0, chain.data.X, chain.data.X, th);
    const CholFactor Ktt = chol_jitter(K, eps);
    const Eigen::MatrixXd cross =
        assemble_cross(req.Xp, chain.data.X, th, rows, cols);
    const CondResult r =
        mvn_condition_lite(prior_diag(th), cross, Ktt, yvec, tau2_hat(Ktt, yvec));
    m = r.mean;
    v = r.var;
  };

  auto cov_fn = [&](int t, Eigen::VectorXd& m, Eigen::MatrixXd& C) {
    if (plan)
      throw std::invalid_argument(
          "predict: full covariance and joint samples need dense mode");
    const Eigen::VectorXd th = chain.theta.row(t);
    const Eigen::MatrixXd K = ge ? assemble_grad_cov(chain.data.X, th, 0.0)
                                 : k_block(0, 0, chain.data.X, chain.data.X, th);
    const CholFactor Ktt = chol_jitter(K, eps);
    const Eigen::MatrixXd cross =
        assemble_cross(req.Xp, chain.data.X, th, rows, cols);
    const Eigen::MatrixXd Kpp =
        target_blocks > 0 ? assemble_grad_cov(req.Xp, th, 0.0)
                          : k_block(0, 0, req.Xp, req.Xp, th);
    const CondResult r =
        mvn_condition(Kpp, cross, Ktt, yvec, tau2_hat(Ktt, yvec));
    m = r.mean;
    C = *r.cov;
  };

  PosteriorMoments out = detail::aggregate_over_t(
      chain.n_retained(), req.lite, req.joint_samples, rng, lite_fn, cov_fn);
  out.n_blocks = 1 + target_blocks;
  out.mean.head(np).array() += chain.y_offset;
  if (out.samples)
    out.samples->leftCols(np).array() += chain.y_offset;
  return out;
}

}  // namespace

GpChain fit_gp(const TrainingSet& data, const McmcSettings& settings,
               RngEngine& rng) {
  return fit_shallow(data, settings, rng, false, "fit_gp");
}

GpChain fit_gegp(const TrainingSet& data, const McmcSettings& settings,
                 RngEngine& rng) {
  return fit_shallow(data, settings, rng, true, "fit_gegp");
}

PosteriorMoments predict_gp(const GpChain& chain, const PredictRequest& req,
                            RngEngine* rng) {
  if (chain.gradient_enhanced)
    throw std::invalid_argument("predict_gp: chain is gradient-enhanced");
  return predict_shallow(chain, req, 0, rng);
}

PosteriorMoments predict_gp_all(const GpChain& chain, const PredictRequest& req,
                                RngEngine* rng) {
  if (chain.gradient_enhanced)
    throw std::invalid_argument("predict_gp_all: chain is gradient-enhanced");
  return predict_shallow(chain, req, chain.data.D(), rng);
}

PosteriorMoments predict_gegp(const GpChain& chain, const PredictRequest& req,
                              RngEngine* rng) {
  if (!chain.gradient_enhanced)
    throw std::invalid_argument("predict_gegp: chain is not gradient-enhanced");
  return predict_shallow(chain, req, 0, rng);
}

PosteriorMoments predict_gegp_all(const GpChain& chain,
                                  const PredictRequest& req, RngEngine* rng) {
  if (!chain.gradient_enhanced)
    throw std::invalid_argument(
        "predict_gegp_all: chain is not gradient-enhanced");
  return predict_shallow(chain, req, chain.data.D(), rng);
}

}  // namespace gpgrad
