#include "gpgrad/dgp.hpp"

#include <cmath>
#include <limits>

#include "gpgrad/kernel.hpp"
#include "gpgrad/vecchia.hpp"
#include "predict_util.hpp"

namespace gpgrad {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Eigen::VectorXd iso(double th, int D) {
  return Eigen::VectorXd::Constant(D, th);
}

// Prior mean of node d over the stacked layout: zero by default, or the
// identity map (node values x_d, derivative block d all ones).
Eigen::VectorXd node_prior_mean(const Eigen::MatrixXd& X, int d, bool ge,
                                bool identity_mean) {
  const Eigen::Index n = X.rows(), D = X.cols();
  Eigen::VectorXd m = Eigen::VectorXd::Zero(ge ? n * (1 + D) : n);
  if (identity_mean) {
    m.head(n) = X.col(d);
    if (ge) m.segment((d + 1) * n, n).setOnes();
  }
  return m;
}

}  // namespace

LatentState init_latent(const Eigen::MatrixXd& X, bool gradient_enhanced) {
  LatentState st;
  st.W = X;
  if (gradient_enhanced) {
    const Eigen::Index n = X.rows(), D = X.cols();
    Eigen::MatrixXd W_all = Eigen::MatrixXd::Zero(n * (1 + D), D);
    W_all.topRows(n) = X;
    for (Eigen::Index d = 0; d < D; ++d)
      W_all.block((d + 1) * n, d, n, 1).setOnes();
    st.W_all = std::move(W_all);
  }
  return st;
}

Eigen::VectorXd solve_chain(const Eigen::MatrixXd& grad_x_W,
                            const Eigen::VectorXd& rhs, ChainDir dir) {
  if (grad_x_W.rows() != grad_x_W.cols() || rhs.size() != grad_x_W.rows())
    throw std::invalid_argument("solve_chain: dimension mismatch");
  if (dir == ChainDir::to_x) return grad_x_W * rhs;
  // systems are tiny (D x D), so an SVD gives a reliable condition estimate
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(grad_x_W,
                                        Eigen::ComputeThinU |
                                            Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (!(sv[0] > 0.0) || !(sv[sv.size() - 1] / sv[0] > 1e-12))
    throw IllConditioned("solve_chain: warp Jacobian near-singular");
  return svd.solve(rhs);
}

Eigen::MatrixXd solve_chain_rows(const Eigen::MatrixXd& W_all,
                                 const Eigen::MatrixXd& grad_x_y) {
  const Eigen::Index n = grad_x_y.rows(), D = grad_x_y.cols();
  if (W_all.rows() != n * (1 + D) || W_all.cols() != D)
    throw std::invalid_argument("solve_chain_rows: W_all shape mismatch");
  Eigen::MatrixXd out(n, D);
  Eigen::MatrixXd G(D, D);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index f = 0; f < D; ++f)
      for (Eigen::Index i = 0; i < D; ++i) G(f, i) = W_all((f + 1) * n + j, i);
    out.row(j) =
        solve_chain(G, grad_x_y.row(j).transpose(), ChainDir::to_w).transpose();
  }
  return out;
}

Eigen::VectorXd ess_propose(const Eigen::VectorXd& prev,
                            const Eigen::VectorXd& draw,
                            const Eigen::VectorXd& prior_mean, double gamma) {
  const double c = std::cos(gamma), s = std::sin(gamma);
  if (c == 1.0 && s == 0.0) return prev;  // gamma = 0 recovers prev bit-exactly
  return prior_mean + (prev - prior_mean) * c + (draw - prior_mean) * s;
}

EssResult ess_node(int d, const LatentState& state, double state_loglik,
                   const std::function<Eigen::VectorXd(RngEngine&)>& prior_draw,
                   const Eigen::VectorXd& prior_mean,
                   const std::function<double(LatentState&)>& loglik_eval,
                   RngEngine& rng) {
  const bool ge = state.W_all.has_value();
  const Eigen::VectorXd cur =
      ge ? state.W_all->col(d).eval() : state.W.col(d).eval();
  if (prior_mean.size() != cur.size())
    throw std::invalid_argument("ess_node: prior mean size mismatch");
  const Eigen::VectorXd nu = prior_draw(rng);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double log_thresh = state_loglik + std::log(unif(rng));
  double gamma = 2.0 * M_PI * unif(rng);
  double lo = gamma - 2.0 * M_PI, hi = gamma;

  EssResult out;
  while (true) {
    LatentState cand = state;
    const Eigen::VectorXd prop = ess_propose(cur, nu, prior_mean, gamma);
    if (ge) {
      cand.W_all->col(d) = prop;
      cand.W.col(d) = prop.head(cand.W.rows());
    } else {
      cand.W.col(d) = prop;
    }
    double ll = kNegInf;
    try {
      ll = loglik_eval(cand);
    } catch (const IllConditioned&) {
    } catch (const NotPositiveDefinite&) {
    }
    ++out.proposals;
    if (ll > log_thresh) {
      out.state = std::move(cand);
      out.loglik = ll;
      return out;
    }
    if (gamma < 0.0)
      lo = gamma;
    else
      hi = gamma;
    if (hi - lo < 1e-12) {  // cos(gamma) -> 1: fall back to the previous state
      out.state = state;
      out.loglik = state_loglik;
      return out;
    }
    gamma = lo + (hi - lo) * unif(rng);
  }
}

EssResult ess_node(int d, const LatentState& state, double state_loglik,
                   const CholFactor& prior_chol,
                   const Eigen::VectorXd& prior_mean,
                   const std::function<double(LatentState&)>& loglik_eval,
                   RngEngine& rng) {
  auto draw = [&](RngEngine& r) { return mvn_sample(prior_mean, prior_chol, r); };
  return ess_node(d, state, state_loglik, draw, prior_mean, loglik_eval, rng);
}

namespace {

DgpChain fit_deep(const TrainingSet& data, const McmcSettings& s,
                  RngEngine& rng, bool ge, const char* who) {
  s.validate();
  const int n = data.n(), D = data.D();
  if (n < 1 || D < 1)
    throw std::invalid_argument(std::string(who) + ": empty data");
  if (ge) {
    if (!data.has_grad())
      throw std::invalid_argument(std::string(who) + ": gradients required");
    if (data.grad->rows() != n || data.grad->cols() != D)
      throw std::invalid_argument(std::string(who) +
                                  ": gradient shape must be n x D");
  }

  DgpChain chain;
  chain.data = data;
  chain.settings = s;
  chain.gradient_enhanced = ge;
  chain.y_offset = data.y.mean();
  const Eigen::VectorXd yc = data.y.array() - chain.y_offset;

  // One X-space plan shared by both layers; ordering and conditioning sets
  // stay fixed across iterations even though the outer layer evaluates
  // kernels at the current warping.
  std::optional<VecchiaPlan> plan;
  Eigen::VectorXd yc_ord;
  if (s.vecchia) {
    plan = build_plan(order_grad(n, ge ? D : 0, rng), data.X, s.m);
    if (!ge) yc_ord = to_ordered(yc, plan->order, n);
  }

  auto outer_ll = [&](const LatentState& st, double th) -> double {
    const Eigen::VectorXd thv = iso(th, D);
    if (ge) {
      const Eigen::VectorXd& yt = *st.y_tilde_all;
      if (plan)
        return vecchia_loglik(vecchia_factor(*plan, st.W, thv, s.eps),
                              to_ordered(yt, plan->order, n));
      return loglik_profiled(
          chol_jitter(assemble_grad_cov(st.W, thv, 0.0), s.eps), yt);
    }
    if (plan)
      return vecchia_loglik(vecchia_factor(*plan, st.W, thv, s.eps), yc_ord);
    return loglik_profiled(
        chol_jitter(k_block(0, 0, st.W, st.W, thv), s.eps), yc);
  };

  std::vector<Eigen::VectorXd> node_mean(D);
  for (int d = 0; d < D; ++d)
    node_mean[d] =
        node_prior_mean(data.X, d, ge, s.latent_identity_prior_mean);

  auto inner_ll = [&](const LatentState& st, int d, double th) -> double {
    const Eigen::VectorXd thv = iso(th, D);
    const Eigen::VectorXd val =
        (ge ? st.W_all->col(d) : st.W.col(d)) - node_mean[d];
    if (plan)
      return vecchia_logpdf_unit(vecchia_factor(*plan, data.X, thv, s.eps),
                                 to_ordered(val, plan->order, n));
    const Eigen::MatrixXd K = ge ? assemble_grad_cov(data.X, thv, 0.0)
                                 : k_block(0, 0, data.X, data.X, thv);
    return mvn_logpdf(chol_jitter(K, s.eps), val);
  };

  auto ess_eval = [&](LatentState& cand, double th_out) -> double {
    if (ge) {
      const Eigen::MatrixXd gw = solve_chain_rows(*cand.W_all, *data.grad);
      cand.y_tilde_all = grad_stack(yc, gw);
    }
    return outer_ll(cand, th_out);
  };

  // latent prior factors cached per node, rebuilt when theta_d moves
  std::vector<double> cached_th(D, -1.0);
  std::vector<std::optional<CholFactor>> prior_chol(D);
  std::vector<std::optional<VecchiaFactor>> prior_fac(D);
  auto refresh_prior = [&](int d, double th) {
    if (cached_th[d] == th) return;
    const Eigen::VectorXd thv = iso(th, D);
    if (plan) {
      prior_fac[d] = vecchia_factor(*plan, data.X, thv, s.eps);
    } else {
      const Eigen::MatrixXd K = ge ? assemble_grad_cov(data.X, thv, 0.0)
                                   : k_block(0, 0, data.X, data.X, thv);
      prior_chol[d] = chol_jitter(K, s.eps);
    }
    cached_th[d] = th;
  };

  LatentState st = init_latent(data.X, ge);
  if (ge) st.y_tilde_all = grad_stack(yc, solve_chain_rows(*st.W_all, *data.grad));
  Eigen::VectorXd th_in = Eigen::VectorXd::Constant(D, s.theta_init);
  double th_out = s.theta_init;

  double cur_out;
  try {
    cur_out = outer_ll(st, th_out);
  } catch (const std::exception& e) {
    throw FitError(std::string(who) + ": initial likelihood: " + e.what());
  }

  const int keep = s.n_retained();
  chain.states.reserve(keep);
  chain.theta_in.resize(keep, D);
  chain.theta_out.resize(keep);
  int kept = 0;

  for (int it = 1; it <= s.nmcmc; ++it) {
    try {
      for (int d = 0; d < D; ++d) {
        refresh_prior(d, th_in[d]);
        auto draw = [&](RngEngine& r) -> Eigen::VectorXd {
          if (plan)
            return node_mean[d] +
                   from_ordered(prior_fac[d]->sample(r), plan->order, n);
          return mvn_sample(node_mean[d], *prior_chol[d], r);
        };
        auto eval = [&](LatentState& cand) { return ess_eval(cand, th_out); };
        EssResult res =
            ess_node(d, st, cur_out, draw, node_mean[d], eval, rng);
        st = std::move(res.state);
        cur_out = res.loglik;
      }
      for (int d = 0; d < D; ++d) {
        auto lli = [&](double th) { return inner_ll(st, d, th); };
        double cur_in = lli(th_in[d]);
        th_in[d] = mh_lengthscale(th_in[d], cur_in, lli, s.theta_prior_inner,
                                  s.prop_l, s.prop_u, rng, &cur_in);
      }
      auto llo = [&](double th) { return outer_ll(st, th); };
      th_out = mh_lengthscale(th_out, cur_out, llo, s.theta_prior_outer,
                              s.prop_l, s.prop_u, rng, &cur_out);
    } catch (const std::exception& e) {
      throw FitError(std::string(who) + ": iteration " + std::to_string(it) +
                     ": " + e.what());
    }
    if (it > s.burn && (it - s.burn) % s.thin == 0 && kept < keep) {
      chain.states.push_back(st);
      chain.theta_in.row(kept) = th_in;
      chain.theta_out[kept] = th_out;
      ++kept;
    }
  }
  return chain;
}

// --- prediction -----------------------------------------------------------

// Warped predictive locations for iteration t, in stacked layout: column d of
// the result is node d's [w_d; dw_d/dx^1; ...] at Xp, truncated to the first
// n_p rows when the Jacobian is not needed.  Transfer uses posterior means
// (stochastic imputation); sample_warp draws a joint sample instead.
Eigen::MatrixXd transfer_warp(const DgpChain& chain, int t,
                              const Eigen::MatrixXd& Xp, bool want_grad,
                              RngEngine* rng) {
  const int D = chain.data.D();
  const Eigen::Index np = Xp.rows();
  const Eigen::Index rows_out = want_grad ? np * (1 + D) : np;
  Eigen::MatrixXd Wp_all(rows_out, D);

  if (chain.pinned_identity) {
    Wp_all.setZero();
    Wp_all.topRows(np) = Xp;
    if (want_grad)
      for (int d = 0; d < D; ++d) Wp_all.block((d + 1) * np, d, np, 1).setOnes();
    return Wp_all;
  }

  const bool ge = chain.gradient_enhanced;
  const bool sample = chain.settings.sample_warp && rng != nullptr;
  const double eps = chain.settings.eps;
  const LatentState& st = chain.states[t];

  for (int d = 0; d < D; ++d) {
    const Eigen::VectorXd thv = iso(chain.theta_in(t, d), D);
    const Eigen::VectorXd mean_tr = node_prior_mean(
        chain.data.X, d, ge, chain.settings.latent_identity_prior_mean);
    const Eigen::VectorXd val =
        (ge ? st.W_all->col(d) : st.W.col(d)) - mean_tr;

    // prior mean at the predictive points, matching the stacked layout
    Eigen::VectorXd mean_p = Eigen::VectorXd::Zero(rows_out);
    if (chain.settings.latent_identity_prior_mean) {
      mean_p.head(np) = Xp.col(d);
      if (want_grad) mean_p.segment((d + 1) * np, np).setOnes();
    }

    if (chain.settings.vecchia) {
      VecchiaPredictor vp{chain.data.X, chain.data.X, ge ? D : 0,
                          val,          thv,          eps,
                          chain.settings.m, 1.0};
      Eigen::VectorXd m, v;
      vecchia_predict(vp, Xp, Xp, want_grad ? D : 0, m, v);
      if (sample) {
        std::normal_distribution<double> normal(0.0, 1.0);
        for (Eigen::Index i = 0; i < m.size(); ++i)
          m[i] += std::sqrt(v[i]) * normal(*rng);
      }
      Wp_all.col(d) = mean_p + m;
      continue;
    }

    const Eigen::MatrixXd K = ge ? assemble_grad_cov(chain.data.X, thv, 0.0)
                                 : k_block(0, 0, chain.data.X, chain.data.X, thv);
    const CholFactor Ktt = chol_jitter(K, eps);
    const std::vector<int> rows = deriv_all(want_grad ? D : 0);
    const std::vector<int> cols = ge ? deriv_all(D) : std::vector<int>{0};
    const Eigen::MatrixXd cross =
        assemble_cross(Xp, chain.data.X, thv, rows, cols);
    if (sample) {
      Eigen::MatrixXd Kpp = want_grad ? assemble_grad_cov(Xp, thv, 0.0)
                                      : k_block(0, 0, Xp, Xp, thv);
      const CondResult r = mvn_condition(Kpp, cross, Ktt, val, 1.0);
      const double jit = 1e-10 * (1.0 + r.cov->diagonal().maxCoeff());
      Wp_all.col(d) = mean_p + mvn_sample(r.mean, chol_jitter(*r.cov, jit), *rng);
    } else {
      Wp_all.col(d) = mean_p + cross * Ktt.solve(val);
    }
  }
  return Wp_all;
}

// Outer-layer moments at warped points; target_blocks > 0 requests the
// dy/dw^i blocks.
void outer_moments(const DgpChain& chain, int t, const Eigen::MatrixXd& Wp,
                   int target_blocks, const VecchiaPlan* plan_pred,
                   const Eigen::MatrixXd& Xp, Eigen::VectorXd& mean,
                   Eigen::VectorXd& var, Eigen::MatrixXd* cov) {
  const int n = chain.data.n(), D = chain.data.D();
  const Eigen::Index np = Wp.rows();
  const bool ge = chain.gradient_enhanced;
  const double eps = chain.settings.eps;
  const LatentState& st = chain.states[t];
  const Eigen::VectorXd thv = iso(chain.theta_out[t], D);
  const Eigen::VectorXd yc = chain.data.y.array() - chain.y_offset;
  const Eigen::VectorXd& yvec = ge ? *st.y_tilde_all : yc;

  if (plan_pred) {
    const VecchiaFactor f = vecchia_factor(*plan_pred, st.W, thv, eps);
    const Eigen::VectorXd y_ord = to_ordered(yvec, plan_pred->order, n);
    const double tau2 = f.quad(y_ord) / static_cast<double>(y_ord.size());
    VecchiaPredictor vp{chain.data.X, st.W, ge ? D : 0,
                        yvec,         thv,  eps,
                        chain.settings.m, tau2};
    vecchia_predict(vp, Xp, Wp, target_blocks, mean, var);
    return;
  }

  const Eigen::MatrixXd K = ge ? assemble_grad_cov(st.W, thv, 0.0)
                               : k_block(0, 0, st.W, st.W, thv);
  const CholFactor Ktt = chol_jitter(K, eps);
  const std::vector<int> rows = deriv_all(target_blocks);
  const std::vector<int> cols = ge ? deriv_all(D) : std::vector<int>{0};
  const Eigen::MatrixXd cross = assemble_cross(Wp, st.W, thv, rows, cols);
  const double tau2 = tau2_hat(Ktt, yvec);
  if (cov) {
    const Eigen::MatrixXd Kpp = target_blocks > 0
                                    ? assemble_grad_cov(Wp, thv, 0.0)
                                    : k_block(0, 0, Wp, Wp, thv);
    const CondResult r = mvn_condition(Kpp, cross, Ktt, yvec, tau2);
    mean = r.mean;
    var = r.var;
    *cov = *r.cov;
    return;
  }
  Eigen::VectorXd pd(np * (1 + target_blocks));
  pd.head(np).setOnes();
  for (int d = 1; d <= target_blocks; ++d)
    pd.segment(d * np, np).setConstant(2.0 / thv[d - 1]);
  const CondResult r = mvn_condition_lite(pd, cross, Ktt, yvec, tau2);
  mean = r.mean;
  var = r.var;
}

// Chain-rule transform treating the imputed Jacobian as constant: the linear
// map T sends [y; dy/dw blocks] to [y; dy/dx blocks] row by row.
Eigen::MatrixXd chain_rule_map(const Eigen::MatrixXd& Wp_all, Eigen::Index np,
                               int D) {
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(np * (1 + D), np * (1 + D));
  T.topLeftCorner(np, np).setIdentity();
  for (int f = 1; f <= D; ++f)
    for (Eigen::Index p = 0; p < np; ++p)
      for (int i = 1; i <= D; ++i)
        T(f * np + p, i * np + p) = Wp_all(f * np + p, i - 1);
  return T;
}

void chain_rule_moments(const Eigen::MatrixXd& Wp_all, Eigen::Index np, int D,
                        const Eigen::VectorXd& mean_w,
                        const Eigen::VectorXd& var_w, Eigen::VectorXd& mean_x,
                        Eigen::VectorXd& var_x) {
  mean_x.resize(np * (1 + D));
  var_x.resize(np * (1 + D));
  mean_x.head(np) = mean_w.head(np);
  var_x.head(np) = var_w.head(np);
  for (int f = 1; f <= D; ++f)
    for (Eigen::Index p = 0; p < np; ++p) {
      double m = 0.0, v = 0.0;
      for (int i = 1; i <= D; ++i) {
        const double j = Wp_all(f * np + p, i - 1);
        m += j * mean_w[i * np + p];
        v += j * j * var_w[i * np + p];
      }
      mean_x[f * np + p] = m;
      var_x[f * np + p] = v;
    }
}

PosteriorMoments predict_deep(const DgpChain& chain, const PredictRequest& req,
                              bool want_grad, RngEngine* rng) {
  const int n = chain.data.n(), D = chain.data.D();
  if (req.Xp.cols() != D)
    throw std::invalid_argument("predict: Xp dimension mismatch");
  const Eigen::Index np = req.Xp.rows();
  if (np < 1) throw std::invalid_argument("predict: empty Xp");
  if (chain.n_retained() < 1 && !chain.pinned_identity)
    throw std::invalid_argument("predict: empty chain");

  std::optional<VecchiaPlan> plan_pred;
  if (chain.settings.vecchia) {
    RngEngine order_rng = make_stream(0x76ecc1a5ULL, 1);
    plan_pred = build_plan(
        order_grad(n, chain.gradient_enhanced ? D : 0, order_rng),
        chain.data.X, chain.settings.m);
    if (!req.lite || req.joint_samples > 0)
      throw std::invalid_argument(
          "predict: full covariance and joint samples need dense mode");
  }
  const int target_blocks = want_grad ? D : 0;

  auto lite_fn = [&](int t, Eigen::VectorXd& m, Eigen::VectorXd& v) {
    const Eigen::MatrixXd Wp_all =
        transfer_warp(chain, t, req.Xp, want_grad, rng);
    const Eigen::MatrixXd Wp = Wp_all.topRows(np);
    Eigen::VectorXd mw, vw;
    outer_moments(chain, t, Wp, target_blocks,
                  plan_pred ? &*plan_pred : nullptr, req.Xp, mw, vw, nullptr);
    if (want_grad)
      chain_rule_moments(Wp_all, np, D, mw, vw, m, v);
    else {
      m = mw;
      v = vw;
    }
  };

  auto cov_fn = [&](int t, Eigen::VectorXd& m, Eigen::MatrixXd& C) {
    const Eigen::MatrixXd Wp_all =
        transfer_warp(chain, t, req.Xp, want_grad, rng);
    const Eigen::MatrixXd Wp = Wp_all.topRows(np);
    Eigen::VectorXd mw, vw;
    Eigen::MatrixXd Cw;
    outer_moments(chain, t, Wp, target_blocks, nullptr, req.Xp, mw, vw, &Cw);
    if (want_grad) {
      const Eigen::MatrixXd T = chain_rule_map(Wp_all, np, D);
      m = T * mw;
      C = T * Cw * T.transpose();
    } else {
      m = mw;
      C = Cw;
    }
  };

  const bool sequential = chain.settings.sample_warp;
  PosteriorMoments out =
      detail::aggregate_over_t(chain.n_retained(), req.lite, req.joint_samples,
                               rng, lite_fn, cov_fn, sequential);
  out.n_blocks = 1 + target_blocks;
  out.mean.head(np).array() += chain.y_offset;
  if (out.samples) out.samples->leftCols(np).array() += chain.y_offset;
  return out;
}

}  // namespace

DgpChain fit_dgp(const TrainingSet& data, const McmcSettings& settings,
                 RngEngine& rng) {
  return fit_deep(data, settings, rng, false, "fit_dgp");
}

DgpChain fit_gedgp(const TrainingSet& data, const McmcSettings& settings,
                   RngEngine& rng) {
  return fit_deep(data, settings, rng, true, "fit_gedgp");
}

PosteriorMoments predict_dgp(const DgpChain& chain, const PredictRequest& req,
                             RngEngine* rng) {
  if (chain.gradient_enhanced)
    throw std::invalid_argument("predict_dgp: chain is gradient-enhanced");
  return predict_deep(chain, req, false, rng);
}

PosteriorMoments predict_dgp_grad(const DgpChain& chain,
                                  const PredictRequest& req, RngEngine* rng) {
  if (chain.gradient_enhanced)
    throw std::invalid_argument("predict_dgp_grad: chain is gradient-enhanced");
  return predict_deep(chain, req, true, rng);
}

PosteriorMoments predict_gedgp(const DgpChain& chain, const PredictRequest& req,
                               RngEngine* rng) {
  if (!chain.gradient_enhanced)
    throw std::invalid_argument("predict_gedgp: chain is not gradient-enhanced");
  return predict_deep(chain, req, false, rng);
}

PosteriorMoments predict_gedgp_grad(const DgpChain& chain,
                                    const PredictRequest& req, RngEngine* rng) {
  if (!chain.gradient_enhanced)
    throw std::invalid_argument(
        "predict_gedgp_grad: chain is not gradient-enhanced");
  return predict_deep(chain, req, true, rng);
}

DgpChain make_pinned_identity_chain(const TrainingSet& data,
                                    const McmcSettings& settings,
                                    const Eigen::MatrixXd& theta_in,
                                    const Eigen::VectorXd& theta_out,
                                    bool gradient_enhanced) {
  if (theta_in.rows() != theta_out.size() || theta_in.cols() != data.D())
    throw std::invalid_argument("make_pinned_identity_chain: theta shapes");
  if (gradient_enhanced && !data.has_grad())
    throw std::invalid_argument(
        "make_pinned_identity_chain: gradients required");
  DgpChain chain;
  chain.data = data;
  chain.settings = settings;
  chain.gradient_enhanced = gradient_enhanced;
  chain.pinned_identity = true;
  chain.y_offset = data.y.mean();
  const Eigen::VectorXd yc = data.y.array() - chain.y_offset;
  LatentState st = init_latent(data.X, gradient_enhanced);
  if (gradient_enhanced) st.y_tilde_all = grad_stack(yc, *data.grad);
  chain.states.assign(theta_out.size(), st);
  chain.theta_in = theta_in;
  chain.theta_out = theta_out;
  return chain;
}

}  // namespace gpgrad
