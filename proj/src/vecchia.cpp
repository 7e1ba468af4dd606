#include "gpgrad/vecchia.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "gpgrad/kernel.hpp"

namespace gpgrad {

std::vector<VecchiaObs> order_grad(int n, int deriv_blocks, RngEngine& rng) {
  if (n < 1 || deriv_blocks < 0)
    throw std::invalid_argument("order_grad: bad sizes");
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<VecchiaObs> order;
  order.reserve(static_cast<std::size_t>(n) * (1 + deriv_blocks));
  for (int d = 0; d <= deriv_blocks; ++d)
    for (int i = 0; i < n; ++i) order.push_back({perm[i], d});
  return order;
}

namespace {

struct Candidate {
  double dist2;
  int deriv;
  int pos;
};

// response-priority tie rule shared by conditioning sets and prediction
bool nearer(const Candidate& a, const Candidate& b) {
  if (a.dist2 != b.dist2) return a.dist2 < b.dist2;
  const bool ad = a.deriv > 0, bd = b.deriv > 0;
  if (ad != bd) return !ad;
  if (a.deriv != b.deriv) return a.deriv < b.deriv;
  return a.pos < b.pos;
}

}  // namespace

std::vector<std::vector<int>> cond_sets(const std::vector<VecchiaObs>& order,
                                        const Eigen::MatrixXd& X, int m) {
  if (m < 1) throw std::invalid_argument("cond_sets: m must be >= 1");
  const std::size_t N = order.size();
  std::vector<std::vector<int>> sets(N);
  std::vector<Candidate> cand;
  cand.reserve(N);
  for (std::size_t i = 1; i < N; ++i) {
    cand.clear();
    const auto xi = X.row(order[i].loc);
    for (std::size_t j = 0; j < i; ++j)
      cand.push_back({(X.row(order[j].loc) - xi).squaredNorm(),
                      order[j].deriv, static_cast<int>(j)});
    const std::size_t k = std::min<std::size_t>(m, cand.size());
    std::partial_sort(cand.begin(), cand.begin() + k, cand.end(), nearer);
    sets[i].reserve(k);
    for (std::size_t j = 0; j < k; ++j) sets[i].push_back(cand[j].pos);
    std::sort(sets[i].begin(), sets[i].end());
  }
  return sets;
}

VecchiaPlan build_plan(std::vector<VecchiaObs> order, const Eigen::MatrixXd& X,
                       int m) {
  VecchiaPlan plan;
  plan.cond = cond_sets(order, X, m);
  plan.order = std::move(order);
  plan.m = m;
  return plan;
}

VecchiaFactor::VecchiaFactor(const VecchiaPlan& plan,
                             std::vector<Eigen::VectorXd> weights,
                             Eigen::VectorXd sd)
    : plan_(&plan), weights_(std::move(weights)), sd_(std::move(sd)) {}

double VecchiaFactor::logdet() const {
  return 2.0 * sd_.array().log().sum();
}

double VecchiaFactor::quad(const Eigen::VectorXd& y) const {
  if (y.size() != plan_->size())
    throw std::invalid_argument("VecchiaFactor::quad: dimension mismatch");
  double q = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    double mu = 0.0;
    const auto& c = plan_->cond[i];
    for (std::size_t j = 0; j < c.size(); ++j) mu += weights_[i][j] * y[c[j]];
    const double r = (y[i] - mu) / sd_[i];
    q += r * r;
  }
  return q;
}

Eigen::VectorXd VecchiaFactor::sample(RngEngine& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd x(plan_->size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double mu = 0.0;
    const auto& c = plan_->cond[i];
    for (std::size_t j = 0; j < c.size(); ++j) mu += weights_[i][j] * x[c[j]];
    x[i] = mu + sd_[i] * normal(rng);
  }
  return x;
}

std::size_t VecchiaFactor::nnz() const {
  std::size_t k = sd_.size();
  for (const auto& w : weights_) k += w.size();
  return k;
}

VecchiaFactor vecchia_factor(const VecchiaPlan& plan, const Eigen::MatrixXd& P,
                             const Eigen::VectorXd& theta, double eps) {
  const Eigen::Index N = plan.size();
  std::vector<Eigen::VectorXd> weights(N);
  Eigen::VectorXd sd(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const auto& c = plan.cond[i];
    const int k = static_cast<int>(c.size());
    const VecchiaObs oi = plan.order[i];
    const double prior =
        k_entry(oi.deriv, oi.deriv, P.row(oi.loc), P.row(oi.loc), theta) + eps;
    if (k == 0) {
      weights[i].resize(0);
      sd[i] = std::sqrt(prior);
      continue;
    }
    Eigen::MatrixXd C(k, k);
    Eigen::VectorXd v(k);
    for (int a = 0; a < k; ++a) {
      const VecchiaObs oa = plan.order[c[a]];
      v[a] = k_entry(oa.deriv, oi.deriv, P.row(oa.loc), P.row(oi.loc), theta);
      for (int b = a; b < k; ++b) {
        const VecchiaObs ob = plan.order[c[b]];
        double e =
            k_entry(oa.deriv, ob.deriv, P.row(oa.loc), P.row(ob.loc), theta);
        if (a == b) e += eps;
        C(a, b) = e;
        C(b, a) = e;
      }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(C);
    if (llt.info() != Eigen::Success)
      throw NotPositiveDefinite("vecchia_factor: conditional block not PD");
    weights[i] = llt.solve(v);
    const double s2 = prior - v.dot(weights[i]);
    if (!(s2 > 0.0))
      throw NotPositiveDefinite("vecchia_factor: nonpositive conditional variance");
    sd[i] = std::sqrt(s2);
  }
  return VecchiaFactor(plan, std::move(weights), std::move(sd));
}

double vecchia_loglik(const VecchiaFactor& f, const Eigen::VectorXd& y) {
  const double q = f.quad(y);
  if (!(q > 0.0))
    throw std::domain_error("vecchia_loglik: nonpositive quadratic form");
  return -0.5 * f.logdet() - 0.5 * static_cast<double>(y.size()) * std::log(q);
}

double vecchia_loglik(const VecchiaPlan& plan, const Eigen::MatrixXd& P,
                      const Eigen::VectorXd& theta, double eps,
                      const Eigen::VectorXd& y_ordered) {
  return vecchia_loglik(vecchia_factor(plan, P, theta, eps), y_ordered);
}

double vecchia_logpdf_unit(const VecchiaFactor& f, const Eigen::VectorXd& y) {
  constexpr double kLog2Pi = 1.8378770664093454836;
  return -0.5 * (f.logdet() + f.quad(y) +
                 static_cast<double>(y.size()) * kLog2Pi);
}

Eigen::VectorXd to_ordered(const Eigen::VectorXd& stacked,
                           const std::vector<VecchiaObs>& order, int n) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(order.size()));
  for (std::size_t i = 0; i < order.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = stacked[order[i].deriv * n + order[i].loc];
  return out;
}

Eigen::VectorXd from_ordered(const Eigen::VectorXd& ordered,
                             const std::vector<VecchiaObs>& order, int n) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(order.size()));
  for (std::size_t i = 0; i < order.size(); ++i)
    out[order[i].deriv * n + order[i].loc] = ordered[static_cast<Eigen::Index>(i)];
  return out;
}

void vecchia_predict(const VecchiaPredictor& vp, const Eigen::MatrixXd& geom_p,
                     const Eigen::MatrixXd& kernel_p, int target_deriv_blocks,
                     Eigen::VectorXd& mean, Eigen::VectorXd& var) {
  if (vp.m < 1) throw std::invalid_argument("vecchia_predict: m must be >= 1");
  const int n = static_cast<int>(vp.geom.rows());
  const Eigen::Index np = geom_p.rows();
  const int nblocks = target_deriv_blocks + 1;
  mean.resize(np * nblocks);
  var.resize(np * nblocks);

  std::vector<Candidate> cand;
  cand.reserve(static_cast<std::size_t>(n) * (1 + vp.deriv_blocks));
  for (Eigen::Index p = 0; p < np; ++p) {
    cand.clear();
    for (int d = 0; d <= vp.deriv_blocks; ++d)
      for (int i = 0; i < n; ++i)
        cand.push_back({(vp.geom.row(i) - geom_p.row(p)).squaredNorm(), d,
                        d * n + i});
    const std::size_t k = std::min<std::size_t>(vp.m, cand.size());
    std::partial_sort(cand.begin(), cand.begin() + k, cand.end(), nearer);

    Eigen::MatrixXd C(k, k);
    Eigen::VectorXd yc(k);
    for (std::size_t a = 0; a < k; ++a) {
      const int la = cand[a].pos % n, da = cand[a].deriv;
      yc[static_cast<Eigen::Index>(a)] = vp.y_stacked[cand[a].pos];
      for (std::size_t b = a; b < k; ++b) {
        const int lb = cand[b].pos % n, db = cand[b].deriv;
        double e = k_entry(da, db, vp.kernel_pts.row(la), vp.kernel_pts.row(lb),
                           vp.theta);
        if (a == b) e += vp.eps;
        C(a, b) = e;
        C(b, a) = e;
      }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(C);
    if (llt.info() != Eigen::Success)
      throw NotPositiveDefinite("vecchia_predict: conditional block not PD");

    for (int r = 0; r < nblocks; ++r) {
      Eigen::VectorXd v(k);
      for (std::size_t a = 0; a < k; ++a)
        v[static_cast<Eigen::Index>(a)] =
            k_entry(r, cand[a].deriv, kernel_p.row(p),
                    vp.kernel_pts.row(cand[a].pos % n), vp.theta);
      const Eigen::VectorXd w = llt.solve(v);
      const double prior =
          k_entry(r, r, kernel_p.row(p), kernel_p.row(p), vp.theta);
      mean[r * np + p] = w.dot(yc);
      var[r * np + p] = vp.tau2 * std::max(0.0, prior - v.dot(w));
    }
  }
}

std::string plan_dump(const VecchiaPlan& plan) {
  std::ostringstream os;
  os << "pos\tloc\tderiv\tcond\n";
  for (Eigen::Index i = 0; i < plan.size(); ++i) {
    os << i << '\t' << plan.order[i].loc << '\t' << plan.order[i].deriv
       << '\t';
    for (std::size_t j = 0; j < plan.cond[i].size(); ++j) {
      if (j) os << ',';
      os << plan.cond[i][j];
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace gpgrad
