#include "predict_util.hpp"

#include <stdexcept>
#include <vector>

namespace gpgrad::detail {

PosteriorMoments aggregate_over_t(
    int T, bool lite, int joint_samples, RngEngine* rng,
    const std::function<void(int, Eigen::VectorXd&, Eigen::VectorXd&)>&
        moments_fn,
    const std::function<void(int, Eigen::VectorXd&, Eigen::MatrixXd&)>& cov_fn,
    bool force_sequential) {
  if (T <= 0) throw std::invalid_argument("prediction: empty chain");
  if (joint_samples > 0 && rng == nullptr)
    throw std::invalid_argument("prediction: joint samples need an RNG");

  PosteriorMoments out;
  if (lite && joint_samples == 0) {
    const int chunks = force_sequential ? 1 : std::min(T, 16);
    std::vector<MomentAccumulator> parts(chunks);
    const int per = (T + chunks - 1) / chunks;
    parallel_for(chunks, [&](std::size_t c) {
      const int lo = static_cast<int>(c) * per;
      const int hi = std::min(T, lo + per);
      Eigen::VectorXd m, v;
      for (int t = lo; t < hi; ++t) {
        moments_fn(t, m, v);
        parts[c].add(m, v);
      }
    });
    MomentAccumulator acc;
    for (const auto& p : parts) acc.merge(p);
    out.mean = acc.mean();
    out.var = acc.var();
    return out;
  }

  MomentAccumulator acc;
  Eigen::MatrixXd samples;
  for (int t = 0; t < T; ++t) {
    Eigen::VectorXd m;
    Eigen::MatrixXd C;
    cov_fn(t, m, C);
    acc.add_cov(m, C);
    if (joint_samples > 0) {
      if (samples.size() == 0) samples.resize(joint_samples, m.size());
      // draws j with j mod T == t, in increasing j
      bool need = false;
      for (int j = t; j < joint_samples; j += T) need = true;
      if (need) {
        const double jit = 1e-10 * (1.0 + C.diagonal().maxCoeff());
        const CholFactor cf = chol_jitter(C, jit);
        for (int j = t; j < joint_samples; j += T)
          samples.row(j) = mvn_sample(m, cf, *rng).transpose();
      }
    }
  }
  out.mean = acc.mean();
  out.var = acc.var();
  if (!lite) out.cov = acc.cov();
  if (joint_samples > 0) out.samples = std::move(samples);
  return out;
}

}  // namespace gpgrad::detail
