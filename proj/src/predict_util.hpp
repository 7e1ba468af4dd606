#pragma once

#include <Eigen/Dense>
#include <functional>

#include "gpgrad/gp.hpp"
#include "gpgrad/moments.hpp"
#include "gpgrad/parallel.hpp"

namespace gpgrad::detail {

// Loops retained iterations, aggregating per-iteration moments.  The lite
// path runs in a fixed number of chunks merged in chunk order, so results do
// not depend on the worker count.  Full-covariance and sampling paths are
// sequential (sampling consumes the RNG in t order; sample j uses iteration
// j mod T).
PosteriorMoments aggregate_over_t(
    int T, bool lite, int joint_samples, RngEngine* rng,
    const std::function<void(int, Eigen::VectorXd&, Eigen::VectorXd&)>&
        moments_fn,
    const std::function<void(int, Eigen::VectorXd&, Eigen::MatrixXd&)>& cov_fn,
    bool force_sequential = false);

}  // namespace gpgrad::detail
