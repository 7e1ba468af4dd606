#pragma once

#include <Eigen/Dense>
#include <vector>

namespace gpgrad {

// Gaussian kernel with per-dimension lengthscales on the squared-distance
// scale:
//
//   k00(xi, xj) = exp(-sum_d (xi_d - xj_d)^2 / theta_d)
//
// Derivative blocks pair the response (index 0) with partial derivatives
// along dimensions 1..D.  With dx_d = xi_d - xj_d:
//
//   K_d0 = -(2/theta_d) dx_d k00            K_0d = +(2/theta_d) dx_d k00
//   K_dd = (2/theta_d) (1 - (2/theta_d) dx_d^2) k00
//   K_df = -(4/(theta_d theta_f)) dx_d dx_f k00          (d != f, both >= 1)
//
// The derivative index d is taken with respect to the first argument and f
// with respect to the second, so K_d0 = -K_0d entrywise and the stacked
// covariance below is symmetric.

double k00(const Eigen::RowVectorXd& xi, const Eigen::RowVectorXd& xj,
           const Eigen::VectorXd& theta);

// Single covariance entry between observation classes d and f (0 = response,
// >= 1 = partial derivative along that dimension).
double k_entry(int d, int f, const Eigen::RowVectorXd& xi,
               const Eigen::RowVectorXd& xj, const Eigen::VectorXd& theta);

// n_i x n_j matrix with entry (a, b) = K_df(Xi.row(a), Xj.row(b)).
Eigen::MatrixXd k_block(int d, int f, const Eigen::MatrixXd& Xi,
                        const Eigen::MatrixXd& Xj,
                        const Eigen::VectorXd& theta);

// Covariance of the stacked vector [y; dy/dx^1; ...; dy/dx^D] observed at X,
// of size N = n(1+D), plus eps along the entire diagonal.
Eigen::MatrixXd assemble_grad_cov(const Eigen::MatrixXd& X,
                                  const Eigen::VectorXd& theta, double eps);

// Stacks k_block(d, f, Xp, X) for all d in row_set and f in col_set, each in
// ascending order.  Transposing with swapped arguments and swapped sets
// yields the same matrix.
Eigen::MatrixXd assemble_cross(const Eigen::MatrixXd& Xp,
                               const Eigen::MatrixXd& X,
                               const Eigen::VectorXd& theta,
                               std::vector<int> row_set,
                               std::vector<int> col_set);

// All derivative indices 0..D.
std::vector<int> deriv_all(int D);

}  // namespace gpgrad
