#include "gpgrad/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gpgrad {

namespace {

void check_points(const Eigen::MatrixXd& X, const Eigen::VectorXd& theta,
                  const char* who) {
  if (X.cols() != theta.size())
    throw std::invalid_argument(std::string(who) +
                                ": point dimension does not match theta");
  for (Eigen::Index d = 0; d < theta.size(); ++d)
    if (!(theta[d] > 0.0))
      throw std::invalid_argument(std::string(who) +
                                  ": lengthscales must be positive");
}

void check_index(int d, int D, const char* who) {
  if (d < 0 || d > D)
    throw std::out_of_range(std::string(who) +
                            ": derivative index out of range");
}

}  // namespace

double k00(const Eigen::RowVectorXd& xi, const Eigen::RowVectorXd& xj,
           const Eigen::VectorXd& theta) {
  if (xi.size() != theta.size() || xj.size() != theta.size())
    throw std::invalid_argument("k00: point dimension does not match theta");
  double s = 0.0;
  for (Eigen::Index d = 0; d < theta.size(); ++d) {
    const double dx = xi[d] - xj[d];
    s += dx * dx / theta[d];
  }
  return std::exp(-s);
}

double k_entry(int d, int f, const Eigen::RowVectorXd& xi,
               const Eigen::RowVectorXd& xj, const Eigen::VectorXd& theta) {
  const int D = static_cast<int>(theta.size());
  check_index(d, D, "k_entry");
  check_index(f, D, "k_entry");
  const double base = k00(xi, xj, theta);
  if (d == 0 && f == 0) return base;
  if (f == 0) {
    const double dx = xi[d - 1] - xj[d - 1];
    return -2.0 / theta[d - 1] * dx * base;
  }
  if (d == 0) {
    const double dx = xi[f - 1] - xj[f - 1];
    return 2.0 / theta[f - 1] * dx * base;
  }
  if (d == f) {
    const double dx = xi[d - 1] - xj[d - 1];
    const double a = 2.0 / theta[d - 1];
    return a * (1.0 - a * dx * dx) * base;
  }
  // canonical (lo, hi) evaluation keeps K_df and K_fd bit-identical
  const int lo = std::min(d, f) - 1, hi = std::max(d, f) - 1;
  const double dlo = xi[lo] - xj[lo];
  const double dhi = xi[hi] - xj[hi];
  return -4.0 / (theta[lo] * theta[hi]) * dlo * dhi * base;
}

Eigen::MatrixXd k_block(int d, int f, const Eigen::MatrixXd& Xi,
                        const Eigen::MatrixXd& Xj,
                        const Eigen::VectorXd& theta) {
  const int D = static_cast<int>(theta.size());
  check_index(d, D, "k_block");
  check_index(f, D, "k_block");
  check_points(Xi, theta, "k_block");
  check_points(Xj, theta, "k_block");
  const Eigen::Index ni = Xi.rows(), nj = Xj.rows();

  Eigen::MatrixXd base(ni, nj);
  for (Eigen::Index a = 0; a < ni; ++a)
    for (Eigen::Index b = 0; b < nj; ++b) {
      double s = 0.0;
      for (int p = 0; p < D; ++p) {
        const double dx = Xi(a, p) - Xj(b, p);
        s += dx * dx / theta[p];
      }
      base(a, b) = std::exp(-s);
    }
  if (d == 0 && f == 0) return base;

  auto diff = [&](int dim) {
    return (Xi.col(dim).replicate(1, nj) -
            Xj.col(dim).transpose().replicate(ni, 1))
        .eval();
  };
  if (f == 0) {
    const Eigen::MatrixXd dx = diff(d - 1);
    return (-2.0 / theta[d - 1]) * dx.cwiseProduct(base);
  }
  if (d == 0) {
    const Eigen::MatrixXd dx = diff(f - 1);
    return (2.0 / theta[f - 1]) * dx.cwiseProduct(base);
  }
  if (d == f) {
    const Eigen::MatrixXd dx = diff(d - 1);
    const double a = 2.0 / theta[d - 1];
    return (a * (1.0 - a * dx.array().square()) * base.array()).matrix();
  }
  const int lo = std::min(d, f) - 1, hi = std::max(d, f) - 1;
  const Eigen::MatrixXd dlo = diff(lo);
  const Eigen::MatrixXd dhi = diff(hi);
  return (-4.0 / (theta[lo] * theta[hi]) * dlo.array() * dhi.array() *
          base.array())
      .matrix();
}

Eigen::MatrixXd assemble_grad_cov(const Eigen::MatrixXd& X,
                                  const Eigen::VectorXd& theta, double eps) {
  check_points(X, theta, "assemble_grad_cov");
  if (eps < 0.0)
    throw std::invalid_argument("assemble_grad_cov: eps must be >= 0");
  const Eigen::Index n = X.rows();
  const int D = static_cast<int>(theta.size());
  const Eigen::Index N = n * (1 + D);

  Eigen::MatrixXd base = k_block(0, 0, X, X, theta);
  std::vector<Eigen::MatrixXd> dx(D);
  for (int p = 0; p < D; ++p)
    dx[p] = X.col(p).replicate(1, n) - X.col(p).transpose().replicate(n, 1);

  Eigen::MatrixXd out(N, N);
  out.block(0, 0, n, n) = base;
  for (int d = 1; d <= D; ++d) {
    const double a = 2.0 / theta[d - 1];
    const Eigen::MatrixXd k0d = a * dx[d - 1].cwiseProduct(base);
    out.block(0, d * n, n, n) = k0d;
    out.block(d * n, 0, n, n) = -k0d;
    out.block(d * n, d * n, n, n) =
        (a * (1.0 - a * dx[d - 1].array().square()) * base.array()).matrix();
    for (int f = d + 1; f <= D; ++f) {
      const Eigen::MatrixXd kdf =
          (-4.0 / (theta[d - 1] * theta[f - 1]) * dx[d - 1].array() *
           dx[f - 1].array() * base.array())
              .matrix();
      out.block(d * n, f * n, n, n) = kdf;
      out.block(f * n, d * n, n, n) = kdf.transpose();
    }
  }
  out.diagonal().array() += eps;
  return out;
}

Eigen::MatrixXd assemble_cross(const Eigen::MatrixXd& Xp,
                               const Eigen::MatrixXd& X,
                               const Eigen::VectorXd& theta,
                               std::vector<int> row_set,
                               std::vector<int> col_set) {
  if (row_set.empty() || col_set.empty())
    throw std::invalid_argument("assemble_cross: index sets must be nonempty");
  std::sort(row_set.begin(), row_set.end());
  std::sort(col_set.begin(), col_set.end());
  const Eigen::Index np = Xp.rows(), n = X.rows();
  Eigen::MatrixXd out(np * static_cast<Eigen::Index>(row_set.size()),
                      n * static_cast<Eigen::Index>(col_set.size()));
  for (std::size_t r = 0; r < row_set.size(); ++r)
    for (std::size_t c = 0; c < col_set.size(); ++c)
      out.block(static_cast<Eigen::Index>(r) * np,
                static_cast<Eigen::Index>(c) * n, np, n) =
          k_block(row_set[r], col_set[c], Xp, X, theta);
  return out;
}

std::vector<int> deriv_all(int D) {
  std::vector<int> v(static_cast<std::size_t>(D) + 1);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

}  // namespace gpgrad
