#pragma once

// Bartlett-kernel HAC covariance for OLS coefficients with the Newey-West
// (1994) automatic bandwidth.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "pdisc/econ/ols.hpp"

namespace pdisc::econ {

struct HacCovariance {
  Eigen::MatrixXd covariance;
  int bandwidth = 0;  // number of autocovariance lags with nonzero weight
  std::string method = "newey-west-1994-automatic";
};

// Rows of X must be in time order. `intercept_column` (if any) gets zero
// weight in the bandwidth criterion.
inline int newey_west_bandwidth(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals,
                                std::optional<Eigen::Index> intercept_column) {
  const Eigen::Index T = X.rows(), k = X.cols();
  Eigen::VectorXd w = Eigen::VectorXd::Ones(k);
  if (intercept_column && k > 1) w(*intercept_column) = 0.0;
  const Eigen::VectorXd u = (X * w).cwiseProduct(residuals);

  const double n = static_cast<double>(T);
  const int pre = static_cast<int>(std::floor(4.0 * std::pow(n / 100.0, 2.0 / 9.0)));
  double s0 = 0.0, s1 = 0.0;
  for (int j = 0; j <= std::min<Eigen::Index>(pre, T - 1); ++j) {
    const double sigma_j = u.tail(T - j).dot(u.head(T - j)) / n;
    s0 += (j == 0 ? 1.0 : 2.0) * sigma_j;
    s1 += 2.0 * j * sigma_j;
  }
  if (!(s0 > 0.0)) return 0;
  const double gamma = 1.1447 * std::cbrt((s1 / s0) * (s1 / s0));
  const double st = gamma * std::cbrt(n);
  return static_cast<int>(std::clamp<double>(std::floor(st), 0.0, static_cast<double>(T - 1)));
}

// (X'X)^-1 [ sum_t h_t h_t' + sum_{j=1..L} (1 - j/(L+1)) sum_t (h_t h_{t-j}' + h_{t-j} h_t') ] (X'X)^-1
// with h_t = x_t e_t. A bandwidth of 0 is White's estimator.
inline HacCovariance newey_west(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals,
                                const Eigen::MatrixXd& xtx_inverse, std::optional<int> forced_bandwidth = std::nullopt,
                                std::optional<Eigen::Index> intercept_column = 0) {
  const Eigen::Index T = X.rows();
  HacCovariance out;
  out.bandwidth = forced_bandwidth ? *forced_bandwidth : newey_west_bandwidth(X, residuals, intercept_column);
  if (forced_bandwidth) out.method = "bartlett-fixed";
  const Eigen::MatrixXd H = X.array().colwise() * residuals.array();
  Eigen::MatrixXd S = H.transpose() * H;
  for (int j = 1; j <= out.bandwidth && j < T; ++j) {
    const double weight = 1.0 - static_cast<double>(j) / (out.bandwidth + 1.0);
    Eigen::MatrixXd G = H.bottomRows(T - j).transpose() * H.topRows(T - j);
    S += weight * (G + G.transpose());
  }
  out.covariance = xtx_inverse * S * xtx_inverse;
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  return out;
}

}  // namespace pdisc::econ
