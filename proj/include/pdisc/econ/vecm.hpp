#pragma once

#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pdisc/econ/johansen.hpp"

namespace pdisc::econ {

struct VecmFit {
  Eigen::Vector2d alpha;  // error-correction loadings
  Eigen::Vector2d beta;   // cointegrating vector, beta(0) == 1
  double mu = 0.0;        // long-run constant: beta' p - mu is stationary
  std::vector<Eigen::Matrix2d> gammas;  // Gamma_1 .. Gamma_J
  int lag_count = 0;
  Eigen::Matrix2d sigma;  // ML residual covariance
  Eigen::Index n_obs = 0;
  double bic = 0.0;

  double rho() const { return sigma(0, 1) / std::sqrt(sigma(0, 0) * sigma(1, 1)); }
};

// Rank-one maximum likelihood estimates at a fixed lag count.
inline VecmFit vecm_at(const VecmMoments& m, int lag_count) {
  const ReducedRank rr = reduce(m, lag_count);
  const Eigen::Vector3d b = rr.eigenvectors.col(0);  // b' S11 b = 1
  if (!(std::abs(b(0)) > 1e-12 * b.norm())) throw NonEstimable("cointegrating vector cannot be normalized");
  const Eigen::Vector2d a = rr.S01 * b;

  VecmFit fit;
  fit.lag_count = lag_count;
  fit.n_obs = rr.n_obs;
  fit.alpha = a * b(0);
  fit.beta = Eigen::Vector2d(1.0, b(1) / b(0));
  // b'(p - c, 1) / b0 = p1 + beta2 p2 - (c1 + beta2 c2 - b2 / b0)
  fit.mu = m.center1() + fit.beta(1) * m.center2() - b(2) / b(0);

  fit.sigma = rr.S00 - a * a.transpose();
  fit.sigma = 0.5 * (fit.sigma + fit.sigma.transpose()).eval();

  const Eigen::MatrixXd& M = m.cross_products();
  const Eigen::Index q = 2 * lag_count;
  const Eigen::Index L = VecmMoments::kLagged;
  Eigen::MatrixXd M02 = M.block(0, L, 2, q);
  Eigen::MatrixXd M12 = M.block(2, L, 3, q);
  Eigen::MatrixXd G = (M02 - a * b.transpose() * M12) * rr.lagged_inverse;
  for (int j = 0; j < lag_count; ++j) fit.gammas.push_back(G.block<2, 2>(0, 2 * j));
  fit.bic = rr.bic(1);
  return fit;
}

// Lag count by BIC over `range` on the common trimmed sample, then the
// rank-one fit at that lag.
inline VecmFit fit_vecm(const VecmMoments& m, LagRange range) {
  return vecm_at(m, select_lag_bic(m, range, 1));
}

inline VecmFit fit_vecm(std::span<const double> p1, std::span<const double> p2, LagRange range = {}) {
  VecmMoments m(p1, p2, range.max);
  return fit_vecm(m, range);
}

}  // namespace pdisc::econ
