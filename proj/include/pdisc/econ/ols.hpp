#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "pdisc/core.hpp"

namespace pdisc::econ {

class SingularDesignError : public Error {
 public:
  SingularDesignError(std::vector<std::string> columns)
      : Error(fmt::format("singular design: collinear columns {}", fmt::join(columns, ", "))),
        columns_(std::move(columns)) {}
  const std::vector<std::string>& columns() const { return columns_; }

 private:
  std::vector<std::string> columns_;
};

struct OlsFit {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd residuals;
  Eigen::MatrixXd xtx_inverse;  // (X'X)^-1
  Eigen::MatrixXd covariance;   // s^2 (X'X)^-1
  double sigma2 = 0.0;          // RSS / (n - k)
  double rss = 0.0;
  Eigen::Index n = 0;
  Eigen::Index k = 0;
};

// Least squares by column-pivoted QR. Columns the factorization finds
// dependent on the others are named in the thrown error.
inline OlsFit ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, const std::vector<std::string>& names = {}) {
  const Eigen::Index n = X.rows(), k = X.cols();
  if (y.size() != n) throw Error("ols: response and design row counts differ");
  if (n <= k) throw Error(fmt::format("ols: need more rows than columns ({} <= {})", n, k));

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < k) {
    std::vector<std::string> cols;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index i = qr.rank(); i < k; ++i) {
      auto c = perm(i);
      cols.push_back(static_cast<std::size_t>(c) < names.size() ? names[c] : fmt::format("x{}", c));
    }
    throw SingularDesignError(std::move(cols));
  }

  OlsFit fit;
  fit.n = n;
  fit.k = k;
  fit.coefficients = qr.solve(y);
  fit.residuals = y - X * fit.coefficients;
  fit.rss = fit.residuals.squaredNorm();
  fit.sigma2 = fit.rss / static_cast<double>(n - k);

  Eigen::MatrixXd R = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  Eigen::MatrixXd permuted = Rinv * Rinv.transpose();
  const auto P = qr.colsPermutation();
  fit.xtx_inverse = P * permuted * P.transpose();
  fit.covariance = fit.sigma2 * fit.xtx_inverse;
  return fit;
}

}  // namespace pdisc::econ
