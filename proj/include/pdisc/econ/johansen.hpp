#pragma once

// Bivariate Johansen reduced-rank machinery with the constant restricted to
// the cointegrating relation (no trend).
//
// The model for lag count J is
//   dp_t = alpha (beta' p_{t-1} - mu) + sum_{j=1..J} Gamma_j dp_{t-j} + e_t
// and everything below is computed from one cross-product matrix of
//   Z = [ dp_t | p_{t-1} - c, 1 | dp_{t-1} .. dp_{t-K} ]
// built once for the largest lag K. Smaller lag counts reuse leading blocks,
// so every candidate shares the same estimation sample.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "pdisc/core.hpp"

namespace pdisc::econ {

class NonEstimable : public Error {
 public:
  using Error::Error;
};

enum class RankCategory { Stationarity, Cointegration, NonCointegration };

inline std::string to_string(RankCategory c) {
  switch (c) {
    case RankCategory::Stationarity: return "Stationarity";
    case RankCategory::Cointegration: return "Cointegration";
    case RankCategory::NonCointegration: return "NonCointegration";
  }
  return "?";
}

inline bool parse_rank_category(std::string_view s, RankCategory& out) {
  if (s == "Stationarity") out = RankCategory::Stationarity;
  else if (s == "Cointegration") out = RankCategory::Cointegration;
  else if (s == "NonCointegration") out = RankCategory::NonCointegration;
  else return false;
  return true;
}

// Asymptotic trace critical values, restricted constant, two variables
// (Osterwald-Lenum 1992, Table 1*).
struct CriticalValues {
  double rank0 = 0.0;  // H0: r = 0   (p - r = 2)
  double rank1 = 0.0;  // H0: r <= 1  (p - r = 1)
};

inline CriticalValues trace_critical_values(double significance) {
  if (std::abs(significance - 0.10) < 1e-9) return {17.85, 7.52};
  if (std::abs(significance - 0.05) < 1e-9) return {19.96, 9.24};
  if (std::abs(significance - 0.01) < 1e-9) return {24.60, 12.97};
  throw Error(fmt::format("no trace critical values for significance {}", significance));
}

// Sequential rule: stop at the first hypothesis not rejected.
inline RankCategory classify_rank(double trace_rank0, double trace_rank1, CriticalValues cv) {
  if (trace_rank0 <= cv.rank0) return RankCategory::NonCointegration;
  if (trace_rank1 <= cv.rank1) return RankCategory::Cointegration;
  return RankCategory::Stationarity;
}

struct RankDecision {
  double trace_rank0 = 0.0;
  double trace_rank1 = 0.0;
  CriticalValues critical;
  RankCategory category = RankCategory::NonCointegration;
  std::array<double, 2> eigenvalues{};  // descending
  int lag_count = 0;
  Eigen::Index n_obs = 0;
};

struct LagRange {
  int min = 1;
  int max = 10;
};

class VecmMoments {
 public:
  static constexpr Eigen::Index kLevels = 2;    // first column of p_{t-1}
  static constexpr Eigen::Index kLagged = 5;    // first lagged difference column

  VecmMoments(std::span<const double> p1, std::span<const double> p2, int max_lag) : max_lag_(max_lag) {
    if (p1.size() != p2.size()) throw Error("price series lengths differ");
    if (max_lag < 1) throw Error("lag count must be at least 1");
    const auto T = static_cast<Eigen::Index>(p1.size());
    if (T <= 20 * max_lag) throw NonEstimable(fmt::format("series too short ({} obs) for {} lags", T, max_lag));
    n_ = T - max_lag - 1;

    c1_ = c2_ = 0.0;
    for (Eigen::Index t = max_lag; t < T - 1; ++t) {
      c1_ += p1[t];
      c2_ += p2[t];
    }
    c1_ /= static_cast<double>(n_);
    c2_ /= static_cast<double>(n_);

    const Eigen::Index dim = kLagged + 2 * max_lag;
    Eigen::MatrixXd Z(n_, dim);
    for (Eigen::Index r = 0; r < n_; ++r) {
      const Eigen::Index t = r + max_lag + 1;
      Z(r, 0) = p1[t] - p1[t - 1];
      Z(r, 1) = p2[t] - p2[t - 1];
      Z(r, 2) = p1[t - 1] - c1_;
      Z(r, 3) = p2[t - 1] - c2_;
      Z(r, 4) = 1.0;
      for (int j = 1; j <= max_lag; ++j) {
        Z(r, kLagged + 2 * (j - 1)) = p1[t - j] - p1[t - j - 1];
        Z(r, kLagged + 2 * (j - 1) + 1) = p2[t - j] - p2[t - j - 1];
      }
    }
    M_.noalias() = Z.transpose() * Z;
    M_ /= static_cast<double>(n_);
  }

  int max_lag() const { return max_lag_; }
  Eigen::Index n_obs() const { return n_; }
  double center1() const { return c1_; }
  double center2() const { return c2_; }
  const Eigen::MatrixXd& cross_products() const { return M_; }

 private:
  int max_lag_;
  Eigen::Index n_ = 0;
  double c1_ = 0.0, c2_ = 0.0;
  Eigen::MatrixXd M_;
};

// Moments of dp_t and (p_{t-1}, 1) after partialling out J lagged differences,
// plus the whitened reduced-rank eigenproblem.
struct ReducedRank {
  int lag_count = 0;
  Eigen::Index n_obs = 0;
  Eigen::Matrix2d S00;
  Eigen::Matrix<double, 2, 3> S01;
  Eigen::Matrix3d S11;
  Eigen::MatrixXd lagged_inverse;  // M22^-1
  std::array<double, 3> eigenvalues{};  // descending, in [0, 1)
  Eigen::Matrix3d eigenvectors;         // columns b with b' S11 b = 1, matching eigenvalues

  double log_det_s00() const { return std::log(S00.determinant()); }

  double trace_rank0() const {
    return -static_cast<double>(n_obs) * (std::log1p(-eigenvalues[0]) + std::log1p(-eigenvalues[1]));
  }
  double trace_rank1() const { return -static_cast<double>(n_obs) * std::log1p(-eigenvalues[1]); }

  // log det of the residual covariance when the long-run matrix has rank r.
  double log_det_sigma(int rank) const {
    double v = log_det_s00();
    for (int i = 0; i < rank; ++i) v += std::log1p(-eigenvalues[i]);
    return v;
  }

  // BIC for rank r: r(2 + 3 - r) long-run parameters plus 4J short-run ones.
  double bic(int rank) const {
    const double params = rank * (5 - rank) + 4.0 * lag_count;
    const double n = static_cast<double>(n_obs);
    return log_det_sigma(rank) + params * std::log(n) / n;
  }
};

inline ReducedRank reduce(const VecmMoments& m, int lag_count) {
  if (lag_count < 1 || lag_count > m.max_lag()) throw Error(fmt::format("lag count {} outside moment range", lag_count));
  using Eigen::Index;
  const Eigen::MatrixXd& M = m.cross_products();
  const Index q = 2 * lag_count;
  const Index L = VecmMoments::kLagged;

  ReducedRank rr;
  rr.lag_count = lag_count;
  rr.n_obs = m.n_obs();

  Eigen::MatrixXd M22 = M.block(L, L, q, q);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(M22);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.rcond() < 1e-13)
    throw NonEstimable("lagged-difference moment matrix is singular");
  rr.lagged_inverse = ldlt.solve(Eigen::MatrixXd::Identity(q, q));

  Eigen::MatrixXd Ma2 = M.block(0, L, L, q);  // rows: dp_t (2), levels (2), const (1)
  Eigen::MatrixXd S = M.topLeftCorner(L, L) - Ma2 * rr.lagged_inverse * Ma2.transpose();
  rr.S00 = S.topLeftCorner<2, 2>();
  rr.S01 = S.block<2, 3>(0, 2);
  rr.S11 = S.block<3, 3>(2, 2);

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es11(rr.S11);
  const Eigen::Vector3d d11 = es11.eigenvalues();
  if (!(d11.minCoeff() > 1e-12 * d11.maxCoeff()) || !(d11.maxCoeff() > 0.0))
    throw NonEstimable("level moment matrix is singular");
  const Eigen::Matrix3d V = es11.eigenvectors();
  const Eigen::Matrix3d S11_mhalf = V * d11.cwiseInverse().cwiseSqrt().asDiagonal() * V.transpose();

  Eigen::LLT<Eigen::Matrix2d> llt00(rr.S00);
  if (llt00.info() != Eigen::Success || !(rr.S00.determinant() > 0.0))
    throw NonEstimable("difference moment matrix is singular");
  const Eigen::Matrix<double, 2, 3> S00inv_S01 = llt00.solve(rr.S01);
  Eigen::Matrix3d A = S11_mhalf * rr.S01.transpose() * S00inv_S01 * S11_mhalf;
  A = 0.5 * (A + A.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> esA(A);
  for (int i = 0; i < 3; ++i) {
    double lam = esA.eigenvalues()(2 - i);
    rr.eigenvalues[i] = std::clamp(lam, 0.0, 1.0 - 1e-15);
    rr.eigenvectors.col(i) = S11_mhalf * esA.eigenvectors().col(2 - i);
  }
  return rr;
}

inline RankDecision decide(const ReducedRank& rr, double significance) {
  RankDecision d;
  d.trace_rank0 = rr.trace_rank0();
  d.trace_rank1 = rr.trace_rank1();
  d.critical = trace_critical_values(significance);
  d.category = classify_rank(d.trace_rank0, d.trace_rank1, d.critical);
  d.eigenvalues = {rr.eigenvalues[0], rr.eigenvalues[1]};
  d.lag_count = rr.lag_count;
  d.n_obs = rr.n_obs;
  return d;
}

// Lag count minimizing BIC at the given rank; ties go to the smaller lag.
inline int select_lag_bic(const VecmMoments& m, LagRange range, int rank) {
  if (range.min < 1 || range.max < range.min || range.max > m.max_lag())
    throw Error(fmt::format("invalid lag range {}..{}", range.min, range.max));
  int best = -1;
  double best_bic = 0.0;
  for (int J = range.min; J <= range.max; ++J) {
    double b;
    try {
      b = reduce(m, J).bic(rank);
    } catch (const NonEstimable&) {
      continue;
    }
    if (!std::isfinite(b)) continue;
    if (best < 0 || b < best_bic) {
      best = J;
      best_bic = b;
    }
  }
  if (best < 0) throw NonEstimable("no candidate lag count could be estimated");
  return best;
}

// Trace test at a fixed lag count.
inline RankDecision johansen_trace(std::span<const double> p1, std::span<const double> p2, int lag_count,
                                   double significance = 0.05) {
  VecmMoments m(p1, p2, lag_count);
  return decide(reduce(m, lag_count), significance);
}

// Trace test at the lag count chosen by BIC for the unrestricted (full-rank)
// system, on the common sample trimmed to the largest candidate lag.
inline RankDecision johansen_trace_bic(const VecmMoments& m, LagRange range, double significance = 0.05) {
  const int J = select_lag_bic(m, range, 2);
  return decide(reduce(m, J), significance);
}

}  // namespace pdisc::econ
