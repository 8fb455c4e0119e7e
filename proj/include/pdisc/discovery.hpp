#pragma once

// Daily price-discovery shares for the nearby contract: Garbade-Silber on
// days where both prices are stationary, component / information /
// information-leadership shares on cointegrated days.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "pdisc/econ/johansen.hpp"
#include "pdisc/econ/ols.hpp"
#include "pdisc/econ/vecm.hpp"
#include "pdisc/market_data.hpp"

namespace pdisc {

using econ::RankCategory;

enum class Absence {
  None,
  NotApplicable,       // metric not computed for the day's category
  DoubleTruncation,    // both GS adjustment coefficients truncated to zero
  EqualLoadings,       // alpha1 == alpha2
  NonErrorCorrecting,  // loadings imply a component share outside [0, 1]
  SingularCovariance,  // |rho| >= 1 or a zero variance
  NoLeadership,        // IL numerator and denominator both zero
};

inline std::string to_string(Absence a) {
  switch (a) {
    case Absence::None: return "none";
    case Absence::NotApplicable: return "not_applicable";
    case Absence::DoubleTruncation: return "double_truncation";
    case Absence::EqualLoadings: return "equal_loadings";
    case Absence::NonErrorCorrecting: return "non_error_correcting";
    case Absence::SingularCovariance: return "singular_covariance";
    case Absence::NoLeadership: return "no_leadership";
  }
  return "?";
}

struct ShareSplit {
  double first = 0.0;   // series 1 (nearby)
  double second = 0.0;  // series 2 (deferred)
};

struct ShareOutcome {
  std::optional<ShareSplit> split;
  Absence reason = Absence::None;

  explicit operator bool() const { return split.has_value(); }
  static ShareOutcome absent(Absence why) { return {std::nullopt, why}; }
};

// ---------------------------------------------------------------------------
// Garbade-Silber

struct GsFit {
  double alpha1 = 0.0, alpha2 = 0.0;
  double beta1 = 0.0, beta2 = 0.0;          // after truncation, both >= 0
  double raw_beta1 = 0.0, raw_beta2 = 0.0;  // before truncation
  bool truncated1 = false, truncated2 = false;
  ShareOutcome share;
};

inline ShareOutcome gs_from_coefficients(double beta1, double beta2) {
  const double b1 = std::max(beta1, 0.0), b2 = std::max(beta2, 0.0);
  if (b1 + b2 <= 0.0) return ShareOutcome::absent(Absence::DoubleTruncation);
  return {ShareSplit{b2 / (b1 + b2), b1 / (b1 + b2)}, Absence::None};
}

// dp1_t = a1 - b1 (p1 - p2)_{t-1} + w1_t,  dp2_t = a2 + b2 (p1 - p2)_{t-1} + w2_t,
// which is the lead-lag price model rearranged in differences.
inline GsFit gs_share(std::span<const double> p1, std::span<const double> p2) {
  if (p1.size() != p2.size()) throw Error("price series lengths differ");
  const auto n = static_cast<Eigen::Index>(p1.size()) - 1;
  if (n < 3) throw econ::NonEstimable("series too short for Garbade-Silber regression");
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd d1(n), d2(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = p1[i] - p2[i];
    d1(i) = p1[i + 1] - p1[i];
    d2(i) = p2[i + 1] - p2[i];
  }
  econ::OlsFit f1, f2;
  try {
    f1 = econ::ols(d1, X, {"intercept", "spread"});
    f2 = econ::ols(d2, X, {"intercept", "spread"});
  } catch (const econ::SingularDesignError& e) {
    throw econ::NonEstimable(e.what());
  }
  GsFit g;
  g.alpha1 = f1.coefficients(0);
  g.alpha2 = f2.coefficients(0);
  g.raw_beta1 = -f1.coefficients(1);
  g.raw_beta2 = f2.coefficients(1);
  g.truncated1 = g.raw_beta1 < 0.0;
  g.truncated2 = g.raw_beta2 < 0.0;
  g.beta1 = std::max(g.raw_beta1, 0.0);
  g.beta2 = std::max(g.raw_beta2, 0.0);
  g.share = gs_from_coefficients(g.beta1, g.beta2);
  return g;
}

// ---------------------------------------------------------------------------
// Component share: the normalized orthogonal complement of alpha.

inline ShareOutcome component_share(const Eigen::Vector2d& alpha) {
  const double a1 = alpha(0), a2 = alpha(1);
  if (a1 == a2) return ShareOutcome::absent(Absence::EqualLoadings);
  const double cs1 = a2 / (a2 - a1);
  const double cs2 = a1 / (a1 - a2);
  if (!(cs1 >= 0.0 && cs1 <= 1.0 && cs2 >= 0.0 && cs2 <= 1.0))
    return ShareOutcome::absent(Absence::NonErrorCorrecting);
  return {ShareSplit{cs1, cs2}, Absence::None};
}

// ---------------------------------------------------------------------------
// Information share

// Lower-triangular M with M M' = sigma:
//   [ s1            0              ]
//   [ rho s2        s2 sqrt(1-rho^2) ]
inline std::optional<Eigen::Matrix2d> cholesky_factor(const Eigen::Matrix2d& sigma) {
  const double v1 = sigma(0, 0), v2 = sigma(1, 1), c = sigma(1, 0);
  if (!(v1 > 0.0) || !(v2 > 0.0)) return std::nullopt;
  const double m11 = std::sqrt(v1);
  const double m21 = c / m11;
  const double rest = v2 - m21 * m21;
  if (!(rest > 0.0)) return std::nullopt;
  Eigen::Matrix2d M;
  M << m11, 0.0, m21, std::sqrt(rest);
  return M;
}

struct InformationShare {
  ShareOutcome averaged;           // mean over both orderings
  std::optional<double> first_12;  // series 1's share with series 1 ordered first
  std::optional<double> first_21;  // series 1's share with series 2 ordered first
};

inline InformationShare information_share(const ShareSplit& cs, const Eigen::Matrix2d& sigma) {
  InformationShare out;
  // Shares (leading, trailing) for the ordering whose covariance is `s`.
  auto ordered = [](double g_lead, double g_trail, const Eigen::Matrix2d& s) -> std::optional<ShareSplit> {
    auto M = cholesky_factor(s);
    if (!M) return std::nullopt;
    const double x = g_lead * (*M)(0, 0) + g_trail * (*M)(1, 0);
    const double y = g_trail * (*M)(1, 1);
    const double denom = x * x + y * y;
    if (!(denom > 0.0)) return std::nullopt;
    return ShareSplit{x * x / denom, y * y / denom};
  };
  Eigen::Matrix2d swapped;
  swapped << sigma(1, 1), sigma(1, 0), sigma(0, 1), sigma(0, 0);
  auto o12 = ordered(cs.first, cs.second, sigma);
  auto o21 = ordered(cs.second, cs.first, swapped);
  if (!o12 || !o21) {
    out.averaged = ShareOutcome::absent(Absence::SingularCovariance);
    return out;
  }
  out.first_12 = o12->first;
  out.first_21 = o21->second;
  out.averaged = {ShareSplit{0.5 * (o12->first + o21->second), 0.5 * (o12->second + o21->first)}, Absence::None};
  return out;
}

// ---------------------------------------------------------------------------
// Information leadership share
//
// IL1 = |IS1 CS2 / (IS2 CS1)|, IL2 = 1 / IL1, ILS1 = IL1 / (IL1 + IL2), which
// equals a^2 / (a^2 + b^2) with a = IS1 CS2 and b = IS2 CS1. That form gives
// the zero-component limits directly.
inline ShareOutcome information_leadership_share(const ShareSplit& is, const ShareSplit& cs) {
  double a = std::abs(is.first * cs.second);
  double b = std::abs(is.second * cs.first);
  const double scale = std::max(a, b);
  if (!(scale > 0.0)) return ShareOutcome::absent(Absence::NoLeadership);
  a /= scale;
  b /= scale;
  const double denom = a * a + b * b;
  return {ShareSplit{a * a / denom, b * b / denom}, Absence::None};
}

// Raw IL ratios, for reporting. Infinite when a denominator is zero.
inline ShareSplit information_leadership(const ShareSplit& is, const ShareSplit& cs) {
  const double a = std::abs(is.first * cs.second), b = std::abs(is.second * cs.first);
  return {a / b, b / a};
}

// ---------------------------------------------------------------------------
// Daily pipeline

struct PipelineConfig {
  std::size_t min_updates = 100;
  econ::LagRange lags{1, 10};
  double significance = 0.05;
};

struct DiscoveryShares {
  Date session_date;
  int pair_index = 1;
  RankCategory category = RankCategory::NonCointegration;
  std::optional<double> gs1, cs1, is1, ils1, combined_ps;
  std::optional<double> is1_nearby_first;  // single-ordering IS, nearby ordered first
  Absence gs_reason = Absence::NotApplicable;
  Absence vecm_reason = Absence::NotApplicable;  // first absence among CS / IS / ILS
  econ::RankDecision rank;
  std::optional<econ::VecmFit> vecm;
  std::optional<GsFit> gs;
};

// Classification and metric dispatch on two aligned price series.
// Throws econ::NonEstimable when the day cannot be estimated at all.
inline DiscoveryShares discovery_shares(std::span<const double> p1, std::span<const double> p2,
                                        const PipelineConfig& cfg) {
  DiscoveryShares out;
  econ::VecmMoments moments(p1, p2, cfg.lags.max);
  out.rank = econ::johansen_trace_bic(moments, cfg.lags, cfg.significance);
  out.category = out.rank.category;

  switch (out.category) {
    case RankCategory::NonCointegration:
      break;
    case RankCategory::Stationarity: {
      out.gs = gs_share(p1, p2);
      if (out.gs->share) {
        out.gs1 = out.gs->share.split->first;
        out.gs_reason = Absence::None;
      } else {
        out.gs_reason = out.gs->share.reason;
      }
      out.combined_ps = out.gs1;
      break;
    }
    case RankCategory::Cointegration: {
      out.vecm = econ::fit_vecm(moments, cfg.lags);
      auto cs = component_share(out.vecm->alpha);
      if (!cs) {
        out.vecm_reason = cs.reason;
        break;
      }
      out.cs1 = cs.split->first;
      auto is = information_share(*cs.split, out.vecm->sigma);
      out.is1_nearby_first = is.first_12;
      if (!is.averaged) {
        out.vecm_reason = is.averaged.reason;
        break;
      }
      out.is1 = is.averaged.split->first;
      auto ils = information_leadership_share(*is.averaged.split, *cs.split);
      if (!ils) {
        out.vecm_reason = ils.reason;
        break;
      }
      out.ils1 = ils.split->first;
      out.vecm_reason = Absence::None;
      out.combined_ps = out.ils1;
      break;
    }
  }
  return out;
}

// Full per-day step on an aligned contract pair. Days that fail the update
// filter or cannot be estimated come back as Skip with the reason.
inline Outcome<DiscoveryShares> daily_pipeline(const ContractPairDay& pair, const PipelineConfig& cfg) {
  auto check = check_estimable(pair, cfg.min_updates);
  if (!check.estimable) return Skip{check.reason};
  const auto p1 = pair.nearby_prices();
  const auto p2 = pair.deferred_prices();
  try {
    DiscoveryShares s = discovery_shares(p1, p2, cfg);
    s.session_date = pair.session_date;
    s.pair_index = pair.pair_index;
    return s;
  } catch (const econ::NonEstimable& e) {
    return Skip{fmt::format("not estimable: {}", e.what())};
  }
}

// ---------------------------------------------------------------------------
// Aggregation

struct DailyRecord {
  DiscoveryShares shares;
  double volume_share = 0.0;
  int days_to_expiration = 0;
  bool backwardation = false;
  unsigned nearby_month = 0;  // delivery month of the nearby contract
};

struct PairSummary {
  int pair_index = 0;
  std::size_t days = 0;
  std::size_t stationarity = 0, cointegration = 0, noncointegration = 0;
  double pct_stationarity = 0.0, pct_cointegration = 0.0, pct_noncointegration = 0.0;
  std::optional<double> mean_ils, mean_gs, mean_combined;
  double mean_volume_share = 0.0;
  std::size_t ils_days = 0, gs_days = 0, combined_days = 0;
};

struct ProfileRow {
  int pair_index = 0;
  unsigned nearby_month = 0;
  int days_to_expiration = 0;
  std::size_t days = 0;
  double mean_volume_share = 0.0;
  std::optional<double> mean_ils, mean_combined;
};

struct ShareSummary {
  std::vector<PairSummary> pairs;     // ascending pair index
  std::vector<ProfileRow> profiles;   // by (pair, month, descending days to expiration)
};

namespace detail {
struct MeanAcc {
  double sum = 0.0;
  std::size_t n = 0;
  void add(double v) { sum += v, ++n; }
  void add(const std::optional<double>& v) {
    if (v) add(*v);
  }
  std::optional<double> mean() const { return n ? std::optional<double>(sum / static_cast<double>(n)) : std::nullopt; }
};
}  // namespace detail

// Unweighted day means. Records are folded in (date, pair) order so the
// result does not depend on input order.
inline ShareSummary aggregate_shares(std::vector<DailyRecord> records) {
  std::sort(records.begin(), records.end(), [](const DailyRecord& a, const DailyRecord& b) {
    return std::tie(a.shares.session_date, a.shares.pair_index) < std::tie(b.shares.session_date, b.shares.pair_index);
  });
  struct PairAcc {
    PairSummary s;
    detail::MeanAcc ils, gs, combined, volume;
  };
  struct ProfileAcc {
    detail::MeanAcc ils, combined, volume;
  };
  std::map<int, PairAcc> pairs;
  std::map<std::tuple<int, unsigned, int>, ProfileAcc> profiles;
  for (const auto& r : records) {
    auto& p = pairs[r.shares.pair_index];
    p.s.pair_index = r.shares.pair_index;
    ++p.s.days;
    switch (r.shares.category) {
      case RankCategory::Stationarity: ++p.s.stationarity; break;
      case RankCategory::Cointegration: ++p.s.cointegration; break;
      case RankCategory::NonCointegration: ++p.s.noncointegration; break;
    }
    p.ils.add(r.shares.ils1);
    p.gs.add(r.shares.gs1);
    p.combined.add(r.shares.combined_ps);
    p.volume.add(r.volume_share);

    auto& q = profiles[{r.shares.pair_index, r.nearby_month, -r.days_to_expiration}];
    q.ils.add(r.shares.ils1);
    q.combined.add(r.shares.combined_ps);
    q.volume.add(r.volume_share);
  }
  ShareSummary out;
  for (auto& [k, p] : pairs) {
    const double n = static_cast<double>(p.s.days);
    p.s.pct_stationarity = 100.0 * static_cast<double>(p.s.stationarity) / n;
    p.s.pct_cointegration = 100.0 * static_cast<double>(p.s.cointegration) / n;
    p.s.pct_noncointegration = 100.0 * static_cast<double>(p.s.noncointegration) / n;
    p.s.mean_ils = p.ils.mean();
    p.s.mean_gs = p.gs.mean();
    p.s.mean_combined = p.combined.mean();
    p.s.mean_volume_share = p.volume.mean().value_or(0.0);
    p.s.ils_days = p.ils.n;
    p.s.gs_days = p.gs.n;
    p.s.combined_days = p.combined.n;
    out.pairs.push_back(p.s);
  }
  for (auto& [key, q] : profiles) {
    ProfileRow row;
    row.pair_index = std::get<0>(key);
    row.nearby_month = std::get<1>(key);
    row.days_to_expiration = -std::get<2>(key);
    row.days = q.volume.n;
    row.mean_volume_share = q.volume.mean().value_or(0.0);
    row.mean_ils = q.ils.mean();
    row.mean_combined = q.combined.mean();
    out.profiles.push_back(row);
  }
  return out;
}

}  // namespace pdisc
