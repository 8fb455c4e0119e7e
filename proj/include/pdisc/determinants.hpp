#pragma once

// Regressions of the daily price-discovery share on market determinants,
// with Newey-West standard errors, and their table rendering.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "pdisc/econ/johansen.hpp"
#include "pdisc/econ/newey_west.hpp"
#include "pdisc/econ/ols.hpp"
#include "pdisc/events.hpp"

namespace pdisc {

enum class RegressionTemplate { Corn, Cattle };

inline RegressionTemplate parse_template(std::string_view s) {
  s = detail::trim(s);
  if (s == "corn") return RegressionTemplate::Corn;
  if (s == "cattle") return RegressionTemplate::Cattle;
  throw ConfigError(fmt::format("unknown regression template '{}'", s));
}

inline std::string to_string(RegressionTemplate t) { return t == RegressionTemplate::Corn ? "corn" : "cattle"; }

// Report types recognized in report calendars.
inline constexpr const char* kReportWasde = "WASDE";
inline constexpr const char* kReportCropProduction = "CP";
inline constexpr const char* kReportGrainStocks = "GRAINSTOCKS";
inline constexpr const char* kReportCattleOnFeed = "CF";

inline std::vector<std::string> template_regressors(RegressionTemplate t) {
  if (t == RegressionTemplate::Corn)
    return {"Volumeshare", "Expiration", "Expiration^2", "Backwardation", "WASDE&CP", "Grainstocks", "Crash",
            "Stationarity"};
  return {"Volumeshare", "Expiration", "Expiration^2", "Backwardation", "CF", "Crash", "Stationarity"};
}

// One day of one contract pair as the regression sees it.
struct DeterminantRow {
  Date date;
  int pair_index = 1;
  econ::RankCategory category = econ::RankCategory::NonCointegration;
  std::optional<double> combined_ps;
  double volume_share = 0.0;
  int days_to_expiration = 0;
  bool backwardation = false;
};

struct RegressionSpec {
  std::vector<std::string> regressors;  // intercept is implicit
  static RegressionSpec from_template(RegressionTemplate t) { return {template_regressors(t)}; }
};

struct Design {
  int pair_index = 0;
  std::vector<Date> dates;
  Eigen::VectorXd y;
  Eigen::MatrixXd X;               // first column is the intercept
  std::vector<std::string> names;  // "Intercept" first
  std::vector<std::string> notices;
};

inline double regressor_value(const std::string& name, const DeterminantRow& r, const EventCalendar& events) {
  if (name == "Volumeshare") return r.volume_share;
  if (name == "Expiration") return r.days_to_expiration;
  if (name == "Expiration^2") return static_cast<double>(r.days_to_expiration) * r.days_to_expiration;
  if (name == "Backwardation") return r.backwardation ? 1.0 : 0.0;
  if (name == "WASDE&CP")
    return events.fires(kReportWasde, r.date) || events.fires(kReportCropProduction, r.date) ? 1.0 : 0.0;
  if (name == "Grainstocks") return events.fires(kReportGrainStocks, r.date) ? 1.0 : 0.0;
  if (name == "CF") return events.fires(kReportCattleOnFeed, r.date) ? 1.0 : 0.0;
  if (name == "Crash") return events.in_crash(r.date) ? 1.0 : 0.0;
  if (name == "Stationarity") return r.category == econ::RankCategory::Stationarity ? 1.0 : 0.0;
  throw ConfigError(fmt::format("unknown regressor '{}'", name));
}

// Rows without a price-discovery share are left out. Regressors that are
// constant over the remaining rows are dropped with a notice.
inline Design build_design(const std::vector<DeterminantRow>& rows, const EventCalendar& events,
                           const RegressionSpec& spec) {
  Design d;
  std::vector<const DeterminantRow*> kept;
  for (const auto& r : rows)
    if (r.combined_ps) kept.push_back(&r);
  std::stable_sort(kept.begin(), kept.end(), [](auto* a, auto* b) { return a->date < b->date; });
  if (!kept.empty()) d.pair_index = kept.front()->pair_index;

  const auto n = static_cast<Eigen::Index>(kept.size());
  std::vector<Eigen::VectorXd> columns;
  d.names.push_back("Intercept");
  columns.push_back(Eigen::VectorXd::Ones(n));
  for (const auto& name : spec.regressors) {
    Eigen::VectorXd col(n);
    for (Eigen::Index i = 0; i < n; ++i) col(i) = regressor_value(name, *kept[i], events);
    const bool constant = n == 0 || (col.array() == col(0)).all();
    if (constant) {
      d.notices.push_back(fmt::format("warning: regressor {} is constant over the sample and was dropped", name));
      continue;
    }
    d.names.push_back(name);
    columns.push_back(std::move(col));
  }
  d.X.resize(n, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) d.X.col(static_cast<Eigen::Index>(j)) = columns[j];
  d.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d.y(i) = *kept[i]->combined_ps;
    d.dates.push_back(kept[i]->date);
  }
  return d;
}

struct Coefficient {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;  // Newey-West
  double t_stat = 0.0;
  double p_value = 0.0;
  std::string stars;
};

struct RegressionResult {
  int pair_index = 0;
  std::vector<Coefficient> coefficients;
  double r2 = 0.0;
  double adj_r2 = 0.0;
  Eigen::Index n_obs = 0;
  int hac_bandwidth = 0;
  std::vector<std::string> notices;

  const Coefficient* find(std::string_view name) const {
    for (const auto& c : coefficients)
      if (c.name == name) return &c;
    return nullptr;
  }
};

inline std::string significance_stars(double p) {
  if (!(p >= 0.0)) return "";
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.10) return "*";
  return "";
}

struct EstimateOptions {
  std::optional<int> forced_bandwidth;
};

// OLS with Newey-West covariance. Rows are put in date order first, so the
// result does not depend on input row order.
inline RegressionResult estimate(const Design& design, const EstimateOptions& opts = {}) {
  const Eigen::Index n = design.X.rows(), k = design.X.cols();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return design.dates[static_cast<std::size_t>(a)] < design.dates[static_cast<std::size_t>(b)];
  });
  Eigen::MatrixXd X(n, k);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    X.row(i) = design.X.row(order[static_cast<std::size_t>(i)]);
    y(i) = design.y(order[static_cast<std::size_t>(i)]);
  }

  const econ::OlsFit fit = econ::ols(y, X, design.names);
  const econ::HacCovariance hac = econ::newey_west(X, fit.residuals, fit.xtx_inverse, opts.forced_bandwidth, 0);

  RegressionResult r;
  r.pair_index = design.pair_index;
  r.n_obs = n;
  r.hac_bandwidth = hac.bandwidth;
  r.notices = design.notices;
  const double df = static_cast<double>(n - k);
  boost::math::students_t tdist(df);
  for (Eigen::Index j = 0; j < k; ++j) {
    Coefficient c;
    c.name = design.names[static_cast<std::size_t>(j)];
    c.estimate = fit.coefficients(j);
    c.std_error = std::sqrt(std::max(hac.covariance(j, j), 0.0));
    if (c.std_error > 0.0) {
      c.t_stat = c.estimate / c.std_error;
      c.p_value = 2.0 * boost::math::cdf(boost::math::complement(tdist, std::abs(c.t_stat)));
    } else {
      c.t_stat = std::numeric_limits<double>::quiet_NaN();
      c.p_value = std::numeric_limits<double>::quiet_NaN();
    }
    c.stars = significance_stars(c.p_value);
    r.coefficients.push_back(std::move(c));
  }
  const double sst = (y.array() - y.mean()).square().sum();
  // A dependent variable that is constant up to rounding explains nothing.
  r.r2 = sst > 1e-20 * y.squaredNorm() ? 1.0 - fit.rss / sst : 0.0;
  r.adj_r2 = 1.0 - (1.0 - r.r2) * static_cast<double>(n - 1) / df;
  return r;
}

// ---------------------------------------------------------------------------
// Rendering, three decimals throughout.

inline std::string fixed3(double v) {
  std::string s = fmt::format("{:.3f}", v);
  if (s == "-0.000") s = "0.000";
  return s;
}

inline std::string format_cell(double estimate, double std_error, const std::string& stars) {
  return fmt::format("{}{} ({})", fixed3(estimate), stars, fixed3(std_error));
}

// Plain-text table: one column per pair, coefficient with stars over its
// standard error in parentheses, then adjusted R^2 and observations.
inline std::string report_table(const std::vector<RegressionResult>& results, const std::string& title = "") {
  std::vector<std::string> terms;
  for (const auto& r : results)
    for (const auto& c : r.coefficients)
      if (std::find(terms.begin(), terms.end(), c.name) == terms.end()) terms.push_back(c.name);

  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header{""};
  for (const auto& r : results) header.push_back(fmt::format("Nearby and Deferred {}", r.pair_index));
  grid.push_back(header);
  for (const auto& t : terms) {
    std::vector<std::string> row{t};
    for (const auto& r : results) {
      const Coefficient* c = r.find(t);
      row.push_back(c ? format_cell(c->estimate, c->std_error, c->stars) : "");
    }
    grid.push_back(row);
  }
  std::vector<std::string> adj{"Adjusted R^2"}, obs{"Observations"};
  for (const auto& r : results) {
    adj.push_back(fixed3(r.adj_r2));
    obs.push_back(fmt::format("{}", r.n_obs));
  }
  grid.push_back(adj);
  grid.push_back(obs);

  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : grid)
    for (std::size_t j = 0; j < row.size(); ++j) width[j] = std::max(width[j], row[j].size());
  std::string out;
  if (!title.empty()) out += title + "\n";
  for (const auto& row : grid) {
    std::string line;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j == 0)
        line += fmt::format("{:<{}}", row[j], width[j]);
      else
        line += fmt::format("  {:>{}}", row[j], width[j]);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  out += "Newey-West standard errors in parentheses. ***, **, * denote significance at 1%, 5%, 10%.\n";
  return out;
}

}  // namespace pdisc
