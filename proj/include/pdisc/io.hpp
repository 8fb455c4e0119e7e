#pragma once

// File formats: daily share rows, exclusions, summaries, regression tables,
// roll points, plus the settlement and report-calendar side files.
// Absent values are written as empty fields.

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "pdisc/determinants.hpp"
#include "pdisc/discovery.hpp"
#include "pdisc/market_data.hpp"

namespace pdisc {

inline constexpr std::string_view kDailyHeader =
    "date,commodity,pair_index,category,gs1,cs1,is1,ils1,combined_ps,volume_share,days_to_expiration,backwardation";

inline std::string fixed(double v, int digits = 10) {
  std::string s = fmt::format("{:.{}f}", v, digits);
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

inline std::string fixed(const std::optional<double>& v, int digits = 10) { return v ? fixed(*v, digits) : ""; }

inline nlohmann::json json_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view row) {
  std::vector<std::string_view> f;
  std::size_t pos = 0;
  while (true) {
    auto c = row.find(',', pos);
    if (c == std::string_view::npos) {
      f.push_back(trim(row.substr(pos)));
      return f;
    }
    f.push_back(trim(row.substr(pos, c - pos)));
    pos = c + 1;
  }
}

// Reads a header-first CSV, checking the header and field count.
template <typename F>
void read_csv(std::istream& in, std::string_view header, F&& on_row) {
  std::string line;
  std::size_t lineno = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view row = line;
    if (lineno == 1 && row.starts_with("\xEF\xBB\xBF")) row.remove_prefix(3);
    row = trim(row);
    if (row.empty()) continue;
    if (!seen_header) {
      if (row != header) throw ParseError("bad header", lineno);
      seen_header = true;
      continue;
    }
    auto f = split_fields(row);
    if (f.size() != split_fields(header).size()) throw ParseError("wrong field count", lineno);
    on_row(f, lineno);
  }
}

}  // namespace detail

// One output row of the daily share file.
struct DailyRow {
  Date date;
  std::string commodity;
  int pair_index = 1;
  RankCategory category = RankCategory::NonCointegration;
  std::optional<double> gs1, cs1, is1, ils1, combined_ps;
  double volume_share = 0.0;
  int days_to_expiration = 0;
  bool backwardation = false;

  DeterminantRow determinant() const {
    return {date, pair_index, category, combined_ps, volume_share, days_to_expiration, backwardation};
  }
};

inline DailyRow daily_row(const DailyRecord& r, const std::string& commodity) {
  return {r.shares.session_date, commodity,        r.shares.pair_index, r.shares.category,   r.shares.gs1,
          r.shares.cs1,          r.shares.is1,     r.shares.ils1,       r.shares.combined_ps, r.volume_share,
          r.days_to_expiration,  r.backwardation};
}

inline void write_daily_csv(std::ostream& os, const std::vector<DailyRow>& rows) {
  os << kDailyHeader << '\n';
  for (const auto& r : rows)
    os << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", format_date(r.date), r.commodity, r.pair_index,
                      econ::to_string(r.category), fixed(r.gs1), fixed(r.cs1), fixed(r.is1), fixed(r.ils1),
                      fixed(r.combined_ps), fixed(r.volume_share), r.days_to_expiration, r.backwardation ? 1 : 0);
}

inline std::vector<DailyRow> read_daily_csv(std::istream& in) {
  std::vector<DailyRow> out;
  detail::read_csv(in, kDailyHeader, [&](const std::vector<std::string_view>& f, std::size_t line) {
    DailyRow r;
    auto opt = [&](std::string_view s) -> std::optional<double> {
      if (s.empty()) return std::nullopt;
      double v = 0.0;
      if (!detail::parse_double(s, v)) throw ParseError("bad number", line);
      return v;
    };
    if (!try_parse_date(f[0], r.date)) throw ParseError("bad date", line);
    r.commodity = std::string(f[1]);
    if (!detail::parse_int(f[2], r.pair_index)) throw ParseError("bad pair_index", line);
    if (!econ::parse_rank_category(f[3], r.category)) throw ParseError("bad category", line);
    r.gs1 = opt(f[4]);
    r.cs1 = opt(f[5]);
    r.is1 = opt(f[6]);
    r.ils1 = opt(f[7]);
    r.combined_ps = opt(f[8]);
    auto vs = opt(f[9]);
    if (!vs) throw ParseError("missing volume_share", line);
    r.volume_share = *vs;
    if (!detail::parse_int(f[10], r.days_to_expiration)) throw ParseError("bad days_to_expiration", line);
    if (f[11] != "0" && f[11] != "1") throw ParseError("bad backwardation flag", line);
    r.backwardation = f[11] == "1";
    out.push_back(std::move(r));
  });
  return out;
}

struct Exclusion {
  Date date;
  int pair_index = 0;
  std::string reason;
};

inline void write_exclusions_csv(std::ostream& os, const std::vector<Exclusion>& rows) {
  os << "date,pair_index,reason\n";
  for (const auto& e : rows) {
    std::string reason = e.reason;
    std::replace(reason.begin(), reason.end(), ',', ';');
    os << fmt::format("{},{},{}\n", format_date(e.date), e.pair_index, reason);
  }
}

// date,contract,settle
inline SettlementBook read_settlements(std::istream& in) {
  SettlementBook book;
  detail::read_csv(in, "date,contract,settle", [&](const std::vector<std::string_view>& f, std::size_t line) {
    Date d;
    ContractId id;
    FixedPrice p;
    if (!try_parse_date(f[0], d)) throw ParseError("bad date", line);
    if (!ContractId::try_parse(f[1], id)) throw ParseError("bad contract", line);
    if (!FixedPrice::try_parse(f[2], p) || p.micros <= 0) throw ParseError("bad settle", line);
    book[{d, id}] = p;
  });
  return book;
}

// date,report_type
inline std::multimap<Date, std::string> read_reports(std::istream& in) {
  std::multimap<Date, std::string> out;
  detail::read_csv(in, "date,report_type", [&](const std::vector<std::string_view>& f, std::size_t line) {
    Date d;
    if (!try_parse_date(f[0], d)) throw ParseError("bad date", line);
    if (f[1].empty()) throw ParseError("empty report type", line);
    out.emplace(d, std::string(f[1]));
  });
  return out;
}

// ---------------------------------------------------------------------------
// Summaries

inline void write_summary_csv(std::ostream& os, const ShareSummary& s) {
  os << "pair_index,days,stationarity_pct,cointegration_pct,noncointegration_pct,mean_ils,mean_gs,mean_combined_ps,"
        "mean_volume_share,ils_days,gs_days,combined_days\n";
  for (const auto& p : s.pairs)
    os << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", p.pair_index, p.days, fixed(p.pct_stationarity, 6),
                      fixed(p.pct_cointegration, 6), fixed(p.pct_noncointegration, 6), fixed(p.mean_ils),
                      fixed(p.mean_gs), fixed(p.mean_combined), fixed(p.mean_volume_share), p.ils_days, p.gs_days,
                      p.combined_days);
}

inline void write_profile_csv(std::ostream& os, const ShareSummary& s) {
  os << "pair_index,nearby_month,days_to_expiration,days,mean_volume_share,mean_ils,mean_combined_ps\n";
  for (const auto& r : s.profiles)
    os << fmt::format("{},{},{},{},{},{},{}\n", r.pair_index, r.nearby_month, r.days_to_expiration, r.days,
                      fixed(r.mean_volume_share), fixed(r.mean_ils), fixed(r.mean_combined));
}

// Category percentages per pair, the layout of a classification table.
inline std::string category_table(const ShareSummary& s) {
  std::string out = fmt::format("{:<14}{:>16}{:>16}{:>18}{:>8}\n", "Pair", "Stationarity", "Cointegration",
                                "NonCointegration", "Days");
  for (const auto& p : s.pairs)
    out += fmt::format("{:<14}{:>15.1f}%{:>15.1f}%{:>17.1f}%{:>8}\n", fmt::format("Deferred {}", p.pair_index),
                       p.pct_stationarity, p.pct_cointegration, p.pct_noncointegration, p.days);
  return out;
}

inline nlohmann::json summary_json(const ShareSummary& s, const std::string& commodity) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : s.pairs)
    pairs.push_back({{"pair_index", p.pair_index},
                     {"days", p.days},
                     {"categories",
                      {{"Stationarity", {{"days", p.stationarity}, {"percent", p.pct_stationarity}}},
                       {"Cointegration", {{"days", p.cointegration}, {"percent", p.pct_cointegration}}},
                       {"NonCointegration", {{"days", p.noncointegration}, {"percent", p.pct_noncointegration}}}}},
                     {"mean_ils", json_number(p.mean_ils)},
                     {"mean_gs", json_number(p.mean_gs)},
                     {"mean_combined_ps", json_number(p.mean_combined)},
                     {"mean_volume_share", p.mean_volume_share},
                     {"ils_days", p.ils_days},
                     {"gs_days", p.gs_days},
                     {"combined_days", p.combined_days}});
  return {{"commodity", commodity}, {"pairs", pairs}};
}

// ---------------------------------------------------------------------------
// Regression output

inline void write_regression_csv(std::ostream& os, const std::vector<RegressionResult>& results) {
  os << "pair_index,term,estimate,std_error,t_stat,p_value,stars,adj_r2,n_obs,hac_bandwidth\n";
  for (const auto& r : results)
    for (const auto& c : r.coefficients)
      os << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r.pair_index, c.name, fixed(c.estimate),
                        fixed(c.std_error), std::isfinite(c.t_stat) ? fixed(c.t_stat) : "",
                        std::isfinite(c.p_value) ? fixed(c.p_value) : "", c.stars, fixed(r.adj_r2), r.n_obs,
                        r.hac_bandwidth);
}

inline nlohmann::json regression_json(const std::vector<RegressionResult>& results, RegressionTemplate t) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : results) {
    nlohmann::json coefs = nlohmann::json::array();
    for (const auto& c : r.coefficients)
      coefs.push_back({{"term", c.name},
                       {"estimate", c.estimate},
                       {"std_error", c.std_error},
                       {"t_stat", std::isfinite(c.t_stat) ? nlohmann::json(c.t_stat) : nlohmann::json(nullptr)},
                       {"p_value", std::isfinite(c.p_value) ? nlohmann::json(c.p_value) : nlohmann::json(nullptr)},
                       {"stars", c.stars},
                       {"cell", format_cell(c.estimate, c.std_error, c.stars)}});
    arr.push_back({{"pair_index", r.pair_index},
                   {"coefficients", coefs},
                   {"r2", r.r2},
                   {"adj_r2", r.adj_r2},
                   {"n_obs", r.n_obs},
                   {"hac_bandwidth", r.hac_bandwidth},
                   {"notices", r.notices}});
  }
  return {{"template", to_string(t)}, {"standard_errors", "newey-west"}, {"results", arr}};
}

// ---------------------------------------------------------------------------
// Roll points

inline constexpr std::string_view kNoRollSignal = "no roll signal";

struct RollPoint {
  int pair_index = 1;
  ContractId contract;
  Date expiration;
  std::optional<Date> volume_roll;
  std::optional<Date> ps_roll;
};

// For each nearby period (consecutive days with the same nearby contract),
// the first day the nearby volume share and the combined share drop below
// one half.
inline std::vector<RollPoint> roll_points(std::vector<DailyRow> rows, const RollCalendar& cal) {
  std::sort(rows.begin(), rows.end(),
            [](const DailyRow& a, const DailyRow& b) { return std::tie(a.pair_index, a.date) < std::tie(b.pair_index, b.date); });
  std::vector<RollPoint> out;
  for (const auto& r : rows) {
    auto nearby = cal.contract_at(r.date, 0);
    if (!nearby) throw Error(fmt::format("no listed nearby contract on {}", format_date(r.date)));
    if (out.empty() || out.back().pair_index != r.pair_index || out.back().contract != nearby->id)
      out.push_back({r.pair_index, nearby->id, nearby->expiration, std::nullopt, std::nullopt});
    auto& p = out.back();
    if (!p.volume_roll && r.volume_share < 0.5) p.volume_roll = r.date;
    if (!p.ps_roll && r.combined_ps && *r.combined_ps < 0.5) p.ps_roll = r.date;
  }
  return out;
}

inline void write_rollpoints_csv(std::ostream& os, const std::vector<RollPoint>& points) {
  os << "pair_index,contract,expiration,volume_roll_date,ps_roll_date\n";
  auto show = [](const std::optional<Date>& d) { return d ? format_date(*d) : std::string(kNoRollSignal); };
  for (const auto& p : points)
    os << fmt::format("{},{},{},{},{}\n", p.pair_index, p.contract.to_string(), format_date(p.expiration),
                      show(p.volume_roll), show(p.ps_roll));
}

inline nlohmann::json rollpoints_json(const std::vector<RollPoint>& points) {
  nlohmann::json arr = nlohmann::json::array();
  auto show = [](const std::optional<Date>& d) { return d ? format_date(*d) : std::string(kNoRollSignal); };
  for (const auto& p : points)
    arr.push_back({{"pair_index", p.pair_index},
                   {"contract", p.contract.to_string()},
                   {"expiration", format_date(p.expiration)},
                   {"volume_roll_date", show(p.volume_roll)},
                   {"ps_roll_date", show(p.ps_roll)}});
  return {{"roll_points", arr}};
}

}  // namespace pdisc
