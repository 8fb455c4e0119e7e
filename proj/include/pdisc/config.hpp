#pragma once

// Run configuration. One file of [section] key = value lines; string values
// may be double-quoted and lists are comma-separated inside one string, so a
// file written this way reads the same as TOML. '#' and ';' start comments.
//
//   [commodity]   name, symbol, months, expiration_rule, session_start,
//                 session_end, holidays, template
//   [data]        ticks, settlements, reports (relative to the config file)
//   [pipeline]    min_updates, lag_min, lag_max, significance, pairs
//   [events]      crash_windows ("first:last,..."), next_day_reports
//   [scenario]    simulator parameters, see ScenarioConfig

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "pdisc/calendar.hpp"
#include "pdisc/determinants.hpp"
#include "pdisc/discovery.hpp"
#include "pdisc/events.hpp"
#include "pdisc/market_data.hpp"
#include "pdisc/scenario.hpp"

namespace pdisc {

struct CommodityConfig {
  std::string name = "corn";
  std::string symbol = "ZC";
  std::vector<unsigned> months{3, 5, 7, 9, 12};
  ExpirationRule rule = ExpirationRule::BusinessDayBefore15th;
  Session session{9 * 3600 + 30 * 60, 13 * 3600 + 15 * 60 - 1};
  std::set<Date> holidays;
  RegressionTemplate regression = RegressionTemplate::Corn;
};

struct DataPaths {
  std::filesystem::path ticks = "ticks";
  std::optional<std::filesystem::path> settlements;
  std::optional<std::filesystem::path> reports;
};

struct EventsConfig {
  std::vector<DateWindow> crash_windows;
  std::set<std::string> next_day_reports{kReportCattleOnFeed};
};

struct RunConfig {
  std::filesystem::path source;  // the config file itself
  CommodityConfig commodity;
  DataPaths data;
  PipelineConfig pipeline;
  std::vector<int> pairs{1, 2, 3, 4};
  EventsConfig events;
  std::optional<sim::ScenarioConfig> scenario;

  BusinessCalendar business() const { return BusinessCalendar(commodity.holidays); }

  RollCalendar roll_calendar(int first_year, int last_year) const {
    return RollCalendar(commodity.symbol, commodity.months, commodity.rule, business(), first_year, last_year);
  }

  void validate() const {
    if (commodity.symbol.empty() || commodity.symbol.find_first_of("_,/ ") != std::string::npos)
      throw ConfigError("commodity symbol must be non-empty without '_', ',', '/' or spaces");
    if (commodity.session.end <= commodity.session.start) throw ConfigError("session_end must follow session_start");
    if (pipeline.lags.min < 1 || pipeline.lags.max < pipeline.lags.min || pipeline.lags.max > 10)
      throw ConfigError("lag range must satisfy 1 <= lag_min <= lag_max <= 10");
    if (pipeline.significance != 0.10 && pipeline.significance != 0.05 && pipeline.significance != 0.01)
      throw ConfigError("significance must be one of 0.10, 0.05, 0.01");
    if (pairs.empty()) throw ConfigError("no contract pairs selected");
    for (int k : pairs)
      if (k < 1 || k > 4) throw ConfigError(fmt::format("pair index {} outside 1..4", k));
    for (const auto& w : events.crash_windows)
      if (w.last < w.first) throw ConfigError("crash window ends before it starts");
    if (scenario) scenario->validate();
  }
};

namespace detail {

inline std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (!quoted && (line[i] == '#' || line[i] == ';')) return line.substr(0, i);
  }
  return line;
}

inline std::string unquote(std::string_view v) {
  v = trim(v);
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
  return std::string(v);
}

inline std::vector<std::string> split_list(std::string_view s, char sep = ',') {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    auto next = s.find(sep, pos);
    if (next == std::string_view::npos) next = s.size();
    auto item = trim(s.substr(pos, next - pos));
    if (!item.empty()) out.emplace_back(item);
    pos = next + 1;
  }
  return out;
}

class Section {
 public:
  Section(const boost::property_tree::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  bool present() const { return tree_ != nullptr; }

  std::optional<std::string> text(const std::string& key) const {
    if (!tree_) return std::nullopt;
    auto v = tree_->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return unquote(*v);
  }

  std::string text_or(const std::string& key, std::string fallback) const { return text(key).value_or(fallback); }

  template <typename Int>
  Int integer(const std::string& key, Int fallback) const {
    auto v = text(key);
    if (!v) return fallback;
    Int out{};
    if (!parse_int(*v, out)) throw bad(key, *v);
    return out;
  }

  double real(const std::string& key, double fallback) const {
    auto v = text(key);
    if (!v) return fallback;
    double out = 0.0;
    if (!parse_double(*v, out)) throw bad(key, *v);
    return out;
  }

  bool boolean(const std::string& key, bool fallback) const {
    auto v = text(key);
    if (!v) return fallback;
    if (*v == "true") return true;
    if (*v == "false") return false;
    throw bad(key, *v);
  }

  Date date(const std::string& key, Date fallback) const {
    auto v = text(key);
    if (!v) return fallback;
    Date d;
    if (!try_parse_date(*v, d)) throw bad(key, *v);
    return d;
  }

  std::int32_t clock(const std::string& key, std::int32_t fallback) const {
    auto v = text(key);
    if (!v) return fallback;
    std::int32_t s = 0;
    if (!try_parse_clock(*v, s)) throw bad(key, *v);
    return s;
  }

  template <typename T, typename F>
  std::optional<std::vector<T>> list(const std::string& key, F&& convert) const {
    auto v = text(key);
    if (!v) return std::nullopt;
    std::vector<T> out;
    for (const auto& item : split_list(*v)) out.push_back(convert(item));
    return out;
  }

  ConfigError bad(const std::string& key, const std::string& value) const {
    return ConfigError(fmt::format("invalid value '{}' for {}.{}", value, name_, key));
  }

 private:
  const boost::property_tree::ptree* tree_;
  std::string name_;
};

inline Section section(const boost::property_tree::ptree& root, const std::string& name) {
  auto child = root.get_child_optional(name);
  return Section(child ? &*child : nullptr, name);
}

inline DateWindow parse_window(const std::string& s, const Section& sec, const std::string& key) {
  auto colon = s.find(':');
  Date a, b;
  if (colon == std::string::npos || !try_parse_date(s.substr(0, colon), a) || !try_parse_date(s.substr(colon + 1), b))
    throw sec.bad(key, s);
  return {a, b};
}

inline sim::ScenarioConfig parse_scenario(const Section& s) {
  sim::ScenarioConfig c;
  c.start_date = s.date("start_date", c.start_date);
  c.days = s.integer("days", c.days);
  c.seed = s.integer("seed", c.seed);
  c.contracts = s.integer("contracts", c.contracts);
  c.sigma_mu = s.real("sigma_mu", c.sigma_mu);
  auto to_double = [&](const std::string& v) {
    double d = 0.0;
    if (!parse_double(v, d)) throw s.bad("list", v);
    return d;
  };
  auto to_int = [&](const std::string& v) {
    int i = 0;
    if (!parse_int(v, i)) throw s.bad("list", v);
    return i;
  };
  if (auto v = s.list<double>("sigma_s", to_double)) c.sigma_s = *v;
  if (auto v = s.list<int>("delays", to_int)) c.delays = *v;
  c.late_dte = s.integer("late_dte", c.late_dte);
  c.late_nearby_delay = s.integer("late_nearby_delay", c.late_nearby_delay);
  c.trade_probability = s.real("trade_probability", c.trade_probability);
  c.second_trade_probability = s.real("second_trade_probability", c.second_trade_probability);
  c.base_price = s.real("base_price", c.base_price);
  c.carry = s.real("carry", c.carry);
  c.pair_volume = s.integer("pair_volume", c.pair_volume);
  c.volume_decay = s.real("volume_decay", c.volume_decay);
  c.roll_dte = s.integer("roll_dte", c.roll_dte);
  c.volume_slope = s.real("volume_slope", c.volume_slope);
  c.volume_share_noise = s.real("volume_share_noise", c.volume_share_noise);
  c.volume_share_min = s.real("volume_share_min", c.volume_share_min);
  c.volume_share_max = s.real("volume_share_max", c.volume_share_max);
  c.report_jump = s.real("report_jump", c.report_jump);
  if (auto v = s.list<sim::DayRange>("backwardation_days", [&](const std::string& item) {
        auto dash = item.find('-');
        sim::DayRange r;
        if (dash == std::string::npos) {
          r.first = r.last = to_int(item);
        } else {
          r.first = to_int(item.substr(0, dash));
          r.last = to_int(item.substr(dash + 1));
        }
        if (r.last < r.first) throw s.bad("backwardation_days", item);
        return r;
      }))
    c.backwardation_days = *v;
  if (auto v = s.list<sim::ScheduledReport>("reports", [&](const std::string& item) {
        auto colon = item.find(':');
        if (colon == std::string::npos) throw s.bad("reports", item);
        return sim::ScheduledReport{to_int(item.substr(0, colon)), std::string(trim(item.substr(colon + 1)))};
      }))
    c.reports = *v;
  return c;
}

}  // namespace detail

inline RunConfig parse_run_config(std::istream& in, const std::filesystem::path& source = {}) {
  std::ostringstream cleaned;
  std::string line;
  while (std::getline(in, line)) cleaned << detail::strip_comment(line) << '\n';
  boost::property_tree::ptree root;
  try {
    std::istringstream is(cleaned.str());
    boost::property_tree::ini_parser::read_ini(is, root);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(fmt::format("malformed config at line {}: {}", e.line(), e.message()));
  }

  RunConfig c;
  c.source = source;
  const auto base = source.empty() ? std::filesystem::path{} : source.parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
  };

  auto com = detail::section(root, "commodity");
  c.commodity.name = com.text_or("name", c.commodity.name);
  c.commodity.symbol = com.text_or("symbol", c.commodity.symbol);
  if (auto v = com.list<unsigned>("months", [](const std::string& t) { return parse_month_token(t); }))
    c.commodity.months = *v;
  if (auto v = com.text("expiration_rule")) c.commodity.rule = parse_expiration_rule(*v);
  c.commodity.session.start = com.clock("session_start", c.commodity.session.start);
  c.commodity.session.end = com.clock("session_end", c.commodity.session.end);
  if (auto v = com.list<Date>("holidays", [&](const std::string& t) {
        Date d;
        if (!try_parse_date(t, d)) throw com.bad("holidays", t);
        return d;
      }))
    c.commodity.holidays = std::set<Date>(v->begin(), v->end());
  if (auto v = com.text("template")) c.commodity.regression = parse_template(*v);

  auto data = detail::section(root, "data");
  c.data.ticks = resolve(data.text_or("ticks", "ticks"));
  if (auto v = data.text("settlements")) c.data.settlements = resolve(*v);
  if (auto v = data.text("reports")) c.data.reports = resolve(*v);

  auto pipe = detail::section(root, "pipeline");
  c.pipeline.min_updates = pipe.integer<std::size_t>("min_updates", c.pipeline.min_updates);
  c.pipeline.lags.min = pipe.integer("lag_min", c.pipeline.lags.min);
  c.pipeline.lags.max = pipe.integer("lag_max", c.pipeline.lags.max);
  c.pipeline.significance = pipe.real("significance", c.pipeline.significance);
  if (auto v = pipe.list<int>("pairs", [&](const std::string& t) {
        int k = 0;
        if (!detail::parse_int(t, k)) throw pipe.bad("pairs", t);
        return k;
      }))
    c.pairs = *v;

  auto ev = detail::section(root, "events");
  if (auto v = ev.list<DateWindow>("crash_windows",
                                   [&](const std::string& t) { return detail::parse_window(t, ev, "crash_windows"); }))
    c.events.crash_windows = *v;
  if (auto v = ev.list<std::string>("next_day_reports", [](const std::string& t) { return t; }))
    c.events.next_day_reports = std::set<std::string>(v->begin(), v->end());

  auto sc = detail::section(root, "scenario");
  if (sc.present()) c.scenario = detail::parse_scenario(sc);

  c.validate();
  return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!std::filesystem::is_regular_file(path) || !in) throw ConfigError(fmt::format("config not found: {}", path.string()));
  return parse_run_config(in, path);
}

}  // namespace pdisc
