#pragma once

// Multi-contract synthetic samples: every business day simulates all listed
// ranks (nearby, deferred 1..n) from one fundamental path, with volumes that
// migrate toward the deferred contract ahead of expiration, backwardation
// spells and report-day jumps. Output is the ingestion tick format plus
// settlements, a report calendar and a JSON ground-truth manifest.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pdisc/calendar.hpp"
#include "pdisc/market_data.hpp"
#include "pdisc/synthetic.hpp"

namespace pdisc::sim {

struct DayRange {
  int first = 0;
  int last = 0;  // inclusive, business-day indices from the sample start
  bool contains(int i) const { return first <= i && i <= last; }
};

struct ScheduledReport {
  int day = 0;
  std::string type;
};

struct ScenarioConfig {
  Date start_date{std::chrono::year{2015} / 1 / 2};
  int days = 250;
  std::uint64_t seed = 42;
  int contracts = 5;  // nearby plus contracts - 1 deferred

  double sigma_mu = 0.02;
  std::vector<double> sigma_s;  // per rank; missing ranks reuse the last value (default 0.05)
  std::vector<int> delays;      // per rank; missing ranks reuse the last value (default 0)
  int late_dte = 0;             // when > 0, the nearby uses late_nearby_delay at or below this many days to expiration
  int late_nearby_delay = 0;

  double trade_probability = 1.0;
  double second_trade_probability = 0.1;
  double base_price = 400.0;
  double carry = 2.0;  // price step between adjacent ranks

  std::int64_t pair_volume = 2'000'000;  // nearby + deferred-1 volume per day
  double volume_decay = 0.7;             // deferred-k volume = deferred-1 volume * decay^(k-1)
  int roll_dte = 15;                     // nearby share first drops below 0.5 at this many days to expiration
  double volume_slope = 0.02;            // change in nearby share per business day
  double volume_share_noise = 0.0;
  double volume_share_min = 0.05;
  double volume_share_max = 0.95;

  std::vector<DayRange> backwardation_days;
  std::vector<ScheduledReport> reports;
  double report_jump = 0.0;

  void validate() const {
    if (days < 1) throw ConfigError("scenario needs at least one day");
    if (contracts < 2) throw ConfigError("scenario needs at least two contracts");
    if (sigma_mu < 0.0) throw ConfigError("sigma_mu must be non-negative");
    for (double s : sigma_s)
      if (s < 0.0) throw ConfigError("sigma_s must be non-negative");
    for (int d : delays)
      if (d < 0) throw ConfigError("delays must be non-negative");
    if (trade_probability <= 0.0 || trade_probability > 1.0) throw ConfigError("trade_probability must be in (0, 1]");
    if (second_trade_probability < 0.0 || second_trade_probability > 1.0)
      throw ConfigError("second_trade_probability must be in [0, 1]");
    if (pair_volume < 2) throw ConfigError("pair_volume must be at least 2");
    if (volume_share_min < 0.0 || volume_share_max > 1.0 || volume_share_min > volume_share_max)
      throw ConfigError("invalid volume share bounds");
    if (base_price - carry * contracts <= 0.0) throw ConfigError("base_price too small for the carry");
  }

  double sigma_for(int rank) const {
    if (sigma_s.empty()) return 0.05;
    return sigma_s[std::min<std::size_t>(static_cast<std::size_t>(rank), sigma_s.size() - 1)];
  }
  int delay_for(int rank) const {
    if (delays.empty()) return 0;
    return delays[std::min<std::size_t>(static_cast<std::size_t>(rank), delays.size() - 1)];
  }
};

struct DayPlan {
  int index = 0;
  Date date;
  std::vector<ListedContract> contracts;  // rank order
  int days_to_expiration = 0;
  bool backwardation = false;
  std::vector<int> delays;
  std::vector<double> sigma_s;
  std::vector<std::int64_t> volumes;
  double nearby_share = 0.5;  // planned nearby vs deferred-1 share
  std::vector<std::string> reports;
};

inline std::vector<Date> scenario_dates(const ScenarioConfig& cfg, const BusinessCalendar& cal) {
  std::vector<Date> out;
  Date d = cfg.start_date;
  if (!cal.is_business_day(d)) d = cal.next_business_day(d);
  while (static_cast<int>(out.size()) < cfg.days) {
    out.push_back(d);
    d = cal.next_business_day(d);
  }
  return out;
}

// Planned nearby volume share at a given distance to expiration: above 0.5
// before roll_dte, below it from roll_dte on.
inline double planned_nearby_share(const ScenarioConfig& cfg, int dte, double jitter = 0.0) {
  const double s = 0.5 + cfg.volume_slope * (dte - cfg.roll_dte) - 0.5 * cfg.volume_slope + jitter;
  return std::clamp(s, cfg.volume_share_min, cfg.volume_share_max);
}

inline DayPlan plan_day(const ScenarioConfig& cfg, const RollCalendar& cal, const std::vector<Date>& dates, int index) {
  DayPlan p;
  p.index = index;
  p.date = dates[static_cast<std::size_t>(index)];
  for (int k = 0; k < cfg.contracts; ++k) {
    auto c = cal.contract_at(p.date, k);
    if (!c) throw ConfigError(fmt::format("contract listing does not cover {}", format_date(p.date)));
    p.contracts.push_back(*c);
  }
  p.days_to_expiration = cal.business().business_days_between(p.date, p.contracts[0].expiration);
  for (const auto& r : cfg.backwardation_days)
    if (r.contains(index)) p.backwardation = true;
  for (int k = 0; k < cfg.contracts; ++k) {
    int delay = cfg.delay_for(k);
    if (k == 0 && cfg.late_dte > 0 && p.days_to_expiration <= cfg.late_dte) delay = cfg.late_nearby_delay;
    p.delays.push_back(delay);
    p.sigma_s.push_back(cfg.sigma_for(k));
  }
  double jitter = 0.0;
  if (cfg.volume_share_noise > 0.0) {
    Engine rng = day_engine(cfg.seed, static_cast<std::uint64_t>(index), 2);
    boost::random::normal_distribution<double> n(0.0, cfg.volume_share_noise);
    jitter = n(rng);
  }
  p.nearby_share = planned_nearby_share(cfg, p.days_to_expiration, jitter);
  const auto v0 = static_cast<std::int64_t>(std::llround(p.nearby_share * static_cast<double>(cfg.pair_volume)));
  const std::int64_t v1 = cfg.pair_volume - v0;
  p.volumes.push_back(v0);
  p.volumes.push_back(v1);
  for (int k = 2; k < cfg.contracts; ++k)
    p.volumes.push_back(std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::llround(static_cast<double>(v1) * std::pow(cfg.volume_decay, k - 1)))));
  p.nearby_share = volume_share(p.volumes[0], p.volumes[1]);
  for (const auto& r : cfg.reports)
    if (r.day == index) p.reports.push_back(r.type);
  return p;
}

struct SimulatedContractDay {
  ContractId contract;
  std::vector<TickRecord> ticks;  // time order
  FixedPrice settle;
};

// All ranks for one planned day. Ticks carry a day-wide sequence that
// increases with time across contracts.
inline std::vector<SimulatedContractDay> simulate_plan(const ScenarioConfig& cfg, const DayPlan& plan,
                                                       Session session) {
  Engine rng = day_engine(cfg.seed, static_cast<std::uint64_t>(plan.index));
  const int seconds = static_cast<int>(session.length());
  const int max_delay = *std::max_element(plan.delays.begin(), plan.delays.end());
  std::vector<Jump> jumps;
  if (!plan.reports.empty() && cfg.report_jump != 0.0) jumps.push_back({seconds / 2, cfg.report_jump});
  FundamentalPath f = simulate_fundamental(rng, seconds, max_delay, cfg.base_price, cfg.sigma_mu, jumps);

  const std::size_t n = plan.contracts.size();
  std::vector<LegPath> legs;
  std::vector<std::vector<std::uint8_t>> doubles(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double offset = (plan.backwardation ? -1.0 : 1.0) * cfg.carry * static_cast<double>(k);
    legs.push_back(simulate_leg(rng, f, seconds, {plan.delays[k], plan.sigma_s[k], offset, cfg.trade_probability}));
    doubles[k].assign(static_cast<std::size_t>(seconds), 0);
    if (cfg.second_trade_probability > 0.0) {
      boost::random::uniform_01<double> u;
      for (int t = 0; t < seconds; ++t)
        doubles[k][static_cast<std::size_t>(t)] =
            legs[k].traded[static_cast<std::size_t>(t)] && u(rng) < cfg.second_trade_probability;
    }
  }
  boost::random::normal_distribution<double> jitter(0.0, 1.0);

  std::vector<SimulatedContractDay> out(n);
  std::int64_t seq = 0;
  for (std::size_t k = 0; k < n; ++k) out[k].contract = plan.contracts[k].id;
  for (int t = 0; t < seconds; ++t) {
    const auto ts = static_cast<std::size_t>(t);
    for (std::size_t k = 0; k < n; ++k) {
      if (!legs[k].traded[ts]) continue;
      const std::int32_t sec = session.start + t;
      out[k].ticks.push_back({plan.date, sec, ++seq, plan.contracts[k].id, FixedPrice::from_double(legs[k].prices[ts]), 0});
      if (doubles[k][ts]) {
        const double p = legs[k].prices[ts] + plan.sigma_s[k] * jitter(rng);
        out[k].ticks.push_back({plan.date, sec, ++seq, plan.contracts[k].id, FixedPrice::from_double(p), 0});
      }
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    auto& ticks = out[k].ticks;
    const auto m = static_cast<std::int64_t>(ticks.size());
    if (m > 0) {
      const std::int64_t base = plan.volumes[k] / m, extra = plan.volumes[k] % m;
      for (std::int64_t i = 0; i < m; ++i) ticks[static_cast<std::size_t>(i)].volume = base + (i < extra ? 1 : 0);
    }
    const double offset = (plan.backwardation ? -1.0 : 1.0) * cfg.carry * static_cast<double>(k);
    out[k].settle = FixedPrice::from_double(f.values.back() + offset);
  }
  return out;
}

inline void write_ticks(std::ostream& os, const std::vector<TickRecord>& ticks) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "{}\n", kTickHeader);
  for (const auto& t : ticks)
    fmt::format_to(std::back_inserter(buf), "{}T{},{},{},{},{}\n", format_date(t.date), format_clock(t.second),
                   t.sequence, t.contract.to_string(), t.price.to_string(), t.volume);
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

struct RollPointTruth {
  ContractId contract;
  Date expiration;
  std::optional<Date> volume_roll_date;
};

struct SampleManifest {
  nlohmann::json json;
  std::vector<DayPlan> plans;
  std::vector<RollPointTruth> roll_points;
};

inline std::string leader_label(int nearby_delay, int deferred_delay) {
  if (nearby_delay < deferred_delay) return "nearby";
  if (deferred_delay < nearby_delay) return "deferred";
  return "none";
}

// Plans every day without simulating prices.
inline SampleManifest plan_sample(const ScenarioConfig& cfg, const RollCalendar& cal) {
  cfg.validate();
  SampleManifest m;
  const auto dates = scenario_dates(cfg, cal.business());
  std::map<ContractId, RollPointTruth> rolls;
  std::vector<ContractId> roll_order;
  nlohmann::json days = nlohmann::json::array();
  for (int i = 0; i < cfg.days; ++i) {
    DayPlan p = plan_day(cfg, cal, dates, i);
    const auto& nearby = p.contracts[0];
    if (!rolls.contains(nearby.id)) {
      rolls[nearby.id] = {nearby.id, nearby.expiration, std::nullopt};
      roll_order.push_back(nearby.id);
    }
    auto& rp = rolls[nearby.id];
    if (!rp.volume_roll_date && p.nearby_share < 0.5) rp.volume_roll_date = p.date;

    nlohmann::json day;
    day["index"] = i;
    day["date"] = format_date(p.date);
    day["nearby"] = nearby.id.to_string();
    day["days_to_expiration"] = p.days_to_expiration;
    day["backwardation"] = p.backwardation;
    day["reports"] = p.reports;
    nlohmann::json pairs = nlohmann::json::array();
    for (int k = 1; k < cfg.contracts; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      pairs.push_back({{"pair_index", k},
                       {"deferred", p.contracts[ks].id.to_string()},
                       {"delays", {p.delays[0], p.delays[ks]}},
                       {"sigma_s", {p.sigma_s[0], p.sigma_s[ks]}},
                       {"leader", leader_label(p.delays[0], p.delays[ks])},
                       {"category_intent", cfg.sigma_mu > 0.0 ? "Cointegration" : "Stationarity"},
                       {"volume_share", volume_share(p.volumes[0], p.volumes[ks])}});
    }
    day["pairs"] = pairs;
    days.push_back(day);
    m.plans.push_back(std::move(p));
  }
  nlohmann::json rp_json = nlohmann::json::array();
  for (const auto& id : roll_order) {
    const auto& r = rolls[id];
    m.roll_points.push_back(r);
    rp_json.push_back({{"contract", id.to_string()},
                       {"expiration", format_date(r.expiration)},
                       {"volume_roll_date", r.volume_roll_date ? nlohmann::json(format_date(*r.volume_roll_date)) : nlohmann::json(nullptr)}});
  }
  m.json = {{"rng_version", kRngVersion},
            {"seed", cfg.seed},
            {"symbol", cal.symbol()},
            {"contracts", cfg.contracts},
            {"days", days},
            {"roll_points", rp_json}};
  return m;
}

// Writes ticks/<date>/<contract>.csv, settlements.csv, reports.csv and
// manifest.json under `out_dir`.
inline SampleManifest simulate_sample(const ScenarioConfig& cfg, const RollCalendar& cal, Session session,
                                      const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  SampleManifest m = plan_sample(cfg, cal);
  fs::create_directories(out_dir / "ticks");
  std::ofstream settle(out_dir / "settlements.csv", std::ios::binary);
  settle << "date,contract,settle\n";
  std::ofstream reports(out_dir / "reports.csv", std::ios::binary);
  reports << "date,report_type\n";
  for (const auto& plan : m.plans) {
    const fs::path day_dir = out_dir / "ticks" / format_date(plan.date);
    fs::create_directories(day_dir);
    for (const auto& c : simulate_plan(cfg, plan, session)) {
      std::ofstream f(day_dir / (c.contract.to_string() + ".csv"), std::ios::binary);
      write_ticks(f, c.ticks);
      settle << format_date(plan.date) << ',' << c.contract.to_string() << ',' << c.settle.to_string() << '\n';
    }
    for (const auto& r : plan.reports) reports << format_date(plan.date) << ',' << r << '\n';
  }
  std::ofstream(out_dir / "manifest.json", std::ios::binary) << m.json.dump(2) << '\n';
  return m;
}

}  // namespace pdisc::sim
