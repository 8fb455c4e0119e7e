#pragma once

// Structural price simulator. A fundamental value follows a Gaussian random
// walk; each contract's price is the fundamental seen `delay` seconds late
// plus its own iid Gaussian noise:
//
//   w_t = w_{t-1} + u_t,            u_t ~ N(0, sigma_mu^2)
//   p_{i,t} = w_{t - delay_i} + s_{i,t},  s_{i,t} ~ N(0, sigma_s_i^2)
//
// Random streams: boost::random::mt19937_64 with boost's normal distribution,
// seeded through splitmix64. Changing either changes every simulated byte.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "pdisc/market_data.hpp"

namespace pdisc::sim {

inline constexpr int kRngVersion = 1;

using Engine = boost::random::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Per-day stream: master seed plus day index, then mixed.
inline Engine day_engine(std::uint64_t master_seed, std::uint64_t day_index, std::uint64_t stream = 0) {
  return Engine(splitmix64(splitmix64(master_seed + day_index) ^ (stream * 0xD1B54A32D192ED03ULL)));
}

struct LegSpec {
  int delay = 0;               // seconds
  double sigma_s = 0.05;       // noise std-dev
  double offset = 0.0;         // constant added to the price (carry)
  double trade_probability = 1.0;
};

struct Jump {
  int second = 0;  // session offset at which the fundamental jumps
  double size = 0.0;
};

struct LegPath {
  std::vector<double> prices;         // one per second
  std::vector<std::uint8_t> traded;   // 1 where the second has a trade
};

struct FundamentalPath {
  std::vector<double> values;  // index t + max_delay is session second t
  int max_delay = 0;
  double at(int t, int delay) const { return values[static_cast<std::size_t>(t + max_delay - delay)]; }
};

inline FundamentalPath simulate_fundamental(Engine& rng, int seconds, int max_delay, double start, double sigma_mu,
                                            std::span<const Jump> jumps = {}) {
  FundamentalPath f;
  f.max_delay = max_delay;
  f.values.resize(static_cast<std::size_t>(seconds + max_delay));
  boost::random::normal_distribution<double> innov(0.0, 1.0);
  double w = start;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    if (i > 0) w += sigma_mu * innov(rng);
    for (const auto& j : jumps)
      if (static_cast<std::size_t>(j.second + max_delay) == i) w += j.size;
    f.values[i] = w;
  }
  return f;
}

inline LegPath simulate_leg(Engine& rng, const FundamentalPath& f, int seconds, const LegSpec& leg) {
  LegPath p;
  p.prices.resize(static_cast<std::size_t>(seconds));
  p.traded.assign(static_cast<std::size_t>(seconds), 1);
  boost::random::normal_distribution<double> noise(0.0, 1.0);
  for (int t = 0; t < seconds; ++t) p.prices[static_cast<std::size_t>(t)] = f.at(t, leg.delay) + leg.offset + leg.sigma_s * noise(rng);
  if (leg.trade_probability < 1.0) {
    boost::random::uniform_01<double> u;
    for (auto& tr : p.traded) tr = u(rng) < leg.trade_probability ? 1 : 0;
  }
  return p;
}

struct StructuralConfig {
  double sigma_mu = 0.02;
  std::array<int, 2> delays{0, 0};
  std::array<double, 2> sigma_s{0.05, 0.05};
  int seconds = 23400;
  std::uint64_t seed = 1;
  std::array<double, 2> trade_probability{1.0, 1.0};
  std::array<double, 2> mean_volume{5.0, 5.0};  // contracts per trade, Poisson(mean - 1) + 1
  double start_price = 400.0;

  void validate() const {
    if (sigma_mu < 0.0 || sigma_s[0] < 0.0 || sigma_s[1] < 0.0) throw ConfigError("negative standard deviation");
    if (delays[0] < 0 || delays[1] < 0) throw ConfigError("negative delay");
    if (seconds <= std::max(delays[0], delays[1]) + 100) throw ConfigError("session too short for the delays");
    for (double p : trade_probability)
      if (p <= 0.0 || p > 1.0) throw ConfigError("trade probability must be in (0, 1]");
    for (double v : mean_volume)
      if (v < 1.0) throw ConfigError("mean volume per trade must be at least 1");
  }
};

struct GroundTruth {
  std::array<int, 2> delays{};
  std::array<double, 2> sigma_s{};
  std::optional<int> leader;  // 0 or 1; empty when delays are equal
};

struct SimulatedDay {
  SecondGrid first;
  SecondGrid second;
  GroundTruth truth;

  ContractPairDay as_pair(int pair_index = 1) const {
    ContractPairDay p;
    p.session_date = first.session_date;
    p.nearby_id = first.contract;
    p.deferred_id = second.contract;
    p.pair_index = pair_index;
    const std::size_t from = std::max(first.valid_begin(), second.valid_begin());
    p.nearby_grid = slice_grid(first, from, first.size());
    p.deferred_grid = slice_grid(second, from, second.size());
    p.volume_share = volume_share(first.total_volume, second.total_volume);
    return p;
  }
};

inline constexpr std::int32_t kDefaultSessionStart = 9 * 3600 + 30 * 60;

// Turns a simulated leg into the grid the ingestion path would build from
// its trades.
inline SecondGrid leg_to_grid(const LegPath& leg, const std::vector<std::int64_t>& volumes, Date date,
                              const ContractId& id, std::int32_t session_start) {
  std::vector<TickRecord> ticks;
  std::int64_t seq = 0;
  for (std::size_t t = 0; t < leg.prices.size(); ++t)
    if (leg.traded[t])
      ticks.push_back({date, session_start + static_cast<std::int32_t>(t), ++seq, id,
                       FixedPrice::from_double(leg.prices[t]), volumes[t]});
  Session s{session_start, session_start + static_cast<std::int32_t>(leg.prices.size()) - 1};
  SecondGrid g = build_second_grid(ticks, s);
  g.session_date = date;
  g.contract = id;
  return g;
}

inline SimulatedDay simulate_day(const StructuralConfig& cfg, Date date = Date{std::chrono::year{2015} / 1 / 2},
                                 std::int32_t session_start = kDefaultSessionStart) {
  cfg.validate();
  Engine rng(splitmix64(cfg.seed));
  const int max_delay = std::max(cfg.delays[0], cfg.delays[1]);
  FundamentalPath f = simulate_fundamental(rng, cfg.seconds, max_delay, cfg.start_price, cfg.sigma_mu);

  SimulatedDay day;
  const ContractId ids[2] = {{"SIM", 2015, 3}, {"SIM", 2015, 5}};
  for (int i = 0; i < 2; ++i) {
    LegSpec spec{cfg.delays[i], cfg.sigma_s[i], 0.0, cfg.trade_probability[i]};
    LegPath leg = simulate_leg(rng, f, cfg.seconds, spec);
    std::vector<std::int64_t> volumes(leg.prices.size(), 0);
    boost::random::poisson_distribution<std::int64_t> extra(std::max(cfg.mean_volume[i] - 1.0, 1e-9));
    for (std::size_t t = 0; t < volumes.size(); ++t)
      if (leg.traded[t]) volumes[t] = 1 + (cfg.mean_volume[i] > 1.0 ? extra(rng) : 0);
    (i == 0 ? day.first : day.second) = leg_to_grid(leg, volumes, date, ids[i], session_start);
  }
  day.truth.delays = cfg.delays;
  day.truth.sigma_s = cfg.sigma_s;
  if (cfg.delays[0] != cfg.delays[1]) day.truth.leader = cfg.delays[0] < cfg.delays[1] ? 0 : 1;
  return day;
}

}  // namespace pdisc::sim
