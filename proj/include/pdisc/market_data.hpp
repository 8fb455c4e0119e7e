#pragma once

// Tick ingestion, one-second aggregation and nearby/deferred pairing.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pdisc/calendar.hpp"
#include "pdisc/core.hpp"
#include "pdisc/events.hpp"

namespace pdisc {

inline constexpr std::string_view kTickHeader = "timestamp,sequence,contract,price,volume";

struct TickRecord {
  Date date;
  std::int32_t second = 0;  // seconds since midnight
  std::int64_t sequence = 0;
  ContractId contract;
  FixedPrice price;
  std::int64_t volume = 0;
};

inline bool tick_order(const TickRecord& a, const TickRecord& b) {
  if (a.date != b.date) return a.date < b.date;
  if (a.second != b.second) return a.second < b.second;
  if (a.sequence != b.sequence) return a.sequence < b.sequence;
  return a.contract < b.contract;
}

struct RowError {
  std::size_t line = 0;
  std::string message;
};

struct TickParseResult {
  std::vector<TickRecord> records;  // sorted by (timestamp, sequence)
  std::vector<RowError> errors;
};

namespace detail {

inline bool parse_timestamp(std::string_view s, Date& date, std::int32_t& second) {
  s = trim(s);
  if (s.size() != 19 || (s[10] != 'T' && s[10] != ' ')) return false;
  return try_parse_date(s.substr(0, 10), date) && try_parse_clock(s.substr(11), second);
}

inline std::optional<TickRecord> parse_tick_row(std::string_view row, std::string& err) {
  std::string_view fields[5];
  std::size_t n = 0;
  while (n < 5) {
    auto comma = row.find(',');
    fields[n++] = row.substr(0, comma);
    if (comma == std::string_view::npos) {
      row = {};
      break;
    }
    row.remove_prefix(comma + 1);
  }
  if (n != 5 || !row.empty()) {
    err = "expected 5 fields";
    return std::nullopt;
  }
  TickRecord t;
  if (!parse_timestamp(fields[0], t.date, t.second)) {
    err = "invalid timestamp";
    return std::nullopt;
  }
  if (!parse_int(fields[1], t.sequence)) {
    err = "invalid sequence";
    return std::nullopt;
  }
  if (!ContractId::try_parse(fields[2], t.contract)) {
    err = "invalid contract";
    return std::nullopt;
  }
  if (!FixedPrice::try_parse(fields[3], t.price)) {
    err = "invalid price";
    return std::nullopt;
  }
  if (t.price.micros <= 0) {
    err = "non-positive price";
    return std::nullopt;
  }
  if (!parse_int(fields[4], t.volume)) {
    err = "invalid volume";
    return std::nullopt;
  }
  if (t.volume < 0) {
    err = "negative volume";
    return std::nullopt;
  }
  return t;
}

}  // namespace detail

// Reads the tick CSV format. Malformed rows are skipped and reported with
// their 1-based line number; an empty stream yields no records.
inline TickParseResult parse_ticks(std::istream& in) {
  TickParseResult out;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view row = detail::trim(line);
    if (!header_seen) {
      if (lineno == 1 && row.size() >= 3 && static_cast<unsigned char>(row[0]) == 0xEF) row.remove_prefix(3);
      header_seen = true;
      if (row != kTickHeader) out.errors.push_back({lineno, fmt::format("bad header at line {}", lineno)});
      continue;
    }
    if (row.empty()) continue;
    std::string err;
    if (auto t = detail::parse_tick_row(row, err))
      out.records.push_back(std::move(*t));
    else
      out.errors.push_back({lineno, fmt::format("{} at line {}", err, lineno)});
  }
  std::stable_sort(out.records.begin(), out.records.end(), tick_order);
  return out;
}

struct Session {
  std::int32_t start = 0;  // first second, inclusive
  std::int32_t end = 0;    // last second, inclusive
  std::size_t length() const { return static_cast<std::size_t>(end - start + 1); }
};

// One contract's session on a one-second grid. Seconds without a trade carry
// the previous price forward; seconds before the first trade hold no price
// and sit outside valid_begin().
struct SecondGrid {
  Date session_date;
  ContractId contract;
  std::int32_t start = 0;
  std::int32_t end = -1;
  std::vector<FixedPrice> prices;
  std::vector<std::uint8_t> observed;
  std::vector<std::int64_t> volumes;  // traded volume per second
  std::int64_t total_volume = 0;
  std::optional<std::size_t> first_trade;

  std::size_t size() const { return prices.size(); }
  bool empty() const { return !first_trade.has_value(); }
  std::size_t valid_begin() const { return first_trade.value_or(prices.size()); }

  std::optional<FixedPrice> last_price() const {
    if (empty()) return std::nullopt;
    return prices.back();
  }

  // Observed seconds in [from, to) whose price differs from the prior second.
  std::size_t price_updates(std::size_t from, std::size_t to) const {
    std::size_t n = 0;
    for (std::size_t i = std::max<std::size_t>(from, 1); i < to; ++i)
      if (observed[i] && prices[i] != prices[i - 1]) ++n;
    return n;
  }

  std::vector<double> price_series(std::size_t from, std::size_t to) const {
    std::vector<double> out;
    out.reserve(to - from);
    for (std::size_t i = from; i < to; ++i) out.push_back(prices[i].to_double());
    return out;
  }
};

// Aggregates one contract's trades for one session. The first trade (by
// sequence) in a second sets that second's price; all session volume counts.
inline SecondGrid build_second_grid(std::span<const TickRecord> ticks, Session session) {
  if (session.end < session.start) throw Error("session end precedes start");
  SecondGrid g;
  g.start = session.start;
  g.end = session.end;
  const std::size_t n = session.length();
  g.prices.assign(n, FixedPrice{});
  g.observed.assign(n, 0);
  g.volumes.assign(n, 0);
  if (ticks.empty()) return g;

  g.session_date = ticks.front().date;
  g.contract = ticks.front().contract;
  std::vector<const TickRecord*> in_session;
  in_session.reserve(ticks.size());
  for (const auto& t : ticks) {
    if (t.date != g.session_date || t.contract != g.contract)
      throw Error("build_second_grid: ticks span more than one contract or session date");
    if (t.second >= session.start && t.second <= session.end) in_session.push_back(&t);
  }
  std::stable_sort(in_session.begin(), in_session.end(),
                   [](const TickRecord* a, const TickRecord* b) { return tick_order(*a, *b); });

  for (const TickRecord* t : in_session) {
    auto i = static_cast<std::size_t>(t->second - session.start);
    if (!g.observed[i]) {
      g.observed[i] = 1;
      g.prices[i] = t->price;
      if (!g.first_trade) g.first_trade = i;
    }
    g.volumes[i] += t->volume;
    g.total_volume += t->volume;
  }
  if (!g.first_trade) return g;
  for (std::size_t i = *g.first_trade + 1; i < n; ++i)
    if (!g.observed[i]) g.prices[i] = g.prices[i - 1];
  return g;
}

// One synthetic trade per observed second, carrying that second's volume.
inline std::vector<TickRecord> emit_trades(const SecondGrid& g) {
  std::vector<TickRecord> out;
  std::int64_t seq = 0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.observed[i])
      out.push_back({g.session_date, g.start + static_cast<std::int32_t>(i), ++seq, g.contract, g.prices[i],
                     g.volumes[i]});
  return out;
}

inline SecondGrid slice_grid(const SecondGrid& g, std::size_t from, std::size_t to) {
  SecondGrid s;
  s.session_date = g.session_date;
  s.contract = g.contract;
  s.start = g.start + static_cast<std::int32_t>(from);
  s.end = g.start + static_cast<std::int32_t>(to) - 1;
  s.prices.assign(g.prices.begin() + from, g.prices.begin() + to);
  s.observed.assign(g.observed.begin() + from, g.observed.begin() + to);
  s.volumes.assign(g.volumes.begin() + from, g.volumes.begin() + to);
  s.total_volume = g.total_volume;
  if (from < to && g.first_trade && *g.first_trade <= from) s.first_trade = 0;
  return s;
}

inline double volume_share(std::int64_t nearby_volume, std::int64_t deferred_volume) {
  const std::int64_t total = nearby_volume + deferred_volume;
  if (total <= 0) return 0.5;
  return static_cast<double>(nearby_volume) / static_cast<double>(total);
}

struct ContractPairDay {
  Date session_date;
  ContractId nearby_id;
  ContractId deferred_id;
  int pair_index = 1;
  SecondGrid nearby_grid;  // both grids cover the same seconds
  SecondGrid deferred_grid;
  double volume_share = 0.5;
  int days_to_expiration = 0;
  bool backwardation = false;
  CalendarFlags calendar_flags;

  std::size_t length() const { return nearby_grid.size(); }
  std::vector<double> nearby_prices() const { return nearby_grid.price_series(0, nearby_grid.size()); }
  std::vector<double> deferred_prices() const { return deferred_grid.price_series(0, deferred_grid.size()); }
};

// Daily settlement prices keyed by (date, contract).
using SettlementBook = std::map<std::pair<Date, ContractId>, FixedPrice>;

struct Skip {
  std::string reason;
};

template <typename T>
using Outcome = std::variant<T, Skip>;

// Builds the nearby vs deferred-k pair for one session date.
inline Outcome<ContractPairDay> pair_contracts(const std::map<ContractId, SecondGrid>& grids,
                                               const RollCalendar& calendar, int k, Date session_date,
                                               const SettlementBook* settlements = nullptr,
                                               const EventCalendar* events = nullptr) {
  if (k < 1) return Skip{fmt::format("invalid pair index {}", k)};
  auto nearby = calendar.contract_at(session_date, 0);
  auto deferred = calendar.contract_at(session_date, k);
  if (!nearby || !deferred) return Skip{"contract listing does not cover date"};
  auto n_it = grids.find(nearby->id);
  if (n_it == grids.end() || n_it->second.empty())
    return Skip{fmt::format("missing nearby grid {}", nearby->id.to_string())};
  auto d_it = grids.find(deferred->id);
  if (d_it == grids.end() || d_it->second.empty())
    return Skip{fmt::format("missing deferred grid {}", deferred->id.to_string())};
  const SecondGrid& ng = n_it->second;
  const SecondGrid& dg = d_it->second;
  if (ng.start != dg.start || ng.end != dg.end) return Skip{"session boundaries differ between legs"};

  const std::size_t from = std::max(ng.valid_begin(), dg.valid_begin());
  const std::size_t to = ng.size();
  if (from >= to) return Skip{"legs have no common trading range"};

  ContractPairDay p;
  p.session_date = session_date;
  p.nearby_id = nearby->id;
  p.deferred_id = deferred->id;
  p.pair_index = k;
  p.nearby_grid = slice_grid(ng, from, to);
  p.deferred_grid = slice_grid(dg, from, to);
  p.volume_share = volume_share(ng.total_volume, dg.total_volume);
  p.days_to_expiration = calendar.business().business_days_between(session_date, nearby->expiration);

  std::optional<FixedPrice> n_settle, d_settle;
  if (settlements) {
    if (auto it = settlements->find({session_date, nearby->id}); it != settlements->end()) n_settle = it->second;
    if (auto it = settlements->find({session_date, deferred->id}); it != settlements->end()) d_settle = it->second;
  }
  if (!n_settle || !d_settle) {
    n_settle = ng.last_price();
    d_settle = dg.last_price();
  }
  p.backwardation = *d_settle < *n_settle;
  if (events) p.calendar_flags = events->flags(session_date);
  return p;
}

struct EstimabilityCheck {
  bool estimable = false;
  std::size_t nearby_updates = 0;
  std::size_t deferred_updates = 0;
  std::string reason;
};

inline EstimabilityCheck check_estimable(const ContractPairDay& pair, std::size_t min_updates) {
  EstimabilityCheck c;
  const std::size_t n = pair.length();
  c.nearby_updates = pair.nearby_grid.price_updates(0, n);
  c.deferred_updates = pair.deferred_grid.price_updates(0, n);
  auto constant = [](const SecondGrid& g) {
    return std::all_of(g.prices.begin(), g.prices.end(), [&](FixedPrice p) { return p == g.prices.front(); });
  };
  if (n == 0 || constant(pair.nearby_grid) || constant(pair.deferred_grid)) {
    c.reason = "constant price series";
  } else if (c.nearby_updates < min_updates || c.deferred_updates < min_updates) {
    c.reason = fmt::format("too few price updates (nearby {}, deferred {}, minimum {})", c.nearby_updates,
                           c.deferred_updates, min_updates);
  } else {
    c.estimable = true;
  }
  return c;
}

inline bool is_estimable(const ContractPairDay& pair, std::size_t min_updates) {
  return check_estimable(pair, min_updates).estimable;
}

}  // namespace pdisc
