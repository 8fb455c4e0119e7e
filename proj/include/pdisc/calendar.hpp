#pragma once

// Exchange business days, contract identifiers, expiration rules and the
// nearby/deferred roll schedule.

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "pdisc/core.hpp"

namespace pdisc {

class BusinessCalendar {
 public:
  BusinessCalendar() = default;
  explicit BusinessCalendar(std::set<Date> holidays) : holidays_(std::move(holidays)) {}

  bool is_business_day(Date d) const {
    std::chrono::weekday wd{d};
    if (wd == std::chrono::Saturday || wd == std::chrono::Sunday) return false;
    return !holidays_.contains(d);
  }

  Date next_business_day(Date d) const {
    do {
      d += std::chrono::days{1};
    } while (!is_business_day(d));
    return d;
  }

  Date previous_business_day(Date d) const {
    do {
      d -= std::chrono::days{1};
    } while (!is_business_day(d));
    return d;
  }

  // Business days in (from, to]; zero when to <= from.
  int business_days_between(Date from, Date to) const {
    int n = 0;
    for (Date d = from + std::chrono::days{1}; d <= to; d += std::chrono::days{1})
      if (is_business_day(d)) ++n;
    return n;
  }

  const std::set<Date>& holidays() const { return holidays_; }

 private:
  std::set<Date> holidays_;
};

enum class ExpirationRule {
  BusinessDayBefore15th,  // corn: business day prior to the 15th calendar day
  LastBusinessDay,        // live cattle: last business day of the month
};

inline ExpirationRule parse_expiration_rule(std::string_view s) {
  s = detail::trim(s);
  if (s == "business_day_before_15th") return ExpirationRule::BusinessDayBefore15th;
  if (s == "last_business_day") return ExpirationRule::LastBusinessDay;
  throw ConfigError(fmt::format("unknown expiration rule '{}'", s));
}

inline std::string to_string(ExpirationRule r) {
  return r == ExpirationRule::BusinessDayBefore15th ? "business_day_before_15th" : "last_business_day";
}

inline Date expiration_date(int year, unsigned month, ExpirationRule rule, const BusinessCalendar& cal) {
  using namespace std::chrono;
  if (rule == ExpirationRule::BusinessDayBefore15th) {
    return cal.previous_business_day(Date{std::chrono::year{year} / std::chrono::month{month} / 15});
  }
  Date last{std::chrono::year{year} / std::chrono::month{month} / std::chrono::last};
  return cal.is_business_day(last) ? last : cal.previous_business_day(last);
}

// Futures delivery month letter codes, January..December.
inline constexpr std::string_view kMonthCodes = "FGHJKMNQUVXZ";

struct ContractId {
  std::string symbol;
  int year = 0;
  unsigned month = 0;  // 1..12

  auto operator<=>(const ContractId&) const = default;

  std::string to_string() const { return fmt::format("{}_{}{}", symbol, year, kMonthCodes[month - 1]); }

  // "ZC_2015U"
  static bool try_parse(std::string_view s, ContractId& out) {
    s = detail::trim(s);
    auto us = s.rfind('_');
    if (us == std::string_view::npos || us == 0 || s.size() != us + 6) return false;
    int y = 0;
    if (!detail::parse_int(s.substr(us + 1, 4), y)) return false;
    auto code = kMonthCodes.find(s[us + 5]);
    if (code == std::string_view::npos) return false;
    out = ContractId{std::string(s.substr(0, us)), y, static_cast<unsigned>(code + 1)};
    return true;
  }
};

inline unsigned parse_month_token(std::string_view tok) {
  tok = detail::trim(tok);
  unsigned m = 0;
  if (detail::parse_int(tok, m) && m >= 1 && m <= 12) return m;
  if (tok.size() == 1) {
    auto code = kMonthCodes.find(tok[0]);
    if (code != std::string_view::npos) return static_cast<unsigned>(code + 1);
  }
  throw ConfigError(fmt::format("invalid delivery month '{}'", tok));
}

struct ListedContract {
  ContractId id;
  Date expiration;
};

// Ordered contract listing for one commodity. A contract is the nearby from
// the business day after the previous contract's expiration through its own
// expiration day, so the nearby intervals partition the calendar.
class RollCalendar {
 public:
  RollCalendar(std::string symbol, std::vector<unsigned> delivery_months, ExpirationRule rule,
               BusinessCalendar business, int first_year, int last_year)
      : symbol_(std::move(symbol)), months_(std::move(delivery_months)), rule_(rule), business_(std::move(business)) {
    if (months_.empty()) throw ConfigError("commodity has no delivery months");
    std::sort(months_.begin(), months_.end());
    months_.erase(std::unique(months_.begin(), months_.end()), months_.end());
    for (int y = first_year; y <= last_year; ++y)
      for (unsigned m : months_)
        contracts_.push_back({ContractId{symbol_, y, m}, expiration_date(y, m, rule_, business_)});
  }

  const std::vector<ListedContract>& contracts() const { return contracts_; }
  const BusinessCalendar& business() const { return business_; }
  const std::string& symbol() const { return symbol_; }
  const std::vector<unsigned>& delivery_months() const { return months_; }
  ExpirationRule rule() const { return rule_; }

  // Index of the nearby contract on `d`, if the listing covers it.
  std::optional<std::size_t> nearby_index(Date d) const {
    auto it = std::lower_bound(contracts_.begin(), contracts_.end(), d,
                               [](const ListedContract& c, Date v) { return c.expiration < v; });
    if (it == contracts_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - contracts_.begin());
  }

  // k = 0 is the nearby, k >= 1 the k-th deferred contract.
  std::optional<ListedContract> contract_at(Date d, int k) const {
    auto i = nearby_index(d);
    if (!i || k < 0 || *i + static_cast<std::size_t>(k) >= contracts_.size()) return std::nullopt;
    return contracts_[*i + static_cast<std::size_t>(k)];
  }

  std::optional<ListedContract> find(const ContractId& id) const {
    for (const auto& c : contracts_)
      if (c.id == id) return c;
    return std::nullopt;
  }

  int days_to_expiration(Date d) const {
    auto c = contract_at(d, 0);
    if (!c) throw Error(fmt::format("no listed nearby contract on {}", format_date(d)));
    return business_.business_days_between(d, c->expiration);
  }

 private:
  std::string symbol_;
  std::vector<unsigned> months_;
  ExpirationRule rule_;
  BusinessCalendar business_;
  std::vector<ListedContract> contracts_;
};

}  // namespace pdisc
