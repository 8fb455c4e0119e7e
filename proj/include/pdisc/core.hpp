#pragma once

// Shared vocabulary: calendar dates, fixed-point prices and the error types
// used across the toolkit.

#include <charconv>
#include <cmath>
#include <chrono>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <fmt/format.h>

namespace pdisc {

using Date = std::chrono::sys_days;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input record. `line` is 1-based; 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(std::string what, std::size_t line = 0)
      : Error(line ? fmt::format("{} at line {}", what, line) : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
    s.remove_suffix(1);
  return s;
}

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace detail

// YYYY-MM-DD
inline bool try_parse_date(std::string_view s, Date& out) {
  s = detail::trim(s);
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  int y = 0;
  unsigned m = 0, d = 0;
  if (!detail::parse_int(s.substr(0, 4), y) || !detail::parse_int(s.substr(5, 2), m) ||
      !detail::parse_int(s.substr(8, 2), d))
    return false;
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) return false;
  out = Date{ymd};
  return true;
}

inline Date parse_date(std::string_view s) {
  Date d;
  if (!try_parse_date(s, d)) throw ParseError(fmt::format("invalid date '{}'", s));
  return d;
}

inline std::string format_date(Date d) {
  std::chrono::year_month_day ymd{d};
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
}

// Seconds since midnight, parsed from HH:MM:SS.
inline bool try_parse_clock(std::string_view s, std::int32_t& out) {
  s = detail::trim(s);
  if (s.size() != 8 || s[2] != ':' || s[5] != ':') return false;
  int h = 0, m = 0, sec = 0;
  if (!detail::parse_int(s.substr(0, 2), h) || !detail::parse_int(s.substr(3, 2), m) ||
      !detail::parse_int(s.substr(6, 2), sec))
    return false;
  if (h > 23 || m > 59 || sec > 59) return false;
  out = h * 3600 + m * 60 + sec;
  return true;
}

inline std::string format_clock(std::int32_t seconds) {
  return fmt::format("{:02d}:{:02d}:{:02d}", seconds / 3600, (seconds / 60) % 60, seconds % 60);
}

// Exact decimal price held as an integer count of 1e-6 price units.
struct FixedPrice {
  static constexpr std::int64_t kScale = 1'000'000;
  static constexpr int kDecimals = 6;

  std::int64_t micros = 0;

  constexpr auto operator<=>(const FixedPrice&) const = default;

  double to_double() const noexcept { return static_cast<double>(micros) / static_cast<double>(kScale); }

  static FixedPrice from_double(double v) { return FixedPrice{static_cast<std::int64_t>(std::llround(v * kScale))}; }

  // Accepts [-]digits[.digits] with at most six fractional digits.
  static bool try_parse(std::string_view s, FixedPrice& out) {
    s = detail::trim(s);
    if (s.empty()) return false;
    bool negative = false;
    if (s.front() == '-' || s.front() == '+') {
      negative = s.front() == '-';
      s.remove_prefix(1);
    }
    auto dot = s.find('.');
    std::string_view whole = s.substr(0, dot);
    std::string_view frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
    if (whole.empty() && frac.empty()) return false;
    if (frac.size() > static_cast<std::size_t>(kDecimals)) return false;
    std::int64_t w = 0, f = 0;
    if (!whole.empty()) {
      auto [p, ec] = std::from_chars(whole.data(), whole.data() + whole.size(), w);
      if (ec != std::errc{} || p != whole.data() + whole.size()) return false;
    }
    if (!frac.empty()) {
      auto [p, ec] = std::from_chars(frac.data(), frac.data() + frac.size(), f);
      if (ec != std::errc{} || p != frac.data() + frac.size()) return false;
      for (std::size_t i = frac.size(); i < static_cast<std::size_t>(kDecimals); ++i) f *= 10;
    }
    std::int64_t v = w * kScale + f;
    out.micros = negative ? -v : v;
    return true;
  }

  std::string to_string() const {
    std::int64_t a = micros < 0 ? -micros : micros;
    return fmt::format("{}{}.{:06d}", micros < 0 ? "-" : "", a / kScale, a % kScale);
  }
};

}  // namespace pdisc
