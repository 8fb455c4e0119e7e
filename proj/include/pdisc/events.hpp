#pragma once

// Report release dates and crash windows, with the next-trading-day shift
// applied to reports released after the close.

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pdisc/calendar.hpp"

namespace pdisc {

struct DateWindow {
  Date first;
  Date last;  // inclusive
  bool contains(Date d) const { return first <= d && d <= last; }
};

struct CalendarFlags {
  std::set<std::string> reports;  // report types in effect on the day
  bool crash = false;
};

class EventCalendar {
 public:
  EventCalendar() = default;

  // `releases` maps a release date to report types. Types listed in
  // `next_day_types` take effect on the next business day.
  EventCalendar(const std::multimap<Date, std::string>& releases, std::set<std::string> next_day_types,
                std::vector<DateWindow> crash_windows, const BusinessCalendar& business)
      : next_day_types_(std::move(next_day_types)), crash_windows_(std::move(crash_windows)) {
    for (const auto& [date, type] : releases) {
      known_types_.insert(type);
      Date effective = next_day_types_.contains(type) ? business.next_business_day(date) : date;
      effective_[effective].insert(type);
    }
  }

  bool fires(const std::string& type, Date d) const {
    auto it = effective_.find(d);
    return it != effective_.end() && it->second.contains(type);
  }

  bool in_crash(Date d) const {
    for (const auto& w : crash_windows_)
      if (w.contains(d)) return true;
    return false;
  }

  CalendarFlags flags(Date d) const {
    CalendarFlags f;
    if (auto it = effective_.find(d); it != effective_.end()) f.reports = it->second;
    f.crash = in_crash(d);
    return f;
  }

  bool has_type(const std::string& type) const { return known_types_.contains(type); }
  const std::vector<DateWindow>& crash_windows() const { return crash_windows_; }

 private:
  std::set<std::string> next_day_types_;
  std::vector<DateWindow> crash_windows_;
  std::map<Date, std::set<std::string>> effective_;
  std::set<std::string> known_types_;
};

}  // namespace pdisc
