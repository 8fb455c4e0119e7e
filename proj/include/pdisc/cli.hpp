#pragma once

// Command-line front end: simulate, analyze, regress, rollpoint.
// Exit codes: 0 ok, 1 runtime failure, 2 usage or configuration error.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/ranges.h>

#include "pdisc/config.hpp"
#include "pdisc/determinants.hpp"
#include "pdisc/discovery.hpp"
#include "pdisc/io.hpp"
#include "pdisc/scenario.hpp"

namespace pdisc::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kRuntime = 1, kUsage = 2 };

struct Options {
  fs::path config;
  fs::path out;
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<int>> pairs;
  std::string format = "csv";
  std::optional<fs::path> shares;
  unsigned threads = 0;  // 0: hardware concurrency
};

namespace detail {

inline std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error(fmt::format("cannot write {}", p.string()));
  return f;
}

inline std::ifstream open_in(const fs::path& p, std::string_view what) {
  std::ifstream f(p, std::ios::binary);
  if (!fs::is_regular_file(p) || !f) throw Error(fmt::format("{} not found: {}", what, p.string()));
  return f;
}

inline std::vector<int> selected_pairs(const RunConfig& cfg, const Options& opt) {
  std::vector<int> pairs = opt.pairs.value_or(cfg.pairs);
  for (int k : pairs)
    if (k < 1 || k > 4) throw ConfigError(fmt::format("pair index {} outside 1..4", k));
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

inline EventCalendar load_events(const RunConfig& cfg) {
  std::multimap<Date, std::string> releases;
  if (cfg.data.reports) {
    auto in = open_in(*cfg.data.reports, "report calendar");
    releases = read_reports(in);
  }
  return EventCalendar(releases, cfg.events.next_day_reports, cfg.events.crash_windows, cfg.business());
}

struct DateDir {
  Date date;
  fs::path path;
};

inline std::vector<DateDir> list_date_dirs(const fs::path& root) {
  if (!fs::is_directory(root)) throw Error(fmt::format("tick directory not found: {}", root.string()));
  std::vector<DateDir> out;
  for (const auto& e : fs::directory_iterator(root)) {
    if (!e.is_directory()) continue;
    Date d;
    if (!try_parse_date(e.path().filename().string(), d))
      throw Error(fmt::format("tick directory entry is not a date: {}", e.path().filename().string()));
    out.push_back({d, e.path()});
  }
  std::sort(out.begin(), out.end(), [](const DateDir& a, const DateDir& b) { return a.date < b.date; });
  return out;
}

struct DayOutput {
  std::vector<DailyRecord> records;
  std::vector<Exclusion> exclusions;
  std::vector<std::string> log;
};

inline DayOutput analyze_date(const DateDir& dir, const RunConfig& cfg, const RollCalendar& roll,
                              const SettlementBook* settlements, const EventCalendar& events,
                              const std::vector<int>& pairs) {
  DayOutput out;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir.path))
    if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
  std::sort(files.begin(), files.end());

  std::map<ContractId, std::vector<TickRecord>> by_contract;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    auto parsed = parse_ticks(in);
    for (const auto& e : parsed.errors)
      out.log.push_back(fmt::format("{} {}: {}", format_date(dir.date), f.filename().string(), e.message));
    std::size_t foreign = 0;
    for (auto& t : parsed.records) {
      if (t.date != dir.date) {
        ++foreign;
        continue;
      }
      by_contract[t.contract].push_back(std::move(t));
    }
    if (foreign)
      out.log.push_back(fmt::format("{} {}: {} rows dated outside the directory date ignored", format_date(dir.date),
                                    f.filename().string(), foreign));
  }
  std::map<ContractId, SecondGrid> grids;
  for (auto& [id, ticks] : by_contract) {
    std::stable_sort(ticks.begin(), ticks.end(), tick_order);
    grids.emplace(id, build_second_grid(ticks, cfg.commodity.session));
  }

  for (int k : pairs) {
    auto pair = pair_contracts(grids, roll, k, dir.date, settlements, &events);
    if (auto* skip = std::get_if<Skip>(&pair)) {
      out.exclusions.push_back({dir.date, k, skip->reason});
      continue;
    }
    const auto& p = std::get<ContractPairDay>(pair);
    auto result = daily_pipeline(p, cfg.pipeline);
    if (auto* skip = std::get_if<Skip>(&result)) {
      out.exclusions.push_back({dir.date, k, skip->reason});
      continue;
    }
    out.records.push_back({std::get<DiscoveryShares>(std::move(result)), p.volume_share, p.days_to_expiration,
                           p.backwardation, p.nearby_id.month});
  }
  return out;
}

// Per-date work runs on a small pool; results land in per-date slots and
// are written in date order, so output does not depend on scheduling.
template <typename F>
void for_each_index(std::size_t n, unsigned threads, F&& work) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto loop = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        work(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(loop);
  loop();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

inline RollCalendar calendar_for_dates(const RunConfig& cfg, Date first, Date last) {
  const int y0 = static_cast<int>(std::chrono::year_month_day{first}.year());
  const int y1 = static_cast<int>(std::chrono::year_month_day{last}.year());
  return cfg.roll_calendar(y0, y1 + 2);
}

inline std::vector<DailyRow> load_shares(const RunConfig&, const Options& opt) {
  const fs::path path = opt.shares.value_or(opt.out / "daily_shares.csv");
  auto in = open_in(path, "daily shares");
  return read_daily_csv(in);
}

}  // namespace detail

inline int cmd_simulate(const RunConfig& cfg, const Options& opt, std::ostream& out) {
  if (!cfg.scenario) throw ConfigError("config has no [scenario] section");
  sim::ScenarioConfig sc = *cfg.scenario;
  if (opt.seed) sc.seed = *opt.seed;
  sc.validate();
  const int y0 = static_cast<int>(std::chrono::year_month_day{sc.start_date}.year());
  const int years = sc.days / 240 + 3;
  RollCalendar roll = cfg.roll_calendar(y0, y0 + years);
  auto manifest = sim::simulate_sample(sc, roll, cfg.commodity.session, opt.out);
  out << fmt::format("simulated {} days of {} contracts into {}\n", manifest.plans.size(), sc.contracts,
                     opt.out.string());
  return kOk;
}

inline int cmd_analyze(const RunConfig& cfg, const Options& opt, std::ostream& out) {
  const auto pairs = detail::selected_pairs(cfg, opt);
  const auto dirs = detail::list_date_dirs(cfg.data.ticks);
  if (dirs.empty()) throw Error(fmt::format("no tick data under {}", cfg.data.ticks.string()));
  std::optional<SettlementBook> settlements;
  if (cfg.data.settlements) {
    auto in = detail::open_in(*cfg.data.settlements, "settlement file");
    settlements = read_settlements(in);
  }
  const EventCalendar events = detail::load_events(cfg);
  const RollCalendar roll = detail::calendar_for_dates(cfg, dirs.front().date, dirs.back().date);

  std::vector<detail::DayOutput> days(dirs.size());
  detail::for_each_index(dirs.size(), opt.threads, [&](std::size_t i) {
    days[i] = detail::analyze_date(dirs[i], cfg, roll, settlements ? &*settlements : nullptr, events, pairs);
  });

  std::vector<DailyRecord> records;
  std::vector<Exclusion> exclusions;
  std::vector<std::string> notes;
  for (auto& d : days) {
    std::move(d.records.begin(), d.records.end(), std::back_inserter(records));
    std::move(d.exclusions.begin(), d.exclusions.end(), std::back_inserter(exclusions));
    std::move(d.log.begin(), d.log.end(), std::back_inserter(notes));
  }
  std::stable_sort(records.begin(), records.end(), [](const DailyRecord& a, const DailyRecord& b) {
    return std::tie(a.shares.session_date, a.shares.pair_index) < std::tie(b.shares.session_date, b.shares.pair_index);
  });

  fs::create_directories(opt.out);
  std::vector<DailyRow> rows;
  for (const auto& r : records) rows.push_back(daily_row(r, cfg.commodity.name));
  {
    auto f = detail::open_out(opt.out / "daily_shares.csv");
    write_daily_csv(f, rows);
  }
  {
    auto f = detail::open_out(opt.out / "exclusions.csv");
    write_exclusions_csv(f, exclusions);
  }

  const std::size_t attempted = dirs.size() * pairs.size();
  std::ostringstream log;
  log << fmt::format("commodity: {}\n", cfg.commodity.name);
  log << fmt::format("session: {} to {}\n", format_clock(cfg.commodity.session.start),
                     format_clock(cfg.commodity.session.end));
  log << fmt::format("pairs: {}\n", fmt::join(pairs, ","));
  log << fmt::format("min_updates: {}; lags: {}..{}; significance: {}\n", cfg.pipeline.min_updates,
                     cfg.pipeline.lags.min, cfg.pipeline.lags.max, cfg.pipeline.significance);
  log << fmt::format("dates: {} ({} to {})\n", dirs.size(), format_date(dirs.front().date),
                     format_date(dirs.back().date));
  log << fmt::format("pair-days: {} attempted, {} estimated, {} excluded ({:.2f}%)\n", attempted, records.size(),
                     exclusions.size(), attempted ? 100.0 * static_cast<double>(exclusions.size()) / attempted : 0.0);
  for (const auto& e : exclusions)
    log << fmt::format("excluded {} pair {}: {}\n", format_date(e.date), e.pair_index, e.reason);
  for (const auto& n : notes) log << "input: " << n << '\n';

  if (records.empty()) {
    auto f = detail::open_out(opt.out / "run_log.txt");
    f << log.str();
    std::string reason = exclusions.empty() ? "no pairs formed" : exclusions.front().reason;
    throw Error(fmt::format("no estimable days: {} pair-days excluded, first reason: {}", exclusions.size(), reason));
  }

  const ShareSummary summary = aggregate_shares(records);
  {
    auto f = detail::open_out(opt.out / "summary.csv");
    write_summary_csv(f, summary);
  }
  {
    auto f = detail::open_out(opt.out / "summary.json");
    f << summary_json(summary, cfg.commodity.name).dump(2) << '\n';
  }
  {
    auto f = detail::open_out(opt.out / "categories.txt");
    f << category_table(summary);
  }
  {
    auto f = detail::open_out(opt.out / "profile.csv");
    write_profile_csv(f, summary);
  }
  {
    auto f = detail::open_out(opt.out / "run_log.txt");
    f << log.str();
  }
  out << fmt::format("{} pair-days estimated, {} excluded; outputs in {}\n", records.size(), exclusions.size(),
                     opt.out.string());
  return kOk;
}

inline int cmd_regress(const RunConfig& cfg, const Options& opt, std::ostream& out, std::ostream& err) {
  auto rows = detail::load_shares(cfg, opt);
  const EventCalendar events = detail::load_events(cfg);
  const RegressionSpec spec = RegressionSpec::from_template(cfg.commodity.regression);
  std::map<int, std::vector<DeterminantRow>> by_pair;
  for (const auto& r : rows) by_pair[r.pair_index].push_back(r.determinant());
  std::vector<int> wanted;
  if (opt.pairs) wanted = detail::selected_pairs(cfg, opt);

  std::vector<RegressionResult> results;
  for (const auto& [k, pair_rows] : by_pair) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), k) == wanted.end()) continue;
    Design d = build_design(pair_rows, events, spec);
    d.pair_index = k;
    if (d.y.size() <= d.X.cols()) {
      err << fmt::format("warning: pair {} has {} usable days, too few for the regression; skipped\n", k, d.y.size());
      continue;
    }
    for (const auto& n : d.notices) err << fmt::format("pair {}: {}\n", k, n);
    results.push_back(estimate(d));
  }
  if (results.empty()) throw Error("no pair has enough days with a price-discovery share to regress");

  fs::create_directories(opt.out);
  const std::string title = fmt::format("{} ({} template)", cfg.commodity.name, to_string(cfg.commodity.regression));
  {
    auto f = detail::open_out(opt.out / "regression.txt");
    f << report_table(results, title);
  }
  if (opt.format == "json") {
    auto f = detail::open_out(opt.out / "regression.json");
    f << regression_json(results, cfg.commodity.regression).dump(2) << '\n';
  } else {
    auto f = detail::open_out(opt.out / "regression.csv");
    write_regression_csv(f, results);
  }
  out << report_table(results, title);
  return kOk;
}

inline int cmd_rollpoint(const RunConfig& cfg, const Options& opt, std::ostream& out) {
  auto rows = detail::load_shares(cfg, opt);
  if (rows.empty()) throw Error("daily shares file has no rows");
  if (opt.pairs) {
    const auto wanted = detail::selected_pairs(cfg, opt);
    std::erase_if(rows, [&](const DailyRow& r) { return std::find(wanted.begin(), wanted.end(), r.pair_index) == wanted.end(); });
  }
  auto [lo, hi] = std::minmax_element(rows.begin(), rows.end(),
                                      [](const DailyRow& a, const DailyRow& b) { return a.date < b.date; });
  const RollCalendar roll = detail::calendar_for_dates(cfg, lo->date, hi->date);
  const auto points = roll_points(rows, roll);
  fs::create_directories(opt.out);
  std::ostringstream body;
  if (opt.format == "json") {
    body << rollpoints_json(points).dump(2) << '\n';
    auto f = detail::open_out(opt.out / "rollpoints.json");
    f << body.str();
  } else {
    write_rollpoints_csv(body, points);
    auto f = detail::open_out(opt.out / "rollpoints.csv");
    f << body.str();
  }
  out << body.str();
  return kOk;
}

// Parses arguments and dispatches. Errors become one line on `err`.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Price discovery between nearby and deferred futures contracts"};
  app.require_subcommand(1);
  Options opt;
  std::string pairs_text;

  auto add_common = [&](CLI::App* sub, bool config_alias) {
    auto* c = sub->add_option(config_alias ? "--config,--scenario" : "--config", opt.config, "configuration file")
                  ->required();
    (void)c;
    sub->add_option("--out", opt.out, "output directory")->required();
    sub->add_option("--pairs", pairs_text, "comma-separated deferred indices, e.g. 1,2");
    sub->add_option("--format", opt.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--threads", opt.threads, "worker threads (0 = all cores)");
  };
  auto* simulate = app.add_subcommand("simulate", "write a synthetic tick sample and its manifest");
  add_common(simulate, true);
  simulate->add_option("--seed", opt.seed, "master seed, overrides the scenario seed");
  auto* analyze = app.add_subcommand("analyze", "classify days and compute daily price-discovery shares");
  add_common(analyze, false);
  auto* regress = app.add_subcommand("regress", "regress daily shares on market determinants");
  add_common(regress, false);
  regress->add_option("--shares", opt.shares, "daily shares CSV (default: <out>/daily_shares.csv)");
  auto* rollpoint = app.add_subcommand("rollpoint", "first days each nearby loses volume and price leadership");
  add_common(rollpoint, false);
  rollpoint->add_option("--shares", opt.shares, "daily shares CSV (default: <out>/daily_shares.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error: " << msg << '\n';
    return kUsage;
  }

  try {
    if (!pairs_text.empty()) {
      std::vector<int> pairs;
      for (const auto& t : pdisc::detail::split_list(pairs_text)) {
        int k = 0;
        if (!pdisc::detail::parse_int(t, k)) throw ConfigError(fmt::format("invalid --pairs entry '{}'", t));
        pairs.push_back(k);
      }
      opt.pairs = pairs;
    }
    const RunConfig cfg = load_run_config(opt.config);
    if (simulate->parsed()) return cmd_simulate(cfg, opt, out);
    if (analyze->parsed()) return cmd_analyze(cfg, opt, out);
    if (regress->parsed()) return cmd_regress(cfg, opt, out, err);
    return cmd_rollpoint(cfg, opt, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error: " << msg << '\n';
    return kRuntime;
  }
}

}  // namespace pdisc::cli
