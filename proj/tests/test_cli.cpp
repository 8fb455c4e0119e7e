#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pdisc/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "pdisc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = pdisc::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

// A small desk: ten-minute sessions, three contracts, 40 days.
const char* kCornDesk = R"([commodity]
name = "corn"
symbol = "ZC"
months = "H,K,N,U,Z"
session_start = "09:30:00"
session_end = "09:39:59"
template = "corn"

[data]
ticks = "data/ticks"
settlements = "data/settlements.csv"
reports = "data/reports.csv"

[pipeline]
lag_max = 3
min_updates = 100

[events]
crash_windows = "2015-02-02:2015-02-13"

[scenario]
seed = 11
days = 40
contracts = 3
delays = "0,2,4"
trade_probability = 0.7
reports = "3:WASDE,12:CP,20:GRAINSTOCKS,30:WASDE"
report_jump = 0.2
)";

class Desk {
 public:
  explicit Desk(const std::string& name, const std::string& config = kCornDesk)
      : root_(fs::temp_directory_path() / ("pdisc_cli_" + name)) {
    fs::remove_all(root_);
    fs::create_directories(root_);
    std::ofstream(root_ / "desk.toml") << config;
  }
  ~Desk() { fs::remove_all(root_); }
  fs::path root() const { return root_; }
  std::string config() const { return (root_ / "desk.toml").string(); }
  std::string path(const std::string& rel) const { return (root_ / rel).string(); }

 private:
  fs::path root_;
};

}  // namespace

TEST_CASE("missing config is a configuration error") {
  auto r = run({"simulate", "--scenario", "/nonexistent/desk.toml", "--out", "/tmp/pdisc_unused"});
  CHECK(r.code == 2);
  CHECK(r.err.find("config not found") != std::string::npos);
  CHECK(lines_of(r.err).size() == 1);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"explode", "--out", "x"}).code == 2);
  CHECK(run({"analyze", "--config", "x.toml"}).code == 2);
  Desk desk("usage");
  auto r = run({"analyze", "--config", desk.config(), "--out", desk.path("out"), "--format", "xml"});
  CHECK(r.code == 2);
  CHECK(r.err.starts_with("error: "));
  CHECK(run({"analyze", "--config", desk.config(), "--out", desk.path("out"), "--pairs", "1,x"}).code == 2);
  CHECK(run({"analyze", "--config", desk.config(), "--out", desk.path("out"), "--pairs", "9"}).code == 2);
}

TEST_CASE("invalid config values are rejected before any work") {
  std::string text = kCornDesk;
  text.replace(text.find("lag_max = 3"), 11, "lag_max = 12");
  Desk desk("badcfg", text);
  auto r = run({"simulate", "--config", desk.config(), "--out", desk.path("data")});
  CHECK(r.code == 2);
  CHECK_FALSE(fs::exists(desk.path("data")));
}

TEST_CASE("simulate, analyze, regress and rollpoint on a small desk") {
  Desk desk("flow");
  auto sim = run({"simulate", "--scenario", desk.config(), "--out", desk.path("data")});
  REQUIRE(sim.code == 0);
  CHECK(fs::exists(desk.path("data/manifest.json")));

  auto an = run({"analyze", "--config", desk.config(), "--out", desk.path("out")});
  REQUIRE(an.code == 0);
  for (auto f : {"daily_shares.csv", "exclusions.csv", "summary.csv", "summary.json", "categories.txt", "profile.csv",
                 "run_log.txt"})
    CHECK(fs::exists(desk.root() / "out" / f));

  auto daily = lines_of(slurp(desk.path("out/daily_shares.csv")));
  auto excluded = lines_of(slurp(desk.path("out/exclusions.csv")));
  REQUIRE(!daily.empty());
  CHECK(daily[0] == pdisc::kDailyHeader);
  // 40 days, pairs 1..4 configured by default but only 3 contracts simulated.
  CHECK(daily.size() - 1 + excluded.size() - 1 == 40 * 4);
  CHECK(daily.size() - 1 >= 40 * 2);

  auto summary = nlohmann::json::parse(slurp(desk.path("out/summary.json")));
  CHECK(summary.contains("pairs"));

  auto reg = run({"regress", "--config", desk.config(), "--out", desk.path("out"), "--pairs", "1,2"});
  REQUIRE(reg.code == 0);
  CHECK(reg.out.find("Nearby and Deferred 1") != std::string::npos);
  CHECK(reg.out.find("Nearby and Deferred 2") != std::string::npos);
  CHECK(reg.out.find("Volumeshare") != std::string::npos);
  CHECK(reg.out.find("Adjusted R^2") != std::string::npos);
  CHECK(fs::exists(desk.path("out/regression.csv")));

  auto js = run({"regress", "--config", desk.config(), "--out", desk.path("json"), "--shares",
                 desk.path("out/daily_shares.csv"), "--format", "json", "--pairs", "1"});
  REQUIRE(js.code == 0);
  auto doc = nlohmann::json::parse(slurp(desk.path("json/regression.json")));
  REQUIRE(doc["results"].size() == 1);
  const auto& res = doc["results"][0];
  CHECK(res["pair_index"] == 1);
  CHECK(res["n_obs"].get<int>() > 0);
  CHECK(res["coefficients"][0]["term"] == "Intercept");
  CHECK(res["coefficients"][0].contains("std_error"));
  CHECK(res["coefficients"][0].contains("cell"));

  auto roll = run({"rollpoint", "--config", desk.config(), "--out", desk.path("out"), "--pairs", "1"});
  REQUIRE(roll.code == 0);
  auto rp = lines_of(slurp(desk.path("out/rollpoints.csv")));
  REQUIRE(rp.size() >= 2);
  CHECK(rp[1].starts_with("1,ZC_2015H,2015-03-13,"));
}

TEST_CASE("pairs filter restricts the analysis") {
  Desk desk("pairs");
  REQUIRE(run({"simulate", "--config", desk.config(), "--out", desk.path("data")}).code == 0);
  REQUIRE(run({"analyze", "--config", desk.config(), "--out", desk.path("out"), "--pairs", "1,2"}).code == 0);
  auto daily = lines_of(slurp(desk.path("out/daily_shares.csv")));
  for (std::size_t i = 1; i < daily.size(); ++i) {
    auto fields = pdisc::detail::split_fields(daily[i]);
    CHECK((fields[2] == "1" || fields[2] == "2"));
  }
  CHECK(daily.size() - 1 <= 80);
}

TEST_CASE("reruns produce byte-identical output trees") {
  Desk desk("determinism");
  auto tree = [](const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root))
      if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = slurp(e.path());
    return files;
  };
  REQUIRE(run({"simulate", "--config", desk.config(), "--out", desk.path("data"), "--seed", "99"}).code == 0);
  auto first_data = tree(desk.path("data"));
  REQUIRE(run({"analyze", "--config", desk.config(), "--out", desk.path("a"), "--threads", "1"}).code == 0);
  REQUIRE(run({"analyze", "--config", desk.config(), "--out", desk.path("b"), "--threads", "3"}).code == 0);
  CHECK(tree(desk.path("a")) == tree(desk.path("b")));

  fs::remove_all(desk.path("data"));
  REQUIRE(run({"simulate", "--config", desk.config(), "--out", desk.path("data"), "--seed", "99"}).code == 0);
  CHECK(tree(desk.path("data")) == first_data);
  auto manifest = nlohmann::json::parse(first_data.at("manifest.json"));
  CHECK(manifest["seed"] == 99);
}

TEST_CASE("no estimable days is a runtime failure with a diagnosis") {
  std::string text = kCornDesk;
  text.replace(text.find("min_updates = 100"), 17, "min_updates = 5000");
  Desk desk("thin", text);
  REQUIRE(run({"simulate", "--config", desk.config(), "--out", desk.path("data")}).code == 0);
  auto r = run({"analyze", "--config", desk.config(), "--out", desk.path("out")});
  CHECK(r.code == 1);
  CHECK(r.err.find("no estimable days") != std::string::npos);
  CHECK(r.err.find("too few price updates") != std::string::npos);
}

TEST_CASE("cattle template without a Cattle on Feed calendar drops CF with a warning") {
  const std::string cattle = R"([commodity]
name = "live_cattle"
symbol = "LE"
months = "G,J,M,Q,V,Z"
expiration_rule = "last_business_day"
session_start = "09:05:00"
session_end = "09:14:59"
template = "cattle"

[data]
ticks = "data/ticks"
settlements = "data/settlements.csv"

[pipeline]
lag_max = 3
pairs = "1"

[scenario]
seed = 3
days = 40
contracts = 2
delays = "0,3"
backwardation_days = "5-15"
)";
  Desk desk("cattle", cattle);
  REQUIRE(run({"simulate", "--config", desk.config(), "--out", desk.path("data")}).code == 0);
  REQUIRE(run({"analyze", "--config", desk.config(), "--out", desk.path("out")}).code == 0);
  auto r = run({"regress", "--config", desk.config(), "--out", desk.path("out")});
  REQUIRE(r.code == 0);
  CHECK(r.err.find("warning: regressor CF is constant") != std::string::npos);
  CHECK(r.out.find("CF") == std::string::npos);
  CHECK(r.out.find("Backwardation") != std::string::npos);
}
