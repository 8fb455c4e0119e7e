#include <catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "pdisc/market_data.hpp"

using namespace pdisc;

namespace {

Date ymd(int y, unsigned m, unsigned d) { return Date{std::chrono::year{y} / m / d}; }

std::int32_t clock(int h, int m, int s) { return h * 3600 + m * 60 + s; }

TickRecord tick(std::int32_t second, std::int64_t seq, double price, std::int64_t volume = 1,
                ContractId id = {"ZC", 2015, 9}, Date d = ymd(2015, 6, 1)) {
  return {d, second, seq, id, FixedPrice::from_double(price), volume};
}

TickParseResult parse(const std::string& text) {
  std::istringstream in(text);
  return parse_ticks(in);
}

}  // namespace

TEST_CASE("tick row maps fields directly") {
  auto r = parse("timestamp,sequence,contract,price,volume\n2015-06-01T09:30:00,17,ZC_2015U,364.25,5\n");
  REQUIRE(r.errors.empty());
  REQUIRE(r.records.size() == 1);
  const auto& t = r.records[0];
  CHECK(t.date == ymd(2015, 6, 1));
  CHECK(t.second == clock(9, 30, 0));
  CHECK(t.sequence == 17);
  CHECK(t.contract == ContractId{"ZC", 2015, 9});
  CHECK(t.price.micros == 364'250'000);
  CHECK(t.volume == 5);
}

TEST_CASE("ticks are ordered by timestamp then sequence") {
  auto r = parse(
      "timestamp,sequence,contract,price,volume\n"
      "2015-06-01T09:30:01,2,ZC_2015U,364.50,1\n"
      "2015-06-01T09:30:00,3,ZC_2015U,364.25,1\n"
      "2015-06-01T09:30:00,1,ZC_2015U,364.00,1\n");
  REQUIRE(r.records.size() == 3);
  CHECK(r.records[0].sequence == 1);
  CHECK(r.records[1].sequence == 3);
  CHECK(r.records[2].sequence == 2);
}

TEST_CASE("malformed rows are reported with line numbers") {
  auto r = parse(
      "timestamp,sequence,contract,price,volume\n"
      "2015-06-01T09:30:00,1,ZC_2015U,364.00,1\n"
      "2015-06-01T09:30:01,2,ZC_2015U,-1.0,1\n"
      "2015-06-01T09:30:02,3,ZC_2015U,364.00\n"
      "2015-06-01T09:30:03,4,ZC_2015U,364.00,-2\n"
      "2015-06-01T9:30:04,5,ZC_2015U,364.00,1\n"
      "2015-06-01T09:30:05,6,ZC-2015U,364.00,1\n");
  CHECK(r.records.size() == 1);
  REQUIRE(r.errors.size() == 5);
  CHECK(r.errors[0].line == 3);
  CHECK(r.errors[0].message == "non-positive price at line 3");
  CHECK(r.errors[1].line == 4);
  CHECK(r.errors[2].line == 5);
  CHECK(r.errors[3].line == 6);
  CHECK(r.errors[4].line == 7);
}

TEST_CASE("empty input is an empty list") {
  auto r = parse("");
  CHECK(r.records.empty());
  CHECK(r.errors.empty());
}

TEST_CASE("header problems and byte order mark") {
  auto bad = parse("time,seq\n2015-06-01T09:30:00,1,ZC_2015U,364.00,1\n");
  REQUIRE_FALSE(bad.errors.empty());
  CHECK(bad.errors[0].message == "bad header at line 1");
  auto bom = parse("\xEF\xBB\xBFtimestamp,sequence,contract,price,volume\r\n2015-06-01T09:30:00,1,ZC_2015U,364,1\r\n");
  CHECK(bom.errors.empty());
  CHECK(bom.records.size() == 1);
}

TEST_CASE("fixed prices parse exactly") {
  FixedPrice p;
  CHECK(FixedPrice::try_parse("364.25", p));
  CHECK(p.micros == 364'250'000);
  CHECK(FixedPrice::try_parse("0.000001", p));
  CHECK(p.micros == 1);
  CHECK_FALSE(FixedPrice::try_parse("1.0000001", p));
  CHECK_FALSE(FixedPrice::try_parse("abc", p));
  CHECK(FixedPrice{364'250'000}.to_string() == "364.250000");
}

TEST_CASE("first trade in a second sets its price") {
  Session s{clock(9, 30, 0), clock(9, 30, 5)};
  std::vector<TickRecord> ticks{tick(clock(9, 30, 0), 2, 101.0, 3), tick(clock(9, 30, 0), 1, 100.0, 2)};
  auto g = build_second_grid(ticks, s);
  REQUIRE(g.size() == 6);
  CHECK(g.prices[0].to_double() == 100.0);
  CHECK(g.observed[0] == 1);
  CHECK(g.total_volume == 5);
}

TEST_CASE("unobserved seconds carry the previous price forward") {
  Session s{clock(9, 30, 0), clock(9, 30, 3)};
  std::vector<TickRecord> ticks{tick(clock(9, 30, 0), 1, 100.0), tick(clock(9, 30, 2), 2, 100.5)};
  auto g = build_second_grid(ticks, s);
  CHECK(g.prices[1].to_double() == 100.0);
  CHECK(g.observed[1] == 0);
  CHECK(g.prices[2].to_double() == 100.5);
  CHECK(g.prices[3].to_double() == 100.5);
  CHECK(g.observed[3] == 0);
}

TEST_CASE("single trade gives a constant grid observed once") {
  Session s{clock(9, 30, 0), clock(9, 31, 0)};
  std::vector<TickRecord> ticks{tick(clock(9, 30, 0), 1, 250.0)};
  auto g = build_second_grid(ticks, s);
  CHECK(g.size() == 61);
  CHECK(std::count(g.observed.begin(), g.observed.end(), 1) == 1);
  CHECK(std::all_of(g.prices.begin(), g.prices.end(), [](FixedPrice p) { return p.to_double() == 250.0; }));
}

TEST_CASE("leading seconds before the first trade are outside the valid range") {
  Session s{clock(9, 30, 0), clock(9, 30, 9)};
  std::vector<TickRecord> ticks{tick(clock(9, 30, 4), 1, 100.0)};
  auto g = build_second_grid(ticks, s);
  CHECK(g.valid_begin() == 4);
  CHECK(g.prices[0].micros == 0);
}

TEST_CASE("no trades in session is an empty grid") {
  Session s{clock(9, 30, 0), clock(9, 30, 9)};
  std::vector<TickRecord> ticks{tick(clock(8, 0, 0), 1, 100.0, 7)};
  auto g = build_second_grid(ticks, s);
  CHECK(g.empty());
  CHECK(g.size() == 10);
  CHECK(g.total_volume == 0);
  CHECK(build_second_grid(std::vector<TickRecord>{}, s).empty());
}

TEST_CASE("grid rejects ticks from more than one contract") {
  Session s{clock(9, 30, 0), clock(9, 30, 9)};
  std::vector<TickRecord> ticks{tick(clock(9, 30, 0), 1, 100.0), tick(clock(9, 30, 1), 2, 100.0, 1, {"ZC", 2015, 12})};
  CHECK_THROWS_AS(build_second_grid(ticks, s), Error);
}

TEST_CASE("rebuilding a grid from its own trades changes nothing") {
  std::mt19937_64 rng(11);
  Session s{clock(9, 30, 0), clock(9, 40, 0)};
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<TickRecord> ticks;
    std::uniform_int_distribution<int> sec(s.start - 30, s.end + 30);
    std::uniform_int_distribution<int> cents(-200, 200);
    std::uniform_int_distribution<int> vol(0, 9);
    const int n = 1 + static_cast<int>(rng() % 400);
    for (int i = 0; i < n; ++i) ticks.push_back(tick(sec(rng), i + 1, 300.0 + cents(rng) / 100.0, vol(rng)));
    std::shuffle(ticks.begin(), ticks.end(), rng);
    auto g = build_second_grid(ticks, s);
    auto again = build_second_grid(emit_trades(g), s);
    CHECK(again.prices == g.prices);
    CHECK(again.observed == g.observed);
    CHECK(again.volumes == g.volumes);
    CHECK(again.total_volume == g.total_volume);
    CHECK(again.first_trade == g.first_trade);
  }
}

TEST_CASE("volume share and its complement") {
  CHECK(volume_share(700, 300) == 0.7);
  CHECK(volume_share(500, 500) == 0.5);
  CHECK(volume_share(0, 0) == 0.5);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::int64_t> v(0, 1'000'000);
  for (int i = 0; i < 1000; ++i) {
    auto a = v(rng), b = v(rng);
    double s = volume_share(a, b);
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
    CHECK(s + volume_share(b, a) == 1.0);
  }
}

namespace {

RollCalendar corn_calendar() {
  return RollCalendar("ZC", {3, 5, 7, 9, 12}, ExpirationRule::BusinessDayBefore15th, BusinessCalendar{}, 2014, 2017);
}

SecondGrid grid_for(const ContractId& id, Date d, Session s, double base, std::size_t first, std::int64_t volume,
                    double step = 0.25) {
  std::vector<TickRecord> ticks;
  std::int64_t seq = 0;
  for (std::size_t i = first; i < s.length(); ++i)
    ticks.push_back({d, s.start + static_cast<std::int32_t>(i), ++seq, id,
                     FixedPrice::from_double(base + step * static_cast<double>(i % 7)), 0});
  ticks.front().volume = volume;
  return build_second_grid(ticks, s);
}

}  // namespace

TEST_CASE("pairing picks the nearby and the k-th deferred") {
  auto cal = corn_calendar();
  Date d = ymd(2015, 2, 2);
  Session s{clock(9, 30, 0), clock(9, 59, 59)};
  ContractId mar{"ZC", 2015, 3}, may{"ZC", 2015, 5}, jul{"ZC", 2015, 7};
  std::map<ContractId, SecondGrid> grids;
  grids[mar] = grid_for(mar, d, s, 380.0, 3, 700);
  grids[may] = grid_for(may, d, s, 385.0, 10, 300);
  auto r = pair_contracts(grids, cal, 1, d);
  REQUIRE(std::holds_alternative<ContractPairDay>(r));
  const auto& p = std::get<ContractPairDay>(r);
  CHECK(p.nearby_id == mar);
  CHECK(p.deferred_id == may);
  CHECK(p.volume_share == 0.7);
  CHECK(p.nearby_grid.size() == p.deferred_grid.size());
  CHECK(p.nearby_grid.start == s.start + 10);
  CHECK(p.nearby_grid.start == p.deferred_grid.start);
  CHECK(p.days_to_expiration == cal.business().business_days_between(d, ymd(2015, 3, 13)));
  CHECK_FALSE(p.backwardation);

  auto missing = pair_contracts(grids, cal, 2, d);
  REQUIRE(std::holds_alternative<Skip>(missing));
  CHECK(std::get<Skip>(missing).reason == "missing deferred grid " + jul.to_string());
}

TEST_CASE("the nearby stays nearby through its expiration day") {
  auto cal = corn_calendar();
  // March 2015 corn expires Friday 13 March (business day before the 15th).
  CHECK(cal.contract_at(ymd(2015, 3, 13), 0)->id == ContractId("ZC", 2015, 3));
  CHECK(cal.contract_at(ymd(2015, 3, 16), 0)->id == ContractId("ZC", 2015, 5));
  CHECK(cal.days_to_expiration(ymd(2015, 3, 13)) == 0);
}

TEST_CASE("backwardation uses settlements and falls back to last trades") {
  auto cal = corn_calendar();
  Date d = ymd(2015, 2, 2);
  Session s{clock(9, 30, 0), clock(9, 39, 59)};
  ContractId mar{"ZC", 2015, 3}, may{"ZC", 2015, 5};
  std::map<ContractId, SecondGrid> grids;
  grids[mar] = grid_for(mar, d, s, 380.0, 0, 10);
  grids[may] = grid_for(may, d, s, 385.0, 0, 10);
  SettlementBook book;
  book[{d, mar}] = FixedPrice::from_double(381.0);
  book[{d, may}] = FixedPrice::from_double(379.5);
  auto with = std::get<ContractPairDay>(pair_contracts(grids, cal, 1, d, &book));
  CHECK(with.backwardation);
  auto without = std::get<ContractPairDay>(pair_contracts(grids, cal, 1, d));
  CHECK_FALSE(without.backwardation);
}

TEST_CASE("estimability thresholds") {
  auto cal = corn_calendar();
  Date d = ymd(2015, 2, 2);
  Session s{clock(9, 30, 0), clock(10, 59, 59)};
  ContractId mar{"ZC", 2015, 3}, may{"ZC", 2015, 5};

  auto pair_with = [&](SecondGrid a, SecondGrid b) {
    std::map<ContractId, SecondGrid> grids{{mar, std::move(a)}, {may, std::move(b)}};
    return std::get<ContractPairDay>(pair_contracts(grids, cal, 1, d));
  };

  SECTION("constant day") {
    auto p = pair_with(grid_for(mar, d, s, 380.0, 0, 1, 0.0), grid_for(may, d, s, 385.0, 0, 1));
    CHECK_FALSE(is_estimable(p, 100));
    CHECK(check_estimable(p, 100).reason == "constant price series");
  }
  SECTION("well above the threshold") {
    auto p = pair_with(grid_for(mar, d, s, 380.0, 0, 1), grid_for(may, d, s, 385.0, 0, 1));
    CHECK(check_estimable(p, 100).nearby_updates >= 5000);
    CHECK(is_estimable(p, 100));
  }
  SECTION("boundary") {
    // Prices alternate for exactly `updates` changes, then stay flat.
    auto alternating = [&](const ContractId& id, std::size_t updates) {
      std::vector<TickRecord> ticks;
      for (std::size_t i = 0; i < s.length(); ++i) {
        double px = 380.0 + ((i <= updates && i % 2 == 1) ? 0.25 : 0.0);
        if (i > updates) px = 380.0 + ((updates % 2 == 1) ? 0.25 : 0.0);
        ticks.push_back({d, s.start + static_cast<std::int32_t>(i), static_cast<std::int64_t>(i + 1), id,
                         FixedPrice::from_double(px), 1});
      }
      return build_second_grid(ticks, s);
    };
    auto exact = pair_with(alternating(mar, 100), alternating(may, 100));
    CHECK(check_estimable(exact, 100).nearby_updates == 100);
    CHECK(is_estimable(exact, 100));
    auto short_one = pair_with(alternating(mar, 99), alternating(may, 100));
    CHECK(check_estimable(short_one, 100).nearby_updates == 99);
    CHECK_FALSE(is_estimable(short_one, 100));
  }
}
