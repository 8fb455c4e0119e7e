#include <catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "pdisc/determinants.hpp"

using namespace pdisc;
using Catch::Approx;
using econ::RankCategory;

namespace {

Date ymd(int y, unsigned m, unsigned d) { return Date{std::chrono::year{y} / m / d}; }

std::vector<Date> business_days(Date from, int n, const BusinessCalendar& cal) {
  std::vector<Date> out;
  Date d = cal.is_business_day(from) ? from : cal.next_business_day(from);
  for (int i = 0; i < n; ++i, d = cal.next_business_day(d)) out.push_back(d);
  return out;
}

DeterminantRow row(Date d, std::optional<double> ps, double vs = 0.5, int dte = 20, bool back = false,
                   RankCategory cat = RankCategory::Cointegration) {
  DeterminantRow r;
  r.date = d;
  r.combined_ps = ps;
  r.volume_share = vs;
  r.days_to_expiration = dte;
  r.backwardation = back;
  r.category = ps ? cat : RankCategory::NonCointegration;
  return r;
}

// PS = 0.1 + 0.7 VS + crash_effect * Crash + noise over consecutive business days.
struct Sample {
  std::vector<DeterminantRow> rows;
  EventCalendar events;
};

Sample recovery_sample(int n, double crash_effect, std::uint64_t seed) {
  BusinessCalendar cal;
  auto dates = business_days(ymd(2008, 1, 2), n, cal);
  const DateWindow crash{dates[static_cast<std::size_t>(n / 3)], dates[static_cast<std::size_t>(n / 3 + n / 8)]};
  EventCalendar events({}, {}, {crash}, cal);
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> vs(0.05, 0.95);
  std::uniform_int_distribution<int> dte(1, 60);
  std::normal_distribution<double> noise(0.0, 0.1);
  Sample s{{}, events};
  for (const Date d : dates) {
    const double v = vs(gen);
    const double ps = 0.1 + 0.7 * v + (events.in_crash(d) ? crash_effect : 0.0) + noise(gen);
    s.rows.push_back(row(d, ps, v, dte(gen), gen() % 5 == 0));
  }
  return s;
}

}  // namespace

TEST_CASE("report dummies in the design") {
  BusinessCalendar cal;
  std::multimap<Date, std::string> releases{{ymd(2015, 1, 12), "WASDE"},
                                            {ymd(2015, 1, 13), "CP"},
                                            {ymd(2015, 1, 14), "GRAINSTOCKS"},
                                            {ymd(2015, 1, 16), "CF"}};
  EventCalendar events(releases, {"CF"}, {}, cal);
  std::vector<DeterminantRow> rows;
  for (Date d : business_days(ymd(2015, 1, 12), 10, cal)) rows.push_back(row(d, 0.5, 0.5, 20));

  auto corn = build_design(rows, events, RegressionSpec::from_template(RegressionTemplate::Corn));
  auto col = [](const Design& d, const std::string& name) {
    auto it = std::find(d.names.begin(), d.names.end(), name);
    REQUIRE(it != d.names.end());
    return d.X.col(it - d.names.begin());
  };
  auto wasde = col(corn, "WASDE&CP");
  CHECK(wasde(0) == 1.0);  // WASDE on its release day
  CHECK(wasde(1) == 1.0);  // Crop Production counts too
  CHECK(wasde(2) == 0.0);
  CHECK(col(corn, "Grainstocks")(2) == 1.0);

  auto cattle = build_design(rows, events, RegressionSpec::from_template(RegressionTemplate::Cattle));
  auto cf = col(cattle, "CF");
  // Friday 16 January release fires on Monday 19 January.
  CHECK(cattle.dates[4] == ymd(2015, 1, 16));
  CHECK(cf(4) == 0.0);
  CHECK(cattle.dates[5] == ymd(2015, 1, 19));
  CHECK(cf(5) == 1.0);
  CHECK(cf.sum() == 1.0);
}

TEST_CASE("days without a share are excluded") {
  BusinessCalendar cal;
  EventCalendar events({}, {}, {}, cal);
  auto dates = business_days(ymd(2015, 2, 2), 6, cal);
  std::vector<DeterminantRow> rows;
  for (std::size_t i = 0; i < dates.size(); ++i)
    rows.push_back(row(dates[i], i == 2 ? std::nullopt : std::optional(0.1 * static_cast<double>(i)), 0.1 * static_cast<double>(i), static_cast<int>(i)));
  auto d = build_design(rows, events, {{"Volumeshare", "Expiration"}});
  CHECK(d.y.size() == 5);
  CHECK(std::find(d.dates.begin(), d.dates.end(), dates[2]) == d.dates.end());
}

TEST_CASE("constant regressors are dropped with a notice") {
  BusinessCalendar cal;
  EventCalendar events({}, {}, {}, cal);
  std::vector<DeterminantRow> rows;
  int i = 0;
  for (Date d : business_days(ymd(2015, 2, 2), 20, cal)) rows.push_back(row(d, 0.5 + 0.01 * i, 0.3 + 0.02 * i, 30 - i)), ++i;
  auto d = build_design(rows, events, RegressionSpec::from_template(RegressionTemplate::Cattle));
  CHECK(d.names == std::vector<std::string>{"Intercept", "Volumeshare", "Expiration", "Expiration^2"});
  REQUIRE(d.notices.size() == 4);
  CHECK(d.notices[0].find("Backwardation") != std::string::npos);
  CHECK(d.notices[1].find("CF") != std::string::npos);
}

TEST_CASE("collinear regressors raise a singular design error") {
  BusinessCalendar cal;
  EventCalendar events({}, {}, {}, cal);
  std::vector<DeterminantRow> rows;
  int i = 0;
  // Expiration is an affine function of Volumeshare here.
  for (Date d : business_days(ymd(2015, 2, 2), 30, cal)) rows.push_back(row(d, 0.4 + 0.003 * (i * i % 7), 0.01 * i, 10 + i)), ++i;
  auto d = build_design(rows, events, {{"Volumeshare", "Expiration"}});
  CHECK_THROWS_AS(estimate(d), econ::SingularDesignError);
}

TEST_CASE("dummies are binary and the squared term is exact") {
  auto s = recovery_sample(400, -0.05, 3);
  auto d = build_design(s.rows, s.events, RegressionSpec::from_template(RegressionTemplate::Corn));
  for (std::size_t j = 0; j < d.names.size(); ++j) {
    const auto& name = d.names[j];
    const auto col = d.X.col(static_cast<Eigen::Index>(j));
    if (name == "Backwardation" || name == "Crash" || name == "Stationarity")
      CHECK((col.array() == 0.0 || col.array() == 1.0).all());
  }
  auto idx = [&](const std::string& n) { return std::find(d.names.begin(), d.names.end(), n) - d.names.begin(); };
  for (Eigen::Index i = 0; i < d.X.rows(); ++i) {
    const double e = d.X(i, idx("Expiration"));
    CHECK(d.X(i, idx("Expiration^2")) == e * e);
  }
}

TEST_CASE("regression recovers the volume-share effect at T = 1900") {
  auto s = recovery_sample(1900, 0.0, 7);
  auto d = build_design(s.rows, s.events, {{"Volumeshare", "Expiration", "Expiration^2", "Backwardation"}});
  auto r = estimate(d);
  CHECK(r.n_obs == 1900);
  CHECK(r.find("Volumeshare")->estimate == Approx(0.7).margin(0.05));
  CHECK(r.find("Intercept")->estimate == Approx(0.1).margin(0.05));
  CHECK(r.find("Backwardation")->estimate == Approx(0.0).margin(0.03));
  CHECK(r.find("Expiration")->estimate == Approx(0.0).margin(0.005));
  CHECK(r.find("Volumeshare")->stars == "***");
  for (const auto& c : r.coefficients) {
    CHECK(std::isfinite(c.std_error));
    CHECK(c.std_error > 0.0);
  }
}

TEST_CASE("regression recovers an injected crash effect") {
  auto s = recovery_sample(1900, -0.05, 8);
  auto d = build_design(s.rows, s.events, RegressionSpec::from_template(RegressionTemplate::Corn));
  auto r = estimate(d);
  CHECK(r.find("Volumeshare")->estimate == Approx(0.7).margin(0.05));
  CHECK(r.find("Crash")->estimate == Approx(-0.05).margin(0.03));
}

TEST_CASE("constant dependent variable gives zero slopes") {
  auto s = recovery_sample(200, 0.0, 9);
  for (auto& r : s.rows) r.combined_ps = 0.6;
  auto res = estimate(build_design(s.rows, s.events, {{"Volumeshare", "Expiration"}}));
  CHECK(res.find("Intercept")->estimate == Approx(0.6).margin(1e-10));
  CHECK(res.find("Volumeshare")->estimate == Approx(0.0).margin(1e-10));
  CHECK(res.find("Expiration")->estimate == Approx(0.0).margin(1e-10));
  CHECK(res.adj_r2 <= 0.0);
}

TEST_CASE("estimation does not depend on row order") {
  auto s = recovery_sample(300, -0.05, 10);
  const RegressionSpec spec = RegressionSpec::from_template(RegressionTemplate::Corn);
  auto a = estimate(build_design(s.rows, s.events, spec));
  std::mt19937_64 gen(1);
  std::shuffle(s.rows.begin(), s.rows.end(), gen);
  auto b = estimate(build_design(s.rows, s.events, spec));
  REQUIRE(a.coefficients.size() == b.coefficients.size());
  CHECK(a.hac_bandwidth == b.hac_bandwidth);
  for (std::size_t j = 0; j < a.coefficients.size(); ++j) {
    CHECK(a.coefficients[j].estimate == b.coefficients[j].estimate);
    CHECK(a.coefficients[j].std_error == b.coefficients[j].std_error);
  }

  // Shuffling the rows of an already built design also leaves the fit unchanged.
  auto d = build_design(s.rows, s.events, spec);
  Design shuffled = d;
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(d.X.rows()));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  std::shuffle(perm.begin(), perm.end(), gen);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    shuffled.X.row(static_cast<Eigen::Index>(i)) = d.X.row(perm[i]);
    shuffled.y(static_cast<Eigen::Index>(i)) = d.y(perm[i]);
    shuffled.dates[i] = d.dates[static_cast<std::size_t>(perm[i])];
  }
  auto c = estimate(shuffled);
  for (std::size_t j = 0; j < a.coefficients.size(); ++j) CHECK(c.coefficients[j].std_error == a.coefficients[j].std_error);
}

TEST_CASE("p-values and stars follow two-sided t tests") {
  CHECK(significance_stars(0.04) == "**");
  CHECK(significance_stars(0.009) == "***");
  CHECK(significance_stars(0.07) == "*");
  CHECK(significance_stars(0.10) == "");
  CHECK(significance_stars(std::numeric_limits<double>::quiet_NaN()) == "");

  auto s = recovery_sample(500, 0.0, 11);
  auto r = estimate(build_design(s.rows, s.events, {{"Volumeshare"}}));
  const auto* c = r.find("Volumeshare");
  boost::math::students_t t(static_cast<double>(r.n_obs - 2));
  CHECK(c->p_value == Approx(2.0 * (1.0 - boost::math::cdf(t, std::abs(c->estimate / c->std_error)))).margin(1e-12));
}

TEST_CASE("table cells round to three decimals") {
  CHECK(format_cell(0.7333, 0.0241, "") == "0.733 (0.024)");
  CHECK(format_cell(0.7333, 0.0241, "***") == "0.733*** (0.024)");
  CHECK(format_cell(-0.00001, 0.0004, "") == "0.000 (0.000)");
}

TEST_CASE("report table has one column per pair") {
  RegressionResult r;
  r.pair_index = 1;
  r.n_obs = 1900;
  r.adj_r2 = 0.41234;
  r.coefficients = {{"Intercept", 0.1, 0.01, 10.0, 0.0, "***"}, {"Volumeshare", 0.7333, 0.0241, 30.4, 0.0, "***"}};
  auto text = report_table({r});
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  REQUIRE(lines.size() == 6);
  CHECK(lines[0].find("Nearby and Deferred 1") != std::string::npos);
  CHECK(lines[1].starts_with("Intercept"));
  CHECK(lines[2].find("0.733*** (0.024)") != std::string::npos);
  CHECK(lines[3].find("0.412") != std::string::npos);
  CHECK(lines[4].find("1900") != std::string::npos);

  RegressionResult r2 = r;
  r2.pair_index = 2;
  r2.coefficients.push_back({"Crash", -0.05, 0.01, -5.0, 0.0, "***"});
  auto two = report_table({r, r2});
  CHECK(two.find("Nearby and Deferred 2") != std::string::npos);
  CHECK(two.find("-0.050*** (0.010)") != std::string::npos);
}
