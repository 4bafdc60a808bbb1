#include <doctest.h>

#include <cmath>
#include <random>

#include "fails/analytics.hpp"
#include "fails/error.hpp"
#include "oracles.hpp"
#include "random_dataset.hpp"

using namespace fails;

namespace {

const Timestamp kT0 = Timestamp::from_civil(2023, 5, 1);

IncidentRecord incident(std::string id, std::set<std::string> services, Timestamp start,
                        std::optional<Timestamp> end = std::nullopt) {
  IncidentRecord r;
  r.incident_id = std::move(id);
  r.provider = services.begin()->substr(0, services.begin()->find('/'));
  r.services = std::move(services);
  r.title = "t";
  r.start = start;
  r.end = end;
  return r;
}

Timestamp hours(double h) { return kT0 + Seconds{static_cast<std::int64_t>(h * 3600)}; }

AnalysisSelection window(Timestamp from, Timestamp to, std::set<std::string> services) {
  return AnalysisSelection{from, to, std::move(services)};
}

DurationSamples samples(std::vector<DurationSecs> v) {
  return make_samples(GroupKey::service("openai/api"), std::move(v));
}

}  // namespace

TEST_CASE("worked examples") {
  SUBCASE("MTBF of starts 0h, 10h, 30h is 15h") {
    IncidentDataset d;
    d.records = {incident("a", {"openai/api"}, hours(0)), incident("b", {"openai/api"}, hours(10)),
                 incident("c", {"openai/api"}, hours(30))};
    const auto s = mtbf_samples(d, GroupKey::provider("openai"));
    CHECK(s.samples == std::vector<DurationSecs>{36000, 72000});
    CHECK(s.mean == 15.0 * 3600);
    CHECK(s.count == 2);
  }
  SUBCASE("MTTR of S1 00:00Z to S4 02:30Z is 9000 s") {
    IncidentDataset d;
    auto r = incident("a", {"openai/api"}, kT0, hours(2.5));
    r.stage_time(RecoveryStage::kInvestigating) = kT0;
    r.stage_time(RecoveryStage::kResolved) = hours(2.5);
    d.records = {r};
    const auto s = mttr_samples(d, GroupKey::service("openai/api"));
    CHECK(s.samples == std::vector<DurationSecs>{9000});
    CHECK(s.mean == 9000.0);
  }
  SUBCASE("availability with 6 h of coverage is 0.75") {
    IncidentDataset d;
    d.records = {incident("a", {"openai/api"}, hours(3), hours(9))};
    d.scraped_at = hours(48);
    const auto bins = daily_availability(d, "openai/api", window(kT0, kT0 + kDay, {"openai/api"}));
    REQUIRE(bins.bins.size() == 1);
    CHECK(bins.bins[0].value == 0.75);
    CHECK(bins.bins[0].label == "2023-05-01");
  }
  SUBCASE("ECDF of [1,2,3] at 2 is 2/3") {
    const auto e = ecdf(samples({1, 2, 3}));
    REQUIRE(e.points.size() == 3);
    CHECK(e.points[1].x == 2);
    CHECK(e.points[1].p == 2.0 / 3.0);
  }
  SUBCASE("r(0) is 1") {
    IncidentDataset d;
    d.records = {incident("a", {"openai/api"}, hours(1)), incident("b", {"openai/api"}, hours(50))};
    const auto acf = autocorrelation(d, window(kT0, kT0 + kDay * 5, {"openai/api"}), 3);
    CHECK(acf[0].value == 1.0);
  }
}

TEST_CASE("MTBF edge cases") {
  IncidentDataset d;
  d.records = {incident("a", {"openai/api"}, hours(0))};
  CHECK(mtbf_samples(d, GroupKey::provider("openai")).count == 0);
  d.records.push_back(incident("b", {"openai/api"}, hours(0)));
  CHECK(mtbf_samples(d, GroupKey::provider("openai")).samples == std::vector<DurationSecs>{0});
  CHECK_THROWS_AS(mtbf_samples(d, GroupKey::provider("nope")), Error);
  try {
    mttr_samples(d, GroupKey::service("openai/nope"));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnknownGroup);
  }
}

TEST_CASE("MTTR fallbacks and skips") {
  IncidentDataset d;
  auto open = incident("open", {"openai/api"}, hours(0));
  auto fallback = incident("fb", {"openai/api"}, hours(1), hours(3));  // no stage times
  auto equal = incident("eq", {"openai/api"}, hours(4), hours(4));
  equal.stage_time(RecoveryStage::kInvestigating) = hours(4);
  equal.stage_time(RecoveryStage::kResolved) = hours(4);
  d.records = {open, fallback, equal};
  const auto s = mttr_samples(d, GroupKey::provider("openai"));
  CHECK(s.samples == std::vector<DurationSecs>{7200, 0});
  CHECK(s.skipped == 1);
}

TEST_CASE("ECDF and boxplot examples") {
  CHECK_THROWS_AS(ecdf(samples({})), Error);
  const auto single = ecdf(samples({5}));
  REQUIRE(single.points.size() == 1);
  CHECK(single.points[0].p == 1.0);
  const auto ties = ecdf(samples({2, 2, 4}));
  REQUIRE(ties.points.size() == 2);
  CHECK(ties.points[0].x == 2);
  CHECK(ties.points[0].p == 2.0 / 3.0);
  CHECK(ties.points[1].p == 1.0);

  const auto b = boxplot(samples({1, 2, 3, 4, 5}));
  CHECK(b.q1 == 2);
  CHECK(b.median == 3);
  CHECK(b.q3 == 4);
  const auto one = boxplot(samples({7}));
  CHECK((one.min == 7 && one.q1 == 7 && one.median == 7 && one.q3 == 7 && one.max == 7));
  const auto out = boxplot(samples({1, 1, 1, 100}));
  CHECK(out.outliers == std::vector<double>{100});
  CHECK_THROWS_AS(boxplot(samples({})), Error);
}

TEST_CASE("co-occurrence examples") {
  IncidentDataset d;
  d.records = {incident("x", {"anthropic/api", "anthropic/claude", "anthropic/console"}, hours(0))};
  const auto h = cooccurrence_histogram(d, "anthropic");
  CHECK(h.bins.size() == 3);
  CHECK(h.bins[2].value == 1);
  CHECK(cooccurrence_histogram(d, "openai").total() == 0);
  CHECK_THROWS_AS(cooccurrence_histogram(d, "nope"), Error);

  IncidentDataset two;
  two.records = {incident("a", {"openai/api"}, hours(0)), incident("b", {"openai/chatgpt"}, hours(1))};
  const auto m = cooccurrence_matrix(two, {"openai/api", "openai/chatgpt", "openai/dalle"});
  CHECK(m.cells[0][1] == 0);
  CHECK(m.cells[0][0] == 1);
  const auto p = cooccurrence_probability(two, {"openai/api", "openai/chatgpt", "openai/dalle"});
  CHECK(p.cells[0][0] == 1.0);
  CHECK(p.cells[2] == std::vector<double>{0, 0, 0});
  CHECK_THROWS_AS(cooccurrence_matrix(two, {}), Error);
}

TEST_CASE("weekly and hourly boundaries") {
  IncidentDataset d;
  const Timestamp late = Timestamp::from_civil(2023, 5, 1, 23, 59);  // a Monday
  d.records = {incident("a", {"openai/api", "openai/chatgpt"}, late)};
  const auto sel = window(kT0, kT0 + kDay * 7, {"openai/api", "openai/chatgpt"});
  const auto w = weekly_overview(d, sel);
  REQUIRE(w.size() == 2);
  CHECK(w[0].second.bins.size() == 7);
  CHECK(w[0].second.bins[0].value == 1);
  CHECK(w[1].second.bins[0].value == 1);
  const auto h = hourly_overview(d, sel);
  CHECK(h[0].second.bins.size() == 24);
  CHECK(h[0].second.bins[23].value == 1);
}

TEST_CASE("availability uses the union of intervals") {
  IncidentDataset d;
  d.records = {incident("a", {"openai/api"}, hours(6), hours(12)),
               incident("b", {"openai/api"}, hours(6), hours(12)),
               incident("c", {"openai/api"}, hours(8), hours(10))};
  const auto sel = window(kT0, kT0 + kDay * 2, {"openai/api"});
  const auto bins = daily_availability(d, "openai/api", sel);
  REQUIRE(bins.bins.size() == 2);
  CHECK(bins.bins[0].value == 0.75);
  CHECK(bins.bins[1].value == 1.0);

  // Open incidents run until scraped_at.
  IncidentDataset open;
  open.records = {incident("o", {"openai/api"}, hours(12))};
  open.scraped_at = hours(30);
  const auto ob = daily_availability(open, "openai/api", sel);
  CHECK(ob.bins[0].value == 0.5);
  CHECK(ob.bins[1].value == 0.75);
}

TEST_CASE("autocorrelation errors and periodic series") {
  IncidentDataset flat;
  const auto sel = window(kT0, kT0 + kDay * 10, {"openai/api"});
  try {
    autocorrelation(flat, sel, 3);
    FAIL("constant series accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDegenerateSeries);
  }
  CHECK_THROWS_AS(autocorrelation(flat, sel, 9), Error);

  // One incident every seventh day over eight weeks.
  IncidentDataset weekly;
  for (int w = 0; w < 8; ++w) {
    weekly.records.push_back(incident("w" + std::to_string(w), {"openai/api"},
                                      kT0 + kDay * (7 * w) + Seconds{3600}));
  }
  const auto wsel = window(kT0, kT0 + kDay * 56, {"openai/api"});
  const auto acf = autocorrelation(weekly, wsel, 14);
  CHECK(acf[7].value > acf[3].value);
  const auto want = oracle::acf(oracle::daily_counts(weekly, wsel), 14);
  for (int k = 0; k <= 14; ++k) CHECK(oracle::close(acf[k].value, want[k]));
}

TEST_CASE("stage durations and status combinations") {
  IncidentDataset d;
  auto full = incident("full", {"openai/api"}, hours(0), hours(1));
  full.stage_time(RecoveryStage::kInvestigating) = hours(0);
  full.stage_time(RecoveryStage::kIdentified) = kT0 + Seconds{600};
  full.stage_time(RecoveryStage::kMonitoring) = kT0 + Seconds{2400};
  full.stage_time(RecoveryStage::kResolved) = kT0 + Seconds{3600};
  for (auto s : kAllStages) {
    if (full.stage_time(s)) full.updates.push_back({s, *full.stage_time(s), ""});
  }
  auto skip = incident("skip", {"openai/api"}, hours(2), hours(3));
  skip.stage_time(RecoveryStage::kInvestigating) = hours(2);
  skip.stage_time(RecoveryStage::kResolved) = hours(3);
  skip.updates = {{RecoveryStage::kInvestigating, hours(2), ""}, {RecoveryStage::kResolved, hours(3), ""}};
  auto backwards = incident("back", {"openai/api"}, hours(4), hours(5));
  backwards.stage_time(RecoveryStage::kInvestigating) = hours(4.5);
  backwards.stage_time(RecoveryStage::kIdentified) = hours(4);
  auto bare = incident("bare", {"openai/api"}, hours(6));
  d.records = {full, skip, backwards, bare};

  const auto sel = window(kT0, kT0 + kDay, {"openai/api"});
  const auto sd = stage_durations(d, sel);
  CHECK(sd.by_transition.at(Transition::kInvestigatingToIdentified).samples ==
        std::vector<DurationSecs>{600});
  CHECK(sd.by_transition.at(Transition::kIdentifiedToMonitoring).samples ==
        std::vector<DurationSecs>{1800});
  CHECK(sd.by_transition.at(Transition::kMonitoringToResolved).samples ==
        std::vector<DurationSecs>{1200});
  CHECK(sd.negative_excluded == 1);

  CHECK(status_combination_label(full) == "S1+S2+S3+S4");
  CHECK(status_combination_label(skip) == "S1+S4");
  CHECK(status_combination_label(bare) == "(none)");
  const auto sc = status_combinations(d, sel);
  CHECK(sc.total() == 4);
}

TEST_CASE("impact distribution, counts, timelines and summary") {
  IncidentDataset d;
  auto a = incident("a", {"openai/api"}, hours(0), hours(1));
  a.impact = {ImpactLevel::kCritical, 5};
  auto b = incident("b", {"openai/chatgpt", "openai/api"}, hours(0.5), hours(2));
  b.impact = {ImpactLevel::kCritical, 5};
  auto c = incident("c", {"anthropic/claude"}, hours(30));
  c.impact = {ImpactLevel::kMaintenance, 1};
  d.records = {a, b, c};
  d.scraped_at = hours(40);

  const auto sel = window(kT0, kT0 + kDay * 3, {"openai/api", "openai/chatgpt", "anthropic/claude"});
  const auto imp = impact_distribution(d, sel);
  REQUIRE(imp.size() == 2);
  CHECK(imp[0].provider == "openai");
  CHECK(imp[0].bins.bins[4].value == 2);
  CHECK(imp[0].mean == 5.0);
  CHECK(imp[1].bins.bins[0].value == 1);

  const auto counts = incident_counts(d, sel);
  CHECK(counts[0] == std::pair<std::string, std::size_t>{"openai/chatgpt", 1});
  CHECK(counts[1] == std::pair<std::string, std::size_t>{"openai/api", 2});

  const auto tl = timeline_intervals(d, sel);
  CHECK(tl[1].second.size() == 2);  // overlapping intervals are not merged
  CHECK(tl[2].second[0].open);
  CHECK(tl[2].second[0].end == hours(40));

  const auto summary = dataset_summary(d);
  REQUIRE(summary.size() == 2);
  CHECK(summary[0].reports == 2);
  CHECK(summary[1].maintenance == 1);
  CHECK(summary[1].first_date == "2023-05-02");
  CHECK(dataset_summary(IncidentDataset{}).empty());

  const auto empty_sel = window(hours(100), hours(200), {"openai/api"});
  CHECK(impact_distribution(d, empty_sel)[0].bins.total() == 0);
  CHECK(timeline_intervals(d, empty_sel)[0].second.empty());

  const auto five = testing::five_incident_dataset();
  const auto s5 = dataset_summary(five);
  REQUIRE(s5.size() == 2);
  CHECK(s5[0].reports == 3);
  CHECK(s5[1].reports == 2);
}

TEST_CASE("every operation agrees with the brute-force oracles on random datasets") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 200; ++i) {
    const IncidentDataset d = testing::random_dataset(rng);
    const AnalysisSelection sel = testing::random_selection(rng, d);
    const auto issues = oracle::compare_all(d, sel);
    for (const auto& line : issues) MESSAGE("dataset " << i << ": " << line);
    CHECK(issues.empty());
  }
}

TEST_CASE("analytics invariants hold on random datasets") {
  std::mt19937_64 rng(99);
  const Registry& reg = builtin_registry();
  for (int i = 0; i < 100; ++i) {
    const IncidentDataset d = testing::random_dataset(rng);
    const AnalysisSelection sel = testing::random_selection(rng, d);
    for (const auto& p : reg.providers()) {
      const auto m = mtbf_samples(d, GroupKey::provider(p.id));
      std::size_t n = 0;
      for (const auto& r : d.records) n += r.provider == p.id ? 1 : 0;
      CHECK(m.count == (n == 0 ? 0 : n - 1));
      for (auto s : m.samples) CHECK(s >= 0);
      const auto t = mttr_samples(d, GroupKey::provider(p.id));
      for (auto s : t.samples) CHECK(s >= 0);
      if (!t.samples.empty()) {
        const auto e = ecdf(t);
        CHECK(e.points.back().p == 1.0);
        for (std::size_t k = 1; k < e.points.size(); ++k) {
          CHECK(e.points[k - 1].p <= e.points[k].p);
          CHECK(e.points[k - 1].x < e.points[k].x);
        }
        const auto b = boxplot(t);
        CHECK((b.min <= b.q1 && b.q1 <= b.median && b.median <= b.q3 && b.q3 <= b.max));
      }
    }
    const auto subset = filter_selection(d, sel);
    std::vector<std::string> services = reg.ordered(sel.services);
    const auto m = cooccurrence_matrix(subset, services);
    const auto counts = incident_counts(d, sel);
    for (std::size_t a = 0; a < services.size(); ++a) {
      CHECK(m.cells[a][a] == static_cast<double>(counts[a].second));
      for (std::size_t b = 0; b < services.size(); ++b) {
        CHECK(m.cells[a][b] == m.cells[b][a]);
        CHECK(m.cells[a][b] <= std::min(m.cells[a][a], m.cells[b][b]));
      }
    }
    const auto p = cooccurrence_probability(subset, services);
    for (std::size_t a = 0; a < services.size(); ++a) {
      for (double v : p.cells[a]) CHECK((v >= 0.0 && v <= 1.0));
      if (m.cells[a][a] > 0) CHECK(p.cells[a][a] == 1.0);
    }
    for (const auto& s : services) {
      for (const auto& b : daily_availability(d, s, sel).bins) {
        CHECK((b.value >= 0.0 && b.value <= 1.0));
      }
    }
    try {
      const int lag = std::min(kDefaultMaxLag, static_cast<int>(selection_days(sel).size()) - 2);
      if (lag >= 1) {
        const auto acf = autocorrelation(d, sel, lag);
        CHECK(acf[0].value == doctest::Approx(1.0));
        for (const auto& pt : acf) CHECK(std::fabs(pt.value) <= 1.0 + 1e-12);
      }
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kDegenerateSeries);
    }
  }
}

TEST_CASE("adding coverage never raises availability") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    IncidentDataset d = testing::random_dataset(rng);
    const AnalysisSelection sel = full_selection(d, builtin_registry());
    const auto before = daily_availability(d, "openai/api", sel);
    IncidentRecord extra;
    extra.incident_id = "extra";
    extra.provider = "openai";
    extra.services = {"openai/api"};
    extra.start = sel.from + Seconds{std::uniform_int_distribution<int>(0, 86400 * 3)(rng)};
    extra.end = extra.start + Seconds{std::uniform_int_distribution<int>(0, 86400)(rng)};
    d.records.push_back(extra);
    const auto after = daily_availability(d, "openai/api", sel);
    REQUIRE(before.bins.size() == after.bins.size());
    for (std::size_t k = 0; k < before.bins.size(); ++k) {
      CHECK(after.bins[k].value <= before.bins[k].value);
    }
  }
}
