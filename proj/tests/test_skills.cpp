#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <random>

#include "deckforge/json_io.hpp"
#include "deckforge/skills.hpp"
#include "fixtures.hpp"

using namespace deckforge;
using namespace deckforge::skills;
using fixtures::code_of;
using fixtures::day;

namespace {

ExecutionContext make_ctx(const DataCatalog& c) {
  ExecutionContext ctx;
  ctx.data = &c;
  ctx.today = day("2025-01-15");
  return ctx;
}

ResolvedIntent intent(std::string action, std::string object, std::string data, std::string deck = "d") {
  return {std::move(action), std::move(object), std::move(data), std::move(deck), {}};
}

// Monday key computed from the day count: 1970-01-05 was a Monday.
long monday_key(Date d) {
  const long n = std::chrono::sys_days{d}.time_since_epoch().count();
  return n - (((n - 4) % 7) + 7) % 7;
}

std::map<long, std::vector<const OhlcvPoint*>> by_week(const TimeSeries& s) {
  std::map<long, std::vector<const OhlcvPoint*>> out;
  for (const auto& p : s.points()) out[monday_key(p.date)].push_back(&p);
  return out;
}

}  // namespace

TEST_CASE("catalog scans files and sector directories") {
  fixtures::TempDir dir("catalog");
  {
    std::ofstream(dir.path / "TSLA.csv") << to_csv(fixtures::series("TSLA", 1, 30));
    std::filesystem::create_directories(dir.path / "Energy");
    std::ofstream(dir.path / "Energy" / "XOM.csv") << to_csv(fixtures::series("XOM", 2, 30));
    std::ofstream(dir.path / "Energy" / "BP.csv") << to_csv(fixtures::series("BP", 3, 30));
    std::ofstream(dir.path / "notes.txt") << "ignored";
  }
  const auto c = DataCatalog::from_directory(dir.path);
  CHECK(c.names().size() == 2);
  CHECK(c.has("tsla"));
  CHECK(c.canonical_name("energy") == "Energy");
  const auto& e = c.get("ENERGY");
  REQUIRE(e.series.size() == 2);
  CHECK(e.series[0].size() == 30);
  CHECK(code_of([&] { c.get("nothing"); }) == ErrorCode::kData);
  CHECK(DataCatalog::from_directory(dir.path / "missing").names().empty());
}

TEST_CASE("weekly aggregation against a per-week oracle") {
  const auto s = fixtures::series("X", 5, 120);
  for (auto metric : {AggregationMetric::kMean, AggregationMetric::kMedian}) {
    const auto w = weekly_close(s, metric);
    const auto groups = by_week(s);
    REQUIRE(w.weeks.size() == groups.size());
    std::size_t i = 0;
    for (const auto& [key, pts] : groups) {
      std::vector<double> closes;
      for (const auto* p : pts) closes.push_back(p->close);
      double expected = 0;
      if (metric == AggregationMetric::kMean) {
        for (double c : closes) expected += c;
        expected /= closes.size();
      } else {
        std::sort(closes.begin(), closes.end());
        const std::size_t n = closes.size();
        expected = n % 2 ? closes[n / 2] : (closes[n / 2 - 1] + closes[n / 2]) / 2;
      }
      CHECK(monday_key(w.weeks[i]) == key);
      CHECK(w.values[i] == doctest::Approx(expected).epsilon(1e-12));
      ++i;
    }
  }
  const auto v = weekly_volume(s);
  std::size_t i = 0;
  for (const auto& [key, pts] : by_week(s)) {
    double total = 0;
    for (const auto* p : pts) total += p->volume;
    CHECK(v.values[i++] == total);
  }
}

TEST_CASE("analysis series adds comparable firms to a single ticker") {
  const auto c = fixtures::demo_catalog();
  auto ctx = make_ctx(c);
  const auto s = analysis_series(intent("create", "linechart", "TSLA"), ctx);
  REQUIRE(s.size() == 5);
  CHECK(s[0].name() == "TSLA");
  CHECK(s[1].name() == "F");
  ctx.parameters.comparable_firms = {"TSLA", "GM"};
  CHECK(analysis_series(intent("create", "linechart", "TSLA"), ctx).size() == 2);
  ctx.parameters.comparable_firms = {"ZZZ"};
  CHECK(code_of([&] { analysis_series(intent("create", "linechart", "TSLA"), ctx); }) == ErrorCode::kData);
  CHECK(analysis_series(intent("create", "linechart", "Energy"), ctx).size() == 4);
}

TEST_CASE("horizon slices end at the subject's last date") {
  const auto c = fixtures::demo_catalog();
  const auto& e = c.get("Energy").series;
  const auto slices = horizon_slices(e, 2);
  REQUIRE(slices.size() == 4);
  for (const auto& s : slices) CHECK(s.points().back().date == e[0].points().back().date);
}

TEST_CASE("atomic skills create, update and delete by title") {
  const auto c = fixtures::demo_catalog();
  const auto ctx = make_ctx(c);
  const SkillLibrary lib;
  CHECK(lib.atomic_names() == std::vector<std::string>{"barchart", "linechart", "piechart", "table"});
  Deck d{"d", {}, {}};
  d = lib.execute_atomic(intent("create", "piechart", "Energy"), d, ctx);
  d = lib.execute_atomic(intent("create", "table", "TSLA"), d, ctx);
  REQUIRE(d.slides.size() == 2);
  CHECK(d.slides[0].title() == "Energy volume share");
  const auto& pie = std::get<ChartSpec>(d.slides[0].objects()[0]);
  CHECK(pie.kind() == ChartKind::kPie);
  CHECK(pie.x_labels() == std::vector<std::string>{"BP", "CVX", "SHEL", "XOM"});
  CHECK(std::get<Table>(d.slides[1].objects()[0]).rows.size() == 5);

  const Deck same = lib.execute_atomic(intent("update", "piechart", "Energy"), d, ctx);
  CHECK(same == d);
  d = lib.execute_atomic(intent("delete", "piechart", "Energy"), d, ctx);
  CHECK(d.slides.size() == 1);
  CHECK(code_of([&] { lib.execute_atomic(intent("delete", "piechart", "Energy"), d, ctx); }) ==
        ErrorCode::kTargetNotFound);
  CHECK(code_of([&] { lib.execute_atomic(intent("explode", "piechart", "Energy"), d, ctx); }) ==
        ErrorCode::kValidation);
  CHECK(code_of([&] { lib.execute_atomic(intent("create", "heatmap", "Energy"), d, ctx); }) ==
        ErrorCode::kNoSuchSkill);
  CHECK(code_of([&] { lib.execute_atomic(intent("create", "piechart", "Nowhere"), d, ctx); }) == ErrorCode::kData);
}

TEST_CASE("user-facing slides carry at most k insights") {
  const auto c = fixtures::demo_catalog();
  auto ctx = make_ctx(c);
  const SkillLibrary lib;
  for (std::size_t k : {1u, 2u, 3u}) {
    ctx.scoring.k = k;
    for (const char* obj : {"piechart", "barchart", "linechart", "table"}) {
      const Slide s = lib.build_slide(intent("create", obj, "Energy"), ctx);
      for (const auto& o : s.objects()) {
        if (const auto* b = std::get_if<InsightBlock>(&o)) CHECK(b->lines.size() <= k);
      }
    }
  }
}

TEST_CASE("the briefing macro builds ten slides within the horizon") {
  const auto c = fixtures::demo_catalog();
  auto ctx = make_ctx(c);
  const SkillLibrary lib;
  auto inv = intent("create", std::string(kBriefingMacro), "TSLA", "tslabriefing");
  inv.extra_params["ticker"] = "TSLA";
  Deck d = lib.execute_macro(kBriefingMacro, inv, Deck{"tslabriefing", {}, {}}, ctx);
  REQUIRE(d.slides.size() == 10);
  CHECK(d.slides[0].title() == "TSLA share price performance");
  const auto& chart = std::get<ChartSpec>(d.slides[0].objects()[0]);
  CHECK(chart.series().size() == 5);
  const auto last = c.get("TSLA").series[0].points().back().date;
  const auto first_week = parse_iso_date(chart.x_labels().front());
  CHECK(std::chrono::sys_days{first_week} >= std::chrono::sys_days{last - std::chrono::months(3)} - std::chrono::days{7});

  ctx.parameters.aggregation_metric = AggregationMetric::kMedian;
  const Deck m = lib.execute_macro(kBriefingMacro, inv, Deck{"tslabriefing", {}, {}}, ctx);
  CHECK(std::get<ChartSpec>(m.slides[0].objects()[0]) != chart);
  CHECK(lib.execute_macro(kBriefingMacro, inv, Deck{"tslabriefing", {}, {}}, ctx) == m);
}

TEST_CASE("macro execution equals stepwise atomic execution") {
  const auto c = fixtures::demo_catalog();
  const auto ctx = make_ctx(c);
  SkillLibrary lib;
  std::mt19937_64 rng(8);
  const std::vector<std::string> objs{"piechart", "barchart", "linechart", "table"};
  const std::vector<std::string> data{"Energy", "TSLA", "AAPL"};
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ResolvedIntent> history;
    const int n = 1 + static_cast<int>(rng() % 4);
    for (int i = 0; i < n; ++i) history.push_back(intent("create", objs[rng() % 4], data[rng() % 3]));
    const std::string name = "m" + std::to_string(trial);
    lib.record_macro(history, name);
    const auto inv = intent("create", name, "", "target");
    const Deck via_macro = lib.execute(inv, Deck{"target", {}, {}}, ctx);
    Deck stepwise{"target", {}, {}};
    for (const auto& step : lib.expand_macro(name, inv)) stepwise = lib.execute_atomic(step, stepwise, ctx);
    CHECK(serialize_deck(via_macro) == serialize_deck(stepwise));
  }
}

TEST_CASE("macro failures name the step and leave the deck alone") {
  const auto c = fixtures::demo_catalog();
  const auto ctx = make_ctx(c);
  SkillLibrary lib;
  lib.record_macro(std::vector<ResolvedIntent>{intent("create", "piechart", "Energy"),
                                               intent("update", "table", "Energy")},
                   "broken");
  const Deck before{"d", {}, {}};
  try {
    lib.execute_macro("broken", intent("create", "broken", "", "d"), before, ctx);
    FAIL("expected a macro step error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMacroStep);
    CHECK(std::string(e.what()).find("step 1") != std::string::npos);
    CHECK(std::string(e.what()).find("TARGET_NOT_FOUND") != std::string::npos);
  }
  CHECK(before.slides.empty());
}

TEST_CASE("invocation data overrides recorded step data") {
  SkillLibrary lib;
  lib.record_macro(std::vector<ResolvedIntent>{intent("create", "piechart", "Energy")}, "pies");
  auto inv = intent("create", "pies", "Finance", "x");
  inv.extra_params["ticker"] = "T";
  const auto steps = lib.expand_macro("pies", inv);
  REQUIRE(steps.size() == 1);
  CHECK(steps[0].data_ref == "Finance");
  CHECK(steps[0].presentation == "x");
  CHECK(steps[0].extra_params.at("ticker") == "T");
  CHECK(lib.expand_macro("pies", intent("create", "pies", "", "y"))[0].data_ref == "Energy");
}

TEST_CASE("recording and persisting macros") {
  SkillLibrary lib;
  auto kb = kb::make_kb(kb::Variant::kRobust);
  CHECK(code_of([&] { lib.record_macro({}, "x", kb.get()); }) == ErrorCode::kNothingToSave);
  const std::vector<ResolvedIntent> h{intent("create", "piechart", "Energy"), intent("create", "table", "TSLA")};
  CHECK(code_of([&] { lib.record_macro(h, "", kb.get()); }) == ErrorCode::kValidation);
  CHECK(code_of([&] { lib.record_macro(h, "piechart", kb.get()); }) == ErrorCode::kNameTaken);
  CHECK(code_of([&] { lib.record_macro(h, std::string(kBriefingMacro), kb.get()); }) == ErrorCode::kNameTaken);
  lib.record_macro(h, "overview", kb.get());
  CHECK(kb->ontology().contains("object", "overview"));
  CHECK(code_of([&] { lib.record_macro(h, "overview", kb.get()); }) == ErrorCode::kNameTaken);
  // Nested macros are flattened.
  lib.record_macro(std::vector<ResolvedIntent>{intent("create", "overview", ""), intent("create", "barchart", "F")},
                   "bigger", kb.get());
  CHECK(lib.macro("bigger").steps.size() == 3);

  const auto back = SkillLibrary::load(lib.save());
  CHECK(back.macro_names() == lib.macro_names());
  CHECK(back.macro("bigger") == lib.macro("bigger"));
  CHECK(parse_json_text(lib.save())["macros"].size() == 2);
  CHECK(code_of([] { SkillLibrary::load(R"({"macros":[{"name":"x","steps":[{"action":"create","object":"nope","data_ref":"","presentation":"","extra_params":{}}]}]})"); }) ==
        ErrorCode::kValidation);
  CHECK(code_of([&] { lib.macro("missing"); }) == ErrorCode::kNoSuchSkill);
}

TEST_CASE("fixed clock") {
  const auto clock = fixed_clock(day("2024-03-01"));
  CHECK(clock() == day("2024-03-01"));
  CHECK(system_clock_today()().ok());
}
