#include "deckforge/skills.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

#include "deckforge/error.hpp"
#include "deckforge/json_io.hpp"

namespace deckforge::skills {

namespace {

namespace fs = std::filesystem;

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string fmt(double v, int decimals = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::vector<std::string> date_labels(const std::vector<Date>& dates) {
  std::vector<std::string> out;
  out.reserve(dates.size());
  for (auto d : dates) out.push_back(format_iso_date(d));
  return out;
}

// Values of `w` on `weeks`; a week the series lacks takes the previous known
// value, or the first one when nothing precedes it.
std::vector<double> align(const WeeklySeries& w, const std::vector<Date>& weeks) {
  std::vector<double> out;
  out.reserve(weeks.size());
  std::size_t j = 0;
  for (auto week : weeks) {
    while (j + 1 < w.weeks.size() && w.weeks[j + 1] <= week) ++j;
    out.push_back(w.values[j]);
  }
  return out;
}

double total_volume(const TimeSeries& s) {
  double t = 0;
  for (const auto& p : s.points()) t += p.volume;
  return t;
}

double safe_volatility(const TimeSeries& s) {
  try {
    return insights::volatility(s.closes());
  } catch (const Error&) {
    return 0.0;
  }
}

double safe_distance(const TimeSeries& s) {
  try {
    return insights::distance_to_mean(s.closes());
  } catch (const Error&) {
    return 0.0;
  }
}

std::vector<std::string> names_of(const std::vector<TimeSeries>& series) {
  std::vector<std::string> out;
  for (const auto& s : series) out.push_back(s.name());
  return out;
}

struct BuildInput {
  const ResolvedIntent& intent;
  const ExecutionContext& ctx;
  std::vector<TimeSeries> full;    // subject first
  std::vector<TimeSeries> slices;  // trailing horizon of each
  std::string label;               // dataset label used in titles
};

std::optional<InsightBlock> insight_block(const BuildInput& in) {
  auto picked = insights::generate_insights(in.full, in.ctx.parameters.horizon_months, in.ctx.templates, in.ctx.scoring);
  if (picked.empty()) return std::nullopt;
  InsightBlock block;
  for (const auto& i : picked) block.lines.push_back(i.text);
  return block;
}

Slide with_insights(const BuildInput& in, std::string title, SlideObject chart) {
  std::vector<SlideObject> objects{std::move(chart)};
  if (auto block = insight_block(in)) objects.emplace_back(std::move(*block));
  return Slide(std::move(title), in.ctx.today, std::move(objects));
}

ChartSpec weekly_close_chart(const BuildInput& in, const std::string& title, bool rebased) {
  const auto metric = in.ctx.parameters.aggregation_metric;
  const WeeklySeries base = weekly_close(in.slices.front(), metric);
  std::vector<Series> series;
  for (const auto& s : in.slices) {
    auto values = align(weekly_close(s, metric), base.weeks);
    if (rebased) {
      const double first = values.front();
      for (auto& v : values) v = first != 0.0 ? 100.0 * v / first : 0.0;
    }
    series.push_back({s.name(), std::move(values)});
  }
  return ChartSpec(ChartKind::kLine, title, std::move(series), date_labels(base.weeks));
}

ChartSpec weekly_volume_chart(const BuildInput& in, const std::string& title, std::size_t count) {
  const WeeklySeries base = weekly_volume(in.slices.front());
  std::vector<Series> series;
  for (std::size_t i = 0; i < std::min(count, in.slices.size()); ++i) {
    series.push_back({in.slices[i].name(), align(weekly_volume(in.slices[i]), base.weeks)});
  }
  return ChartSpec(ChartKind::kBar, title, std::move(series), date_labels(base.weeks));
}

ChartSpec volume_share_chart(const BuildInput& in, const std::string& title) {
  std::vector<double> totals;
  for (const auto& s : in.slices) totals.push_back(total_volume(s));
  return ChartSpec(ChartKind::kPie, title, {{"volume", std::move(totals)}}, names_of(in.slices));
}

Table price_table(const BuildInput& in) {
  Table t{{"Ticker", "Last close", "Period low", "Period high", "Return %", "Volatility %"}, {}};
  for (const auto& s : in.slices) {
    const auto closes = s.closes();
    const auto [lo, hi] = std::minmax_element(closes.begin(), closes.end());
    t.rows.push_back({s.name(), fmt(closes.back()), fmt(*lo), fmt(*hi),
                      fmt(100.0 * (closes.back() / closes.front() - 1.0)), fmt(100.0 * safe_volatility(s))});
  }
  return t;
}

using Builder = Slide (*)(const BuildInput&);

Slide build_piechart(const BuildInput& in) {
  const std::string title = in.label + " volume share";
  return with_insights(in, title, volume_share_chart(in, title));
}

Slide build_barchart(const BuildInput& in) {
  const std::string title = in.label + " weekly volume";
  return with_insights(in, title, weekly_volume_chart(in, title, in.slices.size()));
}

Slide build_linechart(const BuildInput& in) {
  const std::string title = in.label + " share price performance";
  return with_insights(in, title, weekly_close_chart(in, title, false));
}

Slide build_table(const BuildInput& in) { return with_insights(in, in.label + " price summary", price_table(in)); }

std::string subject_of(const BuildInput& in) { return in.slices.front().name(); }

Slide briefing_share_price(const BuildInput& in) {
  const std::string title = subject_of(in) + " share price performance";
  return Slide(title, in.ctx.today, {weekly_close_chart(in, title, false)});
}

Slide briefing_volume(const BuildInput& in) {
  const std::string title = subject_of(in) + " volume traded";
  return Slide(title, in.ctx.today, {weekly_volume_chart(in, title, 1)});
}

Slide briefing_relative_performance(const BuildInput& in) {
  const std::string title = subject_of(in) + " relative performance";
  return Slide(title, in.ctx.today, {weekly_close_chart(in, title, true)});
}

Slide briefing_price_range(const BuildInput& in) {
  return Slide(subject_of(in) + " price range", in.ctx.today, {price_table(in)});
}

Slide briefing_monthly_returns(const BuildInput& in) {
  const std::string title = subject_of(in) + " monthly returns";
  const TimeSeries& s = in.slices.front();
  std::vector<std::string> labels;
  std::vector<double> returns;
  double prev = s.points().front().close;
  const auto pts = s.points();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const bool month_end = i + 1 == pts.size() || pts[i + 1].date.month() != pts[i].date.month() ||
                           pts[i + 1].date.year() != pts[i].date.year();
    if (!month_end) continue;
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u", static_cast<int>(pts[i].date.year()),
                  static_cast<unsigned>(pts[i].date.month()));
    labels.emplace_back(buf);
    returns.push_back(100.0 * (pts[i].close / prev - 1.0));
    prev = pts[i].close;
  }
  return Slide(title, in.ctx.today,
               {ChartSpec(ChartKind::kBar, title, {{s.name(), std::move(returns)}}, std::move(labels))});
}

Slide briefing_volatility(const BuildInput& in) {
  const std::string title = subject_of(in) + " volatility comparison";
  std::vector<double> v;
  for (const auto& s : in.slices) v.push_back(100.0 * safe_volatility(s));
  return Slide(title, in.ctx.today, {ChartSpec(ChartKind::kBar, title, {{"volatility %", std::move(v)}}, names_of(in.slices))});
}

Slide briefing_volume_share(const BuildInput& in) {
  const std::string title = subject_of(in) + " volume share";
  return Slide(title, in.ctx.today, {volume_share_chart(in, title)});
}

Slide briefing_rolling_average(const BuildInput& in) {
  const std::string title = subject_of(in) + " rolling average";
  const TimeSeries& s = in.slices.front();
  const auto closes = s.closes();
  const std::size_t window = 20;
  std::vector<double> rolling(closes.size());
  double sum = 0;
  for (std::size_t i = 0; i < closes.size(); ++i) {
    sum += closes[i];
    if (i >= window) sum -= closes[i - window];
    rolling[i] = sum / static_cast<double>(std::min(i + 1, window));
  }
  return Slide(title, in.ctx.today,
               {ChartSpec(ChartKind::kLine, title, {{s.name(), closes}, {"20-session average", std::move(rolling)}},
                          date_labels(s.dates()))});
}

Slide briefing_distance_to_mean(const BuildInput& in) {
  const std::string title = subject_of(in) + " distance to mean";
  std::vector<double> v;
  for (const auto& s : in.slices) v.push_back(safe_distance(s));
  return Slide(title, in.ctx.today,
               {ChartSpec(ChartKind::kBar, title, {{"stddevs from mean", std::move(v)}}, names_of(in.slices))});
}

Slide briefing_key_insights(const BuildInput& in) {
  auto block = insight_block(in);
  if (!block) block = InsightBlock{{"No insights available for the selected horizon."}};
  return Slide(subject_of(in) + " key insights", in.ctx.today, {std::move(*block)});
}

struct AtomicSkill {
  Builder build;
  bool user_facing;
};

const std::map<std::string, AtomicSkill, std::less<>>& atomic_registry() {
  static const std::map<std::string, AtomicSkill, std::less<>> registry = {
      {"piechart", {build_piechart, true}},
      {"barchart", {build_barchart, true}},
      {"linechart", {build_linechart, true}},
      {"table", {build_table, true}},
      {"briefing_share_price", {briefing_share_price, false}},
      {"briefing_volume_traded", {briefing_volume, false}},
      {"briefing_relative_performance", {briefing_relative_performance, false}},
      {"briefing_price_range", {briefing_price_range, false}},
      {"briefing_monthly_returns", {briefing_monthly_returns, false}},
      {"briefing_volatility", {briefing_volatility, false}},
      {"briefing_volume_share", {briefing_volume_share, false}},
      {"briefing_rolling_average", {briefing_rolling_average, false}},
      {"briefing_distance_to_mean", {briefing_distance_to_mean, false}},
      {"briefing_key_insights", {briefing_key_insights, false}},
  };
  return registry;
}

MacroSkill builtin_briefing() {
  MacroSkill m{std::string(kBriefingMacro), {}};
  for (const char* step : {"briefing_share_price", "briefing_volume_traded", "briefing_relative_performance",
                           "briefing_price_range", "briefing_monthly_returns", "briefing_volatility",
                           "briefing_volume_share", "briefing_rolling_average", "briefing_distance_to_mean",
                           "briefing_key_insights"}) {
    m.steps.push_back({"create", step, "", "", {}});
  }
  return m;
}

}  // namespace

// --- catalog ------------------------------------------------------------------

DataCatalog DataCatalog::from_directory(const fs::path& dir) {
  DataCatalog cat;
  if (!fs::is_directory(dir)) return cat;
  std::vector<fs::path> entries;
  for (const auto& e : fs::directory_iterator(dir)) entries.push_back(e.path());
  std::sort(entries.begin(), entries.end());
  for (const auto& p : entries) {
    if (fs::is_regular_file(p) && p.extension() == ".csv") {
      cat.add({p.stem().string(), {load_timeseries_csv(p)}});
    } else if (fs::is_directory(p)) {
      std::vector<fs::path> files;
      for (const auto& f : fs::directory_iterator(p)) {
        if (f.is_regular_file() && f.path().extension() == ".csv") files.push_back(f.path());
      }
      std::sort(files.begin(), files.end());
      Dataset ds{p.filename().string(), {}};
      for (const auto& f : files) ds.series.push_back(load_timeseries_csv(f));
      if (!ds.series.empty()) cat.add(std::move(ds));
    }
  }
  return cat;
}

void DataCatalog::add(Dataset dataset) {
  if (dataset.name.empty() || dataset.series.empty()) {
    throw Error(ErrorCode::kData, "dataset needs a name and at least one series");
  }
  by_key_.insert_or_assign(lower(dataset.name), std::move(dataset));
}

bool DataCatalog::has(std::string_view name) const { return by_key_.count(lower(name)) > 0; }

std::optional<std::string> DataCatalog::canonical_name(std::string_view name) const {
  auto it = by_key_.find(lower(name));
  if (it == by_key_.end()) return std::nullopt;
  return it->second.name;
}

const Dataset& DataCatalog::get(std::string_view name) const {
  auto it = by_key_.find(lower(name));
  if (it == by_key_.end()) throw Error(ErrorCode::kData, "no dataset named '" + std::string(name) + "'");
  return it->second;
}

std::vector<std::string> DataCatalog::names() const {
  std::vector<std::string> out;
  for (const auto& [key, ds] : by_key_) out.push_back(ds.name);
  return out;
}

Clock system_clock_today() {
  return [] { return Date{std::chrono::floor<std::chrono::days>(std::chrono::system_clock::now())}; };
}

Clock fixed_clock(Date today) {
  return [today] { return today; };
}

// --- aggregation --------------------------------------------------------------

WeeklySeries weekly_close(const TimeSeries& series, AggregationMetric metric) {
  WeeklySeries out;
  std::vector<double> bucket;
  const auto flush = [&] {
    if (bucket.empty()) return;
    out.values.push_back(metric == AggregationMetric::kMedian ? median_of(bucket) : mean_of(bucket));
    bucket.clear();
  };
  for (const auto& p : series.points()) {
    const Date w = week_start(p.date);
    if (out.weeks.empty() || out.weeks.back() != w) {
      flush();
      out.weeks.push_back(w);
    }
    bucket.push_back(p.close);
  }
  flush();
  return out;
}

WeeklySeries weekly_volume(const TimeSeries& series) {
  WeeklySeries out;
  for (const auto& p : series.points()) {
    const Date w = week_start(p.date);
    if (out.weeks.empty() || out.weeks.back() != w) {
      out.weeks.push_back(w);
      out.values.push_back(0.0);
    }
    out.values.back() += p.volume;
  }
  return out;
}

std::vector<TimeSeries> analysis_series(const ResolvedIntent& intent, const ExecutionContext& ctx) {
  if (ctx.data == nullptr) throw Error(ErrorCode::kData, "no data catalog");
  const Dataset& ds = ctx.data->get(intent.data_ref);
  std::vector<TimeSeries> out = ds.series;
  if (ds.series.size() == 1) {
    for (const auto& firm : ctx.parameters.comparable_firms) {
      if (lower(firm) == lower(ds.name) || lower(firm) == lower(ds.series.front().name())) continue;
      const Dataset& peer = ctx.data->get(firm);
      out.push_back(peer.series.front());
    }
  }
  return out;
}

std::vector<TimeSeries> horizon_slices(std::span<const TimeSeries> series, int horizon_months) {
  std::vector<TimeSeries> out;
  if (series.empty() || series.front().empty()) return out;
  const Date anchor = series.front().points().back().date;
  for (const auto& s : series) {
    TimeSeries slice = insights::slice_trailing(s, anchor, horizon_months);
    if (!slice.empty()) out.push_back(std::move(slice));
  }
  return out;
}

// --- library ------------------------------------------------------------------

SkillLibrary::SkillLibrary() { macros_.emplace(std::string(kBriefingMacro), builtin_briefing()); }

bool SkillLibrary::has_atomic(std::string_view name) const { return atomic_registry().count(name) > 0; }

bool SkillLibrary::has_macro(std::string_view name) const { return macros_.find(name) != macros_.end(); }

std::vector<std::string> SkillLibrary::atomic_names() const {
  std::vector<std::string> out;
  for (const auto& [name, skill] : atomic_registry()) {
    if (skill.user_facing) out.push_back(name);
  }
  return out;
}

std::vector<std::string> SkillLibrary::macro_names() const {
  std::vector<std::string> out;
  for (const auto& [name, m] : macros_) out.push_back(name);
  return out;
}

const MacroSkill& SkillLibrary::macro(std::string_view name) const {
  auto it = macros_.find(name);
  if (it == macros_.end()) throw Error(ErrorCode::kNoSuchSkill, "no macro named '" + std::string(name) + "'");
  return it->second;
}

Slide SkillLibrary::build_slide(const ResolvedIntent& intent, const ExecutionContext& ctx) const {
  auto it = atomic_registry().find(intent.object);
  if (it == atomic_registry().end()) throw Error(ErrorCode::kNoSuchSkill, "no skill for '" + intent.object + "'");
  ctx.parameters.validate();
  BuildInput in{intent, ctx, analysis_series(intent, ctx), {}, ""};
  in.slices = horizon_slices(in.full, ctx.parameters.horizon_months);
  if (in.slices.empty()) throw Error(ErrorCode::kData, "dataset '" + intent.data_ref + "' has no data in the horizon");
  in.label = ctx.data->canonical_name(intent.data_ref).value_or(intent.data_ref);
  return it->second.build(in);
}

Deck SkillLibrary::execute_atomic(const ResolvedIntent& intent, Deck deck, const ExecutionContext& ctx) const {
  if (intent.action != "create" && intent.action != "update" && intent.action != "delete") {
    throw Error(ErrorCode::kValidation, "unknown action '" + intent.action + "'");
  }
  Slide slide = build_slide(intent, ctx);
  if (intent.action == "create") {
    deck.slides.push_back(std::move(slide));
    return deck;
  }
  auto it = std::find_if(deck.slides.begin(), deck.slides.end(),
                         [&](const Slide& s) { return s.title() == slide.title(); });
  if (it == deck.slides.end()) {
    throw Error(ErrorCode::kTargetNotFound, "no slide titled '" + slide.title() + "' in deck '" + deck.name + "'");
  }
  if (intent.action == "update") {
    *it = std::move(slide);
  } else {
    deck.slides.erase(it);
  }
  return deck;
}

std::vector<ResolvedIntent> SkillLibrary::expand_macro(std::string_view name, const ResolvedIntent& invocation) const {
  std::vector<ResolvedIntent> steps = macro(name).steps;
  for (auto& step : steps) {
    if (!invocation.data_ref.empty()) step.data_ref = invocation.data_ref;
    step.presentation = invocation.presentation;
    for (const auto& [k, v] : invocation.extra_params) step.extra_params[k] = v;
  }
  return steps;
}

Deck SkillLibrary::execute_macro(std::string_view name, const ResolvedIntent& invocation, Deck deck,
                                 const ExecutionContext& ctx) const {
  const auto steps = expand_macro(name, invocation);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    try {
      deck = execute_atomic(steps[i], std::move(deck), ctx);
    } catch (const Error& e) {
      throw Error(ErrorCode::kMacroStep, "macro '" + std::string(name) + "' step " + std::to_string(i) + " (" +
                                             steps[i].object + "): " + std::string(to_string(e.code())) + ": " + e.what());
    }
  }
  return deck;
}

Deck SkillLibrary::execute(const ResolvedIntent& intent, Deck deck, const ExecutionContext& ctx) const {
  if (has_macro(intent.object)) return execute_macro(intent.object, intent, std::move(deck), ctx);
  return execute_atomic(intent, std::move(deck), ctx);
}

const MacroSkill& SkillLibrary::record_macro(std::span<const ResolvedIntent> history, const std::string& name,
                                             kb::KnowledgeBase* kb) {
  if (history.empty()) throw Error(ErrorCode::kNothingToSave, "no commands to save");
  if (name.empty()) throw Error(ErrorCode::kValidation, "macro name must be non-empty");
  if (has_macro(name) || has_atomic(name) || (kb != nullptr && kb->ontology().contains("object", name))) {
    throw Error(ErrorCode::kNameTaken, "'" + name + "' is already a skill");
  }
  MacroSkill m{name, {}};
  for (const auto& intent : history) {
    if (has_macro(intent.object)) {
      for (auto& step : expand_macro(intent.object, intent)) m.steps.push_back(std::move(step));
    } else if (has_atomic(intent.object)) {
      m.steps.push_back(intent);
    } else {
      throw Error(ErrorCode::kNoSuchSkill, "no skill for '" + intent.object + "'");
    }
  }
  if (kb != nullptr) kb->extend_ontology("object", name);
  return macros_.emplace(name, std::move(m)).first->second;
}

std::string SkillLibrary::save() const {
  Json j;
  j["macros"] = Json::array();
  for (const auto& [name, m] : macros_) {
    if (name == kBriefingMacro) continue;
    Json mj;
    mj["name"] = name;
    mj["steps"] = Json::array();
    for (const auto& s : m.steps) mj["steps"].push_back(to_json(s));
    j["macros"].push_back(std::move(mj));
  }
  return j.dump(2);
}

SkillLibrary SkillLibrary::load(std::string_view text) {
  const Json j = parse_json_text(text);
  SkillLibrary lib;
  try {
    for (const auto& mj : j.at("macros")) {
      MacroSkill m{mj.at("name").get<std::string>(), {}};
      if (m.name.empty() || lib.has_macro(m.name) || lib.has_atomic(m.name)) {
        throw Error(ErrorCode::kValidation, "duplicate or reserved macro name '" + m.name + "'");
      }
      for (const auto& sj : mj.at("steps")) {
        m.steps.push_back(intent_from_json(sj));
        if (!lib.has_atomic(m.steps.back().object)) {
          throw Error(ErrorCode::kValidation, "macro '" + m.name + "' references unknown skill '" +
                                                  m.steps.back().object + "'");
        }
      }
      lib.macros_.emplace(m.name, std::move(m));
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("skill library: ") + e.what());
  }
  return lib;
}

}  // namespace deckforge::skills
