#include "deckforge/deck.hpp"

#include <cmath>

#include "deckforge/error.hpp"
#include "deckforge/json_io.hpp"

namespace deckforge {

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::kValidation, what); }

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string_view to_string(ChartKind kind) {
  switch (kind) {
    case ChartKind::kPie: return "piechart";
    case ChartKind::kBar: return "barchart";
    case ChartKind::kLine: return "linechart";
    case ChartKind::kTable: return "table";
  }
  return "?";
}

ChartKind chart_kind_from_string(std::string_view text) {
  if (text == "piechart") return ChartKind::kPie;
  if (text == "barchart") return ChartKind::kBar;
  if (text == "linechart") return ChartKind::kLine;
  if (text == "table") return ChartKind::kTable;
  invalid("unknown chart_kind '" + std::string(text) + "'");
}

std::string_view to_string(AggregationMetric metric) {
  return metric == AggregationMetric::kMean ? "mean" : "median";
}

AggregationMetric metric_from_string(std::string_view text) {
  if (text == "mean") return AggregationMetric::kMean;
  if (text == "median") return AggregationMetric::kMedian;
  invalid("unknown aggregation_metric '" + std::string(text) + "'");
}

ChartSpec::ChartSpec(ChartKind kind, std::string title, std::vector<Series> series,
                     std::vector<std::string> x_labels)
    : kind_(kind), title_(std::move(title)), series_(std::move(series)), x_labels_(std::move(x_labels)) {
  for (const auto& s : series_) {
    if (s.values.size() != x_labels_.size()) invalid("series length equals x_labels length");
    for (double v : s.values) {
      if (!std::isfinite(v)) invalid("series values finite");
    }
  }
  if (kind_ == ChartKind::kPie) {
    if (series_.size() != 1) invalid("piechart has exactly one series");
    for (double v : series_.front().values) {
      if (v < 0) invalid("piechart values non-negative");
    }
  }
}

Slide::Slide(std::string title, Date date, std::vector<SlideObject> objects)
    : title_(std::move(title)), date_(date), objects_(std::move(objects)) {
  if (title_.empty()) invalid("slide title non-empty");
  if (objects_.empty()) invalid("slide has at least one object");
  if (!date_.ok()) invalid("slide date valid");
}

void DeckParameters::validate() const {
  if (horizon_months < 1) invalid("horizon_months >= 1");
}

// --- JSON -------------------------------------------------------------------

Json to_json(const DeckParameters& p) {
  Json j;
  j["comparable_firms"] = p.comparable_firms;
  j["horizon_months"] = p.horizon_months;
  j["aggregation_metric"] = std::string(to_string(p.aggregation_metric));
  return j;
}

DeckParameters parameters_from_json(const Json& j) {
  DeckParameters p;
  p.comparable_firms = j.at("comparable_firms").get<std::vector<std::string>>();
  p.horizon_months = j.at("horizon_months").get<int>();
  p.aggregation_metric = metric_from_string(j.at("aggregation_metric").get<std::string>());
  p.validate();
  return p;
}

Json to_json(const ChartSpec& c) {
  Json j;
  j["kind"] = "chart";
  j["chart_kind"] = std::string(to_string(c.kind()));
  j["title"] = c.title();
  j["x_labels"] = c.x_labels();
  Json series = Json::array();
  for (const auto& s : c.series()) {
    Json sj;
    sj["label"] = s.label;
    sj["values"] = s.values;
    series.push_back(std::move(sj));
  }
  j["series"] = std::move(series);
  return j;
}

Json to_json(const SlideObject& object) {
  return std::visit(Overloaded{
                        [](const ChartSpec& c) { return to_json(c); },
                        [](const InsightBlock& b) {
                          Json j;
                          j["kind"] = "insight";
                          j["lines"] = b.lines;
                          return j;
                        },
                        [](const Table& t) {
                          Json j;
                          j["kind"] = "table";
                          j["columns"] = t.columns;
                          j["rows"] = t.rows;
                          return j;
                        },
                    },
                    object);
}

SlideObject slide_object_from_json(const Json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "chart") {
    std::vector<Series> series;
    for (const auto& sj : j.at("series")) {
      series.push_back({sj.at("label").get<std::string>(), sj.at("values").get<std::vector<double>>()});
    }
    return ChartSpec(chart_kind_from_string(j.at("chart_kind").get<std::string>()),
                     j.at("title").get<std::string>(), std::move(series),
                     j.at("x_labels").get<std::vector<std::string>>());
  }
  if (kind == "insight") return InsightBlock{j.at("lines").get<std::vector<std::string>>()};
  if (kind == "table") {
    Table t{j.at("columns").get<std::vector<std::string>>(),
            j.at("rows").get<std::vector<std::vector<std::string>>>()};
    for (const auto& row : t.rows) {
      if (row.size() != t.columns.size()) invalid("table rows match column count");
    }
    return t;
  }
  invalid("unknown object kind '" + kind + "'");
}

Json to_json(const Slide& s) {
  Json j;
  j["title"] = s.title();
  j["date"] = format_iso_date(s.date());
  Json objects = Json::array();
  for (const auto& o : s.objects()) objects.push_back(to_json(o));
  j["objects"] = std::move(objects);
  return j;
}

Slide slide_from_json(const Json& j) {
  std::vector<SlideObject> objects;
  for (const auto& oj : j.at("objects")) objects.push_back(slide_object_from_json(oj));
  Date date;
  try {
    date = parse_iso_date(j.at("date").get<std::string>());
  } catch (const Error& e) {
    invalid(e.what());
  }
  return Slide(j.at("title").get<std::string>(), date, std::move(objects));
}

Json to_json(const Deck& d) {
  Json j;
  j["name"] = d.name;
  j["parameters"] = to_json(d.parameters);
  Json slides = Json::array();
  for (const auto& s : d.slides) slides.push_back(to_json(s));
  j["slides"] = std::move(slides);
  return j;
}

Deck deck_from_json(const Json& j) {
  Deck d;
  d.name = j.at("name").get<std::string>();
  if (d.name.empty()) invalid("deck name non-empty");
  d.parameters = parameters_from_json(j.at("parameters"));
  for (const auto& sj : j.at("slides")) d.slides.push_back(slide_from_json(sj));
  return d;
}

std::string serialize_deck(const Deck& deck) { return to_json(deck).dump(2); }

Deck parse_deck(std::string_view text) {
  Json j = parse_json_text(text);
  try {
    return deck_from_json(j);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("deck schema: ") + e.what());
  }
}

}  // namespace deckforge
