#include "deckforge/insights.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "deckforge/error.hpp"
#include "deckforge/json_io.hpp"

namespace deckforge::insights {

namespace {

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Sample standard deviation; 0 for fewer than two values.
double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double abs_z(double value, std::span<const double> reference) {
  if (reference.size() < 2) return 0.0;
  const double sd = sample_sd(reference);
  if (!(sd > 0.0) || !std::isfinite(sd)) return 0.0;
  return std::abs((value - mean_of(reference)) / sd);
}

void check_window(std::size_t window, std::size_t n) {
  if (window == 0) throw Error(ErrorCode::kWindow, "window must be >= 1");
  if (window > n) {
    throw Error(ErrorCode::kWindow,
                "window " + std::to_string(window) + " exceeds series length " + std::to_string(n));
  }
}

std::string format_number(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  // "-0.00" reads badly in prose
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

const std::vector<std::pair<PrimitiveKind, const char*>>& default_template_text() {
  static const std::vector<std::pair<PrimitiveKind, const char*>> t = {
      {PrimitiveKind::kMinimum, "<subject> touched a low close of <value> between <start> and <end>."},
      {PrimitiveKind::kMaximum, "<subject> reached a high close of <value> between <start> and <end>."},
      {PrimitiveKind::kRollingAverage, "<subject> closed at an average of <value> over the last <window> sessions."},
      {PrimitiveKind::kVolatility, "<subject> showed a daily return volatility of <percent>% between <start> and <end>."},
      {PrimitiveKind::kDistanceToMean, "<subject> last closed <value> standard deviations from its period mean."},
      {PrimitiveKind::kComparativeFactor, "<subject> last close stands at <value:3>x its <window>-session average."},
  };
  return t;
}

std::vector<Primitive> default_primitives() {
  return {{PrimitiveKind::kMinimum, 0},       {PrimitiveKind::kMaximum, 0},
          {PrimitiveKind::kRollingAverage, 20}, {PrimitiveKind::kVolatility, 0},
          {PrimitiveKind::kDistanceToMean, 0},  {PrimitiveKind::kComparativeFactor, 20}};
}

}  // namespace

std::string_view to_string(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::kMinimum: return "minimum";
    case PrimitiveKind::kMaximum: return "maximum";
    case PrimitiveKind::kRollingAverage: return "rolling_average";
    case PrimitiveKind::kVolatility: return "volatility";
    case PrimitiveKind::kDistanceToMean: return "distance_to_mean";
    case PrimitiveKind::kComparativeFactor: return "comparative_factor";
  }
  return "?";
}

PrimitiveKind primitive_from_string(std::string_view text) {
  for (auto k : {PrimitiveKind::kMinimum, PrimitiveKind::kMaximum, PrimitiveKind::kRollingAverage,
                 PrimitiveKind::kVolatility, PrimitiveKind::kDistanceToMean, PrimitiveKind::kComparativeFactor}) {
    if (to_string(k) == text) return k;
  }
  throw Error(ErrorCode::kConfig, "unknown primitive '" + std::string(text) + "'");
}

// --- primitives ---------------------------------------------------------------

std::vector<double> rolling_average(std::span<const double> closes, std::size_t window) {
  check_window(window, closes.size());
  std::vector<double> out;
  out.reserve(closes.size() - window + 1);
  double sum = std::accumulate(closes.begin(), closes.begin() + static_cast<std::ptrdiff_t>(window), 0.0);
  out.push_back(sum / static_cast<double>(window));
  for (std::size_t i = window; i < closes.size(); ++i) {
    sum += closes[i] - closes[i - window];
    out.push_back(sum / static_cast<double>(window));
  }
  return out;
}

double volatility(std::span<const double> closes) {
  if (closes.size() < 2) throw Error(ErrorCode::kInsufficientData, "volatility needs at least 2 points");
  std::vector<double> returns;
  returns.reserve(closes.size() - 1);
  for (std::size_t i = 1; i < closes.size(); ++i) returns.push_back(closes[i] / closes[i - 1] - 1.0);
  return returns.size() < 2 ? 0.0 : sample_sd(returns);
}

double distance_to_mean(std::span<const double> closes) {
  if (closes.size() < 2) throw Error(ErrorCode::kInsufficientData, "distance_to_mean needs at least 2 points");
  const double sd = sample_sd(closes);
  if (!(sd > 0.0)) throw Error(ErrorCode::kInsufficientData, "distance_to_mean undefined for a constant series");
  return (closes.back() - mean_of(closes)) / sd;
}

double comparative_factor(std::span<const double> closes, std::size_t window) {
  check_window(window, closes.size());
  const double m = mean_of(closes.subspan(closes.size() - window));
  if (m == 0.0) throw Error(ErrorCode::kInsufficientData, "comparative_factor undefined for a zero mean");
  return closes.back() / m;
}

PrimitiveValue compute_primitive(const TimeSeries& series, const Primitive& primitive) {
  if (series.empty()) throw Error(ErrorCode::kInsufficientData, "series '" + series.name() + "' is empty");
  const auto closes = series.closes();
  PrimitiveValue out{primitive, 0.0, {}, series.points().front().date, series.points().back().date};
  switch (primitive.kind) {
    case PrimitiveKind::kMinimum: out.value = *std::min_element(closes.begin(), closes.end()); break;
    case PrimitiveKind::kMaximum: out.value = *std::max_element(closes.begin(), closes.end()); break;
    case PrimitiveKind::kRollingAverage:
      out.values = rolling_average(closes, primitive.window);
      out.value = out.values.back();
      break;
    case PrimitiveKind::kVolatility: out.value = volatility(closes); break;
    case PrimitiveKind::kDistanceToMean: out.value = distance_to_mean(closes); break;
    case PrimitiveKind::kComparativeFactor: out.value = comparative_factor(closes, primitive.window); break;
  }
  return out;
}

std::vector<PrimitiveValue> compute_primitives(const TimeSeries& series, std::span<const Primitive> requested) {
  std::vector<PrimitiveValue> out;
  out.reserve(requested.size());
  for (const auto& p : requested) out.push_back(compute_primitive(series, p));
  return out;
}

// --- templates ----------------------------------------------------------------

InsightTemplate::InsightTemplate(std::string_view text) : source_(text) {
  std::size_t i = 0;
  while (i < text.size()) {
    const auto open = text.find('<', i);
    if (open == std::string_view::npos) {
      segments_.push_back({false, std::string(text.substr(i)), 0});
      break;
    }
    if (open > i) segments_.push_back({false, std::string(text.substr(i, open - i)), 0});
    const auto close = text.find('>', open);
    if (close == std::string_view::npos) throw Error(ErrorCode::kParse, "unterminated slot in template");
    std::string body(text.substr(open + 1, close - open - 1));
    Segment slot{true, body, 2};
    if (auto colon = body.rfind(':'); colon != std::string::npos) {
      const std::string digits = body.substr(colon + 1);
      if (digits.empty() || digits.size() > 2 || !std::all_of(digits.begin(), digits.end(), ::isdigit)) {
        throw Error(ErrorCode::kParse, "bad decimals in slot <" + body + ">");
      }
      slot.text = body.substr(0, colon);
      slot.decimals = std::stoi(digits);
    }
    if (slot.text.empty()) throw Error(ErrorCode::kParse, "empty slot name in template");
    segments_.push_back(std::move(slot));
    i = close + 1;
  }
}

std::string InsightTemplate::render(const std::map<std::string, Binding, std::less<>>& bindings) const {
  std::string out;
  for (const auto& seg : segments_) {
    if (!seg.is_slot) {
      out += seg.text;
      continue;
    }
    auto it = bindings.find(seg.text);
    if (it == bindings.end()) throw Error(ErrorCode::kUnboundSlot, seg.text);
    if (const auto* s = std::get_if<std::string>(&it->second)) {
      out += *s;
    } else {
      out += format_number(std::get<double>(it->second), seg.decimals);
    }
  }
  return out;
}

std::vector<std::string> InsightTemplate::slot_names() const {
  std::vector<std::string> names;
  for (const auto& seg : segments_) {
    if (seg.is_slot) names.push_back(seg.text);
  }
  return names;
}

std::string render_insight(const InsightTemplate& tmpl, const std::map<std::string, Binding, std::less<>>& bindings) {
  return tmpl.render(bindings);
}

TemplateSet TemplateSet::defaults() {
  TemplateSet set;
  for (const auto& [kind, text] : default_template_text()) set.templates_.emplace(kind, InsightTemplate(text));
  return set;
}

TemplateSet TemplateSet::parse(std::string_view text) {
  TemplateSet set = defaults();
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorCode::kParse, "template line " + std::to_string(line_no) + ": expected primitive<TAB>template");
    }
    set.set(primitive_from_string(line.substr(0, tab)), InsightTemplate(line.substr(tab + 1)));
  }
  return set;
}

const InsightTemplate& TemplateSet::for_primitive(PrimitiveKind kind) const { return templates_.at(kind); }

void TemplateSet::set(PrimitiveKind kind, InsightTemplate tmpl) { templates_.insert_or_assign(kind, std::move(tmpl)); }

// --- scoring ------------------------------------------------------------------

ScoringConfig ScoringConfig::defaults() {
  ScoringConfig c;
  for (auto name : {kPrevPeriodScorer, kPeerScorer, kMagnitudeScorer}) c.weights[std::string(name)] = 1.0 / 3.0;
  return c;
}

void ScoringConfig::validate() const {
  bool any_positive = false;
  for (const auto& [name, w] : weights) {
    if (!std::isfinite(w) || w < 0) throw Error(ErrorCode::kConfig, "weight for '" + name + "' must be finite and >= 0");
    any_positive = any_positive || w > 0;
  }
  if (!any_positive) throw Error(ErrorCode::kConfig, "at least one scorer weight must be positive");
  if (k < 1) throw Error(ErrorCode::kConfig, "k must be >= 1");
}

ScoringConfig ScoringConfig::from_json_text(std::string_view text) {
  const Json j = parse_json_text(text);
  ScoringConfig c = defaults();
  try {
    if (j.contains("weights")) {
      c.weights.clear();
      for (const auto& [name, w] : j.at("weights").items()) c.weights[name] = w.get<double>();
    }
    if (j.contains("k")) {
      const auto k = j.at("k").get<long long>();
      if (k < 1) throw Error(ErrorCode::kConfig, "k must be >= 1");
      c.k = static_cast<std::size_t>(k);
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("scoring config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string ScoringConfig::to_json_text() const {
  Json j;
  j["weights"] = Json::object();
  for (const auto& [name, w] : weights) j["weights"][name] = w;
  j["k"] = k;
  return j.dump(2);
}

std::vector<Insight> rank_and_select(std::vector<Insight> insights, const ScoringConfig& config) {
  config.validate();
  for (auto& in : insights) {
    double agg = 0;
    for (const auto& [name, w] : config.weights) {
      auto it = in.utility_scores.find(name);
      if (it == in.utility_scores.end()) throw Error(ErrorCode::kScoring, name);
      agg += w * it->second;
    }
    in.aggregate = agg;
  }
  const auto before = [](const Insight& a, const Insight& b) {
    if (a.aggregate != b.aggregate) return a.aggregate > b.aggregate;
    if (a.subject != b.subject) return a.subject < b.subject;
    return to_string(a.primitive.kind) < to_string(b.primitive.kind);
  };
  const std::size_t keep = std::min(config.k, insights.size());
  std::partial_sort(insights.begin(), insights.begin() + static_cast<std::ptrdiff_t>(keep), insights.end(), before);
  insights.resize(keep);
  return insights;
}

TimeSeries slice_dates(const TimeSeries& series, Date start, Date end) {
  std::vector<OhlcvPoint> pts;
  for (const auto& p : series.points()) {
    if (p.date >= start && p.date <= end) pts.push_back(p);
  }
  return TimeSeries(series.name(), std::move(pts));
}

TimeSeries slice_trailing(const TimeSeries& series, Date anchor, int months) {
  if (months < 1) throw Error(ErrorCode::kValidation, "horizon_months must be >= 1");
  auto from = anchor - std::chrono::months(months);
  if (!from.ok()) from = from.year() / from.month() / std::chrono::last;
  std::vector<OhlcvPoint> pts;
  for (const auto& p : series.points()) {
    if (p.date > from && p.date <= anchor) pts.push_back(p);
  }
  return TimeSeries(series.name(), std::move(pts));
}

std::map<std::string, double> builtin_scorers(const Insight& insight, const TimeSeries& series,
                                              std::span<const TimeSeries> peers) {
  std::map<std::string, double> scores;
  const auto pts = series.points();
  std::size_t first = 0;
  while (first < pts.size() && pts[first].date < insight.start) ++first;
  std::size_t last = first;
  while (last < pts.size() && pts[last].date <= insight.end) ++last;
  const std::size_t len = last - first;

  std::vector<double> history;
  if (len > 0) {
    for (std::size_t end = first; end >= len; end -= len) {
      std::vector<OhlcvPoint> window(pts.begin() + static_cast<std::ptrdiff_t>(end - len),
                                     pts.begin() + static_cast<std::ptrdiff_t>(end));
      try {
        history.push_back(compute_primitive(TimeSeries(series.name(), std::move(window)), insight.primitive).value);
      } catch (const Error&) {
      }
    }
  }
  scores[std::string(kPrevPeriodScorer)] = abs_z(insight.value, history);

  std::vector<double> peer_values;
  for (const auto& peer : peers) {
    try {
      peer_values.push_back(compute_primitive(slice_dates(peer, insight.start, insight.end), insight.primitive).value);
    } catch (const Error&) {
    }
  }
  scores[std::string(kPeerScorer)] = abs_z(insight.value, peer_values);

  double magnitude = 0;
  if (len > 0) {
    double sum = 0;
    for (std::size_t i = first; i < last; ++i) sum += pts[i].close;
    const double m = sum / static_cast<double>(len);
    if (m != 0.0) magnitude = std::abs(insight.value) / std::abs(m);
  }
  scores[std::string(kMagnitudeScorer)] = magnitude;
  return scores;
}

std::vector<Insight> generate_insights(std::span<const TimeSeries> subjects, int horizon_months,
                                       const TemplateSet& templates, const ScoringConfig& config) {
  if (subjects.empty() || subjects.front().empty()) return {};
  const Date anchor = subjects.front().points().back().date;
  std::vector<Insight> all;
  for (std::size_t s = 0; s < subjects.size(); ++s) {
    const TimeSeries slice = slice_trailing(subjects[s], anchor, horizon_months);
    if (slice.empty()) continue;
    std::vector<TimeSeries> peers;
    for (std::size_t o = 0; o < subjects.size(); ++o) {
      if (o != s) peers.push_back(subjects[o]);
    }
    for (const auto& prim : default_primitives()) {
      PrimitiveValue pv;
      try {
        pv = compute_primitive(slice, prim);
      } catch (const Error&) {
        continue;
      }
      Insight in{prim, slice.name(), pv.value, pv.start, pv.end, {}, 0.0, {}};
      in.utility_scores = builtin_scorers(in, subjects[s], peers);
      const std::map<std::string, Binding, std::less<>> bindings = {
          {"subject", in.subject},
          {"value", in.value},
          {"percent", in.value * 100.0},
          {"start", format_iso_date(in.start)},
          {"end", format_iso_date(in.end)},
          {"window", std::to_string(prim.window)},
      };
      in.text = templates.for_primitive(prim.kind).render(bindings);
      all.push_back(std::move(in));
    }
  }
  return rank_and_select(std::move(all), config);
}

}  // namespace deckforge::insights
