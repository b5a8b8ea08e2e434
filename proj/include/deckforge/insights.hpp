#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "deckforge/timeseries.hpp"

namespace deckforge::insights {

enum class PrimitiveKind { kMinimum, kMaximum, kRollingAverage, kVolatility, kDistanceToMean, kComparativeFactor };

std::string_view to_string(PrimitiveKind kind);
PrimitiveKind primitive_from_string(std::string_view text);

struct Primitive {
  PrimitiveKind kind = PrimitiveKind::kMinimum;
  /// Trailing window for rolling_average and comparative_factor; ignored
  /// by the others.
  std::size_t window = 20;

  bool operator==(const Primitive&) const = default;
};

/// Value of one primitive over a series. `values` holds every window mean for
/// rolling_average and is empty otherwise; `value` is then the last window.
struct PrimitiveValue {
  Primitive primitive;
  double value = 0;
  std::vector<double> values;
  Date start;
  Date end;
};

/// Trailing-window means of `closes`, one per complete window.
/// Throws Error(kWindow) for window 0 or window > size.
std::vector<double> rolling_average(std::span<const double> closes, std::size_t window);

/// Sample standard deviation of simple daily returns.
/// Throws Error(kInsufficientData) for fewer than two points.
double volatility(std::span<const double> closes);

/// (last - mean) / sample stddev. Throws Error(kInsufficientData) when the
/// stddev is zero or there are fewer than two points.
double distance_to_mean(std::span<const double> closes);

/// last / mean of the trailing window. Throws Error(kWindow).
double comparative_factor(std::span<const double> closes, std::size_t window);

/// Throws Error(kInsufficientData) for an empty series.
PrimitiveValue compute_primitive(const TimeSeries& series, const Primitive& primitive);
std::vector<PrimitiveValue> compute_primitives(const TimeSeries& series, std::span<const Primitive> requested);

/// A slot value: text is inserted verbatim, numbers with 2 decimals unless
/// the slot says otherwise (`<rate:3>`).
using Binding = std::variant<std::string, double>;

/// Literal text with `<slot>` or `<slot:decimals>` placeholders.
class InsightTemplate {
 public:
  struct Segment {
    bool is_slot = false;
    std::string text;  // literal text or slot name
    int decimals = 2;
  };

  /// Throws Error(kParse) on an unterminated or empty slot.
  explicit InsightTemplate(std::string_view text);

  /// Throws Error(kUnboundSlot) naming the first slot without a binding.
  std::string render(const std::map<std::string, Binding, std::less<>>& bindings) const;

  std::vector<std::string> slot_names() const;
  const std::string& source() const { return source_; }

 private:
  std::string source_;
  std::vector<Segment> segments_;
};

std::string render_insight(const InsightTemplate& tmpl, const std::map<std::string, Binding, std::less<>>& bindings);

/// One template per primitive. The file format is `primitive<TAB>template`
/// per line; blank lines and `#` comments are skipped. Primitives missing from
/// the file keep their default template.
class TemplateSet {
 public:
  static TemplateSet defaults();
  static TemplateSet parse(std::string_view text);

  const InsightTemplate& for_primitive(PrimitiveKind kind) const;
  void set(PrimitiveKind kind, InsightTemplate tmpl);

 private:
  std::map<PrimitiveKind, InsightTemplate> templates_;
};

struct Insight {
  Primitive primitive;
  std::string subject;
  double value = 0;
  Date start;
  Date end;
  std::map<std::string, double> utility_scores;
  double aggregate = 0;
  std::string text;
};

inline constexpr std::string_view kPrevPeriodScorer = "prev_period";
inline constexpr std::string_view kPeerScorer = "peer";
inline constexpr std::string_view kMagnitudeScorer = "magnitude";

struct ScoringConfig {
  std::map<std::string, double> weights;
  std::size_t k = 3;

  /// Equal weights over the three built-in scorers, k = 3.
  static ScoringConfig defaults();

  /// JSON `{weights:{name:w}, k}`. Throws Error(kConfig) when invalid.
  static ScoringConfig from_json_text(std::string_view text);
  std::string to_json_text() const;

  /// Throws Error(kConfig) unless every weight is finite and >= 0, one is
  /// positive, and k >= 1.
  void validate() const;
};

/// aggregate = sum of weight * score, sorted descending with ties broken by
/// subject then primitive name, truncated to k. Throws Error(kScoring) when an
/// insight lacks a configured scorer.
std::vector<Insight> rank_and_select(std::vector<Insight> insights, const ScoringConfig& config);

/// Scores for an insight computed on `series` restricted to the insight's
/// period. prev_period: |z| of the value against the same primitive on the
/// preceding equal-length windows of `series`. peer: |z| against the
/// primitive on each peer over the same dates. magnitude: |value| over the
/// mean close of the period. Degenerate spreads score 0.
std::map<std::string, double> builtin_scorers(const Insight& insight, const TimeSeries& series,
                                              std::span<const TimeSeries> peers);

/// Points of `series` with start <= date <= end.
TimeSeries slice_dates(const TimeSeries& series, Date start, Date end);

/// Points dated after `anchor - months` and no later than `anchor`.
TimeSeries slice_trailing(const TimeSeries& series, Date anchor, int months);

/// Every default primitive on the trailing `horizon_months` of each subject
/// (primitives that do not fit the slice are skipped), scored against the
/// other subjects as peers, rendered and ranked. At most `config.k` results.
std::vector<Insight> generate_insights(std::span<const TimeSeries> subjects, int horizon_months,
                                       const TemplateSet& templates, const ScoringConfig& config);

}  // namespace deckforge::insights
