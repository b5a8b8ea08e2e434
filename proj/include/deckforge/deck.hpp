#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "deckforge/timeseries.hpp"

namespace deckforge {

enum class ChartKind { kPie, kBar, kLine, kTable };

std::string_view to_string(ChartKind kind);
ChartKind chart_kind_from_string(std::string_view text);

struct Series {
  std::string label;
  std::vector<double> values;

  bool operator==(const Series&) const = default;
};

/// A chart object. The constructor enforces: every series has one value per
/// x label, and a piechart carries exactly one series of non-negative values.
class ChartSpec {
 public:
  ChartSpec(ChartKind kind, std::string title, std::vector<Series> series,
            std::vector<std::string> x_labels);

  ChartKind kind() const { return kind_; }
  const std::string& title() const { return title_; }
  const std::vector<Series>& series() const { return series_; }
  const std::vector<std::string>& x_labels() const { return x_labels_; }

  bool operator==(const ChartSpec&) const = default;

 private:
  ChartKind kind_;
  std::string title_;
  std::vector<Series> series_;
  std::vector<std::string> x_labels_;
};

struct InsightBlock {
  std::vector<std::string> lines;

  bool operator==(const InsightBlock&) const = default;
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  bool operator==(const Table&) const = default;
};

using SlideObject = std::variant<ChartSpec, InsightBlock, Table>;

class Slide {
 public:
  Slide(std::string title, Date date, std::vector<SlideObject> objects);

  const std::string& title() const { return title_; }
  Date date() const { return date_; }
  const std::vector<SlideObject>& objects() const { return objects_; }

  bool operator==(const Slide&) const = default;

 private:
  std::string title_;
  Date date_;
  std::vector<SlideObject> objects_;
};

enum class AggregationMetric { kMean, kMedian };

std::string_view to_string(AggregationMetric metric);
AggregationMetric metric_from_string(std::string_view text);

struct DeckParameters {
  std::vector<std::string> comparable_firms{"F", "GM", "NIO", "PTON"};
  int horizon_months = 3;
  AggregationMetric aggregation_metric = AggregationMetric::kMean;

  /// Throws Error(kValidation) when horizon_months < 1.
  void validate() const;

  bool operator==(const DeckParameters&) const = default;
};

struct Deck {
  std::string name;
  std::vector<Slide> slides;
  DeckParameters parameters;

  bool operator==(const Deck&) const = default;
};

/// Deck-JSON. Field order is fixed, so equal decks serialize to equal bytes.
std::string serialize_deck(const Deck& deck);

/// Throws Error(kParse) for malformed JSON and Error(kValidation) when the
/// document violates a deck invariant.
Deck parse_deck(std::string_view text);

}  // namespace deckforge
