#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deckforge/deck.hpp"
#include "deckforge/insights.hpp"
#include "deckforge/intent.hpp"
#include "deckforge/kb.hpp"
#include "deckforge/timeseries.hpp"

namespace deckforge::skills {

/// A named collection of series: a ticker file holds one, a sector directory
/// several.
struct Dataset {
  std::string name;
  std::vector<TimeSeries> series;
};

/// Datasets by case-insensitive name. A directory is scanned once:
/// `NAME.csv` becomes a one-series dataset, `NAME/` a dataset of all its CSVs
/// (sorted by file name).
class DataCatalog {
 public:
  DataCatalog() = default;
  static DataCatalog from_directory(const std::filesystem::path& dir);

  void add(Dataset dataset);
  bool has(std::string_view name) const;
  /// The stored spelling of `name`, if present.
  std::optional<std::string> canonical_name(std::string_view name) const;
  /// Throws Error(kData) when absent.
  const Dataset& get(std::string_view name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, Dataset, std::less<>> by_key_;
};

using Clock = std::function<Date()>;
Clock system_clock_today();
Clock fixed_clock(Date today);

struct ExecutionContext {
  const DataCatalog* data = nullptr;
  DeckParameters parameters;
  Date today{};
  insights::TemplateSet templates = insights::TemplateSet::defaults();
  insights::ScoringConfig scoring = insights::ScoringConfig::defaults();
};

struct MacroSkill {
  std::string name;
  std::vector<ResolvedIntent> steps;

  bool operator==(const MacroSkill&) const = default;
};

inline constexpr std::string_view kBriefingMacro = "company_briefing_deck";

/// Weekly buckets keyed by the Monday of each week, aggregated with `metric`.
struct WeeklySeries {
  std::vector<Date> weeks;
  std::vector<double> values;
};
WeeklySeries weekly_close(const TimeSeries& series, AggregationMetric metric);
WeeklySeries weekly_volume(const TimeSeries& series);

/// Subject first, then peers, as full histories. A multi-series dataset
/// supplies both; a single-series dataset is the subject and the comparable
/// firms are loaded as peers. Throws Error(kData) for a missing dataset or
/// peer.
std::vector<TimeSeries> analysis_series(const ResolvedIntent& intent, const ExecutionContext& ctx);

/// Each series cut to the trailing horizon ending at the first series' last
/// date. Series left empty are dropped.
std::vector<TimeSeries> horizon_slices(std::span<const TimeSeries> series, int horizon_months);

class SkillLibrary {
 public:
  /// Holds the built-in briefing macro.
  SkillLibrary();

  bool has_atomic(std::string_view name) const;
  bool has_macro(std::string_view name) const;
  /// User-facing atomic skills (chart kinds).
  std::vector<std::string> atomic_names() const;
  std::vector<std::string> macro_names() const;
  /// Throws Error(kNoSuchSkill).
  const MacroSkill& macro(std::string_view name) const;

  /// The slide an atomic intent produces. Throws Error(kNoSuchSkill).
  Slide build_slide(const ResolvedIntent& intent, const ExecutionContext& ctx) const;

  /// create appends, update rebuilds the slide with the same title in place,
  /// delete removes it. Throws Error(kTargetNotFound) when update or delete
  /// finds no slide.
  Deck execute_atomic(const ResolvedIntent& intent, Deck deck, const ExecutionContext& ctx) const;

  /// Runs the macro's steps in order with the invocation's data, extra
  /// parameters and deck. All or nothing: a failing step throws
  /// Error(kMacroStep) naming its index and the input deck is untouched.
  Deck execute_macro(std::string_view name, const ResolvedIntent& invocation, Deck deck,
                     const ExecutionContext& ctx) const;

  /// The steps execute_macro would run.
  std::vector<ResolvedIntent> expand_macro(std::string_view name, const ResolvedIntent& invocation) const;

  /// Dispatches on whether intent.object names a macro.
  Deck execute(const ResolvedIntent& intent, Deck deck, const ExecutionContext& ctx) const;

  /// Saves `history` (macros expanded to their steps) as a new macro and, when
  /// `kb` is given, registers it as an object sub-concept. Throws
  /// Error(kNothingToSave) for an empty history, Error(kNameTaken) for a used
  /// name.
  const MacroSkill& record_macro(std::span<const ResolvedIntent> history, const std::string& name,
                                 kb::KnowledgeBase* kb = nullptr);

  /// `{macros:[{name, steps:[...]}]}`; the built-in macro is not written.
  std::string save() const;
  static SkillLibrary load(std::string_view text);

 private:
  std::map<std::string, MacroSkill, std::less<>> macros_;
};

}  // namespace deckforge::skills
