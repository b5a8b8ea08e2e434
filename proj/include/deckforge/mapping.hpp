#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "deckforge/deck.hpp"
#include "deckforge/intent.hpp"
#include "deckforge/kb.hpp"
#include "deckforge/parser.hpp"
#include "deckforge/skills.hpp"

namespace deckforge::mapping {

/// Company name -> ticker. Open-class, so it lives outside the belief KB.
class AliasTable {
 public:
  /// tesla, apple, peloton, ford, general motors, nio.
  static AliasTable defaults();

  std::optional<std::string> lookup(std::string_view name) const;
  void link(std::string_view name, std::string ticker);

  /// `{aliases:{name:ticker}}`.
  std::string save() const;
  static AliasTable load(std::string_view text);

  const std::map<std::string, std::string, std::less<>>& entries() const { return aliases_; }

 private:
  std::map<std::string, std::string, std::less<>> aliases_;
};

/// A question back to the user. `missing` is a main concept (action, object)
/// or a literal slot (data, ticker). Candidates are listed for closed-class
/// slots only.
struct ClarificationRequest {
  std::string missing;
  std::optional<std::string> unknown_word;
  std::vector<std::string> candidates;

  bool closed_class() const { return !candidates.empty(); }
  std::string question() const;

  bool operator==(const ClarificationRequest&) const = default;
};

struct SessionState {
  std::optional<ClarificationRequest> pending;
  ResolvedIntent partial;
  /// Surface words of slots still to resolve, keyed by slot name.
  std::map<std::string, std::string> slot_words;
  DeckParameters deck_parameters;
  /// Deck used by the previous command; the default presentation.
  std::string current_deck;
};

using Resolution = std::variant<ResolvedIntent, ClarificationRequest>;

/// Lowercase alphanumerics only: "weekly report" and "WeeklyReport" name the
/// same deck.
std::string canonical_deck_name(std::string_view text);

/// Closed-class resolution without the KB: exact sub-concept names (ignoring
/// case, spaces and underscores) and a small built-in synonym list.
std::optional<std::string> builtin_sub_concept(const kb::Ontology& ontology, std::string_view main_concept,
                                               std::string_view word);

class MappingEngine {
 public:
  MappingEngine(const skills::DataCatalog& catalog, const skills::SkillLibrary& library)
      : catalog_(catalog), library_(library) {}

  /// Fills slots in the order action, object, data, presentation. The first
  /// slot that cannot be filled becomes state.pending. Throws
  /// Error(kAmbiguity) when the command carries two different OBJECT spans.
  Resolution resolve(const parser::TaggedCommand& tagged, const kb::KnowledgeBase& kb, const AliasTable& aliases,
                     SessionState& state) const;

  /// Answers state.pending and resumes resolution. Closed-class answers teach
  /// the KB (when an unknown word was asked about); ticker answers extend the
  /// alias table. Throws Error(kNoPending) without a pending request and
  /// Error(kInvalidChoice) for an answer outside the candidates or naming no
  /// dataset; the pending request is then unchanged.
  Resolution apply_clarification(SessionState& state, std::string_view answer, kb::KnowledgeBase& kb,
                                 AliasTable& aliases) const;

  /// Dataset name for a literal data word: a dataset, a known company alias,
  /// or nothing.
  std::optional<std::string> resolve_data(std::string_view word, const AliasTable& aliases) const;

 private:
  Resolution continue_resolution(SessionState& state, const kb::KnowledgeBase& kb, const AliasTable& aliases) const;

  const skills::DataCatalog& catalog_;
  const skills::SkillLibrary& library_;
};

struct ParameterEdit {
  enum class Param { kComparableFirms, kHorizonMonths, kAggregationMetric };
  enum class Op { kAdd, kRemove, kSet };
  Param param;
  Op op;
  std::string value;

  bool operator==(const ParameterEdit&) const = default;
};

struct ParameterUpdate {
  DeckParameters parameters;
  std::vector<std::string> warnings;
};

/// Applies edits in order to state.deck_parameters. Company names go through
/// the alias table. Removing an absent firm is a warning, not an error.
/// Throws Error(kValidation) for a horizon below 1 or an unknown metric, and
/// Error(kNotFound) for a company with no known ticker; state is then
/// unchanged.
ParameterUpdate update_parameters(SessionState& state, const std::vector<ParameterEdit>& edits,
                                  const AliasTable& aliases);

/// Rule-based recognizer for edit requests such as "change time horizon of
/// analysis from 3 months to 6 months", "use the Median instead of Mean",
/// "add the company 'Apple' and remove the company 'Peloton'". Empty when the
/// text is not an edit.
std::vector<ParameterEdit> recognize_parameter_edits(std::string_view text);

/// "run the analysis", ignoring case, surrounding space and final punctuation.
bool is_run_trigger(std::string_view text);

/// "save these commands as NAME" and close variants. Returns the macro name
/// in snake_case.
std::optional<std::string> recognize_save_macro(std::string_view text);

}  // namespace deckforge::mapping
