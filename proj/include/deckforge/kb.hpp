#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace deckforge::kb {

/// Closed-class main concepts and their sub-concepts. Sub-concept sets are
/// ordered lexicographically; that order drives every tie-break.
class Ontology {
 public:
  Ontology() = default;

  /// object -> {barchart, company_briefing_deck, linechart, piechart, table},
  /// action -> {create, delete, update}.
  static Ontology default_ontology();

  bool has_main(std::string_view main_concept) const;
  bool contains(std::string_view main_concept, std::string_view sub_concept) const;

  /// Throws Error(kOntology) for an unknown main concept.
  const std::set<std::string>& sub_concepts(std::string_view main_concept) const;

  /// Registers `sub_concept` under `main_concept`, creating the main concept
  /// when needed. Throws Error(kOntology) if the sub-concept already belongs
  /// to a different main concept.
  void add_sub_concept(const std::string& main_concept, const std::string& sub_concept);

  const std::map<std::string, std::set<std::string>, std::less<>>& main_concepts() const { return concepts_; }

  bool operator==(const Ontology&) const = default;

 private:
  std::map<std::string, std::set<std::string>, std::less<>> concepts_;
};

/// Lowercases, trims, and collapses internal whitespace. KB keys are always
/// normalized words.
std::string normalize_word(std::string_view word);

enum class Variant { kNaive, kRobust };

std::string_view to_string(Variant v);

/// Common surface of both knowledge-base variants, as used by the mapping
/// engine and the simulation.
class KnowledgeBase {
 public:
  explicit KnowledgeBase(Ontology ontology) : ontology_(std::move(ontology)) {}
  virtual ~KnowledgeBase() = default;

  virtual Variant variant() const = 0;

  /// The sub-concept linked to `word`, or nullopt (NOT_FOUND).
  /// Throws Error(kOntology) for an unknown main concept.
  virtual std::optional<std::string> infer(std::string_view main_concept, std::string_view word) const = 0;

  /// Feedback from a clarification or confirmation: the user says `word`
  /// means `sub_concept`.
  virtual void learn(std::string_view main_concept, std::string_view word, std::string_view sub_concept) = 0;

  /// Number of stored (main concept, word) entries.
  virtual std::size_t size() const = 0;

  virtual std::unique_ptr<KnowledgeBase> clone() const = 0;

  /// KB-JSON document.
  virtual std::string save() const = 0;

  const Ontology& ontology() const { return ontology_; }
  void extend_ontology(const std::string& main_concept, const std::string& sub_concept) {
    ontology_.add_sub_concept(main_concept, sub_concept);
  }

 protected:
  void require_main(std::string_view main_concept) const;
  void require_sub(std::string_view main_concept, std::string_view sub_concept) const;

  Ontology ontology_;
};

enum class AddResult { kAdded, kAlreadyMapped };

/// First-write-wins vocabulary map with no forgetting.
class NaiveKB final : public KnowledgeBase {
 public:
  explicit NaiveKB(Ontology ontology = Ontology::default_ontology()) : KnowledgeBase(std::move(ontology)) {}

  Variant variant() const override { return Variant::kNaive; }

  /// isInKB + inferSC.
  std::optional<std::string> infer(std::string_view main_concept, std::string_view word) const override;

  /// addToKB. An existing mapping is never overwritten; the call then returns
  /// kAlreadyMapped and leaves the KB unchanged.
  AddResult add(std::string_view main_concept, std::string_view word, std::string_view sub_concept);

  void learn(std::string_view main_concept, std::string_view word, std::string_view sub_concept) override {
    add(main_concept, word, sub_concept);
  }

  std::size_t size() const override { return words_.size(); }
  std::unique_ptr<KnowledgeBase> clone() const override { return std::make_unique<NaiveKB>(*this); }
  std::string save() const override;

  /// Throws Error(kVariantMismatch) for an RKB document.
  static NaiveKB load(std::string_view text);

  const std::map<std::pair<std::string, std::string>, std::string>& entries() const { return words_; }

 private:
  std::map<std::pair<std::string, std::string>, std::string> words_;
};

struct BeliefEntry {
  /// Sub-concept -> BeliefScore. Sub-concepts registered after the entry was
  /// created are implicitly zero.
  std::map<std::string, double> distribution;
  /// Number of observations of this (main concept, word) pair.
  long update_count = 0;

  bool operator==(const BeliefEntry&) const = default;
};

/// Belief-scored vocabulary map that can forget: each observation moves the
/// per-word distribution towards the observed sub-concept.
class RobustKB final : public KnowledgeBase {
 public:
  explicit RobustKB(Ontology ontology = Ontology::default_ontology()) : KnowledgeBase(std::move(ontology)) {}

  Variant variant() const override { return Variant::kRobust; }

  /// Argmax of the stored distribution; ties go to the lexicographically
  /// first sub-concept. NOT_FOUND when the word has no entry.
  std::optional<std::string> infer(std::string_view main_concept, std::string_view word) const override;

  /// One feedback event. With l the entry's update count after increment:
  /// chosen:   B <- B (l-1)/l + 1/l
  /// siblings: B <- B (l-1)/l
  void observe(std::string_view main_concept, std::string_view word, std::string_view chosen);

  /// addToKB: a new entry is created by its first observation (belief 1 for
  /// the chosen sub-concept). On an existing entry this is an observation.
  void add(std::string_view main_concept, std::string_view word, std::string_view sub_concept) {
    observe(main_concept, word, sub_concept);
  }

  void learn(std::string_view main_concept, std::string_view word, std::string_view sub_concept) override {
    observe(main_concept, word, sub_concept);
  }

  const BeliefEntry* entry(std::string_view main_concept, std::string_view word) const;
  double belief(std::string_view main_concept, std::string_view sub_concept, std::string_view word) const;

  std::size_t size() const override { return beliefs_.size(); }
  std::unique_ptr<KnowledgeBase> clone() const override { return std::make_unique<RobustKB>(*this); }
  std::string save() const override;

  /// Throws Error(kVariantMismatch) for an NKB document.
  static RobustKB load(std::string_view text);

  const std::map<std::pair<std::string, std::string>, BeliefEntry>& entries() const { return beliefs_; }

 private:
  std::map<std::pair<std::string, std::string>, BeliefEntry> beliefs_;
};

/// Loads either variant, dispatching on the document's `variant` field.
/// Throws Error(kMigration) on a schema version other than 1.
std::unique_ptr<KnowledgeBase> load_kb(std::string_view text);

std::unique_ptr<KnowledgeBase> make_kb(Variant variant, Ontology ontology = Ontology::default_ontology());

}  // namespace deckforge::kb
