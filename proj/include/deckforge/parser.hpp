#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace deckforge::parser {

// ---------------------------------------------------------------------------
// Labels and part-of-speech tags
// ---------------------------------------------------------------------------

enum class ConceptLabel : int { kOutside = 0, kAction, kData, kObject, kPresentation };

inline constexpr int kNumLabels = 5;
inline constexpr ConceptLabel kConceptLabels[] = {ConceptLabel::kAction, ConceptLabel::kData,
                                                  ConceptLabel::kObject, ConceptLabel::kPresentation};

std::string_view to_string(ConceptLabel label);
/// Accepts ACTION, DATA, OBJECT, PRESENTATION, OUTSIDE and the short form O.
ConceptLabel label_from_string(std::string_view text);

enum class PosTag {
  kNoun,
  kVerb,
  kDeterminer,
  kPreposition,
  kAdjective,
  kAdverb,
  kPronoun,
  kConjunction,
  kNumber,
  kParticle,
  kPunctuation,
  /// Reserved tag for the positions before the first and after the last token.
  kBoundary,
};

std::string_view to_string(PosTag tag);

struct Token {
  std::string text;
  PosTag pos;

  bool operator==(const Token&) const = default;
};

/// Whitespace split with leading/trailing punctuation detached into separate
/// tokens, then a lexicon + suffix-rule POS tagger. Surface forms are kept.
/// Throws Error(kEmptyCommand) for empty or whitespace-only input.
std::vector<Token> tokenize_and_pos(std::string_view command);

/// Tokenization without tagging; never throws.
std::vector<std::string> tokenize(std::string_view command);

PosTag lookup_pos(std::string_view token);

// ---------------------------------------------------------------------------
// Features
// ---------------------------------------------------------------------------

struct TokenFeatures {
  PosTag pos;
  PosTag prev_pos;
  PosTag next_pos;
  std::string first_letter;
  std::string last_letter;
  std::string trunc_first;  // token without its first letter
  std::string trunc_last;   // token without its last letter
  std::vector<std::string> char_ngrams;  // sorted, unique 2- and 3-grams

  bool operator==(const TokenFeatures&) const = default;
};

std::vector<TokenFeatures> featurize(std::span<const Token> tokens);

/// Flattens one TokenFeatures into the string attributes the CRF indexes.
std::vector<std::string> feature_strings(const TokenFeatures& f);

// ---------------------------------------------------------------------------
// Annotated commands
// ---------------------------------------------------------------------------

struct TaggedCommand {
  std::vector<std::string> tokens;
  std::vector<ConceptLabel> labels;

  /// Throws Error(kValidation) unless tokens and labels have equal length.
  void validate() const;

  bool operator==(const TaggedCommand&) const = default;
};

/// A maximal run of tokens sharing one concept label.
struct ConceptSpan {
  ConceptLabel label;
  std::size_t begin;
  std::size_t end;  // exclusive
  std::string text;  // tokens joined by single spaces
};

std::vector<ConceptSpan> concept_spans(const TaggedCommand& tagged);

/// Corpus file: one command per line, whitespace-separated `token/LABEL`.
/// Blank lines and lines starting with '#' are skipped.
std::vector<TaggedCommand> parse_corpus(std::string_view text);
std::string format_corpus(std::span<const TaggedCommand> corpus);

/// Template-and-lexicon generated command corpus. The first 50 commands of
/// `synthetic_corpus(seed, 75)` form the training split and the last 25 the
/// test split.
std::vector<TaggedCommand> synthetic_corpus(std::uint64_t seed, std::size_t count);

// ---------------------------------------------------------------------------
// Linear-chain CRF
// ---------------------------------------------------------------------------

/// One command with its attributes already mapped to feature ids.
struct EncodedSequence {
  std::vector<std::vector<int>> features;  // per position
  std::vector<int> labels;                 // gold labels, may be empty at decode time
};

/// Parameters are a flat vector: state weights for (feature, label) at
/// `feature * kNumLabels + label`, followed by transition weights for
/// (prev, next) at `offset + prev * kNumLabels + next`.
class CrfModel {
 public:
  CrfModel() = default;

  /// Builds the feature dictionary from every attribute seen in `corpus`.
  static CrfModel with_features_from(std::span<const TaggedCommand> corpus, double l2_lambda);

  std::size_t num_features() const { return feature_names_.size(); }
  std::size_t num_params() const { return params_.size(); }
  double l2_lambda() const { return l2_lambda_; }

  std::span<const double> params() const { return params_; }
  std::span<double> mutable_params() { return params_; }

  double state_weight(int feature, int label) const {
    return params_[static_cast<std::size_t>(feature) * kNumLabels + label];
  }
  double transition_weight(int prev, int next) const {
    return params_[transition_offset() + static_cast<std::size_t>(prev) * kNumLabels + next];
  }
  std::size_t transition_offset() const { return feature_names_.size() * kNumLabels; }

  /// Feature id for an attribute, or -1 when the attribute was never seen.
  int feature_id(const std::string& name) const;
  const std::vector<std::string>& feature_names() const { return feature_names_; }

  EncodedSequence encode(const TaggedCommand& command) const;
  EncodedSequence encode_tokens(std::span<const Token> tokens) const;

  /// Max-scoring label sequence.
  std::vector<int> viterbi(const EncodedSequence& seq) const;

  /// Unnormalized log score of a labeling.
  double sequence_score(const EncodedSequence& seq, std::span<const int> labels) const;

  /// log Σ_y exp(score(y)) by the forward recursion.
  double log_partition(const EncodedSequence& seq) const;

  /// Regularized negative conditional log-likelihood over `data`. When
  /// `gradient` is non-null it receives d(objective)/d(params).
  double objective(std::span<const EncodedSequence> data, std::vector<double>* gradient) const;

  std::string to_json() const;
  static CrfModel from_json(std::string_view text);

  bool operator==(const CrfModel&) const = default;

 private:
  std::vector<std::string> feature_names_;
  std::unordered_map<std::string, int> feature_index_;
  std::vector<double> params_;
  double l2_lambda_ = 0.0;
};

struct TrainOptions {
  int epochs = 50;
  double l2_lambda = 0.1;
  std::uint64_t seed = 7;
  std::size_t batch_size = 5;
  double learning_rate = 0.5;
};

struct TrainReport {
  /// Objective at initialization followed by the objective after each epoch.
  std::vector<double> objective_trajectory;
  bool degenerate_corpus = false;
};

/// Mini-batch gradient descent on the regularized negative log-likelihood.
/// Batches are shuffled with `seed`, so equal inputs yield identical weights.
CrfModel train_tagger(std::span<const TaggedCommand> corpus, const TrainOptions& options,
                      TrainReport* report = nullptr);

TaggedCommand tag_command(const CrfModel& model, std::string_view command);

struct TaggerScores {
  double macro_f1 = 0;
  double precision = 0;
  double recall = 0;
};

/// Token-level scores macro-averaged over the four concept labels. OUTSIDE is
/// excluded; a label absent from both gold and prediction is skipped.
TaggerScores evaluate_tagger(const CrfModel& model, std::span<const TaggedCommand> test);

/// Same metric on already-decoded label sequences.
TaggerScores score_labels(std::span<const std::vector<ConceptLabel>> gold,
                          std::span<const std::vector<ConceptLabel>> predicted);

}  // namespace deckforge::parser
