#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deckforge/kb.hpp"

namespace deckforge::sim {

/// Rank distributions over a neighbor list. Ranks are offset so rank 0 is
/// well defined: inv_log ~ 1/log(n+2), inv_n ~ 1/(n+1), inv_n2 ~ 1/(n+1)^2.
enum class PdfShape { kInvLog, kInvN, kInvN2 };

std::string_view to_string(PdfShape shape);
PdfShape pdf_from_string(std::string_view text);

/// Normalized weights for ranks 0..n-1.
std::vector<double> pdf_weights(PdfShape shape, std::size_t n);

/// Per sub-concept, the ordered list of words users employ for it (rank 0 is
/// the closest neighbor). Lists are disjoint: every word has one gold
/// sub-concept.
class NeighborLexicon {
 public:
  NeighborLexicon() = default;

  /// Curated synonyms and morphological variants first, then numbered
  /// variants, until each list holds `n` words.
  static NeighborLexicon synthetic(const std::set<std::string>& sub_concepts, std::size_t n);

  /// TSV, one `sub_concept<TAB>word` per line, in rank order per sub-concept.
  /// Lines starting with '#' are ignored.
  static NeighborLexicon from_tsv(std::string_view text);
  std::string to_tsv() const;

  /// The first `n` words of every list. Throws Error(kConfig) if a list is
  /// shorter than `n`.
  NeighborLexicon truncated(std::size_t n) const;

  const std::vector<std::string>& words(std::string_view sub_concept) const;
  std::optional<std::string> gold_of(std::string_view word) const;
  std::vector<std::string> sub_concepts() const;
  std::size_t min_list_size() const;

 private:
  void add(const std::string& sub_concept, const std::string& word);

  std::map<std::string, std::vector<std::string>, std::less<>> lists_;
  std::map<std::string, std::string, std::less<>> gold_;
};

struct WordDraw {
  std::string word;
  std::string claimed;  // the sub-concept the user asks for (always the gold one)
  std::string source;   // the sub-concept whose list supplied the word
  std::size_t rank = 0;
};

/// Collaborative users draw from the gold list. Non-collaborative users draw
/// from the list of a uniformly chosen other sub-concept but still claim the
/// gold one. Throws Error(kConfig) when only one sub-concept exists and the
/// user is non-collaborative.
WordDraw sample_word(bool collaborative, PdfShape pdf, std::string_view gold, const NeighborLexicon& lexicon,
                     std::mt19937_64& rng);

/// A user with its own deterministic word stream.
class SimulatedUser {
 public:
  SimulatedUser(bool collaborative, PdfShape pdf, std::uint64_t seed) : collaborative_(collaborative), pdf_(pdf), rng_(seed) {}

  WordDraw draw(std::string_view gold, const NeighborLexicon& lexicon) {
    return sample_word(collaborative_, pdf_, gold, lexicon, rng_);
  }
  bool collaborative() const { return collaborative_; }

 private:
  bool collaborative_;
  PdfShape pdf_;
  std::mt19937_64 rng_;
};

/// Count of positions where prediction equals gold. NOT_FOUND never matches.
/// Throws Error(kDimension) on length mismatch.
int matching_score(std::span<const std::optional<std::string>> predicted, std::span<const std::string> gold);

enum class Phase { kLearning, kEvaluation };

struct ExperimentConfig {
  double alpha = 0.6;
  std::size_t vocab_size = 50;
  PdfShape pdf = PdfShape::kInvN;
  int repetitions = 10;
  int slides = 3000;
  /// Evaluation-phase slides; defaults to `slides` when unset.
  std::optional<int> evaluation_slides;
  int episode_size = 10;
  std::uint64_t seed = 2021;
  std::string main_concept = "object";
  /// Rolling-window width applied to learning curves.
  int smoothing_window = 20;

  /// Throws Error(kConfig) unless alpha in [0.4, 1], vocab_size >= 1,
  /// repetitions, slides, episode_size >= 1.
  void validate() const;
  int eval_slides() const { return evaluation_slides.value_or(slides); }
};

struct SlideRecord {
  WordDraw draw;
  std::string gold;
  bool collaborative = true;
  std::optional<std::string> predicted;
  bool clarified = false;
};

struct EpisodeLog {
  std::vector<SlideRecord> slides;
  std::vector<int> episode_scores;
};

/// One simulated slide per element: a (gold, word) query from one user.
struct UserStream {
  std::vector<std::string> gold;
  std::vector<WordDraw> draws;
  std::vector<bool> collaborative;
};

/// Learning phase: each slide's user is collaborative with probability
/// `alpha`. Evaluation phase: collaborative users only.
UserStream generate_stream(const ExperimentConfig& config, const NeighborLexicon& lexicon, Phase phase,
                           std::mt19937_64& rng);

/// Plays `stream` against `kb`. In the learning phase the user's claimed
/// sub-concept is fed back after every query (a clarification when the KB
/// answered NOT_FOUND or wrongly, a confirmation otherwise); the evaluation
/// phase only infers. A MatchingScore is recorded per `episode_size` slides.
EpisodeLog run_phase(kb::KnowledgeBase& kb, const UserStream& stream, Phase phase, const std::string& main_concept,
                     int episode_size);

struct ExperimentResult {
  ExperimentConfig config;
  /// Mean episode score across repetitions, indexed by episode.
  std::map<kb::Variant, std::vector<double>> learning_curve;
  std::map<kb::Variant, std::vector<double>> learning_curve_smoothed;
  std::map<kb::Variant, std::vector<double>> evaluation_curve;
  /// Per repetition: mean evaluation-phase episode score.
  std::map<kb::Variant, std::vector<double>> evaluation_means;
};

/// E repetitions with fresh NKB and RKB each time, both fed the same users.
ExperimentResult run_experiment(const ExperimentConfig& config);
ExperimentResult run_experiment(const ExperimentConfig& config, const NeighborLexicon& base_lexicon);

struct GridCell {
  double alpha = 0;
  std::size_t vocab_size = 0;
  PdfShape pdf = PdfShape::kInvN;
  double mean_diff = 0;  // mean over repetitions of RKB - NKB evaluation score
  double stddev = 0;     // sample stddev of the per-repetition differences
  double p_value = 1;    // one-sided one-sample t-test of diff > 0
};

std::vector<GridCell> run_grid(const ExperimentConfig& base, std::span<const double> alphas,
                               std::span<const std::size_t> vocab_sizes, std::span<const PdfShape> pdfs);

/// Trailing rolling mean; the first window-1 points average what is available.
std::vector<double> rolling_mean(std::span<const double> values, int window);

/// First index where `curve` reaches `fraction` of its plateau (the mean of
/// the last `tail` share of points); curve.size() if never.
std::size_t time_to_plateau_fraction(std::span<const double> curve, double fraction = 0.9, double tail = 0.1);

/// One-sided p-value for mean > 0 under a one-sample t-test.
double one_sided_p_value(std::span<const double> samples);

std::string curves_csv(const ExperimentResult& result);
std::string grid_csv(std::span<const GridCell> grid);

/// A simulation job: one experiment, plus an optional grid sweep.
struct SimulationRequest {
  ExperimentConfig config;
  std::vector<double> alphas;
  std::vector<std::size_t> vocab_sizes;
  std::vector<PdfShape> pdfs;

  bool has_grid() const { return !alphas.empty() && !vocab_sizes.empty() && !pdfs.empty(); }
};

/// JSON mirroring ExperimentConfig: `{alpha, N, pdf, E, S, evaluation_slides,
/// episode_size, seed, smoothing_window, grid:{alphas, Ns, pdfs}}`, every
/// field optional. Throws Error(kConfig) on bad values.
SimulationRequest simulation_request_from_json(std::string_view text);
std::string to_json_text(const ExperimentConfig& config);

struct UserStudyResult {
  std::vector<double> clarifications_per_user;  // averaged over repetitions
  std::vector<std::size_t> kb_size_after_user;  // from the first repetition
};

/// Sequential collaborative users creating slides on one shared NKB.
UserStudyResult nkb_user_study(int users, int slides_per_user, PdfShape pdf, std::size_t vocab_size, int repetitions,
                               std::uint64_t seed);

}  // namespace deckforge::sim
