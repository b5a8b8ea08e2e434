#include "deckforge/sim.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>
#include <sstream>

#include "deckforge/error.hpp"

namespace deckforge::sim {

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::kConfig, what); }

const std::map<std::string, std::vector<std::string>>& curated_synonyms() {
  static const std::map<std::string, std::vector<std::string>> table = {
      {"piechart",
       {"pie", "piegraph", "pizzachart", "pie chart", "pie graph", "pizzagraph", "donut chart", "doughnut chart",
        "circle chart", "pie plot", "pie diagram", "wedge chart", "sector chart", "circle graph", "pie visual"}},
      {"barchart",
       {"histogram", "barplot", "bar chart", "bar graph", "column chart", "bars", "bar plot", "column graph",
        "bar diagram", "histo", "vertical bars", "horizontal bars", "stacked bars"}},
      {"linechart",
       {"line chart", "line graph", "trend line", "timeseries plot", "line plot", "trend chart", "curve",
        "sparkline", "run chart", "time plot", "trendline", "line diagram"}},
      {"table",
       {"grid", "data table", "spreadsheet view", "matrix", "tabular view", "tableau", "rows and columns",
        "summary table", "pivot table", "data grid", "tabulation"}},
      {"company_briefing_deck",
       {"briefing deck", "company deck", "briefing book", "tearsheet", "company profile", "company briefing",
        "profile deck", "briefing pack", "one pager", "fact sheet"}},
  };
  return table;
}

double mean_of(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_stddev(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::size_t sample_rank(const std::vector<double>& cdf, std::mt19937_64& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

const std::vector<double>& cached_cdf(PdfShape shape, std::size_t n) {
  thread_local std::map<std::pair<PdfShape, std::size_t>, std::vector<double>> cache;
  auto [it, inserted] = cache.try_emplace({shape, n});
  if (inserted) {
    auto w = pdf_weights(shape, n);
    std::partial_sum(w.begin(), w.end(), w.begin());
    w.back() = 1.0;
    it->second = std::move(w);
  }
  return it->second;
}

}  // namespace

std::string_view to_string(PdfShape shape) {
  switch (shape) {
    case PdfShape::kInvLog: return "inv_log";
    case PdfShape::kInvN: return "inv_n";
    case PdfShape::kInvN2: return "inv_n2";
  }
  return "?";
}

PdfShape pdf_from_string(std::string_view text) {
  if (text == "inv_log") return PdfShape::kInvLog;
  if (text == "inv_n") return PdfShape::kInvN;
  if (text == "inv_n2") return PdfShape::kInvN2;
  config_error("unknown pdf '" + std::string(text) + "'");
}

std::vector<double> pdf_weights(PdfShape shape, std::size_t n) {
  if (n == 0) config_error("pdf over zero ranks");
  std::vector<double> w(n);
  for (std::size_t r = 0; r < n; ++r) {
    const double x = static_cast<double>(r);
    switch (shape) {
      case PdfShape::kInvLog: w[r] = 1.0 / std::log(x + 2.0); break;
      case PdfShape::kInvN: w[r] = 1.0 / (x + 1.0); break;
      case PdfShape::kInvN2: w[r] = 1.0 / ((x + 1.0) * (x + 1.0)); break;
    }
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= total;
  return w;
}

// --- NeighborLexicon ----------------------------------------------------------

void NeighborLexicon::add(const std::string& sub_concept, const std::string& word) {
  if (word.empty()) config_error("empty lexicon word for '" + sub_concept + "'");
  auto [it, inserted] = gold_.emplace(word, sub_concept);
  if (!inserted) {
    config_error("word '" + word + "' listed for both '" + it->second + "' and '" + sub_concept + "'");
  }
  lists_[sub_concept].push_back(word);
}

NeighborLexicon NeighborLexicon::synthetic(const std::set<std::string>& sub_concepts, std::size_t n) {
  if (n < 1) config_error("lexicon size must be >= 1");
  NeighborLexicon lex;
  const auto& curated = curated_synonyms();
  for (const auto& sub : sub_concepts) {
    std::vector<std::string> words;
    if (auto it = curated.find(sub); it != curated.end()) words = it->second;
    std::string plain;
    for (char c : sub) plain += c == '_' ? ' ' : c;
    for (const auto& v : {sub + "s", plain, plain + "s", "my " + plain, "the " + plain}) {
      if (std::find(words.begin(), words.end(), v) == words.end() && v != sub) words.push_back(v);
    }
    for (std::size_t k = 1; words.size() < n; ++k) words.push_back(sub + " v" + std::to_string(k));
    words.resize(n);
    for (const auto& w : words) lex.add(sub, w);
  }
  return lex;
}

NeighborLexicon NeighborLexicon::from_tsv(std::string_view text) {
  NeighborLexicon lex;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size()) {
      throw Error(ErrorCode::kParse, "lexicon line " + std::to_string(line_no) + ": expected sub_concept<TAB>word");
    }
    lex.add(line.substr(0, tab), line.substr(tab + 1));
  }
  if (lex.lists_.empty()) config_error("lexicon is empty");
  return lex;
}

std::string NeighborLexicon::to_tsv() const {
  std::string out;
  for (const auto& [sub, words] : lists_) {
    for (const auto& w : words) out += sub + "\t" + w + "\n";
  }
  return out;
}

NeighborLexicon NeighborLexicon::truncated(std::size_t n) const {
  if (n < 1) config_error("lexicon size must be >= 1");
  NeighborLexicon out;
  for (const auto& [sub, words] : lists_) {
    if (words.size() < n) {
      config_error("lexicon list for '" + sub + "' has " + std::to_string(words.size()) + " < " + std::to_string(n) +
                   " words");
    }
    for (std::size_t i = 0; i < n; ++i) out.add(sub, words[i]);
  }
  return out;
}

const std::vector<std::string>& NeighborLexicon::words(std::string_view sub_concept) const {
  auto it = lists_.find(sub_concept);
  if (it == lists_.end()) config_error("lexicon has no list for '" + std::string(sub_concept) + "'");
  return it->second;
}

std::optional<std::string> NeighborLexicon::gold_of(std::string_view word) const {
  auto it = gold_.find(word);
  if (it == gold_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> NeighborLexicon::sub_concepts() const {
  std::vector<std::string> out;
  for (const auto& [sub, words] : lists_) out.push_back(sub);
  return out;
}

std::size_t NeighborLexicon::min_list_size() const {
  std::size_t m = lists_.empty() ? 0 : SIZE_MAX;
  for (const auto& [sub, words] : lists_) m = std::min(m, words.size());
  return m;
}

// --- users --------------------------------------------------------------------

WordDraw sample_word(bool collaborative, PdfShape pdf, std::string_view gold, const NeighborLexicon& lexicon,
                     std::mt19937_64& rng) {
  std::string source(gold);
  if (!collaborative) {
    auto subs = lexicon.sub_concepts();
    std::erase(subs, std::string(gold));
    if (subs.empty()) config_error("non-collaborative sampling needs at least two sub-concepts");
    source = subs[std::uniform_int_distribution<std::size_t>(0, subs.size() - 1)(rng)];
  }
  const auto& list = lexicon.words(source);
  const std::size_t rank = sample_rank(cached_cdf(pdf, list.size()), rng);
  return {list[rank], std::string(gold), std::move(source), rank};
}

int matching_score(std::span<const std::optional<std::string>> predicted, std::span<const std::string> gold) {
  if (predicted.size() != gold.size()) {
    throw Error(ErrorCode::kDimension, "predicted and gold vectors differ in length (" +
                                           std::to_string(predicted.size()) + " vs " + std::to_string(gold.size()) + ")");
  }
  int score = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) score += predicted[i].has_value() && *predicted[i] == gold[i];
  return score;
}

// --- experiment ---------------------------------------------------------------

void ExperimentConfig::validate() const {
  if (!(alpha >= 0.4 && alpha <= 1.0)) config_error("alpha must lie in [0.4, 1]");
  if (vocab_size < 1) config_error("N must be >= 1");
  if (repetitions < 1 || slides < 1 || eval_slides() < 1 || episode_size < 1) {
    config_error("E, S and episode_size must be >= 1");
  }
  if (smoothing_window < 1) config_error("smoothing window must be >= 1");
}

UserStream generate_stream(const ExperimentConfig& config, const NeighborLexicon& lexicon, Phase phase,
                           std::mt19937_64& rng) {
  const auto subs = lexicon.sub_concepts();
  const int count = phase == Phase::kLearning ? config.slides : config.eval_slides();
  UserStream stream;
  stream.gold.reserve(count);
  stream.draws.reserve(count);
  std::bernoulli_distribution is_collaborative(phase == Phase::kLearning ? config.alpha : 1.0);
  std::uniform_int_distribution<std::size_t> pick_sub(0, subs.size() - 1);
  for (int i = 0; i < count; ++i) {
    const std::string& gold = subs[pick_sub(rng)];
    const bool collaborative = is_collaborative(rng);
    stream.gold.push_back(gold);
    stream.collaborative.push_back(collaborative);
    stream.draws.push_back(sample_word(collaborative, config.pdf, gold, lexicon, rng));
  }
  return stream;
}

EpisodeLog run_phase(kb::KnowledgeBase& kb, const UserStream& stream, Phase phase, const std::string& main_concept,
                     int episode_size) {
  if (episode_size < 1) config_error("episode_size must be >= 1");
  EpisodeLog log;
  log.slides.reserve(stream.draws.size());
  std::vector<std::optional<std::string>> predicted;
  std::vector<std::string> gold;
  for (std::size_t i = 0; i < stream.draws.size(); ++i) {
    const WordDraw& d = stream.draws[i];
    SlideRecord rec{d, stream.gold[i], stream.collaborative[i], kb.infer(main_concept, d.word), false};
    if (phase == Phase::kLearning) {
      rec.clarified = !rec.predicted || *rec.predicted != d.claimed;
      kb.learn(main_concept, d.word, d.claimed);
    }
    predicted.push_back(rec.predicted);
    gold.push_back(rec.gold);
    log.slides.push_back(std::move(rec));
    if (static_cast<int>(gold.size()) == episode_size) {
      log.episode_scores.push_back(matching_score(predicted, gold));
      predicted.clear();
      gold.clear();
    }
  }
  return log;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto subs = kb::Ontology::default_ontology().sub_concepts(config.main_concept);
  return run_experiment(config, NeighborLexicon::synthetic(subs, config.vocab_size));
}

ExperimentResult run_experiment(const ExperimentConfig& config, const NeighborLexicon& base_lexicon) {
  config.validate();
  const NeighborLexicon lexicon = base_lexicon.truncated(config.vocab_size);
  kb::Ontology ontology;
  for (const auto& sub : lexicon.sub_concepts()) ontology.add_sub_concept(config.main_concept, sub);

  ExperimentResult result;
  result.config = config;
  const std::size_t learn_episodes = static_cast<std::size_t>(config.slides / config.episode_size);
  const std::size_t eval_episodes = static_cast<std::size_t>(config.eval_slides() / config.episode_size);
  for (auto v : {kb::Variant::kNaive, kb::Variant::kRobust}) {
    result.learning_curve[v].assign(learn_episodes, 0.0);
    result.evaluation_curve[v].assign(eval_episodes, 0.0);
  }

  for (int rep = 0; rep < config.repetitions; ++rep) {
    std::mt19937_64 rng(config.seed + 7919ULL * static_cast<std::uint64_t>(rep));
    const UserStream learning = generate_stream(config, lexicon, Phase::kLearning, rng);
    const UserStream evaluation = generate_stream(config, lexicon, Phase::kEvaluation, rng);
    for (auto v : {kb::Variant::kNaive, kb::Variant::kRobust}) {
      auto kb = kb::make_kb(v, ontology);
      const auto learn_log = run_phase(*kb, learning, Phase::kLearning, config.main_concept, config.episode_size);
      const auto eval_log = run_phase(*kb, evaluation, Phase::kEvaluation, config.main_concept, config.episode_size);
      for (std::size_t e = 0; e < learn_episodes; ++e) {
        result.learning_curve[v][e] += learn_log.episode_scores[e] / static_cast<double>(config.repetitions);
      }
      double eval_total = 0;
      for (std::size_t e = 0; e < eval_episodes; ++e) {
        result.evaluation_curve[v][e] += eval_log.episode_scores[e] / static_cast<double>(config.repetitions);
        eval_total += eval_log.episode_scores[e];
      }
      result.evaluation_means[v].push_back(eval_episodes ? eval_total / static_cast<double>(eval_episodes) : 0.0);
    }
  }
  for (auto v : {kb::Variant::kNaive, kb::Variant::kRobust}) {
    result.learning_curve_smoothed[v] = rolling_mean(result.learning_curve[v], config.smoothing_window);
  }
  return result;
}

std::vector<GridCell> run_grid(const ExperimentConfig& base, std::span<const double> alphas,
                               std::span<const std::size_t> vocab_sizes, std::span<const PdfShape> pdfs) {
  const auto subs = kb::Ontology::default_ontology().sub_concepts(base.main_concept);
  const std::size_t max_n = vocab_sizes.empty() ? 1 : *std::max_element(vocab_sizes.begin(), vocab_sizes.end());
  const NeighborLexicon lexicon = NeighborLexicon::synthetic(subs, max_n);
  std::vector<GridCell> grid;
  for (auto pdf : pdfs) {
    for (auto n : vocab_sizes) {
      for (double alpha : alphas) {
        ExperimentConfig cfg = base;
        cfg.alpha = alpha;
        cfg.vocab_size = n;
        cfg.pdf = pdf;
        const auto result = run_experiment(cfg, lexicon);
        const auto& rkb = result.evaluation_means.at(kb::Variant::kRobust);
        const auto& nkb = result.evaluation_means.at(kb::Variant::kNaive);
        std::vector<double> diffs(rkb.size());
        for (std::size_t i = 0; i < diffs.size(); ++i) diffs[i] = rkb[i] - nkb[i];
        grid.push_back({alpha, n, pdf, mean_of(diffs), sample_stddev(diffs), one_sided_p_value(diffs)});
      }
    }
  }
  return grid;
}

std::vector<double> rolling_mean(std::span<const double> values, int window) {
  if (window < 1) config_error("rolling window must be >= 1");
  std::vector<double> out(values.size());
  double sum = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += values[i];
    if (i >= static_cast<std::size_t>(window)) sum -= values[i - window];
    out[i] = sum / static_cast<double>(std::min<std::size_t>(i + 1, window));
  }
  return out;
}

std::size_t time_to_plateau_fraction(std::span<const double> curve, double fraction, double tail) {
  if (curve.empty()) return 0;
  const std::size_t tail_len = std::max<std::size_t>(1, static_cast<std::size_t>(curve.size() * tail));
  const double plateau = mean_of(curve.subspan(curve.size() - tail_len));
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve[i] >= fraction * plateau) return i;
  }
  return curve.size();
}

double one_sided_p_value(std::span<const double> samples) {
  if (samples.size() < 2) return 1.0;
  const double m = mean_of(samples);
  const double sd = sample_stddev(samples);
  if (sd == 0.0) return m > 0 ? 0.0 : 1.0;
  const double t = m / (sd / std::sqrt(static_cast<double>(samples.size())));
  boost::math::students_t dist(static_cast<double>(samples.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, t));
}

std::string curves_csv(const ExperimentResult& result) {
  std::ostringstream out;
  out.precision(10);
  out << "phase,kb_variant,slide_index,score\n";
  const int ep = result.config.episode_size;
  for (auto v : {kb::Variant::kNaive, kb::Variant::kRobust}) {
    const auto& learn = result.learning_curve_smoothed.at(v);
    for (std::size_t e = 0; e < learn.size(); ++e) {
      out << "learning," << to_string(v) << ',' << (e + 1) * ep << ',' << learn[e] << '\n';
    }
    const auto& eval = result.evaluation_curve.at(v);
    for (std::size_t e = 0; e < eval.size(); ++e) {
      out << "evaluation," << to_string(v) << ',' << (e + 1) * ep << ',' << eval[e] << '\n';
    }
  }
  return out.str();
}

std::string grid_csv(std::span<const GridCell> grid) {
  std::ostringstream out;
  out.precision(10);
  out << "alpha,N,pdf,mean_diff,stddev\n";
  for (const auto& c : grid) {
    out << c.alpha << ',' << c.vocab_size << ',' << to_string(c.pdf) << ',' << c.mean_diff << ',' << c.stddev << '\n';
  }
  return out.str();
}

UserStudyResult nkb_user_study(int users, int slides_per_user, PdfShape pdf, std::size_t vocab_size, int repetitions,
                               std::uint64_t seed) {
  if (users < 1 || slides_per_user < 1 || repetitions < 1) config_error("user study sizes must be >= 1");
  const auto ontology = kb::Ontology::default_ontology();
  const auto& subs = ontology.sub_concepts("object");
  const NeighborLexicon lexicon = NeighborLexicon::synthetic(subs, vocab_size);
  const std::vector<std::string> sub_list(subs.begin(), subs.end());

  UserStudyResult result;
  result.clarifications_per_user.assign(static_cast<std::size_t>(users), 0.0);
  for (int rep = 0; rep < repetitions; ++rep) {
    kb::NaiveKB kb(ontology);
    std::mt19937_64 task_rng(seed + 104729ULL * static_cast<std::uint64_t>(rep));
    for (int u = 0; u < users; ++u) {
      SimulatedUser user(true, pdf, seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(rep * users + u + 1)));
      int clarifications = 0;
      for (int s = 0; s < slides_per_user; ++s) {
        const std::string& gold = sub_list[std::uniform_int_distribution<std::size_t>(0, sub_list.size() - 1)(task_rng)];
        const WordDraw d = user.draw(gold, lexicon);
        auto predicted = kb.infer("object", d.word);
        if (!predicted || *predicted != d.claimed) ++clarifications;
        kb.learn("object", d.word, d.claimed);
      }
      result.clarifications_per_user[u] += clarifications / static_cast<double>(repetitions);
      if (rep == 0) result.kb_size_after_user.push_back(kb.size());
    }
  }
  return result;
}

}  // namespace deckforge::sim
