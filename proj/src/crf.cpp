#include <algorithm>
#include <array>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>

#include "deckforge/error.hpp"
#include "deckforge/json_io.hpp"
#include "deckforge/parser.hpp"

namespace deckforge::parser {

namespace {

constexpr int L = kNumLabels;

double log_sum_exp(const double* v, int n) {
  double m = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) m = std::max(m, v[i]);
  if (!std::isfinite(m)) return m;
  double s = 0;
  for (int i = 0; i < n; ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

using Lattice = std::vector<std::array<double, L>>;

Lattice state_scores(const CrfModel& model, const EncodedSequence& seq) {
  Lattice psi(seq.features.size());
  for (std::size_t t = 0; t < seq.features.size(); ++t) {
    psi[t].fill(0.0);
    for (int f : seq.features[t]) {
      for (int y = 0; y < L; ++y) psi[t][y] += model.state_weight(f, y);
    }
  }
  return psi;
}

Lattice forward(const CrfModel& model, const Lattice& psi) {
  const std::size_t n = psi.size();
  Lattice alpha(n);
  if (n == 0) return alpha;
  alpha[0] = psi[0];
  double buf[L];
  for (std::size_t t = 1; t < n; ++t) {
    for (int y = 0; y < L; ++y) {
      for (int p = 0; p < L; ++p) buf[p] = alpha[t - 1][p] + model.transition_weight(p, y);
      alpha[t][y] = psi[t][y] + log_sum_exp(buf, L);
    }
  }
  return alpha;
}

Lattice backward(const CrfModel& model, const Lattice& psi) {
  const std::size_t n = psi.size();
  Lattice beta(n);
  if (n == 0) return beta;
  beta[n - 1].fill(0.0);
  double buf[L];
  for (std::size_t t = n - 1; t-- > 0;) {
    for (int y = 0; y < L; ++y) {
      for (int nx = 0; nx < L; ++nx) buf[nx] = model.transition_weight(y, nx) + psi[t + 1][nx] + beta[t + 1][nx];
      beta[t][y] = log_sum_exp(buf, L);
    }
  }
  return beta;
}

// Adds the unregularized gradient of -log p(gold | x) into `grad` and returns
// that negative log-likelihood.
double accumulate_sequence(const CrfModel& model, const EncodedSequence& seq, double* grad) {
  const std::size_t n = seq.features.size();
  if (n == 0) return 0.0;
  const Lattice psi = state_scores(model, seq);
  const Lattice alpha = forward(model, psi);
  const Lattice beta = backward(model, psi);
  const double log_z = log_sum_exp(alpha[n - 1].data(), L);
  const double gold = model.sequence_score(seq, seq.labels);

  if (grad != nullptr) {
    const std::size_t toff = model.transition_offset();
    for (std::size_t t = 0; t < n; ++t) {
      double marginal[L];
      for (int y = 0; y < L; ++y) marginal[y] = std::exp(alpha[t][y] + beta[t][y] - log_z);
      for (int f : seq.features[t]) {
        double* row = grad + static_cast<std::size_t>(f) * L;
        for (int y = 0; y < L; ++y) row[y] += marginal[y];
        row[seq.labels[t]] -= 1.0;
      }
      if (t + 1 < n) {
        for (int a = 0; a < L; ++a) {
          for (int b = 0; b < L; ++b) {
            grad[toff + a * L + b] += std::exp(alpha[t][a] + model.transition_weight(a, b) + psi[t + 1][b] +
                                               beta[t + 1][b] - log_z);
          }
        }
        grad[toff + seq.labels[t] * L + seq.labels[t + 1]] -= 1.0;
      }
    }
  }
  return log_z - gold;
}

}  // namespace

CrfModel CrfModel::with_features_from(std::span<const TaggedCommand> corpus, double l2_lambda) {
  if (!(l2_lambda >= 0) || !std::isfinite(l2_lambda)) {
    throw Error(ErrorCode::kValidation, "l2_lambda must be a non-negative finite number");
  }
  CrfModel model;
  model.l2_lambda_ = l2_lambda;
  for (const auto& cmd : corpus) {
    cmd.validate();
    std::vector<Token> tokens;
    for (const auto& t : cmd.tokens) tokens.push_back({t, lookup_pos(t)});
    for (const auto& f : featurize(tokens)) {
      for (auto& name : feature_strings(f)) {
        if (model.feature_index_.emplace(name, static_cast<int>(model.feature_names_.size())).second) {
          model.feature_names_.push_back(std::move(name));
        }
      }
    }
  }
  model.params_.assign(model.feature_names_.size() * L + L * L, 0.0);
  return model;
}

int CrfModel::feature_id(const std::string& name) const {
  auto it = feature_index_.find(name);
  return it == feature_index_.end() ? -1 : it->second;
}

EncodedSequence CrfModel::encode_tokens(std::span<const Token> tokens) const {
  EncodedSequence seq;
  for (const auto& f : featurize(tokens)) {
    std::vector<int> ids;
    for (const auto& name : feature_strings(f)) {
      if (int id = feature_id(name); id >= 0) ids.push_back(id);
    }
    seq.features.push_back(std::move(ids));
  }
  return seq;
}

EncodedSequence CrfModel::encode(const TaggedCommand& command) const {
  command.validate();
  std::vector<Token> tokens;
  for (const auto& t : command.tokens) tokens.push_back({t, lookup_pos(t)});
  EncodedSequence seq = encode_tokens(tokens);
  for (auto label : command.labels) seq.labels.push_back(static_cast<int>(label));
  return seq;
}

double CrfModel::sequence_score(const EncodedSequence& seq, std::span<const int> labels) const {
  double score = 0;
  for (std::size_t t = 0; t < seq.features.size(); ++t) {
    for (int f : seq.features[t]) score += state_weight(f, labels[t]);
    if (t > 0) score += transition_weight(labels[t - 1], labels[t]);
  }
  return score;
}

double CrfModel::log_partition(const EncodedSequence& seq) const {
  if (seq.features.empty()) return 0.0;
  const Lattice alpha = forward(*this, state_scores(*this, seq));
  return log_sum_exp(alpha.back().data(), L);
}

std::vector<int> CrfModel::viterbi(const EncodedSequence& seq) const {
  const std::size_t n = seq.features.size();
  if (n == 0) return {};
  const Lattice psi = state_scores(*this, seq);
  Lattice delta(n);
  std::vector<std::array<int, L>> back(n);
  delta[0] = psi[0];
  for (std::size_t t = 1; t < n; ++t) {
    for (int y = 0; y < L; ++y) {
      int best = 0;
      double best_score = delta[t - 1][0] + transition_weight(0, y);
      for (int p = 1; p < L; ++p) {
        double s = delta[t - 1][p] + transition_weight(p, y);
        if (s > best_score) {
          best_score = s;
          best = p;
        }
      }
      delta[t][y] = best_score + psi[t][y];
      back[t][y] = best;
    }
  }
  std::vector<int> path(n);
  path[n - 1] = static_cast<int>(std::max_element(delta[n - 1].begin(), delta[n - 1].end()) - delta[n - 1].begin());
  for (std::size_t t = n - 1; t > 0; --t) path[t - 1] = back[t][path[t]];
  return path;
}

double CrfModel::objective(std::span<const EncodedSequence> data, std::vector<double>* gradient) const {
  if (gradient != nullptr) gradient->assign(params_.size(), 0.0);
  double total = 0;
  for (const auto& seq : data) total += accumulate_sequence(*this, seq, gradient ? gradient->data() : nullptr);
  double sq = 0;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    sq += params_[i] * params_[i];
    if (gradient != nullptr) (*gradient)[i] += l2_lambda_ * params_[i];
  }
  return total + 0.5 * l2_lambda_ * sq;
}

std::string CrfModel::to_json() const {
  Json j;
  j["format"] = "deckforge-crf";
  j["version"] = 1;
  j["l2_lambda"] = l2_lambda_;
  Json labels = Json::array();
  for (int y = 0; y < L; ++y) labels.push_back(std::string(to_string(static_cast<ConceptLabel>(y))));
  j["labels"] = std::move(labels);
  Json features = Json::array();
  for (std::size_t f = 0; f < feature_names_.size(); ++f) {
    features.push_back(Json::array({feature_names_[f], std::vector<double>(params_.begin() + f * L,
                                                                         params_.begin() + (f + 1) * L)}));
  }
  j["state_weights"] = std::move(features);
  Json trans = Json::array();
  for (int a = 0; a < L; ++a) {
    trans.push_back(std::vector<double>(params_.begin() + transition_offset() + a * L,
                                        params_.begin() + transition_offset() + (a + 1) * L));
  }
  j["transition_weights"] = std::move(trans);
  return j.dump();
}

CrfModel CrfModel::from_json(std::string_view text) {
  Json j = parse_json_text(text);
  try {
    if (j.at("format") != "deckforge-crf" || j.at("version") != 1) {
      throw Error(ErrorCode::kMigration, "unsupported model format/version");
    }
    CrfModel model;
    model.l2_lambda_ = j.at("l2_lambda").get<double>();
    const auto& labels = j.at("labels");
    if (labels.size() != L) throw Error(ErrorCode::kValidation, "model label set mismatch");
    for (int y = 0; y < L; ++y) {
      if (label_from_string(labels[y].get<std::string>()) != static_cast<ConceptLabel>(y)) {
        throw Error(ErrorCode::kValidation, "model label order mismatch");
      }
    }
    const auto& features = j.at("state_weights");
    model.params_.reserve(features.size() * L + L * L);
    for (const auto& entry : features) {
      auto name = entry.at(0).get<std::string>();
      auto weights = entry.at(1).get<std::vector<double>>();
      if (weights.size() != L) throw Error(ErrorCode::kValidation, "bad state weight row");
      model.feature_index_.emplace(name, static_cast<int>(model.feature_names_.size()));
      model.feature_names_.push_back(std::move(name));
      model.params_.insert(model.params_.end(), weights.begin(), weights.end());
    }
    const auto& trans = j.at("transition_weights");
    if (trans.size() != L) throw Error(ErrorCode::kValidation, "bad transition table");
    for (const auto& row : trans) {
      auto weights = row.get<std::vector<double>>();
      if (weights.size() != L) throw Error(ErrorCode::kValidation, "bad transition row");
      model.params_.insert(model.params_.end(), weights.begin(), weights.end());
    }
    for (double w : model.params_) {
      if (!std::isfinite(w)) throw Error(ErrorCode::kValidation, "non-finite weight");
    }
    return model;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("model schema: ") + e.what());
  }
}

CrfModel train_tagger(std::span<const TaggedCommand> corpus, const TrainOptions& options, TrainReport* report) {
  if (corpus.empty()) throw Error(ErrorCode::kValidation, "training corpus is empty");
  if (options.epochs < 0 || options.batch_size == 0) {
    throw Error(ErrorCode::kValidation, "epochs must be >= 0 and batch_size > 0");
  }
  CrfModel model = CrfModel::with_features_from(corpus, options.l2_lambda);

  std::vector<EncodedSequence> data;
  data.reserve(corpus.size());
  bool any_concept = false;
  for (const auto& cmd : corpus) {
    data.push_back(model.encode(cmd));
    for (auto l : cmd.labels) any_concept |= l != ConceptLabel::kOutside;
  }
  TrainReport local;
  TrainReport& rep = report != nullptr ? *report : local;
  rep = {};
  rep.degenerate_corpus = !any_concept;
  if (!any_concept) {
    std::cerr << "warning: training corpus has no labeled concept tokens\n";
  }
  rep.objective_trajectory.push_back(model.objective(data, nullptr));

  std::mt19937_64 rng(options.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad(model.num_params());
  const double reg_share = static_cast<double>(options.batch_size) / static_cast<double>(data.size());
  auto params = model.mutable_params();

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const double lr = options.learning_rate / (1.0 + 0.05 * epoch);
    for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
      const std::size_t end = std::min(order.size(), start + options.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t k = start; k < end; ++k) accumulate_sequence(model, data[order[k]], grad.data());
      const double batch = static_cast<double>(end - start);
      for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grad[i] + reg_share * model.l2_lambda() * params[i];
        params[i] -= lr * g / batch;
      }
    }
    rep.objective_trajectory.push_back(model.objective(data, nullptr));
  }
  return model;
}

TaggedCommand tag_command(const CrfModel& model, std::string_view command) {
  auto tokens = tokenize_and_pos(command);
  auto path = model.viterbi(model.encode_tokens(tokens));
  TaggedCommand out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    out.tokens.push_back(std::move(tokens[i].text));
    out.labels.push_back(static_cast<ConceptLabel>(path[i]));
  }
  return out;
}

TaggerScores score_labels(std::span<const std::vector<ConceptLabel>> gold,
                          std::span<const std::vector<ConceptLabel>> predicted) {
  if (gold.size() != predicted.size()) throw Error(ErrorCode::kDimension, "gold/predicted count mismatch");
  std::array<long, L> tp{}, fp{}, fn{};
  for (std::size_t s = 0; s < gold.size(); ++s) {
    if (gold[s].size() != predicted[s].size()) throw Error(ErrorCode::kDimension, "sequence length mismatch");
    for (std::size_t t = 0; t < gold[s].size(); ++t) {
      const int g = static_cast<int>(gold[s][t]);
      const int p = static_cast<int>(predicted[s][t]);
      if (g == p) {
        ++tp[g];
      } else {
        ++fp[p];
        ++fn[g];
      }
    }
  }
  TaggerScores scores;
  int used = 0;
  for (auto label : kConceptLabels) {
    const int y = static_cast<int>(label);
    if (tp[y] + fp[y] + fn[y] == 0) continue;
    const double p = tp[y] + fp[y] > 0 ? static_cast<double>(tp[y]) / static_cast<double>(tp[y] + fp[y]) : 0.0;
    const double r = tp[y] + fn[y] > 0 ? static_cast<double>(tp[y]) / static_cast<double>(tp[y] + fn[y]) : 0.0;
    const double f1 = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    scores.precision += p;
    scores.recall += r;
    scores.macro_f1 += f1;
    ++used;
  }
  if (used > 0) {
    scores.precision /= used;
    scores.recall /= used;
    scores.macro_f1 /= used;
  }
  return scores;
}

TaggerScores evaluate_tagger(const CrfModel& model, std::span<const TaggedCommand> test) {
  if (test.empty()) throw Error(ErrorCode::kValidation, "test set is empty");
  std::vector<std::vector<ConceptLabel>> gold, predicted;
  for (const auto& cmd : test) {
    auto path = model.viterbi(model.encode(cmd));
    gold.push_back(cmd.labels);
    std::vector<ConceptLabel> pred;
    for (int y : path) pred.push_back(static_cast<ConceptLabel>(y));
    predicted.push_back(std::move(pred));
  }
  return score_labels(gold, predicted);
}

}  // namespace deckforge::parser
