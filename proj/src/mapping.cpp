#include "deckforge/mapping.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

#include "deckforge/error.hpp"
#include "deckforge/json_io.hpp"

namespace deckforge::mapping {

namespace {

constexpr std::string_view kData = "data";
constexpr std::string_view kTicker = "ticker";

// Lowercase with spaces, underscores and hyphens removed.
std::string squash(std::string_view s) {
  std::string out;
  for (unsigned char c : s) {
    if (std::isspace(c) || c == '_' || c == '-') continue;
    out += static_cast<char>(std::tolower(c));
  }
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

const std::map<std::string, std::string>& builtin_synonyms(std::string_view main_concept) {
  static const std::map<std::string, std::string> object = {
      {"briefingdeck", "company_briefing_deck"}, {"briefing", "company_briefing_deck"},
      {"companybriefing", "company_briefing_deck"}};
  static const std::map<std::string, std::string> action = {
      {"make", "create"},     {"generate", "create"}, {"build", "create"},   {"produce", "create"},
      {"prepare", "create"},  {"draw", "create"},     {"plot", "create"},    {"add", "create"},
      {"insert", "create"},   {"modify", "update"},   {"change", "update"},  {"refresh", "update"},
      {"edit", "update"},     {"redo", "update"},     {"regenerate", "update"}, {"remove", "delete"},
      {"drop", "delete"},     {"erase", "delete"},    {"discard", "delete"}};
  static const std::map<std::string, std::string> none;
  if (main_concept == "object") return object;
  if (main_concept == "action") return action;
  return none;
}

std::optional<std::string> match_candidate(const std::vector<std::string>& candidates, std::string_view answer) {
  const std::string a = squash(answer);
  for (const auto& c : candidates) {
    if (squash(c) == a) return c;
  }
  return std::nullopt;
}

bool looks_like_ticker(std::string_view s) {
  if (s.empty() || s.size() > 6) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isupper(c) || std::isdigit(c) || c == '.'; });
}

}  // namespace

// --- aliases ------------------------------------------------------------------

AliasTable AliasTable::defaults() {
  AliasTable t;
  t.link("tesla", "TSLA");
  t.link("apple", "AAPL");
  t.link("peloton", "PTON");
  t.link("ford", "F");
  t.link("general motors", "GM");
  t.link("nio", "NIO");
  return t;
}

std::optional<std::string> AliasTable::lookup(std::string_view name) const {
  auto it = aliases_.find(kb::normalize_word(name));
  if (it == aliases_.end()) return std::nullopt;
  return it->second;
}

void AliasTable::link(std::string_view name, std::string ticker) {
  const std::string key = kb::normalize_word(name);
  if (key.empty() || ticker.empty()) throw Error(ErrorCode::kValidation, "alias and ticker must be non-empty");
  aliases_[key] = std::move(ticker);
}

std::string AliasTable::save() const {
  Json j;
  j["aliases"] = Json::object();
  for (const auto& [name, ticker] : aliases_) j["aliases"][name] = ticker;
  return j.dump(2);
}

AliasTable AliasTable::load(std::string_view text) {
  const Json j = parse_json_text(text);
  AliasTable t;
  try {
    for (const auto& [name, ticker] : j.at("aliases").items()) t.link(name, ticker.get<std::string>());
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("alias table: ") + e.what());
  }
  return t;
}

// --- clarification ------------------------------------------------------------

std::string ClarificationRequest::question() const {
  if (missing == kTicker || missing == kData) {
    if (unknown_word) {
      return "I could not recognize '" + *unknown_word + "'. Please specify the " +
             (missing == kTicker ? std::string("ticker.") : std::string("dataset or ticker."));
    }
    return "Which data should I use? Please name a dataset or ticker.";
  }
  if (unknown_word) {
    return "I don't know what '" + *unknown_word + "' means. Which " + missing + " did you mean: " + join(candidates) +
           "?";
  }
  return "Which " + missing + " do you want? Options: " + join(candidates) + ".";
}

std::string canonical_deck_name(std::string_view text) {
  std::string out;
  for (unsigned char c : text) {
    if (std::isalnum(c)) out += static_cast<char>(std::tolower(c));
  }
  return out;
}

std::optional<std::string> builtin_sub_concept(const kb::Ontology& ontology, std::string_view main_concept,
                                               std::string_view word) {
  if (!ontology.has_main(main_concept)) return std::nullopt;
  std::string w = squash(word);
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& sub : ontology.sub_concepts(main_concept)) {
      if (squash(sub) == w) return sub;
    }
    const auto& syn = builtin_synonyms(main_concept);
    if (auto it = syn.find(w); it != syn.end() && ontology.contains(main_concept, it->second)) return it->second;
    // one retry with a plural "s" dropped
    if (w.size() < 3 || w.back() != 's') break;
    w.pop_back();
  }
  return std::nullopt;
}

// --- engine -------------------------------------------------------------------

std::optional<std::string> MappingEngine::resolve_data(std::string_view word, const AliasTable& aliases) const {
  const std::string w = trim(word);
  if (w.empty()) return std::nullopt;
  if (auto name = catalog_.canonical_name(w)) return name;
  if (auto ticker = aliases.lookup(w)) {
    if (auto name = catalog_.canonical_name(*ticker)) return name;
  }
  return std::nullopt;
}

Resolution MappingEngine::resolve(const parser::TaggedCommand& tagged, const kb::KnowledgeBase& kb,
                                  const AliasTable& aliases, SessionState& state) const {
  std::optional<parser::ConceptSpan> action, object, data, presentation;
  for (const auto& span : parser::concept_spans(tagged)) {
    switch (span.label) {
      case parser::ConceptLabel::kAction:
        if (!action) action = span;
        break;
      case parser::ConceptLabel::kObject:
        if (object && kb::normalize_word(object->text) != kb::normalize_word(span.text)) {
          throw Error(ErrorCode::kAmbiguity,
                      "two objects in one command: '" + object->text + "' and '" + span.text + "'");
        }
        if (!object) object = span;
        break;
      case parser::ConceptLabel::kData:
        if (!data) data = span;
        break;
      case parser::ConceptLabel::kPresentation:
        if (!presentation) presentation = span;
        break;
      case parser::ConceptLabel::kOutside: break;
    }
  }
  // Unseen multiword macro names tend to come back tagged as a presentation.
  if (!object && presentation && builtin_sub_concept(kb.ontology(), "object", presentation->text)) {
    object = presentation;
    presentation.reset();
  }
  SessionState next = state;
  next.pending.reset();
  next.partial = ResolvedIntent{};
  next.slot_words.clear();
  if (action) next.slot_words["action"] = action->text;
  if (object) next.slot_words["object"] = object->text;
  if (data) next.slot_words[std::string(kData)] = data->text;
  if (presentation) next.slot_words["presentation"] = presentation->text;
  Resolution r = continue_resolution(next, kb, aliases);
  state = std::move(next);
  return r;
}

Resolution MappingEngine::continue_resolution(SessionState& state, const kb::KnowledgeBase& kb,
                                              const AliasTable& aliases) const {
  auto& intent = state.partial;
  const auto word_of = [&](std::string_view slot) -> std::optional<std::string> {
    auto it = state.slot_words.find(std::string(slot));
    if (it == state.slot_words.end()) return std::nullopt;
    return it->second;
  };
  const auto ask = [&](ClarificationRequest req) -> Resolution {
    state.pending = req;
    return req;
  };

  for (const char* main : {"action", "object"}) {
    std::string& slot = std::string_view(main) == "action" ? intent.action : intent.object;
    if (!slot.empty()) continue;
    const auto& subs = kb.ontology().sub_concepts(main);
    std::vector<std::string> candidates(subs.begin(), subs.end());
    const auto word = word_of(main);
    if (!word) return ask({main, std::nullopt, candidates});
    if (auto sub = builtin_sub_concept(kb.ontology(), main, *word)) {
      slot = *sub;
    } else if (auto inferred = kb.infer(main, *word)) {
      slot = *inferred;
    } else {
      return ask({main, *word, candidates});
    }
  }

  const bool is_macro = library_.has_macro(intent.object);
  const std::string data_slot(intent.object == skills::kBriefingMacro ? kTicker : kData);
  if (intent.data_ref.empty()) {
    const auto word = word_of(kData);
    if (!word) return ask({data_slot, std::nullopt, {}});
    auto name = resolve_data(*word, aliases);
    if (!name) return ask({data_slot, *word, {}});
    intent.data_ref = *name;
  }
  if (catalog_.get(intent.data_ref).series.size() == 1) intent.extra_params["ticker"] = intent.data_ref;

  if (intent.presentation.empty()) {
    if (auto word = word_of("presentation"); word && !canonical_deck_name(*word).empty()) {
      intent.presentation = canonical_deck_name(*word);
    } else if (is_macro) {
      intent.presentation = canonical_deck_name(intent.data_ref + " " + intent.object);
    } else if (!state.current_deck.empty()) {
      intent.presentation = state.current_deck;
    } else {
      intent.presentation = "report";
    }
  }

  ResolvedIntent done = intent;
  state.pending.reset();
  state.slot_words.clear();
  state.partial = ResolvedIntent{};
  state.current_deck = done.presentation;
  return done;
}

Resolution MappingEngine::apply_clarification(SessionState& state, std::string_view answer, kb::KnowledgeBase& kb,
                                              AliasTable& aliases) const {
  if (!state.pending) throw Error(ErrorCode::kNoPending, "there is no pending clarification");
  const ClarificationRequest req = *state.pending;
  const std::string text = trim(answer);
  SessionState next = state;

  if (req.closed_class()) {
    auto chosen = match_candidate(req.candidates, text);
    if (!chosen) chosen = builtin_sub_concept(kb.ontology(), req.missing, text);
    if (!chosen || std::find(req.candidates.begin(), req.candidates.end(), *chosen) == req.candidates.end()) {
      throw Error(ErrorCode::kInvalidChoice, "'" + text + "' is not one of: " + join(req.candidates));
    }
    if (req.unknown_word) kb.learn(req.missing, *req.unknown_word, *chosen);
    (req.missing == "action" ? next.partial.action : next.partial.object) = *chosen;
  } else {
    auto name = resolve_data(text, aliases);
    if (!name) throw Error(ErrorCode::kInvalidChoice, "no dataset or ticker named '" + text + "'");
    if (req.unknown_word && catalog_.get(*name).series.size() == 1) aliases.link(*req.unknown_word, *name);
    next.partial.data_ref = *name;
  }
  next.pending.reset();
  Resolution r = continue_resolution(next, kb, aliases);
  state = std::move(next);
  return r;
}

// --- parameters ---------------------------------------------------------------

ParameterUpdate update_parameters(SessionState& state, const std::vector<ParameterEdit>& edits,
                                  const AliasTable& aliases) {
  ParameterUpdate out{state.deck_parameters, {}};
  auto& p = out.parameters;
  const auto ticker_of = [&](const std::string& name) {
    if (auto t = aliases.lookup(name)) return *t;
    const std::string t = trim(name);
    if (looks_like_ticker(t)) return t;
    throw Error(ErrorCode::kNotFound, "unknown company '" + name + "'");
  };
  for (const auto& e : edits) {
    switch (e.param) {
      case ParameterEdit::Param::kComparableFirms: {
        const std::string ticker = ticker_of(e.value);
        auto it = std::find(p.comparable_firms.begin(), p.comparable_firms.end(), ticker);
        if (e.op == ParameterEdit::Op::kAdd) {
          if (it == p.comparable_firms.end()) {
            p.comparable_firms.push_back(ticker);
          } else {
            out.warnings.push_back(ticker + " is already a comparable firm");
          }
        } else if (e.op == ParameterEdit::Op::kRemove) {
          if (it != p.comparable_firms.end()) {
            p.comparable_firms.erase(it);
          } else {
            out.warnings.push_back(ticker + " is not a comparable firm; nothing removed");
          }
        } else {
          throw Error(ErrorCode::kValidation, "comparable firms support add and remove only");
        }
        break;
      }
      case ParameterEdit::Param::kHorizonMonths: {
        int months = 0;
        try {
          std::size_t used = 0;
          months = std::stoi(e.value, &used);
          if (used != e.value.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
          throw Error(ErrorCode::kValidation, "horizon must be an integer number of months");
        }
        if (months < 1) throw Error(ErrorCode::kValidation, "horizon_months must be >= 1");
        p.horizon_months = months;
        break;
      }
      case ParameterEdit::Param::kAggregationMetric:
        p.aggregation_metric = metric_from_string(kb::normalize_word(e.value));
        break;
    }
  }
  p.validate();
  state.deck_parameters = p;
  return out;
}

std::vector<ParameterEdit> recognize_parameter_edits(std::string_view input) {
  using P = ParameterEdit::Param;
  using O = ParameterEdit::Op;
  const std::string text(input);
  const auto icase = std::regex::ECMAScript | std::regex::icase;
  std::vector<std::pair<std::ptrdiff_t, ParameterEdit>> found;

  static const std::regex horizon_word("horizon|period of analysis|look-?back", icase);
  static const std::regex months(R"((\d+)\s*-?\s*months?)", icase);
  if (std::smatch hm; std::regex_search(text, hm, horizon_word)) {
    std::string last;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), months); it != std::sregex_iterator(); ++it) {
      last = (*it)[1];
    }
    if (!last.empty()) found.push_back({hm.position(0), {P::kHorizonMonths, O::kSet, last}});
  }

  static const std::regex use_metric(R"(\b(?:use|using|switch to)\s+(?:the\s+)?['"]?(median|mean|average)\b)", icase);
  static const std::regex instead(R"(\b(median|mean|average)\s+instead\s+of\b)", icase);
  std::smatch mm;
  if (std::regex_search(text, mm, use_metric) || std::regex_search(text, mm, instead)) {
    std::string m = kb::normalize_word(mm.str(1));
    if (m == "average") m = "mean";
    found.push_back({mm.position(0), {P::kAggregationMetric, O::kSet, m}});
  }

  static const std::regex firm(
      R"(\b(add|adding|include|including|remove|removing|drop|dropping|exclude|excluding)\s+(?:the\s+)?(?:company|firm|peer|comparable)\s+['"]?([A-Za-z][A-Za-z0-9.&]*(?:\s+[A-Za-z][A-Za-z0-9.&]*)*?)['"]?(?=\s+and\b|\s+from\b|\s+to\b|\s*,|\s*\.|\s*$))",
      icase);
  for (auto it = std::sregex_iterator(text.begin(), text.end(), firm); it != std::sregex_iterator(); ++it) {
    const std::string verb = kb::normalize_word((*it)[1].str());
    const bool add = verb.rfind("add", 0) == 0 || verb.rfind("includ", 0) == 0;
    found.push_back({it->position(0), {P::kComparableFirms, add ? O::kAdd : O::kRemove, (*it)[2].str()}});
  }

  std::stable_sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<ParameterEdit> edits;
  for (auto& [pos, e] : found) edits.push_back(std::move(e));
  return edits;
}

bool is_run_trigger(std::string_view text) {
  std::string t = kb::normalize_word(text);
  while (!t.empty() && (t.back() == '.' || t.back() == '!' || t.back() == ' ')) t.pop_back();
  return t == "run the analysis";
}

std::optional<std::string> recognize_save_macro(std::string_view input) {
  static const std::regex save(
      R"(^\s*(?:please\s+)?(?:save|record)\s+(?:these|the|my|those|all)?\s*(?:previous\s+|last\s+)?(?:commands|steps|actions|slides)\s+as\s+(?:a\s+)?(?:new\s+)?(?:macro|object|skill)?\s*['"]?([A-Za-z][A-Za-z0-9_ -]*?)['"]?\s*[.!]?\s*$)",
      std::regex::ECMAScript | std::regex::icase);
  const std::string text(input);
  std::smatch m;
  if (!std::regex_match(text, m, save)) return std::nullopt;
  std::string name;
  for (unsigned char c : m.str(1)) {
    if (std::isalnum(c)) {
      name += static_cast<char>(std::tolower(c));
    } else if (!name.empty() && name.back() != '_') {
      name += '_';
    }
  }
  while (!name.empty() && name.back() == '_') name.pop_back();
  if (name.empty()) return std::nullopt;
  return name;
}

}  // namespace deckforge::mapping
