#include <cctype>
#include <random>
#include <string_view>

#include "deckforge/parser.hpp"

namespace deckforge::parser {

namespace {

// Slots in braces are substituted from the lexicons below; every other token
// is OUTSIDE. Tokens are pre-split, punctuation included.
constexpr std::string_view kTemplates[] = {
    "Please {ACT} a {OBJ} using {DATA} data and add it in the {PRES} .",
    "{ACT} a {OBJ} about share performance using {DATA} data and include it in {PRES} presentation .",
    "Please {ACT} a {MACRO} using {DATA} data and add it in {PRES} deck .",
    "{ACT} a {MACRO} about {CO}",
    "can you {ACT} the {OBJ} in {PRES} with {DATA} data ?",
    "{ACT} the {OBJ} from the {PRES} please",
    "I need you to {ACT} a {OBJ} of {DATA} for the {PRES}",
    "{ACT} a {OBJ} from the {DATA} numbers and put it in {PRES}",
    "could you {ACT} a {OBJ} showing {CO} prices in the {PRES} ?",
    "{ACT} the {MACRO} for {CO} and save it to {PRES}",
    "please {ACT} my {PRES} {OBJ} using the latest {DATA} figures",
    "{ACT} a {OBJ} for {CO} stock",
    "{ACT} a new {MACRO} on {CO} in the {PRES}",
};

constexpr std::string_view kActions[] = {
    "create", "make", "generate", "build", "prepare", "produce", "add",
    "update", "refresh", "modify", "delete", "remove", "draw", "plot",
};

constexpr std::string_view kObjects[] = {
    "piechart", "Piechart", "pie chart", "barchart", "bar chart", "linechart", "line chart",
    "line graph", "table", "histogram", "barplot", "piegraph", "pizzachart", "trend chart",
    "donut chart", "column chart",
};

constexpr std::string_view kMacros[] = {
    "CompanyBriefingDeck", "briefing deck", "company briefing deck", "briefing book",
    "tearsheet",
};

constexpr std::string_view kData[] = {
    "Energy", "Finance", "Retail", "Healthcare", "Technology", "Utilities", "Banking",
    "Insurance", "sales", "revenue", "market daily OHLC", "Q3 earnings", "cash flow",
    "Telecom", "Materials", "Transport",
};

constexpr std::string_view kCompanies[] = {
    "Tesla Motor", "Tesla", "Apple", "General Motors", "Ford", "Peloton", "Microsoft",
    "Amazon", "NIO", "Johnson and Johnson", "J&J", "Netflix", "Rivian", "Boeing", "Intel",
};

constexpr std::string_view kPresentations[] = {
    "weekly report", "weeklyreport", "share performance report", "monthly review",
    "board deck", "Q3 summary", "client update", "quarterly pitchbook", "daily brief",
    "investor presentation", "team memo", "annual review",
};

template <std::size_t K>
std::string_view pick(const std::string_view (&options)[K], std::mt19937_64& rng) {
  return options[std::uniform_int_distribution<std::size_t>(0, K - 1)(rng)];
}

void append_words(std::string_view phrase, ConceptLabel label, TaggedCommand& out) {
  for (auto& w : tokenize(phrase)) {
    out.tokens.push_back(std::move(w));
    out.labels.push_back(label);
  }
}

}  // namespace

std::vector<TaggedCommand> synthetic_corpus(std::uint64_t seed, std::size_t count) {
  std::mt19937_64 rng(seed);
  std::vector<TaggedCommand> corpus;
  corpus.reserve(count);
  constexpr std::size_t kNumTemplates = std::size(kTemplates);
  for (std::size_t i = 0; i < count; ++i) {
    std::string_view tmpl = kTemplates[i % kNumTemplates];
    TaggedCommand cmd;
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
      auto end = tmpl.find(' ', pos);
      if (end == std::string_view::npos) end = tmpl.size();
      std::string_view word = tmpl.substr(pos, end - pos);
      pos = end + 1;
      if (word == "{ACT}") {
        append_words(pick(kActions, rng), ConceptLabel::kAction, cmd);
      } else if (word == "{OBJ}") {
        append_words(pick(kObjects, rng), ConceptLabel::kObject, cmd);
      } else if (word == "{MACRO}") {
        append_words(pick(kMacros, rng), ConceptLabel::kObject, cmd);
      } else if (word == "{DATA}") {
        append_words(pick(kData, rng), ConceptLabel::kData, cmd);
      } else if (word == "{CO}") {
        append_words(pick(kCompanies, rng), ConceptLabel::kData, cmd);
      } else if (word == "{PRES}") {
        append_words(pick(kPresentations, rng), ConceptLabel::kPresentation, cmd);
      } else {
        cmd.tokens.emplace_back(word);
        cmd.labels.push_back(ConceptLabel::kOutside);
      }
    }
    // Users start commands both ways.
    if (!cmd.tokens.empty() && std::bernoulli_distribution(0.5)(rng)) {
      auto& first = cmd.tokens.front();
      first[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(first[0])));
    }
    corpus.push_back(std::move(cmd));
  }
  return corpus;
}

}  // namespace deckforge::parser
