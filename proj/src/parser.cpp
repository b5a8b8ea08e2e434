#include <algorithm>
#include <cctype>
#include <set>

#include "deckforge/error.hpp"
#include "deckforge/parser.hpp"

namespace deckforge::parser {

namespace {

bool is_punct(char c) {
  switch (c) {
    case '.': case ',': case '!': case '?': case ';': case ':':
    case '"': case '\'': case '(': case ')': case '[': case ']':
      return true;
    default:
      return false;
  }
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string_view to_string(ConceptLabel label) {
  switch (label) {
    case ConceptLabel::kOutside: return "OUTSIDE";
    case ConceptLabel::kAction: return "ACTION";
    case ConceptLabel::kData: return "DATA";
    case ConceptLabel::kObject: return "OBJECT";
    case ConceptLabel::kPresentation: return "PRESENTATION";
  }
  return "?";
}

ConceptLabel label_from_string(std::string_view text) {
  if (text == "O" || text == "OUTSIDE") return ConceptLabel::kOutside;
  if (text == "ACTION") return ConceptLabel::kAction;
  if (text == "DATA") return ConceptLabel::kData;
  if (text == "OBJECT") return ConceptLabel::kObject;
  if (text == "PRESENTATION") return ConceptLabel::kPresentation;
  throw Error(ErrorCode::kParse, "unknown concept label '" + std::string(text) + "'");
}

std::string_view to_string(PosTag tag) {
  switch (tag) {
    case PosTag::kNoun: return "Noun";
    case PosTag::kVerb: return "Verb";
    case PosTag::kDeterminer: return "Determiner";
    case PosTag::kPreposition: return "Preposition";
    case PosTag::kAdjective: return "Adjective";
    case PosTag::kAdverb: return "Adverb";
    case PosTag::kPronoun: return "Pronoun";
    case PosTag::kConjunction: return "Conjunction";
    case PosTag::kNumber: return "Number";
    case PosTag::kParticle: return "Particle";
    case PosTag::kPunctuation: return "Punctuation";
    case PosTag::kBoundary: return "<boundary>";
  }
  return "?";
}

std::vector<std::string> tokenize(std::string_view command) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < command.size()) {
    while (i < command.size() && std::isspace(static_cast<unsigned char>(command[i]))) ++i;
    std::size_t j = i;
    while (j < command.size() && !std::isspace(static_cast<unsigned char>(command[j]))) ++j;
    if (j == i) break;
    std::string_view chunk = command.substr(i, j - i);
    i = j;

    std::size_t lead = 0;
    while (lead < chunk.size() && is_punct(chunk[lead])) ++lead;
    for (std::size_t k = 0; k < lead; ++k) tokens.emplace_back(1, chunk[k]);
    chunk.remove_prefix(lead);
    std::size_t trail = 0;
    while (trail < chunk.size() && is_punct(chunk[chunk.size() - 1 - trail])) ++trail;
    if (chunk.size() > trail) tokens.emplace_back(chunk.substr(0, chunk.size() - trail));
    for (std::size_t k = chunk.size() - trail; k < chunk.size(); ++k) tokens.emplace_back(1, chunk[k]);
  }
  return tokens;
}

std::vector<Token> tokenize_and_pos(std::string_view command) {
  auto words = tokenize(command);
  if (words.empty()) throw Error(ErrorCode::kEmptyCommand, "empty command");
  std::vector<Token> out;
  out.reserve(words.size());
  for (auto& w : words) {
    PosTag tag = lookup_pos(w);
    out.push_back({std::move(w), tag});
  }
  return out;
}

std::vector<TokenFeatures> featurize(std::span<const Token> tokens) {
  std::vector<TokenFeatures> out;
  out.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string lower = lowercase(tokens[i].text);
    TokenFeatures f;
    f.pos = tokens[i].pos;
    f.prev_pos = i == 0 ? PosTag::kBoundary : tokens[i - 1].pos;
    f.next_pos = i + 1 == tokens.size() ? PosTag::kBoundary : tokens[i + 1].pos;
    if (!lower.empty()) {
      f.first_letter = lower.substr(0, 1);
      f.last_letter = lower.substr(lower.size() - 1);
      f.trunc_first = lower.substr(1);
      f.trunc_last = lower.substr(0, lower.size() - 1);
    }
    std::set<std::string> grams;
    for (std::size_t n = 2; n <= 3; ++n) {
      for (std::size_t k = 0; k + n <= lower.size(); ++k) grams.insert(lower.substr(k, n));
    }
    f.char_ngrams.assign(grams.begin(), grams.end());
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<std::string> feature_strings(const TokenFeatures& f) {
  std::vector<std::string> out;
  out.reserve(7 + f.char_ngrams.size());
  out.push_back("pos=" + std::string(to_string(f.pos)));
  out.push_back("prev_pos=" + std::string(to_string(f.prev_pos)));
  out.push_back("next_pos=" + std::string(to_string(f.next_pos)));
  out.push_back("first=" + f.first_letter);
  out.push_back("last=" + f.last_letter);
  out.push_back("trunc_first=" + f.trunc_first);
  out.push_back("trunc_last=" + f.trunc_last);
  for (const auto& g : f.char_ngrams) out.push_back("ngram=" + g);
  return out;
}

void TaggedCommand::validate() const {
  if (tokens.size() != labels.size()) {
    throw Error(ErrorCode::kValidation, "token and label counts differ");
  }
}

std::vector<ConceptSpan> concept_spans(const TaggedCommand& tagged) {
  tagged.validate();
  std::vector<ConceptSpan> spans;
  std::size_t i = 0;
  while (i < tagged.tokens.size()) {
    const auto label = tagged.labels[i];
    std::size_t j = i + 1;
    while (j < tagged.tokens.size() && tagged.labels[j] == label) ++j;
    if (label != ConceptLabel::kOutside) {
      std::string text;
      for (std::size_t k = i; k < j; ++k) {
        if (k > i) text += ' ';
        text += tagged.tokens[k];
      }
      spans.push_back({label, i, j, std::move(text)});
    }
    i = j;
  }
  return spans;
}

std::vector<TaggedCommand> parse_corpus(std::string_view text) {
  std::vector<TaggedCommand> corpus;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.remove_suffix(1);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) line.remove_prefix(1);
    if (line.empty() || line.front() == '#') continue;

    TaggedCommand cmd;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      if (j == i) break;
      std::string_view item = line.substr(i, j - i);
      i = j;
      auto slash = item.rfind('/');
      if (slash == std::string_view::npos || slash == 0) {
        throw Error(ErrorCode::kParse,
                    "line " + std::to_string(line_no) + ": expected token/LABEL, got '" + std::string(item) + "'");
      }
      try {
        cmd.labels.push_back(label_from_string(item.substr(slash + 1)));
      } catch (const Error& e) {
        throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": " + e.what());
      }
      cmd.tokens.emplace_back(item.substr(0, slash));
    }
    corpus.push_back(std::move(cmd));
  }
  return corpus;
}

std::string format_corpus(std::span<const TaggedCommand> corpus) {
  std::string out;
  for (const auto& cmd : corpus) {
    cmd.validate();
    for (std::size_t i = 0; i < cmd.tokens.size(); ++i) {
      if (i > 0) out += ' ';
      out += cmd.tokens[i];
      out += '/';
      out += cmd.labels[i] == ConceptLabel::kOutside ? "O" : std::string(to_string(cmd.labels[i]));
    }
    out += '\n';
  }
  return out;
}

}  // namespace deckforge::parser
