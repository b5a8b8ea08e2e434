#include "deckforge/kb.hpp"

#include <cctype>
#include <cmath>

#include "deckforge/error.hpp"
#include "deckforge/json_io.hpp"

namespace deckforge::kb {

namespace {

constexpr int kSchemaVersion = 1;

[[noreturn]] void ontology_error(const std::string& what) { throw Error(ErrorCode::kOntology, what); }

Json ontology_json(const Ontology& o) {
  Json j = Json::object();
  for (const auto& [main, subs] : o.main_concepts()) {
    j[main] = std::vector<std::string>(subs.begin(), subs.end());
  }
  return j;
}

struct Document {
  Ontology ontology;
  Json entries;
};

Document read_document(std::string_view text, Variant expected) {
  Json j = parse_json_text(text);
  try {
    if (!j.contains("version") || j.at("version") != kSchemaVersion) {
      throw Error(ErrorCode::kMigration, "unsupported KB schema version " +
                                             (j.contains("version") ? j.at("version").dump() : "<missing>"));
    }
    const auto variant = j.at("variant").get<std::string>();
    if (variant != to_string(expected)) {
      throw Error(ErrorCode::kVariantMismatch,
                  "expected a " + std::string(to_string(expected)) + " document, got " + variant);
    }
    Document doc;
    for (const auto& [main, subs] : j.at("ontology").items()) {
      for (const auto& s : subs) doc.ontology.add_sub_concept(main, s.get<std::string>());
    }
    doc.entries = j.at("entries");
    return doc;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("KB schema: ") + e.what());
  }
}

}  // namespace

Ontology Ontology::default_ontology() {
  Ontology o;
  for (const char* s : {"piechart", "barchart", "linechart", "table", "company_briefing_deck"}) {
    o.add_sub_concept("object", s);
  }
  for (const char* s : {"create", "update", "delete"}) o.add_sub_concept("action", s);
  return o;
}

bool Ontology::has_main(std::string_view main_concept) const { return concepts_.find(main_concept) != concepts_.end(); }

bool Ontology::contains(std::string_view main_concept, std::string_view sub_concept) const {
  auto it = concepts_.find(main_concept);
  return it != concepts_.end() && it->second.count(std::string(sub_concept)) > 0;
}

const std::set<std::string>& Ontology::sub_concepts(std::string_view main_concept) const {
  auto it = concepts_.find(main_concept);
  if (it == concepts_.end()) ontology_error("unknown main concept '" + std::string(main_concept) + "'");
  return it->second;
}

void Ontology::add_sub_concept(const std::string& main_concept, const std::string& sub_concept) {
  if (main_concept.empty() || sub_concept.empty()) ontology_error("concept names must be non-empty");
  for (const auto& [main, subs] : concepts_) {
    if (main != main_concept && subs.count(sub_concept) > 0) {
      ontology_error("sub-concept '" + sub_concept + "' already belongs to '" + main + "'");
    }
  }
  concepts_[main_concept].insert(sub_concept);
}

std::string normalize_word(std::string_view word) {
  std::string out;
  bool pending_space = false;
  for (unsigned char c : word) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += static_cast<char>(std::tolower(c));
  }
  return out;
}

std::string_view to_string(Variant v) { return v == Variant::kNaive ? "nkb" : "rkb"; }

void KnowledgeBase::require_main(std::string_view main_concept) const {
  if (!ontology_.has_main(main_concept)) ontology_error("unknown main concept '" + std::string(main_concept) + "'");
}

void KnowledgeBase::require_sub(std::string_view main_concept, std::string_view sub_concept) const {
  require_main(main_concept);
  if (!ontology_.contains(main_concept, sub_concept)) {
    ontology_error("'" + std::string(sub_concept) + "' is not a sub-concept of '" + std::string(main_concept) + "'");
  }
}

// --- NaiveKB ----------------------------------------------------------------

std::optional<std::string> NaiveKB::infer(std::string_view main_concept, std::string_view word) const {
  require_main(main_concept);
  auto it = words_.find({std::string(main_concept), normalize_word(word)});
  if (it == words_.end()) return std::nullopt;
  return it->second;
}

AddResult NaiveKB::add(std::string_view main_concept, std::string_view word, std::string_view sub_concept) {
  require_sub(main_concept, sub_concept);
  auto [it, inserted] = words_.emplace(std::pair{std::string(main_concept), normalize_word(word)}, sub_concept);
  return inserted ? AddResult::kAdded : AddResult::kAlreadyMapped;
}

std::string NaiveKB::save() const {
  Json j;
  j["version"] = kSchemaVersion;
  j["variant"] = "nkb";
  j["ontology"] = ontology_json(ontology_);
  Json entries = Json::array();
  for (const auto& [key, sub] : words_) {
    Json e;
    e["mc"] = key.first;
    e["word"] = key.second;
    e["dist"] = Json::object({{sub, 1.0}});
    e["l"] = 1;
    entries.push_back(std::move(e));
  }
  j["entries"] = std::move(entries);
  return j.dump(2);
}

NaiveKB NaiveKB::load(std::string_view text) {
  Document doc = read_document(text, Variant::kNaive);
  NaiveKB kb(std::move(doc.ontology));
  try {
    for (const auto& e : doc.entries) {
      const auto& dist = e.at("dist");
      if (dist.size() != 1) throw Error(ErrorCode::kValidation, "nkb entry must map to exactly one sub-concept");
      kb.add(e.at("mc").get<std::string>(), e.at("word").get<std::string>(), dist.begin().key());
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("KB schema: ") + e.what());
  }
  return kb;
}

// --- RobustKB ---------------------------------------------------------------

const BeliefEntry* RobustKB::entry(std::string_view main_concept, std::string_view word) const {
  auto it = beliefs_.find({std::string(main_concept), normalize_word(word)});
  return it == beliefs_.end() ? nullptr : &it->second;
}

double RobustKB::belief(std::string_view main_concept, std::string_view sub_concept, std::string_view word) const {
  const BeliefEntry* e = entry(main_concept, word);
  if (e == nullptr) return 0.0;
  auto it = e->distribution.find(std::string(sub_concept));
  return it == e->distribution.end() ? 0.0 : it->second;
}

std::optional<std::string> RobustKB::infer(std::string_view main_concept, std::string_view word) const {
  require_main(main_concept);
  const BeliefEntry* e = entry(main_concept, word);
  if (e == nullptr) return std::nullopt;
  const std::string* best = nullptr;
  double best_score = -1.0;
  for (const auto& sub : ontology_.sub_concepts(main_concept)) {
    auto it = e->distribution.find(sub);
    const double score = it == e->distribution.end() ? 0.0 : it->second;
    if (score > best_score) {
      best_score = score;
      best = &sub;
    }
  }
  return *best;
}

void RobustKB::observe(std::string_view main_concept, std::string_view word, std::string_view chosen) {
  require_sub(main_concept, chosen);
  BeliefEntry& e = beliefs_[{std::string(main_concept), normalize_word(word)}];
  e.update_count += 1;
  const double l = static_cast<double>(e.update_count);
  const double keep = (l - 1.0) / l;
  for (const auto& sub : ontology_.sub_concepts(main_concept)) {
    double& b = e.distribution[sub];
    b = sub == chosen ? b * keep + 1.0 / l : b * keep;
  }
}

std::string RobustKB::save() const {
  Json j;
  j["version"] = kSchemaVersion;
  j["variant"] = "rkb";
  j["ontology"] = ontology_json(ontology_);
  Json entries = Json::array();
  for (const auto& [key, e] : beliefs_) {
    Json ej;
    ej["mc"] = key.first;
    ej["word"] = key.second;
    Json dist = Json::object();
    for (const auto& [sub, p] : e.distribution) dist[sub] = p;
    ej["dist"] = std::move(dist);
    ej["l"] = e.update_count;
    entries.push_back(std::move(ej));
  }
  j["entries"] = std::move(entries);
  return j.dump(2);
}

RobustKB RobustKB::load(std::string_view text) {
  Document doc = read_document(text, Variant::kRobust);
  RobustKB kb(std::move(doc.ontology));
  try {
    for (const auto& ej : doc.entries) {
      const auto main = ej.at("mc").get<std::string>();
      kb.require_main(main);
      BeliefEntry e;
      e.update_count = ej.at("l").get<long>();
      if (e.update_count < 1) throw Error(ErrorCode::kValidation, "entry update count must be >= 1");
      double total = 0;
      for (const auto& [sub, p] : ej.at("dist").items()) {
        kb.require_sub(main, sub);
        const double v = p.get<double>();
        if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::kValidation, "belief outside [0,1]");
        e.distribution[sub] = v;
        total += v;
      }
      if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorCode::kValidation, "belief distribution must sum to 1");
      kb.beliefs_[{main, normalize_word(ej.at("word").get<std::string>())}] = std::move(e);
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("KB schema: ") + e.what());
  }
  return kb;
}

std::unique_ptr<KnowledgeBase> load_kb(std::string_view text) {
  Json j = parse_json_text(text);
  if (!j.contains("version") || j.at("version") != kSchemaVersion) {
    throw Error(ErrorCode::kMigration, "unsupported KB schema version");
  }
  const auto variant = j.value("variant", std::string());
  if (variant == "nkb") return std::make_unique<NaiveKB>(NaiveKB::load(text));
  if (variant == "rkb") return std::make_unique<RobustKB>(RobustKB::load(text));
  throw Error(ErrorCode::kVariantMismatch, "unknown KB variant '" + variant + "'");
}

std::unique_ptr<KnowledgeBase> make_kb(Variant variant, Ontology ontology) {
  if (variant == Variant::kNaive) return std::make_unique<NaiveKB>(std::move(ontology));
  return std::make_unique<RobustKB>(std::move(ontology));
}

}  // namespace deckforge::kb
