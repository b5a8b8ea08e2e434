#include <algorithm>
#include <fstream>
#include <sstream>

#include "deckforge/error.hpp"
#include "deckforge/json_io.hpp"
#include "deckforge/service.hpp"

namespace deckforge::service {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomically(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "short write to " + tmp.string());
  }
  fs::rename(tmp, p);
}

std::string join(const std::vector<std::string>& items, const char* sep = ", ") {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : sep) + s;
  return out;
}

std::string describe_parameters(const DeckParameters& p) {
  return "horizon " + std::to_string(p.horizon_months) + " months, metric " +
         std::string(to_string(p.aggregation_metric)) + ", comparable firms " + join(p.comparable_firms);
}

}  // namespace

Json to_json(const ChatTurn& turn) {
  Json j;
  j["session_id"] = turn.session_id;
  j["user_text"] = turn.user_text;
  j["reply_text"] = turn.reply_text;
  if (turn.clarification) {
    Json c;
    c["missing"] = turn.clarification->missing;
    c["unknown_word"] = turn.clarification->unknown_word ? Json(*turn.clarification->unknown_word) : Json(nullptr);
    c["candidates"] = turn.clarification->candidates;
    j["clarification"] = std::move(c);
  } else {
    j["clarification"] = nullptr;
  }
  j["deck"] = turn.deck.empty() ? Json(nullptr) : Json(turn.deck);
  j["deck_version"] = turn.deck_version;
  j["deck_changed"] = turn.deck_changed;
  j["error_code"] = turn.error_code ? Json(*turn.error_code) : Json(nullptr);
  j["warnings"] = turn.warnings;
  return j;
}

struct Workspace::Session {
  std::string id;
  std::mutex turn_mutex;
  mapping::SessionState state;
  std::vector<ResolvedIntent> history;
  std::optional<ResolvedIntent> analysis;

  std::mutex event_mutex;
  std::condition_variable event_cv;
  std::vector<DeckEvent> events;
};

Workspace::Workspace(fs::path root, WorkspaceOptions options) : root_(std::move(root)), options_(std::move(options)) {
  fs::create_directories(root_ / "decks");
  fs::create_directories(root_ / "datasets");
  catalog_ = skills::DataCatalog::from_directory(root_ / "datasets");

  if (fs::exists(root_ / "kb.json")) {
    kb_ = kb::load_kb(read_file(root_ / "kb.json"));
  } else {
    kb_ = kb::make_kb(options_.kb_variant);
  }
  if (fs::exists(root_ / "skills.json")) library_ = skills::SkillLibrary::load(read_file(root_ / "skills.json"));
  for (const auto& name : library_.macro_names()) {
    if (!kb_->ontology().contains("object", name)) kb_->extend_ontology("object", name);
  }
  aliases_ = fs::exists(root_ / "aliases.json") ? mapping::AliasTable::load(read_file(root_ / "aliases.json"))
                                                : mapping::AliasTable::defaults();
  if (fs::exists(root_ / "parameters.json")) {
    defaults_ = parameters_from_json(parse_json_text(read_file(root_ / "parameters.json")));
  }
  if (fs::exists(root_ / "versions.json")) {
    const Json v = parse_json_text(read_file(root_ / "versions.json"));
    for (const auto& [name, n] : v.items()) versions_[name] = n.get<long>();
  }
  for (const auto& e : fs::directory_iterator(root_ / "decks")) {
    if (e.path().extension() != ".json") continue;
    Deck d = parse_deck(read_file(e.path()));
    const std::string name = d.name;
    decks_.insert_or_assign(name, std::move(d));
    versions_.try_emplace(name, 1);
  }
  if (fs::exists(root_ / "parser_model.json")) {
    model_ = std::make_unique<parser::CrfModel>(parser::CrfModel::from_json(read_file(root_ / "parser_model.json")));
  } else {
    const auto corpus = parser::synthetic_corpus(7, 75);
    model_ = std::make_unique<parser::CrfModel>(parser::train_tagger(corpus, options_.train_options));
    persist_file("parser_model.json", model_->to_json());
  }
}

Workspace::~Workspace() { shutdown(); }

std::string Workspace::create_session() {
  auto s = std::make_unique<Session>();
  std::lock_guard lock(sessions_mutex_);
  s->id = "s" + std::to_string(next_session_++);
  {
    std::lock_guard ws(mutex_);
    s->state.deck_parameters = defaults_;
  }
  const std::string id = s->id;
  sessions_.emplace(id, std::move(s));
  return id;
}

bool Workspace::has_session(const std::string& id) const {
  std::lock_guard lock(sessions_mutex_);
  return sessions_.count(id) > 0;
}

Workspace::Session& Workspace::session(const std::string& id) const {
  std::lock_guard lock(sessions_mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::kNotFound, "no session '" + id + "'");
  return *it->second;
}

ChatTurn Workspace::handle_message(const std::string& session_id, const std::string& text) {
  Session& s = session(session_id);
  std::lock_guard turn_lock(s.turn_mutex);
  std::lock_guard ws(mutex_);
  return turn(s, text);
}

skills::ExecutionContext Workspace::context(const DeckParameters& params) const {
  skills::ExecutionContext ctx;
  ctx.data = &catalog_;
  ctx.parameters = params;
  ctx.today = options_.clock();
  return ctx;
}

void Workspace::persist_file(const std::string& rel, const std::string& text) const {
  write_atomically(root_ / rel, text);
}

void Workspace::persist_kb() const {
  persist_file("kb.json", kb_->save());
  persist_file("aliases.json", aliases_.save());
}

void Workspace::save_deck(const Deck& deck, Session& s, ChatTurn& out) {
  s.state.current_deck = deck.name;
  auto it = decks_.find(deck.name);
  if (it != decks_.end() && serialize_deck(it->second) == serialize_deck(deck)) return;
  decks_.insert_or_assign(deck.name, deck);
  const long version = ++versions_[deck.name];
  persist_file("decks/" + deck.name + ".json", serialize_deck(deck));
  Json v = Json::object();
  for (const auto& [name, n] : versions_) v[name] = n;
  persist_file("versions.json", v.dump(2));
  out.deck_changed = true;
  {
    std::lock_guard lock(s.event_mutex);
    const long seq = s.events.empty() ? 1 : s.events.back().seq + 1;
    s.events.push_back({seq, deck.name, version});
  }
  s.event_cv.notify_all();
}

ChatTurn Workspace::turn(Session& s, const std::string& text) {
  ChatTurn out;
  out.session_id = s.id;
  out.user_text = text;
  const mapping::SessionState saved_state = s.state;
  const auto saved_analysis = s.analysis;
  const auto saved_history = s.history;
  const mapping::MappingEngine engine(catalog_, library_);

  const auto execute = [&](const ResolvedIntent& intent) {
    Deck deck;
    if (auto it = decks_.find(intent.presentation); it != decks_.end()) {
      deck = it->second;
    } else {
      deck.name = intent.presentation;
    }
    deck.parameters = s.state.deck_parameters;
    deck = library_.execute(intent, std::move(deck), context(s.state.deck_parameters));
    s.history.push_back(intent);
    save_deck(deck, s, out);
    out.reply_text = "Done: " + intent.action + " " + intent.object + " from " + intent.data_ref + " in deck '" +
                     deck.name + "' (" + std::to_string(deck.slides.size()) + " slides).";
  };

  const auto on_resolution = [&](const mapping::Resolution& r) {
    if (const auto* req = std::get_if<mapping::ClarificationRequest>(&r)) {
      out.clarification = *req;
      out.reply_text = req->question();
      return;
    }
    const auto& intent = std::get<ResolvedIntent>(r);
    if (intent.object == skills::kBriefingMacro) {
      s.analysis = intent;
      s.state.current_deck = intent.presentation;
      out.reply_text = "Ready to build a company briefing deck for " + intent.data_ref + " into deck '" +
                       intent.presentation + "' with " + describe_parameters(s.state.deck_parameters) +
                       ". Say 'Run the analysis' to start.";
      return;
    }
    execute(intent);
  };

  try {
    const std::string trimmed = kb::normalize_word(text);
    if (trimmed.empty()) throw Error(ErrorCode::kEmptyCommand, "empty message");

    if (mapping::is_run_trigger(text)) {
      if (s.state.pending) {
        out.clarification = *s.state.pending;
        out.reply_text = "Please answer first: " + s.state.pending->question();
      } else if (!s.analysis) {
        throw Error(ErrorCode::kNotFound, "there is no analysis to run yet");
      } else {
        ResolvedIntent intent = *s.analysis;
        Deck deck{intent.presentation, {}, s.state.deck_parameters};
        deck = library_.execute_macro(intent.object, intent, std::move(deck), context(s.state.deck_parameters));
        save_deck(deck, s, out);
        out.reply_text = "Analysis complete: deck '" + deck.name + "' has " + std::to_string(deck.slides.size()) +
                         " slides (" + describe_parameters(deck.parameters) + ").";
      }
    } else if (s.state.pending && (trimmed == "cancel" || trimmed == "never mind" || trimmed == "nevermind")) {
      s.state.pending.reset();
      s.state.partial = ResolvedIntent{};
      s.state.slot_words.clear();
      out.reply_text = "Cancelled.";
    } else if (s.state.pending) {
      on_resolution(engine.apply_clarification(s.state, text, *kb_, aliases_));
      persist_kb();
    } else if (auto name = mapping::recognize_save_macro(text)) {
      const auto& m = library_.record_macro(s.history, *name, kb_.get());
      persist_file("skills.json", library_.save());
      persist_kb();
      out.reply_text = "Saved " + std::to_string(m.steps.size()) + " steps as '" + m.name +
                       "'. You can now ask for it like any other object.";
      s.history.clear();
    } else if (auto edits = mapping::recognize_parameter_edits(text); !edits.empty()) {
      auto update = mapping::update_parameters(s.state, edits, aliases_);
      defaults_ = update.parameters;
      persist_file("parameters.json", deckforge::to_json(update.parameters).dump(2));
      out.warnings = update.warnings;
      out.reply_text = "Parameters updated: " + describe_parameters(update.parameters) + ".";
      if (s.analysis) out.reply_text += " Say 'Run the analysis' to regenerate.";
    } else {
      const auto tagged = parser::tag_command(*model_, text);
      on_resolution(engine.resolve(tagged, *kb_, aliases_, s.state));
    }
  } catch (const Error& e) {
    s.state = saved_state;
    s.analysis = saved_analysis;
    s.history = saved_history;
    out.error_code = std::string(to_string(e.code()));
    out.reply_text = std::string("Sorry, I could not do that (") + *out.error_code + "): " + e.what();
    if (s.state.pending) {
      out.clarification = *s.state.pending;
      out.reply_text += " " + s.state.pending->question() + " (Say 'cancel' to drop this request.)";
    }
  }
  out.deck = s.state.current_deck;
  if (auto it = versions_.find(out.deck); it != versions_.end()) out.deck_version = it->second;
  return out;
}

std::optional<Deck> Workspace::deck(const std::string& name) const {
  std::lock_guard lock(mutex_);
  auto it = decks_.find(name);
  if (it == decks_.end()) return std::nullopt;
  return it->second;
}

long Workspace::deck_version(const std::string& name) const {
  std::lock_guard lock(mutex_);
  auto it = versions_.find(name);
  return it == versions_.end() ? 0 : it->second;
}

std::vector<std::string> Workspace::deck_names() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [name, d] : decks_) out.push_back(name);
  return out;
}

std::string Workspace::kb_json() const {
  std::lock_guard lock(mutex_);
  return kb_->save();
}

void Workspace::put_kb(std::string_view text) {
  auto fresh = kb::load_kb(text);
  std::lock_guard lock(mutex_);
  for (const auto& name : library_.macro_names()) {
    if (!fresh->ontology().contains("object", name)) fresh->extend_ontology("object", name);
  }
  kb_ = std::move(fresh);
  persist_kb();
}

kb::Variant Workspace::kb_variant() const {
  std::lock_guard lock(mutex_);
  return kb_->variant();
}

std::string Workspace::skills_json() const {
  std::lock_guard lock(mutex_);
  Json j;
  j["atomic"] = library_.atomic_names();
  j["macros"] = Json::array();
  for (const auto& name : library_.macro_names()) {
    Json m;
    m["name"] = name;
    m["builtin"] = name == skills::kBriefingMacro;
    m["steps"] = Json::array();
    for (const auto& step : library_.macro(name).steps) m["steps"].push_back(deckforge::to_json(step));
    j["macros"].push_back(std::move(m));
  }
  return j.dump(2);
}

DeckParameters Workspace::default_parameters() const {
  std::lock_guard lock(mutex_);
  return defaults_;
}

Json Workspace::run_experiment(const sim::SimulationRequest& request) const {
  Json j;
  j["config"] = parse_json_text(sim::to_json_text(request.config));
  const auto result = sim::run_experiment(request.config);
  j["curves_csv"] = sim::curves_csv(result);
  Json summary;
  for (auto v : {kb::Variant::kNaive, kb::Variant::kRobust}) {
    const auto& means = result.evaluation_means.at(v);
    double m = 0;
    for (double x : means) m += x;
    summary[std::string(kb::to_string(v))]["evaluation_mean"] = means.empty() ? 0.0 : m / static_cast<double>(means.size());
    summary[std::string(kb::to_string(v))]["time_to_90pct_plateau"] =
        sim::time_to_plateau_fraction(result.learning_curve_smoothed.at(v));
  }
  j["summary"] = std::move(summary);
  if (request.has_grid()) {
    const auto grid = sim::run_grid(request.config, request.alphas, request.vocab_sizes, request.pdfs);
    j["grid_csv"] = sim::grid_csv(grid);
    Json cells = Json::array();
    for (const auto& c : grid) {
      cells.push_back({{"alpha", c.alpha},
                       {"N", c.vocab_size},
                       {"pdf", std::string(sim::to_string(c.pdf))},
                       {"mean_diff", c.mean_diff},
                       {"stddev", c.stddev},
                       {"p_value", c.p_value}});
    }
    j["grid"] = std::move(cells);
  }
  return j;
}

std::vector<DeckEvent> Workspace::wait_events(const std::string& session_id, long after,
                                              std::chrono::milliseconds timeout) const {
  Session& s = session(session_id);
  std::unique_lock lock(s.event_mutex);
  const auto ready = [&] { return stopping_ || (!s.events.empty() && s.events.back().seq > after); };
  s.event_cv.wait_for(lock, timeout, ready);
  std::vector<DeckEvent> out;
  for (const auto& e : s.events) {
    if (e.seq > after) out.push_back(e);
  }
  return out;
}

void Workspace::shutdown() {
  std::lock_guard lock(sessions_mutex_);
  for (auto& [id, s] : sessions_) {
    std::lock_guard ev(s->event_mutex);
    stopping_ = true;
  }
  stopping_ = true;
  for (auto& [id, s] : sessions_) s->event_cv.notify_all();
}

void init_demo_workspace(const fs::path& root, std::uint64_t seed) {
  const fs::path data = root / "datasets";
  fs::create_directories(data);
  const Date start = parse_iso_date("2024-01-01");
  constexpr int kDays = 520;
  std::uint64_t n = 0;
  const auto write = [&](const fs::path& file, const std::string& name, double price) {
    ++n;
    if (fs::exists(file)) return;
    write_atomically(file, to_csv(synthetic_ohlcv(name, start, kDays, seed + 977 * n, price)));
  };
  const std::vector<std::pair<const char*, double>> tickers = {
      {"TSLA", 240}, {"F", 12}, {"GM", 45}, {"NIO", 6}, {"PTON", 5}, {"AAPL", 190}};
  for (const auto& [t, price] : tickers) write(data / (std::string(t) + ".csv"), t, price);
  const std::vector<std::pair<const char*, std::vector<std::pair<const char*, double>>>> sectors = {
      {"Energy", {{"BP", 35}, {"CVX", 150}, {"SHEL", 65}, {"XOM", 110}}},
      {"Finance", {{"BAC", 35}, {"GS", 400}, {"JPM", 180}, {"MS", 90}}},
  };
  for (const auto& [sector, members] : sectors) {
    for (const auto& [t, price] : members) write(data / sector / (std::string(t) + ".csv"), t, price);
  }
}

}  // namespace deckforge::service
