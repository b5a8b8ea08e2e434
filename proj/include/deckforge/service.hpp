#pragma once

#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "deckforge/deck.hpp"
#include "deckforge/kb.hpp"
#include "deckforge/mapping.hpp"
#include "deckforge/parser.hpp"
#include "deckforge/sim.hpp"
#include "deckforge/skills.hpp"

namespace deckforge::service {

struct ChatTurn {
  std::string session_id;
  std::string user_text;
  std::string reply_text;
  std::optional<mapping::ClarificationRequest> clarification;
  std::string deck;       // the session's current deck, if any
  long deck_version = 0;  // version of `deck` after this turn
  bool deck_changed = false;
  std::optional<std::string> error_code;
  std::vector<std::string> warnings;
};

Json to_json(const ChatTurn& turn);

struct DeckEvent {
  long seq = 0;
  std::string deck;
  long deck_version = 0;
};

struct WorkspaceOptions {
  /// Variant for a fresh workspace; an existing kb.json wins.
  kb::Variant kb_variant = kb::Variant::kRobust;
  skills::Clock clock = skills::system_clock_today();
  /// Options used when parser_model.json is missing and a model is trained.
  parser::TrainOptions train_options;
};

/// Everything one deployment persists, as plain files under `root`:
/// kb.json, skills.json, aliases.json, parameters.json, versions.json,
/// parser_model.json, decks/NAME.json, datasets/.
class Workspace {
 public:
  /// Loads every artifact, creating defaults for missing ones. A missing
  /// parser model is trained on the built-in synthetic corpus and saved.
  explicit Workspace(std::filesystem::path root, WorkspaceOptions options = {});
  ~Workspace();

  Workspace(const Workspace&) = delete;
  Workspace& operator=(const Workspace&) = delete;

  std::string create_session();
  bool has_session(const std::string& id) const;

  /// One conversational turn. Errors never escape: they become reply text
  /// with an error code and leave the session as it was. Throws
  /// Error(kNotFound) only for an unknown session.
  ChatTurn handle_message(const std::string& session_id, const std::string& text);

  std::optional<Deck> deck(const std::string& name) const;
  long deck_version(const std::string& name) const;
  std::vector<std::string> deck_names() const;

  std::string kb_json() const;
  /// Replaces the KB with a KB-JSON document; recorded macros are
  /// registered again as object sub-concepts. Throws the loader's errors.
  void put_kb(std::string_view text);
  kb::Variant kb_variant() const;

  std::string skills_json() const;
  DeckParameters default_parameters() const;

  /// Runs a simulation job synchronously. Returns `{config, curves_csv,
  /// grid_csv?, summary}`.
  Json run_experiment(const sim::SimulationRequest& request) const;

  /// Blocks until the session has an event with seq > `after`, `timeout`
  /// elapses, or shutdown() is called.
  std::vector<DeckEvent> wait_events(const std::string& session_id, long after,
                                     std::chrono::milliseconds timeout) const;

  /// Wakes every waiter; later waits return immediately.
  void shutdown();

  const std::filesystem::path& root() const { return root_; }
  const parser::CrfModel& parser_model() const { return *model_; }

 private:
  struct Session;

  Session& session(const std::string& id) const;
  ChatTurn turn(Session& s, const std::string& text);
  void save_deck(const Deck& deck, Session& s, ChatTurn& out);
  void persist_kb() const;
  void persist_file(const std::string& rel, const std::string& text) const;
  skills::ExecutionContext context(const DeckParameters& params) const;

  std::filesystem::path root_;
  WorkspaceOptions options_;
  skills::DataCatalog catalog_;
  skills::SkillLibrary library_;
  std::unique_ptr<kb::KnowledgeBase> kb_;
  mapping::AliasTable aliases_;
  DeckParameters defaults_;
  std::map<std::string, Deck> decks_;
  std::map<std::string, long> versions_;
  std::unique_ptr<parser::CrfModel> model_;

  mutable std::mutex mutex_;  // workspace state and artifacts
  mutable std::mutex sessions_mutex_;
  std::map<std::string, std::unique_ptr<Session>> sessions_;
  long next_session_ = 1;
  bool stopping_ = false;
};

/// Seeds a demo workspace: ticker files for the default and alias companies
/// plus two sector directories (Energy, Finance), all synthetic.
void init_demo_workspace(const std::filesystem::path& root, std::uint64_t seed = 2021);

/// HTTP/1.1 JSON facade over a Workspace.
class HttpServer {
 public:
  explicit HttpServer(Workspace& workspace);
  ~HttpServer();

  /// Binds to `port` (0 picks a free one) and returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop(); blocks.
  bool listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace deckforge::service
