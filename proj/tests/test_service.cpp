#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <thread>

#include "deckforge/json_io.hpp"
#include "deckforge/service.hpp"
#include "fixtures.hpp"

using namespace deckforge;
using namespace deckforge::service;
using fixtures::day;
using fixtures::TempDir;

namespace fs = std::filesystem;

namespace {

const char* kBriefing = "tslacompanybriefingdeck";

WorkspaceOptions options() {
  WorkspaceOptions o;
  o.clock = skills::fixed_clock(day("2025-05-20"));
  return o;
}

// Trains the parser once and hands a copy of the model to every new workspace.
void seed_workspace(const fs::path& root) {
  static TempDir cache("svc_model");
  static const bool trained = [] {
    init_demo_workspace(cache.path);
    Workspace ws(cache.path, options());
    return true;
  }();
  (void)trained;
  init_demo_workspace(root);
  fs::copy_file(cache.path / "parser_model.json", root / "parser_model.json", fs::copy_options::overwrite_existing);
}

// Drives the ticker clarification and the run trigger.
void build_briefing(Workspace& ws, const std::string& sid) {
  const auto ask = ws.handle_message(sid, "create a briefing deck about Tesla Motor");
  REQUIRE(ask.clarification);
  const auto answer = ws.handle_message(sid, "TSLA");
  REQUIRE(!answer.error_code);
  const auto run = ws.handle_message(sid, "Run the analysis");
  REQUIRE(!run.error_code);
}

}  // namespace

TEST_CASE("briefing flow builds a ten-slide deck and versions it") {
  TempDir dir("svc_flow");
  seed_workspace(dir.path);
  Workspace ws(dir.path, options());
  const auto sid = ws.create_session();

  const auto ask = ws.handle_message(sid, "create a briefing deck about Tesla Motor");
  REQUIRE(ask.clarification);
  CHECK(ask.clarification->unknown_word == "Tesla Motor");
  CHECK(ask.reply_text.find("ticker") != std::string::npos);
  CHECK(!ask.deck_changed);

  const auto ready = ws.handle_message(sid, "TSLA");
  CHECK(!ready.clarification);
  CHECK(!ready.deck_changed);
  CHECK(ready.reply_text.find("Run the analysis") != std::string::npos);

  const auto run = ws.handle_message(sid, "Run the analysis");
  CHECK(run.deck == kBriefing);
  CHECK(run.deck_version == 1);
  CHECK(run.deck_changed);
  const auto deck = ws.deck(kBriefing);
  REQUIRE(deck);
  CHECK(deck->slides.size() == 10);
  CHECK(fs::exists(dir.path / "decks" / (std::string(kBriefing) + ".json")));

  // Same parameters, same data: nothing to publish.
  const auto again = ws.handle_message(sid, "Run the analysis");
  CHECK(again.deck_version == 1);
  CHECK(!again.deck_changed);
  CHECK(serialize_deck(*ws.deck(kBriefing)) == serialize_deck(*deck));

  const auto edit = ws.handle_message(sid, "change time horizon to 6 months");
  CHECK(!edit.error_code);
  CHECK(ws.default_parameters().horizon_months == 6);
  const auto rerun = ws.handle_message(sid, "Run the analysis");
  CHECK(rerun.deck_version == 2);
  CHECK(rerun.deck_changed);
  CHECK(ws.deck_version(kBriefing) == 2);
}

TEST_CASE("a restarted workspace reloads decks, versions and parameters") {
  TempDir dir("svc_restart");
  seed_workspace(dir.path);
  std::string before;
  {
    Workspace ws(dir.path, options());
    const auto sid = ws.create_session();
    build_briefing(ws, sid);
    ws.handle_message(sid, "use the Median");
    ws.handle_message(sid, "Run the analysis");
    REQUIRE(ws.deck_version(kBriefing) == 2);
    before = serialize_deck(*ws.deck(kBriefing));
  }
  Workspace ws(dir.path, options());
  CHECK(ws.deck_version(kBriefing) == 2);
  CHECK(serialize_deck(*ws.deck(kBriefing)) == before);
  CHECK(ws.default_parameters().aggregation_metric == AggregationMetric::kMedian);
  CHECK(ws.deck_names() == std::vector<std::string>{kBriefing});
  // The reloaded KB still knows the learned alias.
  const auto sid = ws.create_session();
  const auto turn = ws.handle_message(sid, "create a briefing deck about Tesla Motor");
  CHECK(!turn.clarification);
}

TEST_CASE("sessions keep their own pending questions") {
  TempDir dir("svc_sessions");
  seed_workspace(dir.path);
  Workspace ws(dir.path, options());
  const auto a = ws.create_session();
  const auto b = ws.create_session();
  CHECK(a != b);
  REQUIRE(ws.handle_message(a, "create a briefing deck about Tesla Motor").clarification);
  const auto other = ws.handle_message(b, "create a piechart of Energy");
  CHECK(!other.clarification);
  CHECK(!other.error_code);
  CHECK(other.deck_changed);
  const auto back = ws.handle_message(a, "TSLA");
  CHECK(!back.error_code);
  CHECK(!back.clarification);
  CHECK(ws.handle_message(a, "Run the analysis").deck == kBriefing);
  CHECK(ws.deck_names().size() == 2);
}

TEST_CASE("unknown sessions are reported") {
  TempDir dir("svc_unknown");
  seed_workspace(dir.path);
  Workspace ws(dir.path, options());
  CHECK(!ws.has_session("s99"));
  CHECK(fixtures::code_of([&] { ws.handle_message("s99", "hi"); }) == ErrorCode::kNotFound);
}

TEST_CASE("failed turns leave the session unchanged") {
  TempDir dir("svc_errors");
  seed_workspace(dir.path);
  Workspace ws(dir.path, options());
  const auto sid = ws.create_session();
  const auto empty = ws.handle_message(sid, "   ");
  CHECK(empty.error_code == "EMPTY_COMMAND");
  CHECK(ws.handle_message(sid, "Run the analysis").error_code == "NOT_FOUND");

  const auto made = ws.handle_message(sid, "create a piechart of Energy");
  REQUIRE(made.deck_changed);
  const auto snapshot = serialize_deck(*ws.deck(made.deck));
  const auto bad = ws.handle_message(sid, "update the linechart of Energy");
  CHECK(bad.error_code);
  CHECK(bad.reply_text.starts_with("Sorry"));
  CHECK(!bad.deck_changed);
  CHECK(serialize_deck(*ws.deck(made.deck)) == snapshot);
  CHECK(ws.deck_version(made.deck) == made.deck_version);

  // A stuck question can be dropped.
  const auto ask = ws.handle_message(sid, "create a table of Zorg");
  REQUIRE(ask.clarification);
  const auto cancel = ws.handle_message(sid, "cancel");
  CHECK(cancel.reply_text == "Cancelled.");
  CHECK(!cancel.clarification);
  const auto next = ws.handle_message(sid, "add a barchart of Finance");
  CHECK(!next.clarification);
  CHECK(next.deck_changed);
}

TEST_CASE("recorded commands become a reusable macro") {
  TempDir dir("svc_macro");
  seed_workspace(dir.path);
  Workspace ws(dir.path, options());
  const auto sid = ws.create_session();
  ws.handle_message(sid, "create a piechart of Energy");
  ws.handle_message(sid, "add a linechart of Energy");
  const auto saved = ws.handle_message(sid, "save these commands as sector overview");
  CHECK(saved.reply_text.find("sector_overview") != std::string::npos);
  const auto skills = Json::parse(ws.skills_json());
  bool found = false;
  for (const auto& m : skills["macros"]) {
    if (m["name"] == "sector_overview") {
      found = true;
      CHECK(m["steps"].size() == 2);
      CHECK(m["builtin"] == false);
    }
  }
  CHECK(found);
  const auto used = ws.handle_message(sid, "create a sector overview of Finance");
  CHECK(!used.error_code);
  CHECK(used.deck_changed);
  const auto deck = ws.deck(used.deck);
  REQUIRE(deck);
  CHECK(deck->slides.size() == 2);

  // The macro survives a restart.
  Workspace again(dir.path, options());
  CHECK(again.skills_json().find("sector_overview") != std::string::npos);
  const auto s2 = again.create_session();
  CHECK(again.handle_message(s2, "save these commands as nothing").error_code == "NOTHING_TO_SAVE");
}

TEST_CASE("http interface") {
  TempDir dir("svc_http");
  seed_workspace(dir.path);
  Workspace ws(dir.path, options());
  HttpServer server(ws);
  const int port = server.bind("127.0.0.1", 0);
  REQUIRE(port > 0);
  std::thread serving([&] { server.listen(); });

  httplib::Client cli("127.0.0.1", port);
  cli.set_read_timeout(60, 0);
  const std::string kJson = "application/json";

  auto created = cli.Post("/sessions", "", kJson);
  REQUIRE(created);
  CHECK(created->status == 201);
  const std::string sid = Json::parse(created->body)["session_id"];

  const auto say = [&](const std::string& text) {
    auto r = cli.Post("/sessions/" + sid + "/messages", Json{{"text", text}}.dump(), kJson);
    REQUIRE(r);
    CHECK(r->status == 200);
    return Json::parse(r->body);
  };

  const auto q = say("create a briefing deck about Tesla Motor");
  CHECK(q["clarification"]["missing"].is_string());
  CHECK(q["deck_changed"] == false);
  say("TSLA");

  // Subscribe before the run; events are replayed from `after`.
  std::atomic<bool> got_event = false;
  std::string sse;
  std::thread listener([&] {
    httplib::Client events("127.0.0.1", port);
    events.set_read_timeout(60, 0);
    events.Get("/sessions/" + sid + "/events?after=0", [&](const char* data, std::size_t n) {
      sse.append(data, n);
      if (sse.find("event: deck_version") != std::string::npos && sse.find("\n\n", sse.find("data:")) != std::string::npos) {
        got_event = true;
        return false;
      }
      return true;
    });
  });

  const auto run = say("Run the analysis");
  CHECK(run["deck"] == kBriefing);
  CHECK(run["deck_version"] == 1);
  listener.join();
  CHECK(got_event);
  CHECK(sse.find("id: 1\n") != std::string::npos);
  CHECK(sse.find("\"deck_version\":1") != std::string::npos);

  auto list = cli.Get("/decks");
  REQUIRE(list);
  CHECK(Json::parse(list->body)["decks"][0]["name"] == kBriefing);

  auto deck = cli.Get(std::string("/decks/") + kBriefing);
  REQUIRE(deck);
  CHECK(deck->status == 200);
  CHECK(deck->get_header_value("X-Deck-Version") == "1");
  CHECK(Json::parse(deck->body)["slides"].size() == 10);

  auto html = cli.Get(std::string("/decks/") + kBriefing + "/html?theme=dark&embed_data=true");
  REQUIRE(html);
  CHECK(html->status == 200);
  CHECK(html->body.starts_with("<!DOCTYPE html>"));
  CHECK(html->body.find("chart-data") != std::string::npos);
  auto bad_theme = cli.Get(std::string("/decks/") + kBriefing + "/html?theme=neon");
  REQUIRE(bad_theme);
  CHECK(bad_theme->status == 400);

  auto kb = cli.Get("/kb");
  REQUIRE(kb);
  const auto kb_text = kb->body;
  CHECK(Json::parse(kb_text).contains("variant"));
  auto put = cli.Put("/kb", kb_text, kJson);
  REQUIRE(put);
  CHECK(put->status == 200);
  auto put_bad = cli.Put("/kb", "{not json", kJson);
  REQUIRE(put_bad);
  CHECK(put_bad->status == 400);
  CHECK(Json::parse(put_bad->body)["error"]["code"] == "PARSE_ERROR");

  auto skills = cli.Get("/skills");
  REQUIRE(skills);
  CHECK(Json::parse(skills->body)["macros"].size() >= 1);

  auto exp = cli.Post("/experiments",
                      R"({"alpha":0.5,"N":40,"E":2,"S":10,"evaluation_slides":10,"seed":3,"smoothing_window":2})", kJson);
  REQUIRE(exp);
  CHECK(exp->status == 200);
  const auto body = Json::parse(exp->body);
  CHECK(body["curves_csv"].get<std::string>().starts_with("phase,kb_variant,slide_index,score"));
  CHECK(body["summary"].contains("nkb"));
  CHECK(body["summary"].contains("rkb"));
  auto exp_bad = cli.Post("/experiments", R"({"alpha":7})", kJson);
  REQUIRE(exp_bad);
  CHECK(exp_bad->status == 400);
  CHECK(Json::parse(exp_bad->body)["error"]["code"] == "CONFIG_ERROR");

  auto missing = cli.Get("/decks/nope");
  REQUIRE(missing);
  CHECK(missing->status == 404);
  CHECK(Json::parse(missing->body)["error"]["code"] == "NOT_FOUND");
  auto no_session = cli.Post("/sessions/zz/messages", R"({"text":"hi"})", kJson);
  REQUIRE(no_session);
  CHECK(no_session->status == 404);
  auto no_text = cli.Post("/sessions/" + sid + "/messages", R"({"txt":"hi"})", kJson);
  REQUIRE(no_text);
  CHECK(no_text->status == 400);
  auto bad_after = cli.Get("/sessions/" + sid + "/events?after=x");
  REQUIRE(bad_after);
  CHECK(bad_after->status == 400);
  auto no_route = cli.Get("/nowhere");
  REQUIRE(no_route);
  CHECK(no_route->status == 404);
  CHECK(Json::parse(no_route->body).contains("error"));

  ws.shutdown();
  server.stop();
  serving.join();
}
