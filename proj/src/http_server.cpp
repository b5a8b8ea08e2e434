#include <atomic>
#include <charconv>

#include <httplib.h>

#include "deckforge/docgen.hpp"
#include "deckforge/error.hpp"
#include "deckforge/json_io.hpp"
#include "deckforge/service.hpp"

namespace deckforge::service {

namespace {

constexpr const char* kJson = "application/json";

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound:
    case ErrorCode::kTargetNotFound:
    case ErrorCode::kNoSuchSkill:
      return 404;
    case ErrorCode::kIo:
      return 500;
    default:
      return 400;
  }
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  Json j;
  j["error"] = {{"code", code}, {"message", message}};
  res.status = status;
  res.set_content(j.dump(), kJson);
}

void send_json(httplib::Response& res, const Json& j, int status = 200) {
  res.status = status;
  res.set_content(j.dump(), kJson);
}

// Runs a handler and maps thrown errors onto the JSON error envelope.
template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      send_error(res, status_for(e.code()), to_string(e.code()), e.what());
    } catch (const Json::exception& e) {
      send_error(res, 400, to_string(ErrorCode::kParse), e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "INTERNAL", e.what());
    }
  };
}

bool truthy(const std::string& v) { return v == "1" || v == "true" || v == "yes"; }

long event_id(const std::string& text) {
  long v = 0;
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || p != text.data() + text.size() || v < 0) {
    throw Error(ErrorCode::kValidation, "event id must be a non-negative integer");
  }
  return v;
}

}  // namespace

struct HttpServer::Impl {
  Workspace& ws;
  httplib::Server server;
  std::atomic<bool> stopping{false};

  explicit Impl(Workspace& w) : ws(w) { routes(); }

  void routes() {
    server.Post("/sessions", guarded([this](const httplib::Request&, httplib::Response& res) {
      Json j;
      j["session_id"] = ws.create_session();
      send_json(res, j, 201);
    }));

    server.Post("/sessions/:id/messages", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.path_params.at("id");
      if (!ws.has_session(id)) throw Error(ErrorCode::kNotFound, "no session '" + id + "'");
      const Json body = parse_json_text(req.body);
      if (!body.is_object() || !body.contains("text") || !body["text"].is_string()) {
        throw Error(ErrorCode::kValidation, "body must be {\"text\": string}");
      }
      send_json(res, to_json(ws.handle_message(id, body["text"].get<std::string>())));
    }));

    server.Get("/sessions/:id/events", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.path_params.at("id");
      if (!ws.has_session(id)) throw Error(ErrorCode::kNotFound, "no session '" + id + "'");
      long after = 0;
      if (req.has_header("Last-Event-ID")) after = event_id(req.get_header_value("Last-Event-ID"));
      if (req.has_param("after")) after = event_id(req.get_param_value("after"));
      auto last = std::make_shared<long>(after);
      res.set_header("Cache-Control", "no-cache");
      res.set_chunked_content_provider("text/event-stream", [this, id, last](size_t, httplib::DataSink& sink) {
        if (stopping) return false;
        const auto events = ws.wait_events(id, *last, std::chrono::milliseconds(500));
        if (stopping || !sink.is_writable()) return false;
        std::string chunk;
        for (const auto& e : events) {
          Json data;
          data["deck"] = e.deck;
          data["deck_version"] = e.deck_version;
          chunk += "id: " + std::to_string(e.seq) + "\nevent: deck_version\ndata: " + data.dump() + "\n\n";
          *last = e.seq;
        }
        if (chunk.empty()) chunk = ": keep-alive\n\n";
        return sink.write(chunk.data(), chunk.size());
      });
    }));

    server.Get("/decks", guarded([this](const httplib::Request&, httplib::Response& res) {
      Json list = Json::array();
      for (const auto& name : ws.deck_names()) list.push_back({{"name", name}, {"deck_version", ws.deck_version(name)}});
      send_json(res, Json{{"decks", list}});
    }));

    server.Get("/decks/:name", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string name = req.path_params.at("name");
      const auto deck = ws.deck(name);
      if (!deck) throw Error(ErrorCode::kNotFound, "no deck '" + name + "'");
      res.set_header("X-Deck-Version", std::to_string(ws.deck_version(name)));
      res.set_content(serialize_deck(*deck), kJson);
    }));

    server.Get("/decks/:name/html", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string name = req.path_params.at("name");
      const auto deck = ws.deck(name);
      if (!deck) throw Error(ErrorCode::kNotFound, "no deck '" + name + "'");
      docgen::RenderOptions opts;
      if (req.has_param("theme")) {
        const auto theme = req.get_param_value("theme");
        if (theme == "dark") {
          opts.theme = docgen::Theme::kDark;
        } else if (theme != "light") {
          throw Error(ErrorCode::kValidation, "theme must be light or dark");
        }
      }
      if (req.has_param("embed_data")) opts.embed_data = truthy(req.get_param_value("embed_data"));
      res.set_header("X-Deck-Version", std::to_string(ws.deck_version(name)));
      res.set_content(docgen::render_html(*deck, opts), "text/html; charset=utf-8");
    }));

    server.Get("/kb", guarded([this](const httplib::Request&, httplib::Response& res) {
      res.set_content(ws.kb_json(), kJson);
    }));

    server.Put("/kb", guarded([this](const httplib::Request& req, httplib::Response& res) {
      ws.put_kb(req.body);
      res.set_content(ws.kb_json(), kJson);
    }));

    server.Post("/experiments", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto request = sim::simulation_request_from_json(req.body.empty() ? "{}" : req.body);
      send_json(res, ws.run_experiment(request));
    }));

    server.Get("/skills", guarded([this](const httplib::Request&, httplib::Response& res) {
      res.set_content(ws.skills_json(), kJson);
    }));

    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (!res.body.empty()) return;
      send_error(res, res.status, res.status == 404 ? "NOT_FOUND" : "HTTP_ERROR", "no such route");
    });
  }
};

HttpServer::HttpServer(Workspace& workspace) : impl_(std::make_unique<Impl>(workspace)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  if (!impl_->server.bind_to_port(host, port)) throw Error(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
  return port;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  impl_->stopping = true;
  if (impl_->server.is_running()) impl_->server.stop();
}

}  // namespace deckforge::service
