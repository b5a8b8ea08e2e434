// deckforge command-line entry point.
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "deckforge/docgen.hpp"
#include "deckforge/error.hpp"
#include "deckforge/parser.hpp"
#include "deckforge/service.hpp"
#include "deckforge/sim.hpp"

namespace fs = std::filesystem;
using namespace deckforge;

namespace {

service::HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + p.string());
  out << text;
}

std::string default_workspace() {
  const char* env = std::getenv("DECKFORGE_WORKSPACE");
  return env ? env : "";
}

void print_turn(const service::ChatTurn& t) {
  std::cout << "bot> " << t.reply_text << "\n";
  if (t.clarification && !t.clarification->candidates.empty()) {
    std::cout << "     options:";
    for (const auto& c : t.clarification->candidates) std::cout << " " << c;
    std::cout << "\n";
  }
  for (const auto& w : t.warnings) std::cout << "     warning: " << w << "\n";
  if (t.deck_changed) std::cout << "     [" << t.deck << " v" << t.deck_version << "]\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deckforge: conversational slide-deck generation"};
  app.require_subcommand(1);

  std::string workspace = default_workspace();
  const auto add_workspace = [&](CLI::App* sub) {
    auto* opt = sub->add_option("--workspace,-w", workspace, "Workspace directory (default $DECKFORGE_WORKSPACE)");
    if (workspace.empty()) opt->required();
  };

  auto* init = app.add_subcommand("init", "Create a workspace seeded with demo datasets");
  add_workspace(init);
  std::uint64_t init_seed = 2021;
  init->add_option("--seed", init_seed, "Seed for the synthetic price series");

  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  add_workspace(serve);
  int port = 8080;
  std::string host = "127.0.0.1";
  serve->add_option("--port,-p", port, "Port (0 picks a free one)");
  serve->add_option("--host", host, "Bind address");

  auto* repl = app.add_subcommand("repl", "Chat with the workspace in the terminal");
  add_workspace(repl);

  auto* train = app.add_subcommand("train-parser", "Train the command tagger");
  std::string corpus_path, model_out;
  std::size_t synthetic = 0;
  parser::TrainOptions topts;
  train->add_option("--corpus", corpus_path, "Tagged corpus file (token/LABEL per token, one command per line)");
  train->add_option("--synthetic", synthetic, "Train on N generated commands instead of a corpus file");
  train->add_option("--out", model_out, "Model JSON output")->required();
  train->add_option("--epochs", topts.epochs);
  train->add_option("--l2", topts.l2_lambda);
  train->add_option("--seed", topts.seed);

  auto* simulate = app.add_subcommand("simulate", "Run a simulated-user experiment");
  std::string config_path, sim_out;
  simulate->add_option("--config", config_path, "Experiment JSON; omitted fields take defaults");
  simulate->add_option("--out", sim_out, "Output directory for curves.csv and grid.csv")->required();

  auto* render = app.add_subcommand("render", "Render a stored deck as HTML");
  add_workspace(render);
  std::string deck_name, html_out, theme = "light";
  bool embed = false;
  render->add_option("--deck", deck_name, "Deck name")->required();
  render->add_option("--html", html_out, "Output HTML file")->required();
  render->add_option("--theme", theme)->check(CLI::IsMember({"light", "dark"}));
  render->add_flag("--embed-data", embed, "Embed chart data as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*init) {
      service::init_demo_workspace(workspace, init_seed);
      service::Workspace ws(workspace);
      std::cout << "workspace ready at " << ws.root().string() << "\n";
    } else if (*serve) {
      service::Workspace ws(workspace);
      service::HttpServer server(ws);
      const int bound = server.bind(host, port);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "listening on http://" << host << ":" << bound << std::endl;
      server.listen();
      ws.shutdown();
      g_server = nullptr;
    } else if (*repl) {
      service::Workspace ws(workspace);
      const std::string id = ws.create_session();
      std::cout << "type a command, or 'quit'\n";
      std::string line;
      while (std::cout << "you> " << std::flush && std::getline(std::cin, line)) {
        if (line == "quit" || line == "exit") break;
        if (line.empty()) continue;
        print_turn(ws.handle_message(id, line));
      }
    } else if (*train) {
      std::vector<parser::TaggedCommand> corpus;
      if (!corpus_path.empty()) {
        corpus = parser::parse_corpus(slurp(corpus_path));
      } else if (synthetic > 0) {
        corpus = parser::synthetic_corpus(topts.seed, synthetic);
      } else {
        throw Error(ErrorCode::kConfig, "give --corpus or --synthetic");
      }
      parser::TrainReport report;
      const auto model = parser::train_tagger(corpus, topts, &report);
      spit(model_out, model.to_json());
      std::cout << "trained on " << corpus.size() << " commands, final objective "
                << report.objective_trajectory.back() << "\n";
    } else if (*simulate) {
      const auto request = sim::simulation_request_from_json(config_path.empty() ? "{}" : slurp(config_path));
      const auto result = sim::run_experiment(request.config);
      const fs::path out(sim_out);
      spit(out / "curves.csv", sim::curves_csv(result));
      std::cout << "wrote " << (out / "curves.csv").string() << "\n";
      if (request.has_grid()) {
        const auto grid = sim::run_grid(request.config, request.alphas, request.vocab_sizes, request.pdfs);
        spit(out / "grid.csv", sim::grid_csv(grid));
        std::cout << "wrote " << (out / "grid.csv").string() << "\n";
      }
    } else if (*render) {
      service::Workspace ws(workspace);
      const auto deck = ws.deck(deck_name);
      if (!deck) throw Error(ErrorCode::kNotFound, "no deck '" + deck_name + "'");
      docgen::RenderOptions opts;
      opts.theme = theme == "dark" ? docgen::Theme::kDark : docgen::Theme::kLight;
      opts.embed_data = embed;
      spit(html_out, docgen::render_html(*deck, opts));
      std::cout << "wrote " << html_out << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
