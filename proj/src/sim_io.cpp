#include "deckforge/error.hpp"
#include "deckforge/json_io.hpp"
#include "deckforge/sim.hpp"

namespace deckforge::sim {

SimulationRequest simulation_request_from_json(std::string_view text) {
  const Json j = parse_json_text(text);
  if (!j.is_object()) throw Error(ErrorCode::kConfig, "simulation config must be a JSON object");
  SimulationRequest req;
  auto& c = req.config;
  try {
    c.alpha = j.value("alpha", c.alpha);
    c.vocab_size = j.value("N", c.vocab_size);
    if (j.contains("pdf")) c.pdf = pdf_from_string(j.at("pdf").get<std::string>());
    c.repetitions = j.value("E", c.repetitions);
    c.slides = j.value("S", c.slides);
    if (j.contains("evaluation_slides") && !j.at("evaluation_slides").is_null()) {
      c.evaluation_slides = j.at("evaluation_slides").get<int>();
    }
    c.episode_size = j.value("episode_size", c.episode_size);
    c.seed = j.value("seed", c.seed);
    c.smoothing_window = j.value("smoothing_window", c.smoothing_window);
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      req.alphas = g.at("alphas").get<std::vector<double>>();
      req.vocab_sizes = g.at("Ns").get<std::vector<std::size_t>>();
      for (const auto& p : g.at("pdfs")) req.pdfs.push_back(pdf_from_string(p.get<std::string>()));
      if (!req.has_grid()) throw Error(ErrorCode::kConfig, "grid needs non-empty alphas, Ns and pdfs");
      for (double a : req.alphas) {
        ExperimentConfig probe = c;
        probe.alpha = a;
        probe.validate();
      }
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("simulation config: ") + e.what());
  }
  c.validate();
  return req;
}

std::string to_json_text(const ExperimentConfig& c) {
  Json j;
  j["alpha"] = c.alpha;
  j["N"] = c.vocab_size;
  j["pdf"] = std::string(to_string(c.pdf));
  j["E"] = c.repetitions;
  j["S"] = c.slides;
  j["evaluation_slides"] = c.eval_slides();
  j["episode_size"] = c.episode_size;
  j["seed"] = c.seed;
  j["smoothing_window"] = c.smoothing_window;
  return j.dump(2);
}

}  // namespace deckforge::sim
