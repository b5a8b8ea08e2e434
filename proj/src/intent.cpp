#include "deckforge/intent.hpp"

#include "deckforge/error.hpp"

namespace deckforge {

Json to_json(const ResolvedIntent& intent) {
  Json j;
  j["action"] = intent.action;
  j["object"] = intent.object;
  j["data_ref"] = intent.data_ref;
  j["presentation"] = intent.presentation;
  j["extra_params"] = Json::object();
  for (const auto& [k, v] : intent.extra_params) j["extra_params"][k] = v;
  return j;
}

ResolvedIntent intent_from_json(const Json& j) {
  try {
    ResolvedIntent intent;
    intent.action = j.at("action").get<std::string>();
    intent.object = j.at("object").get<std::string>();
    intent.data_ref = j.value("data_ref", std::string());
    intent.presentation = j.value("presentation", std::string());
    if (j.contains("extra_params")) {
      for (const auto& [k, v] : j.at("extra_params").items()) intent.extra_params[k] = v.get<std::string>();
    }
    return intent;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("intent: ") + e.what());
  }
}

}  // namespace deckforge
