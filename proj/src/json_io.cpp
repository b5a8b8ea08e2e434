#include "deckforge/json_io.hpp"

#include "deckforge/error.hpp"

namespace deckforge {

Json parse_json_text(std::string_view text) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    throw Error(ErrorCode::kParse, "empty JSON document");
  }
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kParse, e.what());
  }
}

}  // namespace deckforge
