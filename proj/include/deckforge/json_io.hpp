#pragma once

// JSON conversions for the document model. Kept out of deck.hpp so only the
// translation units that actually emit or read JSON pay for nlohmann/json.

#include <json.hpp>
#include <string_view>

#include "deckforge/deck.hpp"

namespace deckforge {

using Json = nlohmann::ordered_json;

/// Throws Error(kParse) on malformed or empty input.
Json parse_json_text(std::string_view text);

Json to_json(const DeckParameters& p);
DeckParameters parameters_from_json(const Json& j);

Json to_json(const ChartSpec& c);
Json to_json(const SlideObject& object);
SlideObject slide_object_from_json(const Json& j);

Json to_json(const Slide& s);
Slide slide_from_json(const Json& j);

Json to_json(const Deck& d);
Deck deck_from_json(const Json& j);

}  // namespace deckforge
