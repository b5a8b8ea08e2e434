#pragma once

#include <map>
#include <string>

#include "deckforge/json_io.hpp"

namespace deckforge {

/// A fully resolved command: which skill to run, on what data, into which deck.
struct ResolvedIntent {
  std::string action;        // sub-concept under "action"
  std::string object;        // sub-concept under "object" (atomic skill or macro)
  std::string data_ref;      // dataset name or ticker
  std::string presentation;  // deck name
  std::map<std::string, std::string> extra_params;

  bool operator==(const ResolvedIntent&) const = default;
};

Json to_json(const ResolvedIntent& intent);
/// Throws Error(kValidation) on a missing or mistyped field.
ResolvedIntent intent_from_json(const Json& j);

}  // namespace deckforge
