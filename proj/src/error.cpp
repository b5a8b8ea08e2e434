#include "deckforge/error.hpp"

namespace deckforge {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse: return "PARSE_ERROR";
    case ErrorCode::kValidation: return "VALIDATION_ERROR";
    case ErrorCode::kFormat: return "FORMAT_ERROR";
    case ErrorCode::kOrdering: return "ORDERING_ERROR";
    case ErrorCode::kEmptyCommand: return "EMPTY_COMMAND";
    case ErrorCode::kOntology: return "ONTOLOGY_ERROR";
    case ErrorCode::kAlreadyMapped: return "ALREADY_MAPPED";
    case ErrorCode::kNotFound: return "NOT_FOUND";
    case ErrorCode::kVariantMismatch: return "VARIANT_MISMATCH";
    case ErrorCode::kMigration: return "MIGRATION_ERROR";
    case ErrorCode::kAmbiguity: return "AMBIGUITY";
    case ErrorCode::kInvalidChoice: return "INVALID_CHOICE";
    case ErrorCode::kNoPending: return "NO_PENDING_CLARIFICATION";
    case ErrorCode::kNoSuchSkill: return "NO_SUCH_SKILL";
    case ErrorCode::kData: return "DATA_ERROR";
    case ErrorCode::kTargetNotFound: return "TARGET_NOT_FOUND";
    case ErrorCode::kMacroStep: return "MACRO_STEP_FAILED";
    case ErrorCode::kNameTaken: return "NAME_TAKEN";
    case ErrorCode::kNothingToSave: return "NOTHING_TO_SAVE";
    case ErrorCode::kWindow: return "WINDOW_ERROR";
    case ErrorCode::kInsufficientData: return "INSUFFICIENT_DATA";
    case ErrorCode::kUnboundSlot: return "UNBOUND_SLOT";
    case ErrorCode::kScoring: return "SCORING_ERROR";
    case ErrorCode::kDegenerateData: return "DEGENERATE_DATA";
    case ErrorCode::kConfig: return "CONFIG_ERROR";
    case ErrorCode::kDimension: return "DIMENSION_ERROR";
    case ErrorCode::kIo: return "IO_ERROR";
  }
  return "UNKNOWN";
}

}  // namespace deckforge
