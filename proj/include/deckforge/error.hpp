#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace deckforge {

/// Machine-readable failure categories. The service layer reports these
/// verbatim as `error_code` next to the human-readable message.
enum class ErrorCode {
  kParse,
  kValidation,
  kFormat,
  kOrdering,
  kEmptyCommand,
  kOntology,
  kAlreadyMapped,
  kNotFound,
  kVariantMismatch,
  kMigration,
  kAmbiguity,
  kInvalidChoice,
  kNoPending,
  kNoSuchSkill,
  kData,
  kTargetNotFound,
  kMacroStep,
  kNameTaken,
  kNothingToSave,
  kWindow,
  kInsufficientData,
  kUnboundSlot,
  kScoring,
  kDegenerateData,
  kConfig,
  kDimension,
  kIo,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace deckforge
