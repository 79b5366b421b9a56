#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace semlock {

enum class ErrorCode {
  kInvalidIcon,
  kInvalidMove,
  kInvalidSide,
  kInvalidGrid,
  kInvalidArgument,
  kParseError,
  kUnknownIcon,
  kOverflow,
  kSpaceTooLarge,
  kDragInProgress,
  kNoActiveDrag,
  kEmptyAttempt,
  kPolicyViolation,
  kDuplicateUser,
  kUnknownUser,
  kIoFailure,
  kMalformedLine,
  kInvalidProfile,
  kSubsetTooLarge,
  kKTooLarge,
  kDegenerateInput,
  kUnknownToken,
  kEmptyCorpus,
  kAlphaUnreachable,
  kEmptyInput,
};

std::string_view error_code_name(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI, the HTTP facade) can map it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Parse failure with the byte offset into the offending input.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, const std::string& detail)
      : Error(ErrorCode::kParseError,
              detail + " at byte " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace semlock
