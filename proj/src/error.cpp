#include "semlock/error.hpp"

namespace semlock {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidIcon: return "InvalidIcon";
    case ErrorCode::kInvalidMove: return "InvalidMove";
    case ErrorCode::kInvalidSide: return "InvalidSide";
    case ErrorCode::kInvalidGrid: return "InvalidGrid";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kUnknownIcon: return "UnknownIcon";
    case ErrorCode::kOverflow: return "Overflow";
    case ErrorCode::kSpaceTooLarge: return "SpaceTooLarge";
    case ErrorCode::kDragInProgress: return "DragInProgress";
    case ErrorCode::kNoActiveDrag: return "NoActiveDrag";
    case ErrorCode::kEmptyAttempt: return "EmptyAttempt";
    case ErrorCode::kPolicyViolation: return "PolicyViolation";
    case ErrorCode::kDuplicateUser: return "DuplicateUser";
    case ErrorCode::kUnknownUser: return "UnknownUser";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kInvalidProfile: return "InvalidProfile";
    case ErrorCode::kSubsetTooLarge: return "SubsetTooLarge";
    case ErrorCode::kKTooLarge: return "KTooLarge";
    case ErrorCode::kDegenerateInput: return "DegenerateInput";
    case ErrorCode::kUnknownToken: return "UnknownToken";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kAlphaUnreachable: return "AlphaUnreachable";
    case ErrorCode::kEmptyInput: return "EmptyInput";
  }
  return "Unknown";
}

}  // namespace semlock
