#include "errors.hpp"

namespace ionjc {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::TruncationTooSmall: return "TruncationTooSmall";
    case ErrorKind::DegenerateBlock: return "DegenerateBlock";
    case ErrorKind::StepFailure: return "StepFailure";
    case ErrorKind::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::UnknownPreset: return "UnknownPreset";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

bool is_config_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParseError:
    case ErrorKind::ValidationError:
    case ErrorKind::UnknownPreset:
    case ErrorKind::InvalidArgument:
    case ErrorKind::Io:
      return true;
    default:
      return false;
  }
}

}  // namespace ionjc
