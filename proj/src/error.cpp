#include "stainnorm/error.hpp"

namespace stainnorm {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyImage: return "EmptyImage";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingularStainMatrix: return "SingularStainMatrix";
    case ErrorCode::InvalidStainMatrix: return "InvalidStainMatrix";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::InsufficientTissue: return "InsufficientTissue";
    case ErrorCode::DegenerateCloud: return "DegenerateCloud";
    case ErrorCode::DegenerateStains: return "DegenerateStains";
    case ErrorCode::DegenerateBasis: return "DegenerateBasis";
    case ErrorCode::NonPositiveConcentration: return "NonPositiveConcentration";
    case ErrorCode::EmptyAngles: return "EmptyAngles";
    case ErrorCode::EmptyReferenceSet: return "EmptyReferenceSet";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::DecodeError: return "DecodeError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::InvalidProfile: return "InvalidProfile";
  }
  return "Unknown";
}

StainError::StainError(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code) {}

StainError StainError::with_index(std::size_t index) const {
  StainError copy = *this;
  copy.index_ = index;
  return copy;
}

}  // namespace stainnorm
