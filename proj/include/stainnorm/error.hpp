#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace stainnorm {

enum class ErrorCode {
  EmptyImage,
  DimensionMismatch,
  SingularStainMatrix,
  InvalidStainMatrix,
  InvalidParams,
  InsufficientTissue,
  DegenerateCloud,
  DegenerateStains,
  DegenerateBasis,
  NonPositiveConcentration,
  EmptyAngles,
  EmptyReferenceSet,
  InvalidSpec,
  FileNotFound,
  UnsupportedFormat,
  DecodeError,
  IoError,
  SchemaVersionMismatch,
  InvalidProfile,
};

std::string_view error_name(ErrorCode code) noexcept;

// Every failure in the library surfaces as a StainError. Errors raised while
// processing one member of a set (reference image, batch job) carry its index.
class StainError : public std::runtime_error {
 public:
  StainError(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> index() const noexcept { return index_; }

  // Copy of this error tagged with the position of the offending item.
  StainError with_index(std::size_t index) const;

 private:
  ErrorCode code_;
  std::optional<std::size_t> index_;
};

}  // namespace stainnorm
