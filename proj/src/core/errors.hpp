#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scaa {

// Error categories surfaced by the library. The numeric values are part of the
// C ABI (scaa_status) and must not be reordered.
enum class Errc {
  kParse = 1,
  kSchema,
  kIo,
  kUnknownNode,
  kUnknownLabel,
  kEmptyGoldenSet,
  kAnnotatorFailure,
  kInvalidRule,
  kMissingAnnotation,
  kMissingEmbedding,
  kDimensionMismatch,
  kZeroVector,
  kConfig,
  kShapeMismatch,
  kVersionMismatch,
  kCorruptFile,
  kEmptyGraph,
  kNonConvergence,
  kEmptyTarget,
  kSingleClassInput,
  kLengthMismatch,
  kInvalidArgument,
  kInternal,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }
  // The message without the category prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

[[noreturn]] void raise(Errc code, const std::string& message);

}  // namespace scaa
