#include "core/errors.hpp"

namespace scaa {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::kParse: return "ParseError";
    case Errc::kSchema: return "SchemaError";
    case Errc::kIo: return "IoError";
    case Errc::kUnknownNode: return "UnknownNode";
    case Errc::kUnknownLabel: return "UnknownLabel";
    case Errc::kEmptyGoldenSet: return "EmptyGoldenSet";
    case Errc::kAnnotatorFailure: return "AnnotatorFailure";
    case Errc::kInvalidRule: return "InvalidRule";
    case Errc::kMissingAnnotation: return "MissingAnnotation";
    case Errc::kMissingEmbedding: return "MissingEmbedding";
    case Errc::kDimensionMismatch: return "DimensionMismatch";
    case Errc::kZeroVector: return "ZeroVector";
    case Errc::kConfig: return "ConfigError";
    case Errc::kShapeMismatch: return "ShapeMismatch";
    case Errc::kVersionMismatch: return "VersionMismatch";
    case Errc::kCorruptFile: return "CorruptFile";
    case Errc::kEmptyGraph: return "EmptyGraph";
    case Errc::kNonConvergence: return "NonConvergence";
    case Errc::kEmptyTarget: return "EmptyTarget";
    case Errc::kSingleClassInput: return "SingleClassInput";
    case Errc::kLengthMismatch: return "LengthMismatch";
    case Errc::kInvalidArgument: return "InvalidArgument";
    case Errc::kInternal: return "InternalError";
  }
  return "UnknownError";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message),
      code_(code),
      detail_(message) {}

void raise(Errc code, const std::string& message) { throw Error(code, message); }

}  // namespace scaa
