#pragma once

#include <stdexcept>
#include <string>

namespace pcsi {

enum class ErrorCode {
  kZeroInverse,
  kBadParams,
  kDegenerateField,
  kMalformedQuery,
  kDimensionMismatch,
  kDecodeFailure,
  kInternal,
  kTooLarge,
  kFrameTooShort,
  kBadTag,
  kSymbolOutOfRange,
  kIo,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kZeroInverse: return "ZeroInverse";
    case ErrorCode::kBadParams: return "BadParams";
    case ErrorCode::kDegenerateField: return "DegenerateField";
    case ErrorCode::kMalformedQuery: return "MalformedQuery";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kDecodeFailure: return "DecodeFailure";
    case ErrorCode::kInternal: return "InternalError";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kFrameTooShort: return "FrameTooShort";
    case ErrorCode::kBadTag: return "BadTag";
    case ErrorCode::kSymbolOutOfRange: return "SymbolOutOfRange";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

// Every failure raised by the library carries one of the codes above so
// callers (and the wire server) can map it to a reason string.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

#define PCSI_CHECK(cond, code, msg)              \
  do {                                           \
    if (!(cond)) throw ::pcsi::Error((code), (msg)); \
  } while (0)

}  // namespace pcsi
