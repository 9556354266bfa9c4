#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hullmert {

enum class ErrorCode {
  kInvalidGeometry,
  kNoHypotheses,
  kInvalidForest,
  kCyclicForest,
  kDimensionMismatch,
  kProvenanceMismatch,
  kEnumerationOverflow,
  kCapExceeded,
  kParse,
  kUsage,
  kInvariantViolation,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidGeometry: return "invalid-geometry";
    case ErrorCode::kNoHypotheses: return "no-hypotheses";
    case ErrorCode::kInvalidForest: return "invalid-forest";
    case ErrorCode::kCyclicForest: return "cyclic-forest";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kProvenanceMismatch: return "provenance-mismatch";
    case ErrorCode::kEnumerationOverflow: return "enumeration-overflow";
    case ErrorCode::kCapExceeded: return "cap-exceeded";
    case ErrorCode::kParse: return "parse-error";
    case ErrorCode::kUsage: return "usage";
    case ErrorCode::kInvariantViolation: return "invariant-violation";
  }
  return "unknown";
}

/// The single exception type thrown by the library. The code says which
/// contract was broken; the message carries the details.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Process exit status for an error: 1 usage, 2 data, 3 internal invariant.
constexpr int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUsage: return 1;
    case ErrorCode::kInvariantViolation: return 3;
    default: return 2;
  }
}

}  // namespace hullmert
