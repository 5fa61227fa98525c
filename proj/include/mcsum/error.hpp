#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mcsum {

enum class ErrorKind {
  SingularMatrix,
  DimensionMismatch,
  NotStochastic,
  NotIrreducible,
  NoConvergence,
  Degenerate,
  GenerationFailed,
  InvalidArgument,
  ParseError,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::SingularMatrix: return "SingularMatrix";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotStochastic: return "NotStochastic";
    case ErrorKind::NotIrreducible: return "NotIrreducible";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::Degenerate: return "Degenerate";
    case ErrorKind::GenerationFailed: return "GenerationFailed";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

// Every failure in the library is an mcsum::Error. what() is prefixed with the
// kind name, e.g. "NotIrreducible: ...".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mcsum
