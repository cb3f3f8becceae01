#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace raman {

enum class ErrorKind {
  InvalidParameter,
  InvalidState,
  DegenerateResonance,
  InsufficientDuration,
  ExtractionFailed,
  IterationFailed,
  LabelingAmbiguity,
  FitFailed,
  UnderconstrainedFit,
  InconsistentMeasurement,
  Config,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace raman
