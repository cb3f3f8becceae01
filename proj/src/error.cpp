#include "raman/error.hpp"

namespace raman {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::InvalidState: return "invalid-state";
    case ErrorKind::DegenerateResonance: return "degenerate-resonance";
    case ErrorKind::InsufficientDuration: return "insufficient-duration";
    case ErrorKind::ExtractionFailed: return "extraction-failed";
    case ErrorKind::IterationFailed: return "iteration-failed";
    case ErrorKind::LabelingAmbiguity: return "labeling-ambiguity";
    case ErrorKind::FitFailed: return "fit-failed";
    case ErrorKind::UnderconstrainedFit: return "underconstrained-fit";
    case ErrorKind::InconsistentMeasurement: return "inconsistent-measurement";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

}  // namespace raman
