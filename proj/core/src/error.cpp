#include "hetjsq/error.hpp"

namespace hetjsq {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::EmptyClassList: return "EmptyClassList";
    case ErrorKind::NonPositiveCapacity: return "NonPositiveCapacity";
    case ErrorKind::FractionsDontSumToOne: return "FractionsDontSumToOne";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::TooManyClasses: return "TooManyClasses";
    case ErrorKind::NonIntegerClassSizes: return "NonIntegerClassSizes";
    case ErrorKind::NTooSmall: return "NTooSmall";
    case ErrorKind::Unstable: return "Unstable";
    case ErrorKind::UnstableRegime: return "UnstableRegime";
    case ErrorKind::ShootingBracketEmpty: return "ShootingBracketEmpty";
    case ErrorKind::Unreachable: return "Unreachable";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NoSamples: return "NoSamples";
  }
  return "Unknown";
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Unstable:
    case ErrorKind::UnstableRegime:
    case ErrorKind::ShootingBracketEmpty:
    case ErrorKind::Unreachable:
      return 3;
    case ErrorKind::NoConvergence:
    case ErrorKind::NoSamples:
      return 4;
    default:
      return 2;
  }
}

void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, std::string(to_string(kind)) + ": " + message);
}

}  // namespace hetjsq
