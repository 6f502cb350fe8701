#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hetjsq {

enum class ErrorKind {
  // configuration
  EmptyClassList,
  NonPositiveCapacity,
  FractionsDontSumToOne,
  InvalidArgument,
  ParseError,
  ConfigError,
  // combinatorics
  TooManyClasses,
  NonIntegerClassSizes,
  NTooSmall,
  // stability
  Unstable,
  UnstableRegime,
  ShootingBracketEmpty,
  Unreachable,
  // numerics
  DomainError,
  NoConvergence,
  NoSamples,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Exit status used by the command-line front end for an error of this kind:
/// 2 for configuration problems, 3 for instability, 4 for numerical failures.
int exit_code(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace hetjsq
