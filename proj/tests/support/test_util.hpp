#pragma once

#include <optional>
#include <utility>

#include "hetjsq/error.hpp"
#include "hetjsq/model.hpp"

namespace hetjsq::test {

/// Kind of the hetjsq::Error thrown by `f`, or nullopt if it returns.
template <typename F>
std::optional<ErrorKind> error_kind(F&& f) {
  try {
    std::forward<F>(f)();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

inline SystemConfig make_config(std::initializer_list<ServerClass> classes,
                                double lambda, double mu = 1.0) {
  SystemConfig raw;
  raw.classes = classes;
  raw.arrival_rate = lambda;
  raw.mu = mu;
  return validate_config(raw);
}

}  // namespace hetjsq::test
