#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mfga {

enum class ErrorKind {
  contract_violation,
  numeric,
  precondition,
  configuration,
  extinction,
  scheme,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

/// Survival mass fell below the floor; the conditional flow is undefined
/// from `first_index` on.
class ExtinctionError : public Error {
 public:
  ExtinctionError(std::size_t first_index, double mass)
      : Error(ErrorKind::extinction,
              "survival mass " + std::to_string(mass) +
                  " below floor at grid index " + std::to_string(first_index)),
        first_index_(first_index),
        mass_(mass) {}
  std::size_t first_index() const { return first_index_; }
  double mass() const { return mass_; }

 private:
  std::size_t first_index_;
  double mass_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace mfga
