#pragma once

#include <stdexcept>
#include <string>

namespace nlg {

enum class ErrorKind {
  NotPrime,
  DivisionByZero,
  FieldMismatch,
  DimensionMismatch,
  InvalidInput,
  TooLarge,
  Unsolved,
  InvariantViolation,
};

/// Single exception type for the library; `kind()` lets callers (the CLI in
/// particular) map failures onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::NotPrime: return "NotPrime";
    case ErrorKind::DivisionByZero: return "DivisionByZero";
    case ErrorKind::FieldMismatch: return "FieldMismatch";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::Unsolved: return "Unsolved";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

[[noreturn]] inline void fail(ErrorKind k, const std::string& what) { throw Error(k, what); }

inline void require(bool cond, ErrorKind k, const std::string& what) {
  if (!cond) fail(k, what);
}

}  // namespace nlg
