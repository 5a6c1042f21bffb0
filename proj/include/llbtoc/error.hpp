#pragma once

#include <stdexcept>
#include <string>

namespace llbtoc {

/// Error classes raised by the library. The CLI maps each class to one exit code.
enum class ErrorKind {
  invalid_argument,
  grid_mismatch,
  out_of_range,
  non_convergence,
  diverged,
  trivial_case,
  target_unreachable,
  transversality_violation,
  initial_control_misses_tube,
  line_search_failure,
  parse,
  io,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace llbtoc
