#pragma once

#include <stdexcept>
#include <string>

namespace hmmdual {

// Shared error taxonomy. Input-side problems (parsing, validation, shapes)
// map to CLI exit code 2, numerical failures to exit code 3.
enum class ErrorCode {
  ShapeMismatch,
  GeneratorViolation,
  NonFinite,
  ParseError,
  ValidationError,
  ConfigError,
  MassCollapse,
  InconclusiveRank,
  NotInRange,
  AbsoluteContinuityViolation,
  SupportViolation,
};

const char* to_string(ErrorCode code);

// True for errors caused by bad user input rather than a numerical failure.
bool is_input_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace hmmdual
